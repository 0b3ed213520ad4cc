"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with numba and a batched
numpy version. ``USE_NUMBA`` in :mod:`monogamy_lab._accel` picks which one the
public dispatchers call; both implement the same algorithm with the same
iteration order, so results agree to rounding.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
PSD_CLAMP = 1e-12
_TINY = 1e-300

# sigma_y (x) sigma_y is anti-diagonal with these signs
_YY_SIGNS = np.array([-1.0, 1.0, 1.0, -1.0])

KIND_LINEAR = 0
KIND_THREE_TANGLE = 1


# ---------------------------------------------------------------------------
# Cyclic Jacobi for complex Hermitian matrices
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _jacobi_nb(a_in, want_vectors, tol, max_sweeps):
    n = a_in.shape[0]
    a = a_in.copy()
    v = np.eye(n, dtype=np.complex128)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += a[i, j].real ** 2 + a[i, j].imag ** 2
    fro = math.sqrt(fro)
    converged = False
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j].real ** 2 + a[i, j].imag ** 2
        off = math.sqrt(2.0 * off)
        if off <= tol * fro:
            converged = True
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < _TINY:
                    continue
                ph = apq / mag
                phc = ph.conjugate()
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * phc * akq
                    a[k, q] = s * akp + c * phc * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * ph * aqk
                    a[q, k] = s * apk + c * ph * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if want_vectors:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * phc * vkq
                        v[k, q] = s * vkp + c * phc * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    order = np.argsort(-w, kind="mergesort")
    return w[order], v[:, order], converged


def _jacobi_np(a_in, want_vectors, tol, max_sweeps):
    """Batched numpy twin of ``_jacobi_nb``; ``a_in`` has shape (B, n, n)."""
    a = np.array(a_in, dtype=np.complex128, copy=True)
    bsz, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy()
    fro = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    iu = np.triu_indices(n, 1)
    converged = False
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(2.0 * np.sum(np.abs(a[:, iu[0], iu[1]]) ** 2, axis=1))
        if np.all(off <= tol * fro):
            converged = True
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                live = mag >= _TINY
                if not live.any():
                    continue
                safe = np.where(live, mag, 1.0)
                ph = np.where(live, apq / safe, 1.0)
                phc = ph.conj()
                theta = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe)
                with np.errstate(over="ignore"):
                    t = 1.0 / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(theta < 0.0, -t, t)
                t = np.where(live, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cc = c[:, None]
                akp = a[:, :, p].copy()
                akq = a[:, :, q]
                a[:, :, p] = cc * akp - (s * phc)[:, None] * akq
                a[:, :, q] = (s[:, None] * akp) + (c * phc)[:, None] * akq
                apk = a[:, p, :].copy()
                aqk = a[:, q, :]
                a[:, p, :] = cc * apk - (s * ph)[:, None] * aqk
                a[:, q, :] = (s[:, None] * apk) + (c * ph)[:, None] * aqk
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                a[:, p, p] = a[:, p, p].real
                a[:, q, q] = a[:, q, q].real
                if want_vectors:
                    vkp = v[:, :, p].copy()
                    vkq = v[:, :, q]
                    v[:, :, p] = cc * vkp - (s * phc)[:, None] * vkq
                    v[:, :, q] = (s[:, None] * vkp) + (c * phc)[:, None] * vkq
    w = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    order = np.argsort(-w, axis=1, kind="mergesort")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v, converged


@njit(cache=True, nogil=True)
def _jacobi_batch_nb(a, want_vectors, tol, max_sweeps):
    bsz, n, _ = a.shape
    w = np.empty((bsz, n))
    v = np.empty((bsz, n, n), dtype=np.complex128)
    ok = True
    for b in range(bsz):
        wb, vb, cb = _jacobi_nb(a[b], want_vectors, tol, max_sweeps)
        w[b] = wb
        v[b] = vb
        ok = ok and cb
    return w, v, ok


def jacobi_eigh(a, want_vectors=True, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decompose a stack (B, n, n) of Hermitian matrices.

    Returns ``(w, v, converged)`` with eigenvalues sorted decreasing along the
    last axis and eigenvectors in the matching columns.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if USE_NUMBA:
        return _jacobi_batch_nb(a, want_vectors, tol, max_sweeps)
    return _jacobi_np(a, want_vectors, tol, max_sweeps)


# ---------------------------------------------------------------------------
# Wootters concurrence
# ---------------------------------------------------------------------------
#
# The spectrum {lambda_i} of rho rho~ is taken as the squared singular values
# of tau = W^T (Y (x) Y) W, where rho = W W^dagger is the clamped eigen-ensemble.
# Singular values come from the Hermitian dilation [[0, tau], [tau^H, 0]],
# which keeps the near-zero ones at absolute accuracy instead of sqrt(eps).

@njit(cache=True, nogil=True)
def _wootters_margin_nb(rho, tol, max_sweeps, clamp):
    w, v, ok1 = _jacobi_nb(rho, True, tol, max_sweeps)
    wm = np.zeros((4, 4), dtype=np.complex128)
    for j in range(4):
        if w[j] > clamp:
            r = math.sqrt(w[j])
            for i in range(4):
                wm[i, j] = v[i, j] * r
    yw = np.empty((4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            yw[i, j] = _YY_SIGNS[i] * wm[3 - i, j]
    tau = wm.T @ yw
    dil = np.zeros((8, 8), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            dil[i, 4 + j] = tau[i, j]
            dil[4 + j, i] = tau[i, j].conjugate()
    sv, _, ok2 = _jacobi_nb(dil, False, tol, max_sweeps)
    margin = sv[0]
    for k in range(1, 4):
        margin -= max(sv[k], 0.0)
    return margin, ok1 and ok2


@njit(cache=True, nogil=True)
def _wootters_batch_nb(rhos, tol, max_sweeps, clamp):
    bsz = rhos.shape[0]
    out = np.empty(bsz)
    ok = True
    for b in range(bsz):
        m, good = _wootters_margin_nb(rhos[b], tol, max_sweeps, clamp)
        out[b] = m
        ok = ok and good
    return out, ok


def _wootters_batch_np(rhos, tol, max_sweeps, clamp):
    w, v, ok1 = _jacobi_np(rhos, True, tol, max_sweeps)
    scale = np.where(w > clamp, np.sqrt(np.where(w > clamp, w, 0.0)), 0.0)
    wm = v * scale[:, None, :]
    yw = _YY_SIGNS[None, :, None] * wm[:, ::-1, :]
    tau = np.swapaxes(wm, 1, 2) @ yw
    bsz = rhos.shape[0]
    dil = np.zeros((bsz, 8, 8), dtype=np.complex128)
    dil[:, :4, 4:] = tau
    dil[:, 4:, :4] = np.conj(np.swapaxes(tau, 1, 2))
    sv, _, ok2 = _jacobi_np(dil, False, tol, max_sweeps)
    margin = sv[:, 0] - np.sum(np.maximum(sv[:, 1:4], 0.0), axis=1)
    return margin, ok1 and ok2


def wootters_margin(rhos, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS, clamp=PSD_CLAMP):
    """sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4) for a stack of 4x4 states."""
    rhos = np.ascontiguousarray(rhos, dtype=np.complex128)
    if USE_NUMBA:
        return _wootters_batch_nb(rhos, tol, max_sweeps, clamp)
    return _wootters_batch_np(rhos, tol, max_sweeps, clamp)


# ---------------------------------------------------------------------------
# Pure-state tangles on unnormalized vectors: value = p * tangle(w / sqrt(p))
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _hyperdet_nb(w):
    a000, a001, a010, a011 = w[0], w[1], w[2], w[3]
    a100, a101, a110, a111 = w[4], w[5], w[6], w[7]
    d1 = (a000 * a000 * a111 * a111 + a001 * a001 * a110 * a110
          + a010 * a010 * a101 * a101 + a100 * a100 * a011 * a011)
    d2 = (a000 * a111 * a011 * a100 + a000 * a111 * a101 * a010
          + a000 * a111 * a110 * a001 + a011 * a100 * a101 * a010
          + a011 * a100 * a110 * a001 + a101 * a010 * a110 * a001)
    d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100
    return d1 - 2.0 * d2 + 4.0 * d3


def hyperdet_np(w):
    """Cayley hyperdeterminant over the last axis (length 8)."""
    a000, a001, a010, a011 = w[..., 0], w[..., 1], w[..., 2], w[..., 3]
    a100, a101, a110, a111 = w[..., 4], w[..., 5], w[..., 6], w[..., 7]
    d1 = (a000 ** 2 * a111 ** 2 + a001 ** 2 * a110 ** 2
          + a010 ** 2 * a101 ** 2 + a100 ** 2 * a011 ** 2)
    d2 = (a000 * a111 * a011 * a100 + a000 * a111 * a101 * a010
          + a000 * a111 * a110 * a001 + a011 * a100 * a101 * a010
          + a011 * a100 * a110 * a001 + a101 * a010 * a110 * a001)
    d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100
    return d1 - 2.0 * d2 + 4.0 * d3


@njit(cache=True, nogil=True)
def _weighted_tangle_nb(w, kind, perm, d_sub):
    p = 0.0
    for i in range(w.shape[0]):
        p += w[i].real ** 2 + w[i].imag ** 2
    if p < _TINY:
        return 0.0
    if kind == KIND_THREE_TANGLE:
        return 4.0 * abs(_hyperdet_nb(w)) / p
    d_rest = w.shape[0] // d_sub
    tr2 = 0.0
    for a in range(d_sub):
        for a2 in range(a, d_sub):
            acc = 0.0 + 0.0j
            for b in range(d_rest):
                acc += w[perm[a * d_rest + b]] * w[perm[a2 * d_rest + b]].conjugate()
            mag = acc.real ** 2 + acc.imag ** 2
            tr2 += mag if a == a2 else 2.0 * mag
    return 2.0 * (p - tr2 / p)


def weighted_tangle_np(w, kind, perm, d_sub):
    """Batched ``p * tangle(w/sqrt(p))`` over leading axes of ``w``."""
    p = np.sum(np.abs(w) ** 2, axis=-1)
    live = p >= _TINY
    safe = np.where(live, p, 1.0)
    if kind == KIND_THREE_TANGLE:
        val = 4.0 * np.abs(hyperdet_np(w)) / safe
    else:
        d_rest = w.shape[-1] // d_sub
        m = w[..., perm].reshape(w.shape[:-1] + (d_sub, d_rest))
        rho = m @ np.conj(np.swapaxes(m, -1, -2))
        tr2 = np.sum(np.abs(rho) ** 2, axis=(-1, -2))
        val = 2.0 * (p - tr2 / safe)
    return np.where(live, val, 0.0)


# ---------------------------------------------------------------------------
# Isometry tableaux: retraction, ensemble objective, compass search
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _retract_inplace_nb(q):
    m, r = q.shape
    for _ in range(2):
        for j in range(r):
            for i in range(j):
                proj = 0.0 + 0.0j
                for k in range(m):
                    proj += q[k, i].conjugate() * q[k, j]
                for k in range(m):
                    q[k, j] -= proj * q[k, i]
            nrm = 0.0
            for k in range(m):
                nrm += q[k, j].real ** 2 + q[k, j].imag ** 2
            nrm = math.sqrt(nrm)
            for k in range(m):
                q[k, j] /= nrm


@njit(cache=True, nogil=True)
def _retract_nb(v_in):
    q = v_in.copy()
    _retract_inplace_nb(q)
    return q


def retract_np(v):
    """Column-orthonormalize (modified Gram-Schmidt, twice) over a stack."""
    q = np.array(v, dtype=np.complex128, copy=True)
    r = q.shape[-1]
    for _ in range(2):
        for j in range(r):
            for i in range(j):
                proj = np.sum(np.conj(q[..., :, i]) * q[..., :, j], axis=-1)
                q[..., :, j] -= proj[..., None] * q[..., :, i]
            nrm = np.sqrt(np.sum(np.abs(q[..., :, j]) ** 2, axis=-1))
            q[..., :, j] /= nrm[..., None]
    return q


def retract(v):
    v = np.ascontiguousarray(v, dtype=np.complex128)
    if USE_NUMBA and v.ndim == 2:
        return _retract_nb(v)
    return retract_np(v)


@njit(cache=True, nogil=True)
def _ensemble_value_buf_nb(v, basis, kind, perm, d_sub, w):
    m, r = v.shape
    dim = basis.shape[1]
    total = 0.0
    for x in range(m):
        for i in range(dim):
            w[i] = 0.0
        for j in range(r):
            vxj = v[x, j]
            for i in range(dim):
                w[i] += vxj * basis[j, i]
        total += _weighted_tangle_nb(w, kind, perm, d_sub)
    return total


@njit(cache=True, nogil=True)
def _ensemble_value_nb(v, basis, kind, perm, d_sub):
    return _ensemble_value_buf_nb(v, basis, kind, perm, d_sub,
                                  np.empty(basis.shape[1], dtype=np.complex128))


def ensemble_value_np(v, basis, kind, perm, d_sub):
    """Objective for a stack of tableaux ``v`` (..., m, r)."""
    w = v @ basis
    return np.sum(weighted_tangle_np(w, kind, perm, d_sub), axis=-1)


@njit(cache=True, nogil=True)
def _compass_nb(v0, basis, kind, perm, d_sub, step0, min_step, max_iter, window, stall_tol):
    m, r = v0.shape
    v = _retract_nb(v0)
    f = _ensemble_value_nb(v, basis, kind, perm, d_sub)
    hist = np.empty(max_iter + 1)
    hist[0] = f
    n_acc = 0
    step = step0
    converged = False
    it = 0
    n_poll = 4 * m * r
    if not np.isfinite(f):
        return v, f, it, converged, step
    trial = np.empty_like(v)
    best_v = v.copy()
    w = np.empty(basis.shape[1], dtype=np.complex128)
    while it < max_iter:
        it += 1
        best = f
        found = False
        for k in range(n_poll):
            entry = k // 4
            mode = k % 4
            x = entry // r
            j = entry % r
            trial[:, :] = v
            if mode == 0:
                trial[x, j] += step
            elif mode == 1:
                trial[x, j] -= step
            elif mode == 2:
                trial[x, j] += 1j * step
            else:
                trial[x, j] -= 1j * step
            _retract_inplace_nb(trial)
            ft = _ensemble_value_buf_nb(trial, basis, kind, perm, d_sub, w)
            if ft < best:
                best = ft
                best_v[:, :] = trial
                found = True
        if found:
            v[:, :] = best_v
            f = best
            n_acc += 1
            hist[n_acc] = f
            if n_acc >= window and hist[n_acc - window] - f < stall_tol:
                converged = True
                break
        else:
            step *= 0.5
            if step < min_step:
                converged = True
                break
    return v, f, it, converged, step


def _poll_np(v, step):
    m, r = v.shape
    n_poll = 4 * m * r
    trials = np.broadcast_to(v, (n_poll, m, r)).copy()
    k = np.arange(n_poll)
    entry, mode = k // 4, k % 4
    x, j = entry // r, entry % r
    delta = np.array([step, -step, 1j * step, -1j * step])[mode]
    trials[k, x, j] += delta
    return retract_np(trials)


def _compass_np(v0, basis, kind, perm, d_sub, step0, min_step, max_iter, window, stall_tol,
                objective=None):
    if objective is None:
        def objective(stack):
            return ensemble_value_np(stack, basis, kind, perm, d_sub)
    v = retract_np(v0)
    f = float(objective(v[None])[0])
    hist = [f]
    step = step0
    converged = False
    it = 0
    if not np.isfinite(f):
        return v, f, it, converged, step
    while it < max_iter:
        it += 1
        trials = _poll_np(v, step)
        vals = np.asarray(objective(trials), dtype=float)
        vals = np.where(np.isfinite(vals), vals, np.inf)
        k = int(np.argmin(vals))
        if vals[k] < f:
            v = trials[k]
            f = float(vals[k])
            hist.append(f)
            if len(hist) > window and hist[-1 - window] - f < stall_tol:
                converged = True
                break
        else:
            step *= 0.5
            if step < min_step:
                converged = True
                break
    return v, f, it, converged, step


def compass_search(v0, basis, kind, perm, d_sub, step0, min_step, max_iter, window, stall_tol,
                   objective=None):
    """Complete-poll compass search over a column-orthonormal tableau.

    ``objective`` (stack -> values) overrides the built-in tangle kinds and
    always runs on the numpy path.
    """
    v0 = np.ascontiguousarray(v0, dtype=np.complex128)
    if USE_NUMBA and objective is None:
        basis = np.ascontiguousarray(basis, dtype=np.complex128)
        perm = np.ascontiguousarray(perm, dtype=np.int64)
        return _compass_nb(v0, basis, kind, perm, d_sub, step0, min_step,
                           max_iter, window, stall_tol)
    return _compass_np(v0, basis, kind, perm, d_sub, step0, min_step, max_iter,
                       window, stall_tol, objective)


def ensemble_value(v, basis, kind, perm, d_sub):
    v = np.ascontiguousarray(v, dtype=np.complex128)
    if USE_NUMBA and v.ndim == 2:
        return _ensemble_value_nb(v, np.ascontiguousarray(basis, dtype=np.complex128),
                                  kind, np.ascontiguousarray(perm, dtype=np.int64), d_sub)
    return ensemble_value_np(v, basis, kind, perm, d_sub)
