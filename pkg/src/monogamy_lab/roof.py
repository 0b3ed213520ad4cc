"""Convex-roof upper bounds for mixed-state tangles.

Any pure-state decomposition rho = sum_x |w_x><w_x| bounds the roof from
above. Decompositions are parameterised by column-orthonormal m x r tableaux
V acting on the eigen-ensemble of rho,

    |w_x> = sum_j V[x, j] sqrt(mu_j) |e_j>,

and V is tuned by a derivative-free compass search with a Gram-Schmidt
retraction. The tangles are non-smooth (|.| in the three-tangle, max(0, .) in
the concurrence), so no gradients are used.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _kernels
from ._accel import USE_NUMBA, thread_count
from .errors import NumericError
from .tensor import check_density, hermitian_eigh

RANK_TOL = 1e-12


@dataclass(frozen=True)
class PureTangle:
    """Pure-state tangle functional the compiled kernels understand.

    ``kind`` is either a linear-entropy tangle of the qubits at
    ``positions`` or the three-tangle (Cayley hyperdeterminant) of a
    3-qubit state.
    """

    kind: int
    n_qubits: int
    positions: tuple = ()
    perm: np.ndarray = field(default=None, repr=False, compare=False)
    d_sub: int = 1

    @classmethod
    def linear(cls, n_qubits: int, positions: Sequence[int]) -> "PureTangle":
        positions = tuple(int(p) for p in positions)
        if not positions or len(positions) >= n_qubits or len(set(positions)) != len(positions):
            raise ValueError("positions must be a proper, nonempty set of qubits")
        rest = [i for i in range(n_qubits) if i not in positions]
        perm = np.empty(2 ** n_qubits, dtype=np.int64)
        d_rest = 2 ** len(rest)
        for a in range(2 ** len(positions)):
            for b in range(d_rest):
                idx = 0
                for k, p in enumerate(positions):
                    if (a >> (len(positions) - 1 - k)) & 1:
                        idx |= 1 << (n_qubits - 1 - p)
                for k, p in enumerate(rest):
                    if (b >> (len(rest) - 1 - k)) & 1:
                        idx |= 1 << (n_qubits - 1 - p)
                perm[a * d_rest + b] = idx
        return cls(_kernels.KIND_LINEAR, n_qubits, positions, perm, 2 ** len(positions))

    @classmethod
    def one_tangle(cls, n_qubits: int, focus: int) -> "PureTangle":
        return cls.linear(n_qubits, [focus])

    @classmethod
    def three_tangle(cls) -> "PureTangle":
        return cls(_kernels.KIND_THREE_TANGLE, 3, (), np.zeros(8, dtype=np.int64), 1)

    def __call__(self, psi) -> float:
        psi = np.asarray(psi, dtype=np.complex128)
        return float(_kernels.weighted_tangle_np(psi, self.kind, self.perm, self.d_sub))


TangleFn = Union[PureTangle, Callable[[np.ndarray], float]]


@dataclass(frozen=True)
class RoofConfig:
    restarts: int = 16
    max_iter: int = 5000
    cap: int = 8
    step0: float = 0.25
    min_step: float = 1e-10
    window: int = 50
    stall_tol: float = 1e-10
    seed: int = 0
    threads: Optional[int] = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iter < 1 or self.cap < 1 or self.window < 1:
            raise ValueError("max_iter, cap and window must be positive")
        if not (self.step0 > 0 and self.min_step > 0):
            raise ValueError("step sizes must be positive")
        if self.seed < 0:
            raise ValueError("seed must be an unsigned integer")


@dataclass(frozen=True)
class RoofEstimate:
    upper_bound: float
    decomposition_size: int
    restarts_used: int
    converged: bool
    seed: int
    residual: float = 0.0
    rank: int = 1
    best_by_size: dict = field(default_factory=dict)

    @property
    def consistent_with_zero(self) -> bool:
        return self.upper_bound <= 1e-3


@dataclass(frozen=True)
class OptimizerStep:
    tableau: np.ndarray
    value: float
    step: float
    accepted: bool


def eigen_ensemble(rho, rank_tol: float = RANK_TOL):
    """(r x D) rows sqrt(mu_j) e_j^T for the eigenvalues above ``rank_tol``."""
    w, v = hermitian_eigh(rho)
    keep = w > rank_tol
    return (v[:, keep] * np.sqrt(w[keep])).T.copy()


def random_tableau(rng: np.random.Generator, m: int, r: int) -> np.ndarray:
    z = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
    return _kernels.retract(z)


def identity_tableau(m: int, r: int) -> np.ndarray:
    return np.eye(m, r, dtype=np.complex128)


def orthonormality_defect(v) -> float:
    v = np.asarray(v)
    return float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))


def _objective(tangle_fn, basis):
    """Stack objective for arbitrary callables (numpy path only)."""
    def objective(stack):
        w = stack @ basis
        p = np.sum(np.abs(w) ** 2, axis=-1)
        out = np.zeros(p.shape)
        for idx in np.ndindex(p.shape):
            if p[idx] > 1e-300:
                out[idx] = p[idx] * tangle_fn(w[idx] / np.sqrt(p[idx]))
        return out.sum(axis=-1)
    return objective


def ensemble_value(tableau, basis, tangle_fn: TangleFn) -> float:
    """sum_x p_x tangle(psi_x) for the decomposition encoded by ``tableau``."""
    if isinstance(tangle_fn, PureTangle):
        return float(_kernels.ensemble_value(tableau, basis, tangle_fn.kind,
                                             tangle_fn.perm, tangle_fn.d_sub))
    return float(_objective(tangle_fn, basis)(np.asarray(tableau)[None])[0])


def optimizer_step(tableau, step: float, basis, tangle_fn: TangleFn) -> OptimizerStep:
    """One complete compass poll: move to the best improving neighbour, or
    halve the step if none improves."""
    v = _kernels.retract_np(tableau)
    f = ensemble_value(v, basis, tangle_fn)
    trials = _kernels._poll_np(v, step)
    if isinstance(tangle_fn, PureTangle):
        vals = _kernels.ensemble_value_np(trials, basis, tangle_fn.kind, tangle_fn.perm,
                                          tangle_fn.d_sub)
    else:
        vals = _objective(tangle_fn, basis)(trials)
    if not np.all(np.isfinite(vals)) and not np.isfinite(f):
        raise NumericError("objective is not finite")
    vals = np.where(np.isfinite(vals), vals, np.inf)
    k = int(np.argmin(vals))
    if vals[k] < f:
        return OptimizerStep(trials[k], float(vals[k]), step, True)
    return OptimizerStep(v, f, step / 2.0, False)


def _search(v0, basis, tangle_fn, config):
    if isinstance(tangle_fn, PureTangle):
        args = (tangle_fn.kind, tangle_fn.perm, tangle_fn.d_sub)
        objective = None
    else:
        args = (_kernels.KIND_LINEAR, np.zeros(1, dtype=np.int64), 1)
        objective = _objective(tangle_fn, basis)
    v, f, it, conv, step = _kernels.compass_search(
        v0, basis, *args, config.step0, config.min_step, config.max_iter,
        config.window, config.stall_tol, objective)
    if not np.isfinite(f):
        raise NumericError("non-finite objective in roof search")
    return np.asarray(v), float(f), bool(conv), float(step)


def estimate_roof(rho, tangle_fn: TangleFn, config: RoofConfig = RoofConfig(),
                  sizes: Optional[Sequence[int]] = None) -> RoofEstimate:
    """Upper bound on the convex roof of ``tangle_fn`` at ``rho``.

    Decomposition sizes m = r .. min(r^2, cap) are tried in order. At each m,
    restart 0 starts from the best tableau so far (the eigen-ensemble at
    m = r, padded with a zero row afterwards) and the rest start from seeded
    random tableaux, so the running best never increases with m.
    """
    rho = check_density(rho)
    basis = eigen_ensemble(rho)
    r = basis.shape[0]
    if r == 0:
        raise ValueError("zero matrix has no decomposition")
    if r == 1:
        psi = basis[0] / np.linalg.norm(basis[0])
        val = float(tangle_fn(psi))
        return RoofEstimate(max(val, 0.0), 1, 0, True, config.seed, 0.0, 1, {1: val})
    if sizes is None:
        sizes = range(r, max(r, min(r * r, config.cap)) + 1)
    sizes = list(sizes)
    if min(sizes) < r:
        raise ValueError(f"decomposition size {min(sizes)} is below the rank {r}")

    n_workers = config.threads if config.threads is not None else thread_count()
    parallel = USE_NUMBA and isinstance(tangle_fn, PureTangle) and n_workers > 1
    best_v = identity_tableau(r, r)
    best = (np.inf, r, False, 0.0)
    by_size = {}
    used = 0
    for m in sizes:
        starts = [np.vstack([best_v, np.zeros((m - best_v.shape[0], r))])]
        for k in range(1, config.restarts):
            rng = np.random.default_rng([config.seed, m, k])
            starts.append(random_tableau(rng, m, r))

        def run(v0):
            try:
                return _search(v0, basis, tangle_fn, config)
            except NumericError:
                return None

        if parallel:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(run, starts))
        else:
            results = [run(v0) for v0 in starts]
        used += len(starts)
        good = [res for res in results if res is not None]
        if not good:
            continue
        v, f, conv, step = min(good, key=lambda res: res[1])
        by_size[m] = f
        if f < best[0]:
            best = (f, m, conv, step)
            best_v = v
    if not np.isfinite(best[0]):
        raise NumericError("every roof restart failed")
    f, m, conv, step = best
    return RoofEstimate(max(f, 0.0), m, used, conv, config.seed, step, r, by_size)


def roof_three_tangle(rho, config: RoofConfig = RoofConfig()) -> RoofEstimate:
    rho = np.asarray(rho)
    if rho.shape != (8, 8):
        raise ValueError("three-tangle roof needs an 8x8 density matrix")
    return estimate_roof(rho, PureTangle.three_tangle(), config)


def roof_one_tangle(rho, n_qubits: int, focus: int,
                    config: RoofConfig = RoofConfig()) -> RoofEstimate:
    """Roof of the one-tangle of qubit ``focus`` against the other qubits."""
    return estimate_roof(rho, PureTangle.one_tangle(n_qubits, focus), config)
