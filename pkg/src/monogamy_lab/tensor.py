"""Dense complex linear algebra on small qubit registers.

Qubit ordering: label position 0 is the most significant bit of the
computational-basis index, so ``|c1 r1 c2 r2> = |1010>`` is index 10.
Matrices are plain ``numpy`` complex arrays; registers cap out at 8 qubits.
"""
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import CapacityError, LabelError, NumericError

MAX_QUBITS = 8
MAX_DIM = 2 ** MAX_QUBITS
HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
NORM_TOL = 1e-9
PSD_TOL = 1e-12


@dataclass(frozen=True)
class QubitRegister:
    labels: tuple

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if not labels:
            raise ValueError("register needs at least one qubit")
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate labels in {labels}")
        if len(labels) > MAX_QUBITS:
            raise CapacityError(f"{len(labels)} qubits exceeds the {MAX_QUBITS}-qubit cap")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 2 ** len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise LabelError(f"unknown label {label!r}; register has {self.labels}") from None

    def positions(self, labels: Iterable) -> list:
        pos = [self.index(lb) for lb in labels]
        if len(set(pos)) != len(pos):
            raise LabelError(f"repeated label in {list(labels)}")
        return pos

    def __len__(self):
        return len(self.labels)


def _as_register(register) -> QubitRegister:
    if isinstance(register, QubitRegister):
        return register
    return QubitRegister(tuple(register))


@dataclass(frozen=True, eq=False)
class PureState:
    register: QubitRegister
    amplitudes: np.ndarray

    def __post_init__(self):
        reg = _as_register(self.register)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != reg.dim:
            raise ValueError(f"{amps.shape[0]} amplitudes for a {reg.size}-qubit register")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm:.3e} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "register", reg)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def labels(self):
        return self.register.labels

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def reduced(self, keep: Sequence) -> np.ndarray:
        """Reduced density matrix on ``keep`` (in that order)."""
        pos = _keep_positions(self.register, keep)
        return reduced_from_amplitudes(self.amplitudes[None], self.register.size, pos)[0]


def _keep_positions(register, keep):
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one qubit")
    return register.positions(keep)


def reduced_from_amplitudes(amps, n_qubits, keep_positions):
    """Batched marginals of pure states: ``amps`` is (B, 2**n)."""
    amps = np.asarray(amps, dtype=np.complex128)
    bsz = amps.shape[0]
    rest = [i for i in range(n_qubits) if i not in keep_positions]
    t = amps.reshape((bsz,) + (2,) * n_qubits)
    t = np.transpose(t, [0] + [p + 1 for p in keep_positions] + [p + 1 for p in rest])
    m = t.reshape(bsz, 2 ** len(keep_positions), -1)
    return m @ np.conj(np.swapaxes(m, 1, 2))


def kron(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    for x in (a, b):
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise ValueError("kron expects square matrices")
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise CapacityError(f"kron result of dimension {a.shape[0] * b.shape[0]} exceeds {MAX_DIM}")
    return np.kron(a, b)


def partial_trace(rho, register, keep: Sequence) -> np.ndarray:
    """Trace out every qubit not in ``keep``; result follows ``keep`` order."""
    reg = _as_register(register)
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (reg.dim, reg.dim):
        raise ValueError(f"matrix shape {rho.shape} does not match a {reg.size}-qubit register")
    pos = _keep_positions(reg, keep)
    n = reg.size
    rest = [i for i in range(n) if i not in pos]
    t = rho.reshape((2,) * (2 * n))
    order = pos + rest + [n + p for p in pos] + [n + p for p in rest]
    dk, dr = 2 ** len(pos), 2 ** len(rest)
    t = np.transpose(t, order).reshape(dk, dr, dk, dr)
    return np.einsum("ajbj->ab", t)


def check_hermitian(h, tol=HERMITIAN_TOL) -> np.ndarray:
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] > MAX_DIM:
        raise CapacityError(f"dimension {h.shape[0]} exceeds {MAX_DIM}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > tol:
        raise ValueError("matrix is not Hermitian within tolerance")
    return h


def check_density(rho, tol=HERMITIAN_TOL) -> np.ndarray:
    """Validate a density operator; returns it as a complex array."""
    rho = check_hermitian(rho, tol)
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise ValueError(f"trace {np.trace(rho).real:.3e} is not 1")
    if hermitian_eigenvalues(rho)[-1] < -tol:
        raise ValueError("density operator has a negative eigenvalue")
    return rho


def _eigh(h, want_vectors):
    w, v, ok = _kernels.jacobi_eigh(h[None], want_vectors)
    if not ok:
        raise NumericError("Jacobi iteration did not converge within the sweep cap")
    return w[0], v[0]


def hermitian_eigenvalues(h) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted decreasing."""
    h = check_hermitian(h)
    return _eigh(h, False)[0]


def hermitian_eigh(h):
    """Eigenvalues (decreasing) and matching eigenvector columns."""
    h = check_hermitian(h)
    return _eigh(h, True)


def psd_sqrt(rho) -> np.ndarray:
    w, v = hermitian_eigh(rho)
    if w[-1] < -PSD_TOL:
        raise ValueError(f"matrix is not PSD (eigenvalue {w[-1]:.3e})")
    r = np.sqrt(np.clip(w, 0.0, None))
    return (v * r) @ v.conj().T


def rank_estimate(rho, tol=1e-10) -> int:
    return int(np.sum(hermitian_eigenvalues(rho) > tol))
