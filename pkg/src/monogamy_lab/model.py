"""States of the cavity-reservoir scenarios.

Each cavity and its reservoir are one qubit pair (c, r). The reservoir is an
effective single qubit: only the zero- and one-excitation sectors are ever
populated, and within them a pair evolves as

    |00> -> |00>,    |10> -> xi |10> + chi |01>

with xi = exp(-kt/2), chi = sqrt(1 - exp(-kt)) and kt the dimensionless decay
time.
"""
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError
from .tensor import MAX_QUBITS, NORM_TOL, PureState, QubitRegister

TWO_PAIR = QubitRegister(("c1", "r1", "c2", "r2"))
THREE_PAIR = QubitRegister(("c1", "r1", "c2", "r2", "c3", "r3"))


@dataclass(frozen=True)
class DampingAmplitudes:
    xi: float
    chi: float
    kappa_t: float


@dataclass(frozen=True)
class InitialPairState:
    """Amplitudes of alpha|0..0> + beta|1..1> on the cavities."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ValueError("alpha and beta must be finite")
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-12:
            raise ValueError("|alpha|^2 + |beta|^2 must equal 1")

    @classmethod
    def from_alpha(cls, alpha: float) -> "InitialPairState":
        """Real nonnegative amplitudes with beta = sqrt(1 - alpha^2)."""
        alpha = float(alpha)
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        return cls(alpha, math.sqrt(1.0 - alpha * alpha))

    @property
    def abs_alpha(self) -> float:
        return abs(complex(self.alpha))

    @property
    def abs_beta(self) -> float:
        return abs(complex(self.beta))

    @property
    def block_tangle(self) -> float:
        """4|alpha beta|^2, the conserved c1r1|c2r2 tangle."""
        return 4.0 * (self.abs_alpha * self.abs_beta) ** 2


def _check_kappa_t(kappa_t):
    kt = np.asarray(kappa_t, dtype=float)
    if not np.all(np.isfinite(kt)) or np.any(kt < 0):
        raise ValueError(f"kappa_t must be finite and >= 0, got {kappa_t}")
    return kt


def damping_arrays(kappa_t):
    """Vectorised (xi, chi) for an array of decay times."""
    kt = _check_kappa_t(kappa_t)
    return np.exp(-0.5 * kt), np.sqrt(-np.expm1(-kt))


def damping_amplitudes(kappa_t: float) -> DampingAmplitudes:
    xi, chi = damping_arrays(kappa_t)
    return DampingAmplitudes(float(xi), float(chi), float(kappa_t))


def pair_vector(kappa_t: float) -> np.ndarray:
    """|phi_t> = xi|10> + chi|01> in (c, r) ordering."""
    d = damping_amplitudes(kappa_t)
    return np.array([0.0, d.chi, d.xi, 0.0], dtype=np.complex128)


def two_pair_amplitudes(alpha, beta, kappa_t) -> np.ndarray:
    """Batched amplitudes of the evolved two-pair state, shape (B, 16)."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.complex128))
    beta = np.atleast_1d(np.asarray(beta, dtype=np.complex128))
    xi, chi = damping_arrays(np.atleast_1d(kappa_t))
    alpha, beta, xi, chi = np.broadcast_arrays(alpha, beta, xi, chi)
    phi = np.zeros(alpha.shape + (4,), dtype=np.complex128)
    phi[..., 1] = chi
    phi[..., 2] = xi
    out = beta[..., None] * (phi[..., :, None] * phi[..., None, :]).reshape(alpha.shape + (16,))
    out[..., 0] += alpha
    return out


def evolved_two_pair_state(init: InitialPairState, kappa_t: float) -> PureState:
    """alpha|0000> + beta|phi_t>|phi_t> over (c1, r1, c2, r2)."""
    _check_kappa_t(kappa_t)
    amps = two_pair_amplitudes(init.alpha, init.beta, kappa_t)[0]
    return PureState(TWO_PAIR, amps)


def evolved_three_pair_state(init: InitialPairState, kappa_t: float) -> PureState:
    """alpha|000000> + beta|phi_t>^(x3) over (c1, r1, c2, r2, c3, r3)."""
    phi = pair_vector(kappa_t)
    amps = complex(init.beta) * np.kron(np.kron(phi, phi), phi)
    amps[0] += complex(init.alpha)
    return PureState(THREE_PAIR, amps)


def w_state(amplitudes: Sequence[complex]) -> PureState:
    """Single-excitation state sum_k a_k |0..1_k..0> on 2N qubits.

    Qubits are labelled A1, A1', A2, A2', ... so consecutive labels form the
    pairs of the two-qubit partition.
    """
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    n = amps.shape[0]
    if n == 0 or n % 2:
        raise ValueError("W state needs an even, nonzero number of amplitudes")
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
    if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
        raise ValueError("W-state amplitudes must be normalised")
    labels = []
    for k in range(1, n // 2 + 1):
        labels += [f"A{k}", f"A{k}'"]
    vec = np.zeros(2 ** n, dtype=np.complex128)
    for k, a in enumerate(amps):
        vec[1 << (n - 1 - k)] = a
    return PureState(QubitRegister(tuple(labels)), vec)


def single_pair_matrix(kappa_t: float) -> np.ndarray:
    """Unitary on span{|00>, |01>, |10>} of one (c, r) pair, as a 4x4 matrix.

    |01> is completed as -chi|10> + xi|01>. |11> is left fixed but is never
    a legal input.
    """
    d = damping_amplitudes(kappa_t)
    u = np.zeros((4, 4), dtype=np.complex128)
    u[0, 0] = 1.0
    u[2, 2], u[1, 2] = d.xi, d.chi
    u[2, 1], u[1, 1] = -d.chi, d.xi
    u[3, 3] = 1.0
    return u


def single_pair_map(state: PureState, kappa_t: float) -> PureState:
    if state.register.size != 2:
        raise ValueError("single_pair_map acts on one (cavity, reservoir) pair")
    if abs(state.amplitudes[3]) > NORM_TOL:
        raise ValueError("input has weight on |11>, outside the modelled sector")
    return PureState(state.register, single_pair_matrix(kappa_t) @ state.amplitudes)
