"""Entanglement functionals.

All bipartite quantities are tangles (squared concurrences). For a pure
bipartition the tangle is the linear entropy 2(1 - tr rho^2) of either side.
"""
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import NumericError
from .model import InitialPairState, damping_arrays
from .tensor import PureState, check_density, reduced_from_amplitudes


@dataclass(frozen=True)
class PairwiseConcurrences:
    """Squared concurrences of the four cross pairs of c1r1|c2r2."""

    c1c2: float
    r1r2: float
    c1r2: float
    c2r1: float

    @property
    def total(self) -> float:
        return self.c1c2 + self.r1r2 + self.c1r2 + self.c2r1


def wootters_margin_batch(rhos) -> np.ndarray:
    """sqrt(l1) - sum_{k>1} sqrt(lk) for a stack (B, 4, 4) of states.

    No validation; callers pass density matrices they built themselves.
    """
    margin, ok = _kernels.wootters_margin(rhos)
    if not ok:
        raise NumericError("Jacobi iteration did not converge in the Wootters spectrum")
    return margin


def wootters_concurrence_sq_batch(rhos) -> np.ndarray:
    return np.maximum(wootters_margin_batch(rhos), 0.0) ** 2


def wootters_concurrence_sq(rho) -> float:
    """Squared Wootters concurrence of a two-qubit density matrix."""
    rho = check_density(rho)
    if rho.shape != (4, 4):
        raise ValueError("Wootters concurrence needs a 4x4 density matrix")
    return float(wootters_concurrence_sq_batch(rho[None])[0])


def linear_entropy_tangle(rho) -> float:
    """2(1 - tr rho^2)."""
    rho = np.asarray(rho)
    return float(2.0 * (1.0 - np.sum(np.abs(rho) ** 2)))


def closed_form_arrays(alpha, beta, kappa_t):
    """Vectorised closed-form pairwise tangles (c1c2, r1r2, c1r2) of the
    evolved two-pair state; c2r1 equals c1r2."""
    ab = np.abs(np.asarray(alpha)) * np.abs(np.asarray(beta))
    b2 = np.abs(np.asarray(beta)) ** 2
    xi, chi = damping_arrays(kappa_t)
    cross = b2 * (xi * chi) ** 2
    c1c2 = 4.0 * np.maximum(ab * xi ** 2 - cross, 0.0) ** 2
    r1r2 = 4.0 * np.maximum(ab * chi ** 2 - cross, 0.0) ** 2
    c1r2 = 4.0 * np.maximum(ab * xi * chi - cross, 0.0) ** 2
    return c1c2, r1r2, c1r2


def closed_form_pairwise(init: InitialPairState, kappa_t: float) -> PairwiseConcurrences:
    c1c2, r1r2, c1r2 = closed_form_arrays(init.alpha, init.beta, kappa_t)
    return PairwiseConcurrences(float(c1c2), float(r1r2), float(c1r2), float(c1r2))


def closed_form_residual(alpha, beta, kappa_t):
    """4|ab|^2 minus the closed-form pairwise tangles; vectorised."""
    c1c2, r1r2, c1r2 = closed_form_arrays(alpha, beta, kappa_t)
    block = 4.0 * (np.abs(np.asarray(alpha)) * np.abs(np.asarray(beta))) ** 2
    return block - (c1c2 + r1r2 + 2.0 * c1r2)


def _proper_subset(state: PureState, subset: Sequence):
    subset = list(subset)
    pos = state.register.positions(subset)
    if not pos or len(pos) >= state.register.size:
        raise ValueError("subset must be a proper, nonempty set of labels")
    return pos


def pure_bipartition_tangle(state: PureState, subset: Sequence) -> float:
    """Linear-entropy tangle of ``subset`` against the rest of a pure state."""
    pos = _proper_subset(state, subset)
    rho = reduced_from_amplitudes(state.amplitudes[None], state.register.size, pos)[0]
    return linear_entropy_tangle(rho)


def pairwise_sum(state: PureState, group: Sequence, others: Sequence) -> float:
    """Sum of two-qubit tangles C^2_{ij} over i in group, j in others."""
    reg = state.register
    pairs = [reg.positions([i, j]) for i, j in product(group, others)]
    if not pairs:
        return 0.0
    rhos = np.stack([reduced_from_amplitudes(state.amplitudes[None], reg.size, p)[0]
                     for p in pairs])
    return float(np.sum(wootters_concurrence_sq_batch(rhos)))


def residual_two_qubit(state: PureState, pair: Sequence) -> float:
    """Block tangle of ``pair`` against the rest, minus every cross pairwise
    tangle between the pair and the remaining qubits."""
    pair = list(pair)
    if len(pair) != 2:
        raise ValueError("pair must name exactly two qubits")
    _proper_subset(state, pair)
    rest = [lb for lb in state.labels if lb not in pair]
    return pure_bipartition_tangle(state, pair) - pairwise_sum(state, pair, rest)


def three_tangle_pure(state: PureState, focus=None) -> float:
    """CKW three-tangle: one-tangle of ``focus`` minus its two pairwise tangles."""
    if state.register.size != 3:
        raise ValueError("three-tangle needs a 3-qubit state")
    focus = state.labels[0] if focus is None else focus
    state.register.index(focus)
    others = [lb for lb in state.labels if lb != focus]
    return pure_bipartition_tangle(state, [focus]) - pairwise_sum(state, [focus], others)


def qubit_block_tangles(init: InitialPairState, kappa_t: float):
    """(C^2_{c1|c2r2}, C^2_{r1|c2r2}) = 4|ab|^2 (xi^2, chi^2)."""
    xi, chi = damping_arrays(kappa_t)
    block = init.block_tangle
    return float(block * xi ** 2), float(block * chi ** 2)


def within_pair_closed_form(beta, kappa_t):
    """C^2_{c1r1}(t) = 4|beta|^4 xi^2 chi^2 for the evolved two-pair state."""
    xi, chi = damping_arrays(kappa_t)
    return 4.0 * np.abs(np.asarray(beta)) ** 4 * (xi * chi) ** 2
