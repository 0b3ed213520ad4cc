import math

import mpmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monogamy_lab import measures
from monogamy_lab.errors import LabelError
from monogamy_lab.measures import (
    closed_form_pairwise,
    pairwise_sum,
    pure_bipartition_tangle,
    qubit_block_tangles,
    residual_two_qubit,
    three_tangle_pure,
    wootters_concurrence_sq,
    wootters_concurrence_sq_batch,
)
from monogamy_lab.model import InitialPairState, evolved_two_pair_state, w_state
from monogamy_lab.roof import PureTangle
from monogamy_lab.tensor import PureState, QubitRegister, partial_trace

from conftest import random_density, random_pure, random_unitary

YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
ABC = QubitRegister(("A", "B", "C"))
seeds = st.integers(0, 2 ** 32 - 1)


def concurrence_sq_oracle(rho):
    """Square roots of the (non-Hermitian) rho * rho~ spectrum, in 50-digit
    arithmetic so vanishing eigenvalues do not leak sqrt(eps) noise."""
    with mpmath.workdps(50):
        r = mpmath.matrix(rho.tolist())
        yy = mpmath.matrix(YY.tolist())
        rt = yy * r.conjugate() * yy
        ev = mpmath.eig(r * rt, left=False, right=False)
        lam = sorted((mpmath.sqrt(abs(mpmath.re(e))) for e in ev), reverse=True)
        return float(max(mpmath.mpf(0), lam[0] - lam[1] - lam[2] - lam[3]) ** 2)


def werner(p):
    bell = np.array([0, 1, -1, 0]) / math.sqrt(2)
    return p * np.outer(bell, bell) + (1 - p) * np.eye(4) / 4


def test_wootters_examples(kernel_path):
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert wootters_concurrence_sq(np.outer(bell, bell)) == pytest.approx(1.0, abs=1e-12)
    assert wootters_concurrence_sq(np.eye(4) / 4) == 0.0
    prod = np.kron([1, 0], [0.6, 0.8])
    assert wootters_concurrence_sq(np.outer(prod, prod)) < 1e-24
    for p in (0.2, 0.5, 0.8, 1.0):
        want = max(0.0, (3 * p - 1) / 2) ** 2
        assert wootters_concurrence_sq(werner(p)) == pytest.approx(want, abs=1e-12)


def test_wootters_input_errors():
    with pytest.raises(ValueError):
        wootters_concurrence_sq(np.eye(8) / 8)
    with pytest.raises(ValueError):
        wootters_concurrence_sq(np.eye(4))


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 4))
def test_wootters_matches_eigvals_oracle(seed, rank):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4, rank)
    assert abs(wootters_concurrence_sq(rho) - concurrence_sq_oracle(rho)) < 1e-8


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_wootters_pure_state_equals_linear_entropy(seed):
    rng = np.random.default_rng(seed)
    psi = random_pure(rng, 2)
    rho_a = partial_trace(np.outer(psi, psi.conj()), ["A", "B"], ["A"])
    assert abs(wootters_concurrence_sq(np.outer(psi, psi.conj()))
               - measures.linear_entropy_tangle(rho_a)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_wootters_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4)
    u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
    c = wootters_concurrence_sq(rho)
    assert abs(wootters_concurrence_sq(u @ rho @ u.conj().T) - c) < 1e-12
    assert 0.0 <= c <= 1.0


def test_batch_shapes():
    out = wootters_concurrence_sq_batch(np.stack([np.eye(4) / 4] * 3))
    assert out.shape == (3,) and np.all(out == 0)


def test_ghz_and_w_three_tangle():
    ghz = np.zeros(8)
    ghz[0] = ghz[7] = 1 / math.sqrt(2)
    w = np.zeros(8)
    w[[1, 2, 4]] = 1 / math.sqrt(3)
    assert three_tangle_pure(PureState(ABC, ghz)) == pytest.approx(1.0, abs=1e-12)
    assert abs(three_tangle_pure(PureState(ABC, w))) < 1e-12
    hyper = PureTangle.three_tangle()
    assert hyper(ghz) == pytest.approx(1.0, abs=1e-14)
    assert abs(hyper(w)) < 1e-14


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_three_tangle_dual_route(seed):
    """CKW difference and the hyperdeterminant are two independent routes."""
    psi = random_pure(np.random.default_rng(seed), 3)
    state = PureState(ABC, psi)
    tau = PureTangle.three_tangle()(psi)
    for focus in "ABC":
        assert abs(three_tangle_pure(state, focus) - tau) < 1e-9
    assert -1e-12 <= tau <= 1 + 1e-12


def test_three_tangle_errors():
    with pytest.raises(ValueError):
        three_tangle_pure(PureState(QubitRegister(("A", "B")), [1, 0, 0, 0]))
    with pytest.raises(LabelError):
        three_tangle_pure(PureState(ABC, np.eye(8)[0]), focus="Z")


def test_bipartition_tangle_examples():
    reg = QubitRegister(("a", "b", "c", "d"))
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    st_ = PureState(reg, np.kron(bell, bell))
    assert pure_bipartition_tangle(st_, ["a"]) == pytest.approx(1.0)
    assert abs(pure_bipartition_tangle(st_, ["a", "b"])) < 1e-12
    assert pure_bipartition_tangle(st_, ["a", "c"]) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        pure_bipartition_tangle(st_, [])
    with pytest.raises(ValueError):
        pure_bipartition_tangle(st_, ["a", "b", "c", "d"])


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_bipartition_tangle_symmetric(seed):
    st_ = PureState(QubitRegister(("a", "b", "c", "d")), random_pure(np.random.default_rng(seed), 4))
    assert abs(pure_bipartition_tangle(st_, ["a", "c"]) - pure_bipartition_tangle(st_, ["b", "d"])) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_single_qubit_monogamy(seed):
    """One-tangle dominates the sum of pairwise tangles on random 3 and 4 qubit states."""
    rng = np.random.default_rng(seed)
    for n in (3, 4):
        labels = tuple("abcd"[:n])
        st_ = PureState(QubitRegister(labels), random_pure(rng, n))
        assert pure_bipartition_tangle(st_, ["a"]) - pairwise_sum(st_, ["a"], labels[1:]) >= -1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(0.02, 0.98), st.floats(0.0, 6.0))
def test_closed_forms_match_numeric(a, kt):
    init = InitialPairState.from_alpha(a)
    st_ = evolved_two_pair_state(init, kt)
    cf = closed_form_pairwise(init, kt)
    got = {name: wootters_concurrence_sq(st_.reduced(list(pair)))
           for name, pair in (("c1c2", ("c1", "c2")), ("r1r2", ("r1", "r2")),
                              ("c1r2", ("c1", "r2")), ("c2r1", ("c2", "r1")))}
    for name, v in got.items():
        assert abs(v - getattr(cf, name)) < 1e-9
    assert abs(residual_two_qubit(st_, ["c1", "r1"])
               - measures.closed_form_residual(init.alpha, init.beta, kt)) < 1e-9
    assert abs(pure_bipartition_tangle(st_, ["c1", "r1"]) - init.block_tangle) < 1e-12
    assert abs(wootters_concurrence_sq(st_.reduced(["c1", "r1"]))
               - measures.within_pair_closed_form(init.beta, kt)) < 1e-9


def test_qubit_block_split():
    init = InitialPairState.from_alpha(0.5)
    c, r = qubit_block_tangles(init, 0.7)
    assert c + r == pytest.approx(init.block_tangle, abs=1e-15)
    assert c == pytest.approx(init.block_tangle * math.exp(-0.7), abs=1e-15)


def test_residual_two_qubit_checks():
    st_ = w_state([0.5] * 4)
    with pytest.raises(ValueError):
        residual_two_qubit(st_, ["A1"])
    with pytest.raises(LabelError):
        residual_two_qubit(st_, ["A1", "B"])
    assert abs(residual_two_qubit(st_, ["A1", "A1'"])) < 1e-12
