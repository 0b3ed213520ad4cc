import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monogamy_lab import model
from monogamy_lab.errors import CapacityError
from monogamy_lab.model import (
    InitialPairState,
    damping_amplitudes,
    evolved_three_pair_state,
    evolved_two_pair_state,
    single_pair_map,
    w_state,
)
from monogamy_lab.tensor import PureState, QubitRegister

kts = st.floats(0.0, 20.0, allow_nan=False)


def test_damping_endpoints():
    d0 = damping_amplitudes(0.0)
    assert (d0.xi, d0.chi) == (1.0, 0.0)
    d = damping_amplitudes(math.log(2.0))
    assert d.xi == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert d.chi == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    with pytest.raises(ValueError):
        damping_amplitudes(-0.1)
    with pytest.raises(ValueError):
        damping_amplitudes(float("nan"))


@given(kts)
def test_damping_unit_norm(kt):
    d = damping_amplitudes(kt)
    assert abs(d.xi ** 2 + d.chi ** 2 - 1.0) < 1e-14


def test_small_time_chi_keeps_precision():
    # 1 - exp(-t) computed naively loses every digit at t = 1e-18
    assert damping_amplitudes(1e-18).chi == pytest.approx(1e-9, rel=1e-12)


def test_initial_state_validation():
    with pytest.raises(ValueError):
        InitialPairState(0.6, 0.6)
    with pytest.raises(ValueError):
        InitialPairState.from_alpha(1.2)
    s = InitialPairState(0.6j, 0.8)
    assert s.block_tangle == pytest.approx(4 * 0.48 ** 2, abs=1e-15)


def test_two_pair_initial_and_layout():
    init = InitialPairState.from_alpha(0.6)
    amps = evolved_two_pair_state(init, 0.0).amplitudes
    want = np.zeros(16)
    want[0], want[0b1010] = 0.6, 0.8
    assert np.allclose(amps, want, atol=1e-15)
    # full decay moves the excitation into the reservoirs
    amps = evolved_two_pair_state(init, 60.0).amplitudes
    assert abs(amps[0b0101] - 0.8) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), kts)
def test_two_pair_matches_kron_oracle(a, kt):
    init = InitialPairState.from_alpha(a)
    xi, chi = math.exp(-kt / 2), math.sqrt(-math.expm1(-kt))
    phi = np.array([0, chi, xi, 0])
    want = init.beta * np.kron(phi, phi)
    want[0] += init.alpha
    got = evolved_two_pair_state(init, kt).amplitudes
    assert np.max(np.abs(got - want)) < 1e-14
    assert abs(np.linalg.norm(got) - 1.0) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.0), kts)
def test_three_pair_norm_and_cavity_population(a, kt):
    init = InitialPairState.from_alpha(a)
    st_ = evolved_three_pair_state(init, kt)
    assert abs(np.linalg.norm(st_.amplitudes) - 1.0) < 1e-12
    # weight of |101010> is |beta|^2 xi^6
    assert abs(abs(st_.amplitudes[0b101010]) ** 2 - init.abs_beta ** 2 * math.exp(-3 * kt)) < 1e-12


def test_evolution_is_pairwise_unitary():
    reg = QubitRegister(("c", "r"))
    for kt in (0.0, 0.3, 2.0):
        u = model.single_pair_matrix(kt)
        assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-14)
        out = single_pair_map(PureState(reg, [0, 0, 1, 0]), kt)
        assert np.allclose(out.amplitudes, model.pair_vector(kt))
    with pytest.raises(ValueError):
        single_pair_map(PureState(reg, [0, 0, 0, 1]), 0.1)


@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_cavity_amplitude_composes_in_time(a, b):
    reg = QubitRegister(("c", "r"))
    excited = PureState(reg, [0, 0, 1, 0])
    left = single_pair_map(excited, a).amplitudes[2] * single_pair_map(excited, b).amplitudes[2]
    assert abs(left - single_pair_map(excited, a + b).amplitudes[2]) < 1e-14


def test_w_state_layout():
    st_ = w_state([0.5, 0.5, 0.5, 0.5])
    assert st_.labels == ("A1", "A1'", "A2", "A2'")
    assert np.allclose(st_.amplitudes[[8, 4, 2, 1]], 0.5)
    with pytest.raises(ValueError):
        w_state([1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        w_state([1.0, 1.0])
    with pytest.raises(CapacityError):
        w_state(np.ones(10) / math.sqrt(10))
