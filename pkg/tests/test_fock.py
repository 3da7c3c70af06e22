import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqvdp.errors import InvalidDimensionError, TruncationOverflowError
from sqvdp.fock import build_fock_space, coherent_state, default_cutoff


def test_smallest_truncation():
    space = build_fock_space(2)
    assert np.array_equal(space.a, [[0, 1], [0, 0]])


def test_annihilation_entries():
    space = build_fock_space(3)
    assert space.a[1, 2] == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert np.count_nonzero(space.a) == 2


def test_parity_diagonal():
    space = build_fock_space(4)
    assert np.array_equal(np.diag(space.parity).real, [1, -1, 1, -1])
    assert np.allclose(space.parity @ space.parity, np.eye(4))


def test_dimension_guard():
    with pytest.raises(InvalidDimensionError):
        build_fock_space(1)


@given(st.integers(min_value=2, max_value=40))
@settings(max_examples=20, deadline=None)
def test_operator_identities(d):
    space = build_fock_space(d)
    comm = space.a @ space.a_dag - space.a_dag @ space.a
    # truncation breaks the commutator only in the last row/column
    assert np.allclose(comm[: d - 1, : d - 1], np.eye(d - 1), atol=1e-12)
    assert np.array_equal(space.parity @ space.a @ space.parity, -space.a)
    assert np.allclose(space.a_dag @ space.a, space.n_op)


def test_vacuum_projector():
    space = build_fock_space(8)
    rho = coherent_state(space, 0.0)
    expected = np.zeros((8, 8))
    expected[0, 0] = 1.0
    assert np.allclose(rho.rho, expected)


def test_coherent_occupation():
    space = build_fock_space(32)
    rho = coherent_state(space, 1.0)
    rho.validate()
    assert rho.expect(space.n_op).real == pytest.approx(1.0, abs=1e-8)


def test_coherent_amplitude_against_series():
    # independent oracle: truncated Poisson series summed explicitly
    d, alpha = 64, math.sqrt(10.0)
    amps = np.array([alpha**m / math.sqrt(math.factorial(m)) for m in range(d)])
    amps /= np.linalg.norm(amps)
    expected = np.sum(amps[:-1] * amps[1:] * np.sqrt(np.arange(1, d)))
    space = build_fock_space(d)
    rho = coherent_state(space, alpha)
    assert rho.expect(space.a) == pytest.approx(expected, abs=1e-12)
    assert abs(rho.expect(space.a) - alpha) < 1e-6


@given(
    st.floats(min_value=0.05, max_value=2.2),
    st.floats(min_value=0.0, max_value=2 * math.pi),
)
@settings(max_examples=15, deadline=None)
def test_coherent_expectation_matches_intensity(mag, angle):
    space = build_fock_space(24)
    alpha = mag * complex(math.cos(angle), math.sin(angle))
    rho = coherent_state(space, alpha)
    assert rho.expect(space.n_op).real == pytest.approx(abs(alpha) ** 2, abs=1e-7)
    assert rho.expect(space.a) == pytest.approx(alpha, abs=1e-7)


def test_truncation_overflow():
    space = build_fock_space(16)
    with pytest.raises(TruncationOverflowError):
        coherent_state(space, 3.0)  # |alpha|^2 = 9 > 16/4


def test_default_cutoff_values():
    assert default_cutoff(1.0) == 17
    assert default_cutoff(10.0) == 44
    assert default_cutoff(20.0) == 64
    assert default_cutoff(0.01) == 16  # floor kicks in


def test_default_cutoff_converged_for_bistable_point():
    # occupation moves by < 0.1% when the cutoff doubles at eta/eta_c = 2
    from sqvdp.params import ModelParams
    from sqvdp.spectral import steady_state_direct

    params = ModelParams.from_ratios(n_ex=20.0, delta_ratio=0.1, eta_ratio=2.0)
    occ = {}
    for d in (64, 128):
        space = build_fock_space(d)
        occ[d] = steady_state_direct(params, space).expect(space.n_op).real
    assert abs(occ[128] - occ[64]) / occ[128] < 1e-3
