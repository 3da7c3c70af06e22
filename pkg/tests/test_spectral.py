import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from sqvdp.errors import BracketError, NumericFailureError, UsageError, WrongRegimeError
from sqvdp.fock import build_fock_space, coherent_state, trace_distance
from sqvdp.liouvillian import build_rotating_liouvillian, parity_superoperator, vec
from sqvdp.meanfield import fixed_points, limit_cycle_frequency
from sqvdp.params import ModelParams
from sqvdp.spectral import (
    band_structure,
    diagonalize,
    ep_scaling_fit,
    liouvillian_gap,
    sector_eigenvalues,
    spectrum_records,
    steady_state,
    steady_state_direct,
    symmetry_broken_states,
)


@pytest.fixture(scope="module")
def small_case():
    params = ModelParams(gamma1=1.0, gamma2=0.25, delta=0.12, eta=0.04)
    space = build_fock_space(12)
    superop = build_rotating_liouvillian(params, space)
    return params, space, superop, diagonalize(superop)


def test_zero_mode_and_ordering(small_case):
    _, _, _, dec = small_case
    assert abs(dec.eigenvalues[dec.steady_index()]) < 1e-9
    assert np.all(dec.eigenvalues.real <= 1e-9)
    # lexicographic ordering on the noise-quantized keys is deterministic
    w = dec.eigenvalues
    key = list(
        zip(
            np.round(-w.real, 12),
            np.round(np.abs(w.imag), 12),
            np.round(w.imag, 12),
        )
    )
    assert key == sorted(key)


def test_conjugation_symmetry(small_case):
    _, _, _, dec = small_case
    w = dec.eigenvalues
    complex_part = w[np.abs(w.imag) > 1e-9]
    for value in complex_part:
        assert np.abs(w - value.conjugate()).min() < 1e-9


def test_biorthonormality(small_case):
    _, _, _, dec = small_case
    assert not dec.norm_flags.any()
    rng = np.random.default_rng(0)
    for j in rng.choice(dec.eigenvalues.size, 6, replace=False):
        for k in rng.choice(dec.eigenvalues.size, 6, replace=False):
            expected = 1.0 if j == k else 0.0
            got = np.trace(dec.left_mode(int(j)).conj().T @ dec.right_mode(int(k)))
            assert got == pytest.approx(expected, abs=1e-8)


def test_steady_state_parity_label(small_case):
    _, _, _, dec = small_case
    assert dec.parities[dec.steady_index()] == 1


def test_full_vs_sector_paths(small_case):
    _, _, superop, dec = small_case
    dec_full = diagonalize(superop, sector_reduce=False)
    cost = np.abs(dec.eigenvalues[:, None] - dec_full.eigenvalues[None, :])
    rows, cols = linear_sum_assignment(cost)
    assert cost[rows, cols].max() < 1e-8
    # parity labels agree between the sector path and the Z2 expectation
    for j in range(6):
        k = int(np.argmin(np.abs(dec_full.eigenvalues - dec.eigenvalues[j])))
        assert dec_full.parities[k] == dec.parities[j]


def test_sum_rule_reconstruction():
    params = ModelParams(gamma1=1.0, gamma2=0.3, delta=0.1, eta=0.03)
    space = build_fock_space(8)
    superop = build_rotating_liouvillian(params, space)
    dec = diagonalize(superop)
    rebuilt = np.zeros((64, 64), dtype=complex)
    for j in range(64):
        rebuilt += dec.eigenvalues[j] * np.outer(
            vec(dec.right_mode(j)), vec(dec.left_mode(j)).conj()
        )
    assert np.abs(rebuilt - superop.matrix.toarray()).max() < 1e-6


def test_steady_state_against_time_integration():
    # independent oracle: naive dense RK4 of the master equation from the
    # vacuum to t = 50/gamma1
    params = ModelParams(gamma1=1.0, gamma2=0.1, delta=0.0, eta=0.0)
    space = build_fock_space(31)
    superop = build_rotating_liouvillian(params, space)
    dec = diagonalize(superop)
    rho_ss = steady_state(dec)
    mat = superop.matrix
    y = vec(coherent_state(space, 0.0).rho)
    dt = 2e-3
    for _ in range(25000):
        k1 = mat @ y
        k2 = mat @ (y + 0.5 * dt * k1)
        k3 = mat @ (y + 0.5 * dt * k2)
        k4 = mat @ (y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    n_rk4 = (y.reshape(31, 31, order="F") @ space.n_op.T).trace()
    assert rho_ss.expect(space.n_op).real == pytest.approx(n_rk4.real, abs=1e-6)
    rho_ss.validate()


def test_steady_state_direct_matches_eig(small_case):
    params, space, _, dec = small_case
    assert (
        np.abs(steady_state(dec).rho - steady_state_direct(params, space).rho).max()
        < 1e-10
    )


def test_unique_steady_state_thermal_like():
    params = ModelParams(gamma1=0.01, gamma2=5.0, delta=0.0, eta=0.0)
    space = build_fock_space(4)
    dec = diagonalize(build_rotating_liouvillian(params, space))
    rho = steady_state(dec)
    off_diag = rho.rho - np.diag(np.diag(rho.rho))
    assert np.abs(off_diag).max() < 1e-12
    assert abs(dec.eigenvalues[dec.steady_index()]) < 1e-12


def test_gap_info_bistable():
    params = ModelParams.from_ratios(n_ex=5.0, delta_ratio=0.1, eta_ratio=2.0)
    space = build_fock_space(36)
    dec = diagonalize(build_rotating_liouvillian(params, space), want_modes=False)
    info = liouvillian_gap(dec)
    assert info.gap > 0
    assert info.parity == -1
    assert info.leading_pair_real


def test_band_structure_rates_scale():
    params = ModelParams.from_ratios(n_ex=5.0, delta_ratio=0.1, eta_ratio=0.4)
    space = build_fock_space(31)
    dec = diagonalize(build_rotating_liouvillian(params, space), want_modes=False)
    omega = limit_cycle_frequency(params)
    bands = band_structure(dec, omega, n_bands=3)
    assert np.all(np.diff(bands.fundamental_rates) > 0)
    # second band saturates toward gamma1 + fundamental
    assert bands.second_rates[0] > 0.5 * params.gamma1
    # frequencies near the expected multiples
    for n, freq in enumerate(bands.band_frequencies, start=1):
        assert freq == pytest.approx(n * omega, abs=bands.tolerance)
    # membership is exclusive
    seen = np.concatenate(bands.bands)
    assert len(seen) == len(set(seen.tolist()))


def test_band_structure_wrong_regime(small_case):
    _, _, _, dec = small_case
    with pytest.raises(WrongRegimeError):
        band_structure(dec, 0.0)


def test_ep_scaling_fit_recovers_synthetic_law():
    n = np.array([100.0, 200.0, 400.0, 800.0, 1600.0])
    points = [(x, 0.05 + 2.0 * x**-0.5) for x in n]
    fit = ep_scaling_fit(points, 0.05)
    assert fit.beta == pytest.approx(0.5, abs=1e-10)
    assert fit.prefactor == pytest.approx(2.0, rel=1e-9)


def test_ep_scaling_fit_domain_errors():
    with pytest.raises(UsageError):
        ep_scaling_fit([(10.0, 0.06), (20.0, 0.055)], 0.05)
    bad = [(10.0, 0.04), (20.0, 0.06), (40.0, 0.055), (80.0, 0.052)]
    with pytest.raises(UsageError):
        ep_scaling_fit(bad, 0.05)


def test_symmetry_broken_states_small():
    params = ModelParams.from_ratios(n_ex=6.0, delta_ratio=0.1, eta_ratio=2.0)
    space = build_fock_space(40)
    dec = diagonalize(build_rotating_liouvillian(params, space))
    pair = symmetry_broken_states(dec)
    pair.rho_plus.validate()
    pair.rho_minus.validate()
    pair.xi.validate()
    # parity maps the pair into each other
    p = space.parity
    assert trace_distance(p @ pair.rho_plus.rho @ p, pair.rho_minus.rho) < 1e-8
    # rho_+ - rho_- is twice the normalised r1 used internally
    diff = pair.rho_plus.rho - pair.rho_minus.rho
    assert np.abs(diff + diff.conj().T - 2 * diff).max() < 1e-10  # Hermitian
    assert abs(np.trace(diff)) < 1e-10
    # <a>_+ aligned with the mean-field fixed point
    a_plus = np.trace(space.a @ pair.rho_plus.rho)
    alpha_plus, _ = fixed_points(params)
    assert (np.conj(alpha_plus) * a_plus).real > 0
    assert pair.trace_distance_ss_xi < 0.5


def test_symmetry_broken_states_wrong_regime():
    params = ModelParams.from_ratios(n_ex=6.0, delta_ratio=0.1, eta_ratio=0.4)
    space = build_fock_space(31)
    dec = diagonalize(build_rotating_liouvillian(params, space))
    with pytest.raises(WrongRegimeError):
        symmetry_broken_states(dec)


def test_sector_eigenvalues_subset(small_case):
    _, _, superop, dec = small_case
    w_odd = sector_eigenvalues(superop, "odd")
    odd_all = dec.eigenvalues[dec.parities == -1]
    cost = np.abs(np.sort_complex(w_odd)[:, None] - np.sort_complex(odd_all)[None, :])
    rows, cols = linear_sum_assignment(cost)
    assert cost[rows, cols].max() < 1e-9


def test_spectrum_records_shape(small_case):
    _, _, _, dec = small_case
    records = spectrum_records(dec)
    assert len(records) == 144
    assert all(len(r) == 3 and r[2] in (-1, 1) for r in records)


def test_dimension_guard():
    params = ModelParams(gamma1=1.0, gamma2=0.25, delta=0.1, eta=0.02)
    space = build_fock_space(130)
    superop = build_rotating_liouvillian(params, space)
    with pytest.raises(UsageError):
        diagonalize(superop)
