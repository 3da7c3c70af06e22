import math

import numpy as np
import pytest
from scipy.integrate import quad

from sqvdp.errors import BracketError, UsageError, WrongRegimeError
from sqvdp.params import ModelParams
from sqvdp.semiclassical import (
    build_phase_fp,
    detect_ep_semiclassical,
    intensity_eigenfunction,
    intensity_eigenvalues,
    kramers_rates,
    ou_stationary_std,
    perturbation_split,
    perturbative_cn,
    phase_gap,
    phase_spectrum,
)


def params_at(n_ex, eta_ratio, delta_ratio=0.1):
    return ModelParams.from_ratios(n_ex=n_ex, delta_ratio=delta_ratio, eta_ratio=eta_ratio)


def closed_form_c1(params):
    # first-order decay constant, derived independently of the matrix
    # machinery: c1 = (3/8)(dt^2 + 2 et^2) / Omega~^2
    dt, et = params.delta_tilde, params.eta_tilde
    return 0.375 * (dt * dt + 2.0 * et * et) / (dt * dt - 4.0 * et * et)


def test_intensity_eigenvalues():
    assert np.array_equal(intensity_eigenvalues(3), [0.0, -1.0, -2.0, -3.0])
    assert intensity_eigenvalues(3, gamma1=2.5)[3] == pytest.approx(-7.5)
    with pytest.raises(UsageError):
        intensity_eigenvalues(-1)


def test_ou_stationary_distribution():
    n_ex = 12.0
    norm, _ = quad(lambda x: intensity_eigenfunction(0, x, n_ex), -np.inf, np.inf)
    assert norm == pytest.approx(1.0, abs=1e-8)
    second, _ = quad(lambda x: x * x * intensity_eigenfunction(0, x, n_ex), -np.inf, np.inf)
    assert math.sqrt(second) == pytest.approx(ou_stationary_std(n_ex), rel=1e-8)


def test_phase_operator_is_tridiagonal():
    op = build_phase_fp(params_at(50.0, 0.4), "odd", 16)
    mat = op.matrix
    assert mat.shape == (34, 34)
    for offset in range(2, 34):
        assert np.abs(np.diag(mat, k=offset)).max() == 0.0
        assert np.abs(np.diag(mat, k=-offset)).max() == 0.0
    even = build_phase_fp(params_at(50.0, 0.4), "even", 16)
    assert even.matrix.shape == (17, 17)
    assert np.abs(even.matrix[0]).max() == 0.0  # stationary row decouples


def test_truncation_guard():
    with pytest.raises(UsageError):
        build_phase_fp(params_at(50.0, 0.4), "odd", 4)


def test_free_phase_spectrum_is_exact():
    # eta = 0 decouples the Fourier modes: nu_n = i dt n - 3 n^2/(8 n_ex)
    params = ModelParams.from_ratios(n_ex=37.0, delta_ratio=0.13, eta=0.0)
    for sector, stride in (("odd", 1), ("even", 0)):
        op = build_phase_fp(params, sector, 24)
        got = np.sort_complex(phase_spectrum(op))
        ns = op.fourier_indices
        if sector == "even":
            ns = np.concatenate([ns, -ns[1:]])
        expected = np.sort_complex(
            np.array([1j * 0.13 * n - 3 * n**2 / (8 * 37.0) for n in ns])
        )
        assert np.abs(got - expected).max() < 1e-14


def test_even_sector_has_single_zero_mode():
    op = build_phase_fp(params_at(30.0, 0.7), "even", 48)
    w = phase_spectrum(op)
    zero_like = np.abs(w) < 1e-12
    assert zero_like.sum() == 1
    rest = w[~zero_like]
    assert np.all(rest.real < 0)


def test_spectrum_conjugation_symmetry():
    for sector in ("even", "odd"):
        op = build_phase_fp(params_at(25.0, 0.5), sector, 32)
        w = phase_spectrum(op)
        for value in w[np.abs(w.imag) > 1e-12]:
            assert np.abs(w - value.conjugate()).min() < 1e-10


def test_truncation_convergence_at_default():
    params = params_at(100.0, 0.4)
    small = phase_spectrum(build_phase_fp(params, "odd", 64))[:6]
    large = phase_spectrum(build_phase_fp(params, "odd", 80))[:6]
    assert np.abs(small - large).max() < 1e-10


def test_truncation_warning_when_too_small():
    with pytest.warns(UserWarning, match="not converged"):
        build_phase_fp(params_at(10000.0, 0.99), "odd", 8, check_convergence=True)


def test_perturbation_split_reassembles():
    op = build_phase_fp(params_at(42.0, 0.3), "odd", 20)
    split = perturbation_split(op)
    rebuilt = split.h_matrix + split.v_matrix / split.n_ex
    assert np.abs(rebuilt - op.matrix).max() == 0.0
    assert np.abs(np.imag(np.diag(split.v_matrix))).max() == 0.0


def test_perturbative_constants_against_closed_form():
    for eta_ratio in (0.2, 0.4, 0.6, 0.9):
        params = params_at(50.0, eta_ratio)
        c, diags = perturbative_cn(params, 64, 4)
        assert not diags
        c1 = closed_form_c1(params)
        assert c[0] == pytest.approx(c1, rel=1e-9)
        # ladder structure c_n = n^2 c_1
        assert np.allclose(c / (np.arange(1, 5) ** 2 * c[0]), 1.0, atol=1e-2)


def test_perturbative_free_limit():
    params = ModelParams.from_ratios(n_ex=50.0, delta_ratio=0.1, eta=0.0)
    c, _ = perturbative_cn(params, 64, 2)
    assert c[0] == pytest.approx(0.375, abs=1e-12)
    assert c[1] == pytest.approx(1.5, abs=1e-12)


def test_perturbative_wrong_regime():
    with pytest.raises(WrongRegimeError):
        perturbative_cn(params_at(50.0, 1.5), 64, 2)


def test_kramers_symmetric_limit():
    # delta -> 0: both rates equal and gap -> (4 eta/pi) exp(-16 n eta/3)
    params = ModelParams(gamma1=1.0, gamma2=0.05, delta=1e-13, eta=0.12)
    rates = kramers_rates(params)
    assert rates.gamma_right == pytest.approx(rates.gamma_left, rel=1e-9)
    n_ex = params.n_ex
    expected = (4 * 0.12 / math.pi) * math.exp(-16.0 * n_ex * 0.12 / 3.0)
    assert rates.gamma_gap == pytest.approx(expected, rel=1e-9)
    assert rates.suppression_ratio == pytest.approx(1.0, rel=1e-9)


def test_kramers_directionality():
    params = params_at(10.0, 2.0)
    rates = kramers_rates(params)
    assert rates.gamma_left > rates.gamma_right  # delta > 0 favors left
    assert rates.gamma_gap == pytest.approx(2.0 * rates.gamma_left, rel=1e-12)
    ratio = rates.gamma_right / rates.gamma_left
    assert ratio == pytest.approx(rates.suppression_ratio, rel=1e-9)
    flipped = kramers_rates(
        ModelParams(gamma1=1.0, gamma2=params.gamma2, delta=-params.delta, eta=params.eta)
    )
    assert flipped.gamma_right > flipped.gamma_left
    assert flipped.gamma_gap == pytest.approx(rates.gamma_gap, rel=1e-12)


def test_kramers_wrong_regime():
    with pytest.raises(WrongRegimeError):
        kramers_rates(params_at(10.0, 0.5))


def test_kramers_vs_exact_phase_gap():
    params = params_at(20.0, 3.0)
    exact = phase_gap(params, 64)
    assert kramers_rates(params).gamma_gap == pytest.approx(exact, rel=0.2)


def test_kramers_accuracy_improves_with_size():
    # the signed error crosses zero near n_ex ~ 12, so the monotone
    # decrease of |error| sets in from n_ex = 20 onward; n_ex stops at 80
    # because beyond that the gap falls under the eigensolver's absolute
    # resolution
    errors = []
    for n_ex in (20.0, 40.0, 80.0):
        params = params_at(n_ex, 2.0)
        exact = phase_gap(params, 96)
        errors.append(abs(kramers_rates(params).gamma_gap - exact) / exact)
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_ep_bracket_error_without_collision():
    params = params_at(20.0, 1.0)
    with pytest.raises(BracketError):
        detect_ep_semiclassical(params, (0.1 * params.eta_c, 0.5 * params.eta_c), 48)


def test_ep_detection_basics():
    params = params_at(50.0, 1.0)
    res = detect_ep_semiclassical(params, (params.eta_c, 1.5 * params.eta_c), 64)
    assert params.eta_c < res.eta_ep < 1.5 * params.eta_c
    assert res.coalescence > 0.99  # eigenvectors align at the collision
    below = phase_spectrum(build_phase_fp(params.with_eta(0.97 * res.eta_ep), "odd", 64))
    above = phase_spectrum(build_phase_fp(params.with_eta(1.03 * res.eta_ep), "odd", 64))
    assert abs(below[0].imag) > 1e-6
    assert below[0] == pytest.approx(below[1].conjugate(), rel=1e-9)
    assert abs(above[0].imag) < 1e-10 and abs(above[1].imag) < 1e-10


def test_paper_exponent_in_its_regime():
    # companion to the transition-point acceptance check: in the size
    # range where the anomalous exponent is quoted, the semiclassical
    # operator reproduces it
    gaps = []
    sizes = (60.0, 100.0, 200.0, 300.0)
    for n_ex in sizes:
        gaps.append(phase_gap(params_at(n_ex, 1.0), 96))
    exponent = -np.polyfit(np.log(sizes), np.log(gaps), 1)[0]
    assert exponent == pytest.approx(0.37, abs=0.1)
