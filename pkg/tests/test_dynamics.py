import math

import numpy as np
import pytest

from sqvdp.dynamics import (
    evolve_lab,
    evolve_rotating,
    stationary_occupation_scan,
    stroboscopic_map,
    stroboscopic_series,
)
from sqvdp.errors import ResolutionError, UsageError
from sqvdp.fock import DensityMatrix, build_fock_space, coherent_state, trace_distance
from sqvdp.liouvillian import build_rotating_liouvillian
from sqvdp.meanfield import fixed_points, limit_cycle_frequency
from sqvdp.params import ModelParams
from sqvdp.spectral import diagonalize, steady_state


@pytest.fixture(scope="module")
def rotating_case():
    params = ModelParams.from_ratios(n_ex=3.0, delta_ratio=0.1, eta_ratio=0.4)
    space = build_fock_space(22)
    superop = build_rotating_liouvillian(params, space)
    dec = diagonalize(superop)
    return params, space, superop, dec


def test_steady_state_is_stationary(rotating_case):
    params, space, superop, dec = rotating_case
    rho_ss = steady_state(dec)
    t_grid = np.linspace(0.0, 20.0, 41)
    result = evolve_rotating(
        rho_ss, superop, t_grid, observables={"a": space.a, "n": space.n_op}, dec=dec
    )
    assert np.abs(np.diff(result.observables["n"])).max() < 1e-9
    assert np.abs(result.observables["a"]).max() < 1e-8


def test_backends_agree(rotating_case):
    params, space, superop, dec = rotating_case
    rho0 = coherent_state(space, math.sqrt(params.n_ex))
    t_grid = np.linspace(0.0, 15.0, 16)
    spec = evolve_rotating(rho0, superop, t_grid, observables={"a": space.a},
                           backend="spectral", dec=dec, store_states=True)
    rk4 = evolve_rotating(rho0, superop, t_grid, observables={"a": space.a},
                          backend="rk4", store_states=True)
    assert spec.backend == "spectral" and rk4.backend == "rk4"
    assert np.abs(spec.observables["a"] - rk4.observables["a"]).max() < 1e-6
    for a, b in zip(spec.states, rk4.states):
        assert np.abs(a - b).max() < 1e-6
    # both preserve the trace
    assert abs(np.trace(spec.states[-1]) - 1.0) < 1e-8
    assert abs(np.trace(rk4.states[-1]) - 1.0) < 1e-8


def test_oscillation_lifetime_grows_with_size():
    # the amplitude signal at larger n_ex keeps oscillating longer
    envelopes = {}
    for n_ex in (2.0, 6.0):
        params = ModelParams.from_ratios(n_ex=n_ex, delta_ratio=0.1, eta_ratio=0.4)
        space = build_fock_space(int(8 * n_ex) + 16)
        superop = build_rotating_liouvillian(params, space)
        rho0 = coherent_state(space, math.sqrt(n_ex))
        t_grid = np.linspace(0.0, 120.0, 241)
        result = evolve_rotating(rho0, superop, t_grid, observables={"a": space.a})
        envelopes[n_ex] = np.abs(result.observables["a"][-40:]).max() / math.sqrt(n_ex)
    assert envelopes[6.0] > 2.0 * envelopes[2.0]


def test_rotating_rejects_bad_grid(rotating_case):
    _, space, superop, dec = rotating_case
    rho0 = coherent_state(space, 0.5)
    with pytest.raises(UsageError):
        evolve_rotating(rho0, superop, np.array([0.0, 1.0, 0.5]), dec=dec)


def test_lab_free_rotation():
    # gamma -> 0 limit: <a>_L evolves as e^{-i omega0 t}
    params = ModelParams(gamma1=1e-8, gamma2=1e-8, delta=0.1, eta=0.0, omega_s=4.0)
    space = build_fock_space(12)
    rho0 = coherent_state(space, 1.2)
    t_grid = np.linspace(0.0, 2.0 * params.period, 9)
    result = evolve_lab(rho0, params, space, t_grid, observables={"a": space.a})
    expected = 1.2 * np.exp(-1j * params.omega_0 * t_grid)
    assert np.abs(result.observables["a"] - expected).max() < 1e-5


def test_lab_step_resolution_guard():
    params = ModelParams(gamma1=1.0, gamma2=0.2, delta=0.1, eta=0.03, omega_s=4.0)
    space = build_fock_space(8)
    rho0 = coherent_state(space, 0.4)
    with pytest.raises(ResolutionError):
        evolve_lab(rho0, params, space, np.array([0.0, 1.0]), dt=params.period / 50.0)


def test_stroboscopic_map_parity():
    space = build_fock_space(6)
    rho = np.zeros((6, 6), dtype=complex)
    rho[0, 1] = 1.0
    state = DensityMatrix(rho=rho, cutoff=6)
    even = stroboscopic_map(state, 4, space)
    assert np.array_equal(even.rho, rho)
    odd = stroboscopic_map(state, 3, space)
    assert np.array_equal(odd.rho, -rho)


def test_frame_equivalence_small():
    # lab evolution sampled at t = nT equals rotating evolution followed
    # by n parity conjugations: the module's central consistency oracle
    params = ModelParams(gamma1=1.0, gamma2=0.25, delta=0.1, eta=0.1,
                         omega_s=20.0 * math.pi)
    space = build_fock_space(12)
    rho0 = coherent_state(space, 1.1 + 0.4j)
    period = params.period
    n_list = [1, 2, 3, 4, 5]
    t_grid = np.array([0.0] + [n * period for n in n_list])
    lab = evolve_lab(rho0, params, space, t_grid, dt=period / 2000.0,
                     store_states=True)
    superop = build_rotating_liouvillian(params, space)
    rot = evolve_rotating(rho0, superop, t_grid, backend="rk4", store_states=True)
    for i, n in enumerate(n_list, start=1):
        mapped = stroboscopic_map(
            DensityMatrix(rho=rot.states[i], cutoff=12), n, space
        )
        assert trace_distance(lab.states[i], mapped.rho) < 1e-6


def test_stroboscopic_series_stationary(rotating_case):
    params_base, space, superop, dec = rotating_case
    params = ModelParams(
        gamma1=params_base.gamma1, gamma2=params_base.gamma2,
        delta=params_base.delta, eta=params_base.eta, omega_s=20.0 * math.pi,
    )
    rho_ss = steady_state(dec)
    traj = stroboscopic_series(rho_ss, params, space, 50, dec=dec)
    assert np.abs(traj.values - traj.values[0]).max() < 1e-8
    assert traj.frame == "lab_stroboscopic"


def test_stroboscopic_series_quasiperiodic_tone():
    # limit-cycle regime: the stroboscopic record hosts a discrete tone at
    # the incommensurate fraction Omega T / 2 pi
    params = ModelParams.from_ratios(
        n_ex=6.0, delta_ratio=0.1, eta_ratio=0.4, omega_s=2.0
    )
    space = build_fock_space(40)
    superop = build_rotating_liouvillian(params, space)
    dec = diagonalize(superop)
    rho0 = coherent_state(space, math.sqrt(params.n_ex))
    n_max = 4096
    traj = stroboscopic_series(rho0, params, space, n_max, dec=dec)
    signal = traj.values - traj.values.mean()
    spectrum = np.abs(np.fft.fft(signal))
    peak = np.argmax(spectrum) / n_max  # frequency in cycles per period
    omega = limit_cycle_frequency(params)
    # <a> couples to parity-odd modes, whose (-1)^n factor shifts the
    # rotating-frame tone Omega T/2pi by half a cycle
    fraction = (omega * params.period / (2.0 * math.pi)) % 1.0
    expected = (0.5 + fraction) % 1.0
    distance = min(abs(peak - expected), abs(peak - ((0.5 - fraction) % 1.0)))
    # tolerance covers the finite-size shift of the eigenfrequency from
    # the mean-field Omega at this small n_ex
    assert distance < 5e-3
    # incommensurate with the drive: not an integer or half-integer tone
    assert min(fraction, 1.0 - fraction) > 0.01
    assert abs(expected - 0.5) > 0.01


def test_occupation_scan_limits():
    rows = stationary_occupation_scan([20.0], [0.0], delta_ratio=0.1)
    assert rows[0]["occupation_over_n_ex"] == pytest.approx(1.0, rel=0.05)


def test_occupation_scan_collapses_to_meanfield():
    eta_grid = np.linspace(0.0, 2.0, 6)
    delta = 0.1

    def mf_curve(eta_ratio):
        eta = eta_ratio * delta / 2.0
        if 4 * eta**2 <= delta**2:
            return 1.0
        return 1.0 + 2.0 * math.sqrt(4 * eta**2 - delta**2)

    reference = np.array([mf_curve(er) for er in eta_grid])
    distances = []
    for n_ex in (1.0, 5.0, 10.0, 20.0):
        rows = stationary_occupation_scan([n_ex], eta_grid, delta_ratio=delta)
        curve = np.array([row["occupation_over_n_ex"] for row in rows])
        distances.append(np.abs(curve - reference).max())
    assert all(b < a for a, b in zip(distances, distances[1:]))
