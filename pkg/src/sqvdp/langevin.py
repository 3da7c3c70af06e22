"""Stochastic oracle: Euler-Maruyama ensembles of the semiclassical model.

Three processes are simulated, matching the Langevin reduction of the
master equation:

* phase:       phi' = -delta + 2 eta sin(2 phi) + xi,   <xi xi'> = (3 g1 / 4 n_ex) delta(t-t')
* intensity:   dN' = -gamma1 dN + xi,                   <xi xi'> = 3 g1 n_ex delta(t-t')
* amplitude:   alpha' = mean-field drift + xi_c,        <xi_c xi_c*> = (3 g1 / 2) delta(t-t'), <xi_c xi_c> = 0

The complex-noise normalisation matches the phase-space cross-derivative
diffusion (3 gamma1 / 4) d_a d_a* + c.c.: increments sqrt(3 g1 dt / 4)
(g1 + i g2) with independent unit normals reproduce the phase and
intensity noise strengths above in the polar decomposition.

RNG contract: trajectory i draws its noise from a dedicated generator
seeded with (seed, i), so serial and parallel execution, and both kernel
backends, see identical noise streams.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    InstabilityError,
    InsufficientStatisticsError,
    UsageError,
    WrongRegimeError,
)
from .meanfield import limit_cycle_frequency, phase_potential_extrema
from .params import ModelParams

__all__ = [
    "LangevinConfig",
    "TrajectoryEnsemble",
    "JumpRateEstimate",
    "LifetimeEstimate",
    "simulate_phase",
    "simulate_intensity",
    "simulate_amplitude",
    "estimate_jump_rate",
    "estimate_oscillation_lifetime",
]

# stored floats per noise batch kept under ~64 MB
_BATCH_BUDGET = 8_000_000


@dataclass(frozen=True)
class LangevinConfig:
    """Integration setup shared by all three processes.

    ``dt`` in the same time units as the rates in ModelParams;
    ``store_every`` thins the stored paths (the integration step is
    unchanged).  ``noise=False`` runs the deterministic skeleton, used by
    the mean-field consistency checks.
    """

    dt: float
    n_steps: int
    n_trajectories: int
    seed: int
    store_every: int = 1
    noise: bool = True
    scheme: str = "euler-maruyama"

    def __post_init__(self):
        if self.dt <= 0:
            raise UsageError(f"dt must be positive, got {self.dt}")
        if self.n_trajectories < 1:
            raise UsageError("need at least one trajectory")
        if self.n_steps < 1:
            raise UsageError("need at least one step")
        if self.n_steps % self.store_every != 0:
            raise UsageError("n_steps must be a multiple of store_every")
        if self.scheme != "euler-maruyama":
            raise UsageError(f"unsupported scheme {self.scheme!r}")

    def validate_step(self, params: ModelParams) -> None:
        """Step-size guard: dt <= 1e-3 max(1/gamma1, 1/Omega)."""
        scale = 1.0 / params.gamma1
        if params.eta < params.eta_c:
            scale = max(scale, 1.0 / limit_cycle_frequency(params))
        if self.dt > 1e-3 * scale:
            raise UsageError(
                f"dt={self.dt} exceeds the guard 1e-3 * max(1/gamma1, 1/Omega)"
                f" = {1e-3 * scale:.3g}"
            )

    @property
    def n_stored(self) -> int:
        return self.n_steps // self.store_every + 1

    @property
    def t_end(self) -> float:
        return self.dt * self.n_steps

    def times(self) -> np.ndarray:
        return self.dt * self.store_every * np.arange(self.n_stored)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Stored sample paths plus full provenance.

    ``values`` has shape (n_trajectories, n_stored); phases are stored
    unwrapped.  Identical (seed, config, params) reproduce the ensemble
    bit for bit on a given kernel backend.
    """

    kind: str  # "phase" | "intensity" | "amplitude"
    times: np.ndarray
    values: np.ndarray
    config: LangevinConfig
    params: ModelParams
    backend: str = field(default_factory=_kernels.active_backend)


def _noise_block(seed: int, traj_indices: np.ndarray, n_steps: int, n_per_step: int):
    """Standard-normal increments for a batch of trajectories."""
    block = np.empty((traj_indices.size, n_steps * n_per_step))
    for row, idx in enumerate(traj_indices):
        gen = np.random.default_rng(np.random.SeedSequence((seed, int(idx))))
        block[row] = gen.standard_normal(n_steps * n_per_step)
    return block


def _batched(n_trajectories: int, n_steps: int, n_per_step: int = 1):
    batch = max(1, _BATCH_BUDGET // max(1, n_steps * n_per_step))
    start = 0
    while start < n_trajectories:
        stop = min(start + batch, n_trajectories)
        yield np.arange(start, stop)
        start = stop


def simulate_phase(
    params: ModelParams,
    config: LangevinConfig,
    initial_phase: float = 0.0,
) -> TrajectoryEnsemble:
    """Ensemble of unwrapped phase paths."""
    config.validate_step(params)
    amp = (
        math.sqrt(0.75 * params.gamma1 / params.n_ex * config.dt)
        if config.noise
        else 0.0
    )
    out = np.empty((config.n_trajectories, config.n_stored))
    for idx in _batched(config.n_trajectories, config.n_steps):
        noise = _noise_block(config.seed, idx, config.n_steps, 1)
        _kernels.phase_steps(
            np.full(idx.size, initial_phase),
            params.delta,
            params.eta,
            noise,
            amp,
            config.dt,
            config.store_every,
            out[idx[0] : idx[-1] + 1],
        )
    return TrajectoryEnsemble("phase", config.times(), out, config, params)


def simulate_intensity(
    params: ModelParams,
    config: LangevinConfig,
    initial_delta_n: float = 0.0,
) -> TrajectoryEnsemble:
    """Ensemble of intensity-fluctuation paths (Ornstein-Uhlenbeck)."""
    config.validate_step(params)
    amp = (
        math.sqrt(3.0 * params.gamma1 * params.n_ex * config.dt)
        if config.noise
        else 0.0
    )
    out = np.empty((config.n_trajectories, config.n_stored))
    for idx in _batched(config.n_trajectories, config.n_steps):
        noise = _noise_block(config.seed, idx, config.n_steps, 1)
        _kernels.intensity_steps(
            np.full(idx.size, initial_delta_n),
            params.gamma1,
            noise,
            amp,
            config.dt,
            config.store_every,
            out[idx[0] : idx[-1] + 1],
        )
    return TrajectoryEnsemble("intensity", config.times(), out, config, params)


def simulate_amplitude(
    params: ModelParams,
    config: LangevinConfig,
    initial_alpha: complex,
) -> TrajectoryEnsemble:
    """Ensemble of complex-amplitude paths with the mean-field drift."""
    config.validate_step(params)
    amp = math.sqrt(0.75 * params.gamma1 * config.dt) if config.noise else 0.0
    guard = 10.0 * params.n_ex + 2.0 * abs(initial_alpha) ** 2
    out = np.empty((config.n_trajectories, config.n_stored), dtype=np.complex128)
    for idx in _batched(config.n_trajectories, config.n_steps, n_per_step=2):
        noise = _noise_block(config.seed, idx, config.n_steps, 2)
        noise_re = np.ascontiguousarray(noise[:, : config.n_steps])
        noise_im = np.ascontiguousarray(noise[:, config.n_steps :])
        blown = _kernels.amplitude_steps(
            np.full(idx.size, initial_alpha, dtype=np.complex128),
            params.delta,
            params.gamma1,
            params.gamma2,
            params.eta,
            noise_re,
            noise_im,
            amp,
            config.dt,
            config.store_every,
            guard,
            out[idx[0] : idx[-1] + 1],
        )
        if blown >= 0:
            raise InstabilityError(
                f"|alpha|^2 exceeded {guard:.3g} at step {blown}; reduce dt"
            )
    return TrajectoryEnsemble("amplitude", config.times(), out, config, params)


# ---------------------------------------------------------------------------
# estimators

# hysteresis band (rad) around a barrier before a crossing is registered;
# well separation is pi/2 at minimum, so 0.2 cannot double count.
JUMP_HYSTERESIS = 0.2


@dataclass(frozen=True)
class JumpRateEstimate:
    """Well-hopping statistics of a bistable phase ensemble.

    ``rate`` estimates the slowest relaxation rate of the two-well
    dynamics (the quantity the activation formula approximates): the
    inverse time integral of the mean well indicator <sigma(t) sigma(0)>,
    tail-corrected.  Unlike the raw crossing frequency it is insensitive
    to the hysteresis band and to barrier-top recrossings, which at
    moderate barriers bias counting by tens of percent.  ``stderr``
    propagates the scatter of the per-trajectory indicator areas.

    ``jump_frequency`` = crossings / total time is reported alongside,
    with the per-direction counts and their suppression ratio.
    """

    rate: float
    stderr: float
    jump_frequency: float
    n_jumps: int
    n_right: int
    n_left: int
    total_time: float
    directionality: float  # observed suppressed/dominant ratio
    predicted_directionality: float


def count_well_jumps(
    phi: np.ndarray, barrier_phase: float, hysteresis: float = JUMP_HYSTERESIS
) -> tuple[int, int]:
    """(right, left) barrier crossings of one unwrapped path.

    Barriers sit at barrier_phase + k pi.  A crossing only registers once
    the path has cleared the barrier by ``hysteresis``, which removes
    barrier-top jitter.
    """
    x = (phi - barrier_phase) / math.pi
    h = hysteresis / math.pi
    # basin k spans x in (k, k+1); barriers sit at integer x
    cell = math.floor(x[0])
    rights = lefts = 0
    for value in x[1:]:
        while value > cell + 1.0 + h:
            cell += 1
            rights += 1
        while value < cell - h:
            cell -= 1
            lefts += 1
    return rights, lefts


def estimate_jump_rate(ensemble: TrajectoryEnsemble, params: ModelParams) -> JumpRateEstimate:
    """Activation-rate estimate from a bistable phase ensemble.

    Trajectories should start inside one well (the simulation helpers do
    this in the bistable regime).  Crossings are pooled over the whole
    ensemble; below 100 the estimate is returned with a warning, at zero
    it raises with advice.
    """
    if ensemble.kind != "phase":
        raise UsageError("jump-rate estimation needs a phase ensemble")
    if params.eta <= params.eta_c:
        raise WrongRegimeError("jump counting requires the bistable regime")
    _, maxima = phase_potential_extrema(params)
    barrier = float(maxima[0])

    x = (ensemble.values - barrier) / math.pi
    n_traj = x.shape[0]
    dt_store = ensemble.config.dt * ensemble.config.store_every
    rights_i = np.zeros(n_traj, dtype=np.int64)
    lefts_i = np.zeros(n_traj, dtype=np.int64)
    areas = np.zeros(n_traj)
    tails = np.zeros(n_traj)
    _kernels.well_stats(
        np.ascontiguousarray(x), JUMP_HYSTERESIS / math.pi, dt_store,
        rights_i, lefts_i, areas, tails,
    )
    rights = int(rights_i.sum())
    lefts = int(lefts_i.sum())
    n_jumps = rights + lefts
    total_time = ensemble.config.t_end * ensemble.config.n_trajectories
    if n_jumps == 0:
        raise InsufficientStatisticsError(
            "no well-to-well jumps observed; raise n_steps or lower n_ex"
        )
    if n_jumps < 100:
        warnings.warn(
            f"only {n_jumps} jumps observed; error bars are wide", stacklevel=2
        )

    # area method: integral of <sigma(t) sigma(0)> equals amplitude/rate;
    # two tail-correction sweeps account for the finite run length
    rate = 1.0 / max(areas.mean(), dt_store)
    for _ in range(2):
        corrected = areas + tails / rate
        rate = 1.0 / corrected.mean()
    stderr = rate**2 * corrected.std(ddof=1) / math.sqrt(n_traj)

    frequency = n_jumps / total_time
    dominant = max(rights, lefts)
    suppressed = min(rights, lefts)
    kr_ratio = math.exp(-8.0 * params.n_ex * abs(params.delta_tilde) * math.pi / 3.0)
    return JumpRateEstimate(
        rate=rate,
        stderr=stderr,
        jump_frequency=frequency,
        n_jumps=n_jumps,
        n_right=rights,
        n_left=lefts,
        total_time=total_time,
        directionality=suppressed / dominant if dominant else math.nan,
        predicted_directionality=kr_ratio,
    )


@dataclass(frozen=True)
class LifetimeEstimate:
    decay_rate: float
    stderr: float
    fit_window: tuple[float, float]
    order_parameter: np.ndarray
    times: np.ndarray


def estimate_oscillation_lifetime(
    ensemble: TrajectoryEnsemble, params: ModelParams
) -> LifetimeEstimate:
    """Decay rate of |E[e^{i phi(t)}]| across a limit-cycle phase ensemble.

    The synchronisation order parameter decays at the rate of the leading
    phase eigenmode, gamma1 c_1 / n_ex for large n_ex.  Fitted on
    log|E[e^{i phi}]| over the window where the signal is clear of both
    the initial transient and the ensemble noise floor.
    """
    if ensemble.kind != "phase":
        raise UsageError("lifetime estimation needs a phase ensemble")
    if params.eta >= params.eta_c:
        raise WrongRegimeError("oscillation lifetime requires eta < eta_c")
    order = np.abs(np.mean(np.exp(1j * ensemble.values), axis=0))
    times = ensemble.times
    floor = 3.0 / math.sqrt(ensemble.config.n_trajectories)
    usable = order > max(floor, 1e-3)
    # drop the earliest tenth to let the envelope settle onto one mode
    usable[: max(1, order.size // 10)] = False
    if usable.sum() < 8:
        raise InsufficientStatisticsError(
            "order parameter decays below the ensemble noise floor too fast; "
            "increase n_trajectories or shorten the run",
        )
    t_fit = times[usable]
    y = np.log(order[usable])
    coeffs, cov = np.polyfit(t_fit, y, 1, cov=True)
    return LifetimeEstimate(
        decay_rate=-coeffs[0],
        stderr=float(np.sqrt(cov[0, 0])),
        fit_window=(float(t_fit[0]), float(t_fit[-1])),
        order_parameter=order,
        times=times,
    )
