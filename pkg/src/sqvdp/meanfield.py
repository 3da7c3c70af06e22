"""Classical (mean-field) limit of the oscillator.

Amplitude equation, bifurcation classification, limit-cycle frequency and
average intensity, bistable fixed points, and the tilted washboard phase
potential that the semiclassical modules build on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError, UsageError, WrongRegimeError
from .params import ModelParams

__all__ = [
    "Bifurcation",
    "MeanFieldTrajectory",
    "classify_bifurcation",
    "mf_rhs",
    "integrate_mf",
    "limit_cycle_frequency",
    "fixed_points",
    "mf_average_intensity",
    "phase_potential",
    "phase_potential_extrema",
]


@dataclass(frozen=True)
class Bifurcation:
    """Classified dynamical regime of the classical flow."""

    regime: str  # "limit_cycle" | "bistable" | "critical"
    eta_c: float
    omega: float | None = None
    fixed_points: tuple[complex, complex] | None = None


@dataclass(frozen=True)
class MeanFieldTrajectory:
    times: np.ndarray
    alpha: np.ndarray

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.alpha) ** 2

    @property
    def phase(self) -> np.ndarray:
        return np.mod(np.angle(self.alpha), 2.0 * math.pi)


def mf_rhs(alpha: complex, params: ModelParams) -> complex:
    """d(alpha)/dt = -i delta alpha + (gamma1/2) alpha - gamma2 |alpha|^2 alpha - 2 eta alpha*."""
    return (
        -1j * params.delta * alpha
        + 0.5 * params.gamma1 * alpha
        - params.gamma2 * abs(alpha) ** 2 * alpha
        - 2.0 * params.eta * np.conj(alpha)
    )


def classify_bifurcation(params: ModelParams) -> Bifurcation:
    """Limit cycle below eta_c = |delta|/2, bistable above, critical at it."""
    eta_c = params.eta_c
    if params.eta < eta_c:
        return Bifurcation("limit_cycle", eta_c, omega=limit_cycle_frequency(params))
    if params.eta > eta_c:
        return Bifurcation("bistable", eta_c, fixed_points=fixed_points(params))
    return Bifurcation("critical", eta_c)


def limit_cycle_frequency(params: ModelParams) -> float:
    """Fundamental frequency Omega = sqrt(delta^2 - 4 eta^2) of the cycle."""
    disc = params.delta**2 - 4.0 * params.eta**2
    if disc <= 0:
        raise WrongRegimeError(
            f"no limit cycle at eta={params.eta} >= eta_c={params.eta_c}"
        )
    return math.sqrt(disc)


def fixed_points(params: ModelParams) -> tuple[complex, complex]:
    """Bistable pair alpha_+- = +-sqrt(N_ss) e^{i phi_ss} (eta > eta_c).

    N_ss = gamma1/(2 gamma2) + sqrt(4 eta^2 - delta^2)/gamma2 and
    2 phi_ss = pi - arcsin(delta / 2 eta), principal branch.
    """
    disc = 4.0 * params.eta**2 - params.delta**2
    if disc <= 0:
        raise WrongRegimeError(
            f"no bistable fixed points at eta={params.eta} <= eta_c={params.eta_c}"
        )
    n_ss = params.n_ex + math.sqrt(disc) / params.gamma2
    phi_ss = 0.5 * (math.pi - math.asin(params.delta / (2.0 * params.eta)))
    alpha_plus = math.sqrt(n_ss) * np.exp(1j * phi_ss)
    return alpha_plus, -alpha_plus


def mf_average_intensity(params: ModelParams, verify: bool = False) -> float:
    """Period-averaged intensity of the cycle: gamma1/(2 gamma2) = n_ex.

    With ``verify=True`` the value is cross-checked by time-averaging the
    integrated cycle over one period (requires eta < eta_c).
    """
    n_bar = params.n_ex
    if verify:
        omega = limit_cycle_frequency(params)
        period = 2.0 * math.pi / omega
        dt = min(1e-2 / params.gamma1, period / 2000.0)
        # settle onto the cycle, then average one period
        settle = integrate_mf(math.sqrt(n_bar) + 0j, params, 30.0 / params.gamma1, dt)
        traj = integrate_mf(settle.alpha[-1], params, period, dt)
        avg = float(np.mean(traj.intensity))
        if not math.isclose(avg, n_bar, rel_tol=5e-2):
            raise WrongRegimeError(
                f"period-averaged intensity {avg:.4g} far from n_ex {n_bar:.4g}"
            )
    return n_bar


def integrate_mf(
    initial: complex,
    params: ModelParams,
    t_end: float,
    dt: float,
    t_start: float = 0.0,
) -> MeanFieldTrajectory:
    """Fixed-step RK4 integration of the amplitude equation.

    Fixed step keeps trajectories bit-reproducible across runs; dt must
    satisfy dt <= 1e-2/gamma1 (stability guard at these stiffness levels).
    Blows up -> InstabilityError rather than NaNs.
    """
    if dt > 1e-2 / params.gamma1:
        raise UsageError(f"dt={dt} exceeds stability guard 1e-2/gamma1")
    n_steps = int(round((t_end - t_start) / dt))
    times = t_start + dt * np.arange(n_steps + 1)
    alpha = np.empty(n_steps + 1, dtype=np.complex128)
    alpha[0] = initial
    guard = 4.0 * params.n_ex + 4.0 * abs(initial) ** 2 + 16.0
    z = complex(initial)
    for k in range(n_steps):
        k1 = mf_rhs(z, params)
        k2 = mf_rhs(z + 0.5 * dt * k1, params)
        k3 = mf_rhs(z + 0.5 * dt * k2, params)
        k4 = mf_rhs(z + dt * k3, params)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if abs(z) ** 2 > guard:
            raise InstabilityError(
                f"|alpha|^2 = {abs(z)**2:.3g} left the trust region at step {k}; "
                "reduce dt"
            )
        alpha[k + 1] = z
    return MeanFieldTrajectory(times=times, alpha=alpha)


def phase_potential(phi, params: ModelParams):
    """Tilted washboard V(phi) = delta phi + eta cos(2 phi).

    The deterministic phase flow is phi' = -V'(phi).
    """
    phi = np.asarray(phi, dtype=float)
    out = params.delta * phi + params.eta * np.cos(2.0 * phi)
    return out if out.ndim else float(out)


def phase_potential_extrema(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """(minima, maxima) of V in [0, 2 pi); exist only for eta > eta_c.

    Solves sin(2 phi) = delta / (2 eta) in closed form and classifies by
    the sign of V'' = -4 eta cos(2 phi).
    """
    if params.eta <= params.eta_c or params.eta == 0:
        raise WrongRegimeError(
            f"V has no critical points at eta={params.eta} <= eta_c={params.eta_c}"
        )
    s = math.asin(params.delta / (2.0 * params.eta))
    # cos(2 phi) < 0 branch: minima; cos(2 phi) > 0 branch: maxima
    minima = np.mod([(math.pi - s) / 2.0, (3.0 * math.pi - s) / 2.0], 2.0 * math.pi)
    maxima = np.mod([s / 2.0, s / 2.0 + math.pi], 2.0 * math.pi)
    return np.sort(minima), np.sort(maxima)
