"""Physical parameters of the squeezed quantum van der Pol oscillator.

The model is fixed by four rates/frequencies: linear amplification
``gamma1``, two-boson dissipation ``gamma2``, detuning ``delta`` between
the oscillator and the co-rotating frame, and squeezing strength ``eta``.
``omega_s`` (half the drive frequency) only enters lab-frame dynamics.

Everything downstream is controlled by two dimensionless ratios plus the
mean-field excitation number ``n_ex = gamma1 / (2 gamma2)``, so the
preferred constructor is :meth:`ModelParams.from_ratios`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import MissingDriveFrequencyError, UsageError

__all__ = ["ModelParams"]


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter set; rates in units of inverse time.

    Attributes
    ----------
    gamma1 : linear amplification rate (> 0).
    gamma2 : two-boson dissipation rate (> 0).
    delta : detuning of the oscillator from the rotating frame.
    eta : squeezing strength (>= 0).
    omega_s : half the squeezing drive frequency; 0 means "rotating
        frame only" and lab-frame operations will refuse to run.
    """

    gamma1: float
    gamma2: float
    delta: float
    eta: float
    omega_s: float = 0.0

    def __post_init__(self):
        if self.gamma1 <= 0:
            raise UsageError(f"gamma1 must be positive, got {self.gamma1}")
        if self.gamma2 <= 0:
            raise UsageError(f"gamma2 must be positive, got {self.gamma2}")
        if self.eta < 0:
            raise UsageError(f"eta must be non-negative, got {self.eta}")

    @classmethod
    def from_ratios(
        cls,
        n_ex: float,
        delta_ratio: float = 0.1,
        eta_ratio: float | None = None,
        eta: float | None = None,
        gamma1: float = 1.0,
        omega_s: float = 0.0,
    ) -> "ModelParams":
        """Build parameters from the dimensionless ratios used throughout.

        ``delta_ratio`` is delta/gamma1 and ``eta_ratio`` is eta/eta_c with
        eta_c = |delta|/2.  Exactly one of ``eta_ratio``/``eta`` must be
        given.  gamma2 is derived from ``n_ex`` = gamma1/(2 gamma2).
        """
        if n_ex <= 0:
            raise UsageError(f"n_ex must be positive, got {n_ex}")
        if (eta_ratio is None) == (eta is None):
            raise UsageError("give exactly one of eta_ratio or eta")
        delta = delta_ratio * gamma1
        if eta is None:
            eta = eta_ratio * abs(delta) / 2.0
        return cls(
            gamma1=gamma1,
            gamma2=gamma1 / (2.0 * n_ex),
            delta=delta,
            eta=float(eta),
            omega_s=omega_s,
        )

    @property
    def n_ex(self) -> float:
        """Mean-field excitation number gamma1 / (2 gamma2)."""
        return self.gamma1 / (2.0 * self.gamma2)

    @property
    def eta_c(self) -> float:
        """Critical squeezing |delta| / 2 separating the two phases."""
        return abs(self.delta) / 2.0

    @property
    def eta_ratio(self) -> float:
        """eta / eta_c; infinite when delta = 0 and eta > 0."""
        if self.eta_c == 0.0:
            return math.inf if self.eta > 0 else 0.0
        return self.eta / self.eta_c

    @property
    def delta_tilde(self) -> float:
        """Detuning in units of gamma1."""
        return self.delta / self.gamma1

    @property
    def eta_tilde(self) -> float:
        """Squeezing strength in units of gamma1."""
        return self.eta / self.gamma1

    @property
    def period(self) -> float:
        """Drive period T = pi / omega_s (lab frame)."""
        if self.omega_s <= 0:
            raise MissingDriveFrequencyError(
                "period is defined only for omega_s > 0"
            )
        return math.pi / self.omega_s

    @property
    def omega_0(self) -> float:
        """Bare oscillator frequency delta + omega_s (lab frame)."""
        return self.delta + self.omega_s

    def with_eta(self, eta: float) -> "ModelParams":
        """Copy with a different squeezing strength (used by EP scans)."""
        return ModelParams(self.gamma1, self.gamma2, self.delta, eta, self.omega_s)

    def as_dict(self) -> dict:
        """Plain-dict form used in artifact provenance headers."""
        return {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "delta": self.delta,
            "eta": self.eta,
            "omega_s": self.omega_s,
            "n_ex": self.n_ex,
            "eta_c": self.eta_c,
        }
