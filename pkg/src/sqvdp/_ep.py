"""Shared bisection for exceptional-point localisation.

Both the Liouvillian and the phase Fokker-Planck operator exhibit the
same signature: the two leading eigenvalues form a complex-conjugate pair
on one side of the collision and are both real on the other.  The
crossing is located by bisecting on |Im| of the leading eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from .errors import BracketError

__all__ = ["EPResult", "bisect_imag_crossing"]

# |Im| below this (in units of the rate scale) counts as "real"
IMAG_TOL = 1e-9


@dataclass(frozen=True)
class EPResult:
    eta_ep: float
    eta_lo: float
    eta_hi: float
    iterations: int
    imag_lo: float
    imag_hi: float
    coalescence: float | None = None

    def with_coalescence(self, value: float) -> "EPResult":
        return replace(self, coalescence=value)


def bisect_imag_crossing(
    leading_imag: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-4,
    scale: float = 1.0,
    max_iter: int = 80,
) -> EPResult:
    """Bisect until the complex->real crossing is localised.

    ``leading_imag(eta)`` must return |Im| of the leading eigenvalue.  The
    bracket must straddle exactly one collision: complex pair at ``lo``,
    real pair at ``hi``.  Stops when (hi - lo) / eta < rel_tol.
    """
    tol = IMAG_TOL * scale
    imag_lo = leading_imag(lo)
    imag_hi = leading_imag(hi)
    if imag_lo <= tol:
        raise BracketError(
            f"leading pair already real at bracket left end eta={lo} "
            f"(|Im|={imag_lo:.2e})"
        )
    if imag_hi > tol:
        raise BracketError(
            f"leading pair still complex at bracket right end eta={hi} "
            f"(|Im|={imag_hi:.2e})"
        )
    iterations = 0
    while (hi - lo) > rel_tol * max(abs(hi), abs(lo)) and iterations < max_iter:
        mid = 0.5 * (lo + hi)
        if leading_imag(mid) > tol:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return EPResult(
        eta_ep=0.5 * (lo + hi),
        eta_lo=lo,
        eta_hi=hi,
        iterations=iterations,
        imag_lo=imag_lo,
        imag_hi=imag_hi,
    )
