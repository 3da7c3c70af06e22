"""Semiclassical phase/intensity fluctuation model.

The master equation reduces, for small detuning and squeezing, to two
decoupled one-dimensional Fokker-Planck problems: an Ornstein-Uhlenbeck
process for intensity fluctuations (solvable in closed form) and a phase
process on the circle governed by drift -V'(phi) and diffusion
3/(8 n_ex), V being the tilted washboard potential.

Expanding phase eigenfunctions in Fourier modes turns the phase operator
into two independent tridiagonal recurrences, one per parity of the
Fourier index: functions built from even (odd) modes are symmetric
(antisymmetric) under phi -> phi + pi.  Everything in this module works
in dimensionless units (time in 1/gamma1); results are scaled back by
gamma1 at the API boundary.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ._ep import EPResult, bisect_imag_crossing
from .errors import UsageError, WrongRegimeError
from .params import ModelParams

__all__ = [
    "PhaseFPOperator",
    "PerturbationSplit",
    "KramersRates",
    "intensity_eigenvalues",
    "ou_stationary_std",
    "intensity_eigenfunction",
    "build_phase_fp",
    "phase_spectrum",
    "phase_gap",
    "perturbation_split",
    "perturbative_cn",
    "kramers_rates",
    "detect_ep_semiclassical",
]

DEFAULT_TRUNCATION = 64


# ---------------------------------------------------------------------------
# intensity sector: Ornstein-Uhlenbeck, closed form


def intensity_eigenvalues(m_max: int, gamma1: float = 1.0) -> np.ndarray:
    """Relaxation eigenvalues -m gamma1 of the intensity fluctuations."""
    if m_max < 0:
        raise UsageError(f"m_max must be >= 0, got {m_max}")
    return -gamma1 * np.arange(m_max + 1, dtype=float)


def ou_stationary_std(n_ex: float) -> float:
    """Standard deviation sqrt(3 n_ex / 2) of stationary intensity fluctuations."""
    return math.sqrt(1.5 * n_ex)


def intensity_eigenfunction(n: int, delta_n, n_ex: float) -> np.ndarray:
    """Right eigenfunction psi_n(deltaN) of the intensity operator.

    Hermite function with Gaussian weight w = 1/(3 n_ex); psi_0 is the
    stationary distribution and integrates to one.
    """
    delta_n = np.asarray(delta_n, dtype=float)
    w = 1.0 / (3.0 * n_ex)
    x = delta_n * math.sqrt(w)
    herm = np.polynomial.hermite.hermval(x, [0.0] * n + [1.0])
    norm = math.sqrt(w / (2.0**n * math.factorial(n) * math.pi))
    return norm * np.exp(-w * delta_n**2) * herm


# ---------------------------------------------------------------------------
# phase sector: tridiagonal Fourier recurrences


@dataclass(frozen=True)
class PhaseFPOperator:
    """Truncated matrix of the phase operator in one parity sector.

    odd sector: rows are Fourier indices 2q+1 with q = -(M+1)..M, size
    2M+2.  even sector: one sign block q = 0..M (size M+1); the q < 0
    block is its complex conjugate and the q = 0 row decouples, which is
    where the single zero eigenvalue (uniform stationary phase
    distribution) lives.
    """

    sector: str  # "even" | "odd"
    m_trunc: int
    matrix: np.ndarray
    delta_tilde: float
    eta_tilde: float
    n_ex: float
    gamma1: float = 1.0

    @property
    def fourier_indices(self) -> np.ndarray:
        """Fourier index (the q of e^{i q phi}) of each matrix row."""
        if self.sector == "odd":
            q = np.arange(-(self.m_trunc + 1), self.m_trunc + 1)
            return 2 * q + 1
        return 2 * np.arange(self.m_trunc + 1)


@dataclass(frozen=True)
class PerturbationSplit:
    """Drift/diffusion split Phi = H + (1/n_ex) V of a phase operator.

    H carries the mean-field content (detuning and squeezing only); V is
    the parameter-independent diagonal diffusion part.
    """

    h_matrix: np.ndarray
    v_matrix: np.ndarray
    n_ex: float


def _drift_diffusion(sector: str, m_trunc: int, delta_tilde: float, eta_tilde: float):
    """Tridiagonal drift matrix H and diagonal diffusion V for one sector.

    Row for Fourier index k couples to k - 2 (coefficient -eta_tilde k)
    and k + 2 (coefficient +eta_tilde k) with diagonal i delta_tilde k;
    diffusion contributes -(3/8) k^2 on the diagonal.  Truncation closes
    the recurrence by dropping out-of-range neighbours.
    """
    if sector == "odd":
        q = np.arange(-(m_trunc + 1), m_trunc + 1)
        k = 2 * q + 1
    elif sector == "even":
        k = 2 * np.arange(m_trunc + 1)
    else:
        raise UsageError(f"unknown sector {sector!r}")
    size = k.size
    h = np.zeros((size, size), dtype=np.complex128)
    h[np.diag_indices(size)] = 1j * delta_tilde * k
    rows = np.arange(size - 1)
    h[rows + 1, rows] = -eta_tilde * k[1:]  # couples k to k-2
    h[rows, rows + 1] = eta_tilde * k[:-1]  # couples k to k+2
    v = np.diag(-(3.0 / 8.0) * k.astype(float) ** 2 + 0j)
    return h, v


def build_phase_fp(
    params: ModelParams,
    sector: str,
    m_trunc: int = DEFAULT_TRUNCATION,
    check_convergence: bool = False,
) -> PhaseFPOperator:
    """Truncated phase Fokker-Planck matrix in the requested parity sector.

    ``check_convergence=True`` rebuilds at M+16 and warns when the six
    leading eigenvalues still move by more than 1e-10 gamma1.
    """
    if m_trunc < 8:
        raise UsageError(f"truncation M must be >= 8, got {m_trunc}")
    h, v = _drift_diffusion(sector, m_trunc, params.delta_tilde, params.eta_tilde)
    op = PhaseFPOperator(
        sector=sector,
        m_trunc=m_trunc,
        matrix=h + v / params.n_ex,
        delta_tilde=params.delta_tilde,
        eta_tilde=params.eta_tilde,
        n_ex=params.n_ex,
        gamma1=params.gamma1,
    )
    if check_convergence:
        bigger = build_phase_fp(params, sector, m_trunc + 16)
        drift = np.max(
            np.abs(phase_spectrum(op)[:6] - phase_spectrum(bigger)[:6])
        )
        if drift > 1e-10 * params.gamma1:
            warnings.warn(
                f"phase-FP truncation M={m_trunc} not converged: leading "
                f"eigenvalues move by {drift:.2e} at M+16",
                stacklevel=2,
            )
    return op


def _sort_spectrum(values: np.ndarray) -> np.ndarray:
    # keys quantized so that sub-1e-12 eigensolver noise cannot flip the
    # deterministic (-Re, |Im|, Im) ordering of conjugate pairs
    order = np.lexsort(
        (
            np.round(values.imag, 12),
            np.round(np.abs(values.imag), 12),
            np.round(-values.real, 12),
        )
    )
    return values[order]


def phase_spectrum(op: PhaseFPOperator, include_conjugate_block: bool = True) -> np.ndarray:
    """Eigenvalues of the phase operator, sorted by decreasing real part.

    For the even sector the stored matrix is the q >= 0 block; with
    ``include_conjugate_block`` the conjugate eigenvalues of the q < 0
    block are appended so the reported spectrum is conjugation symmetric.
    Values are returned in the units of ``op.gamma1``.
    """
    w = sla.eigvals(op.matrix)
    if op.sector == "even" and include_conjugate_block:
        # exclude the single decoupled zero mode from mirroring
        zero_pos = int(np.argmin(np.abs(w)))
        mirrored = np.delete(w, zero_pos).conj()
        w = np.concatenate([w, mirrored])
    return _sort_spectrum(w) * op.gamma1


def phase_gap(params: ModelParams, m_trunc: int = DEFAULT_TRUNCATION) -> float:
    """Smallest nonzero decay rate over both parity sectors."""
    rates = []
    for sector in ("even", "odd"):
        w = phase_spectrum(build_phase_fp(params, sector, m_trunc))
        decay = -w.real
        decay = decay[decay > 1e-13 * params.gamma1]
        if decay.size:
            rates.append(decay.min())
    return min(rates)


def perturbation_split(op: PhaseFPOperator) -> PerturbationSplit:
    """Exact split Phi = H + (1/n_ex) V of a built operator."""
    h, v = _drift_diffusion(op.sector, op.m_trunc, op.delta_tilde, op.eta_tilde)
    return PerturbationSplit(h_matrix=h, v_matrix=v, n_ex=op.n_ex)


def perturbative_cn(
    params: ModelParams,
    m_trunc: int = DEFAULT_TRUNCATION,
    n_modes: int = 4,
) -> tuple[np.ndarray, list[str]]:
    """First-order decay constants c_n of the leading phase modes.

    In the limit-cycle regime the drift matrix H has eigenvalues at (very
    nearly) integer multiples of i Omega; diffusion enters as V/n_ex and
    shifts mode n by nu_n^(1) = <L_n| V |R_n> / <L_n|R_n> at first order,
    so nu_n ~ i n Omega - c_n / n_ex with c_n = -nu_n^(1).  Odd n comes
    from the odd-parity sector, even n from the even one.

    Returns (c_1..c_n_modes, diagnostics); a diagnostic line is emitted
    instead of raising when some nu^(1) has a relative imaginary part
    above 1e-6 (it is observed real and negative, not proven).
    """
    from .meanfield import limit_cycle_frequency

    if params.eta >= params.eta_c:
        raise WrongRegimeError(
            "perturbative ladder requires the limit-cycle regime (eta < eta_c)"
        )
    omega_tilde = limit_cycle_frequency(params) / params.gamma1

    sector_data = {}
    for sector in ("odd", "even"):
        h, v = _drift_diffusion(sector, m_trunc, params.delta_tilde, params.eta_tilde)
        if sector == "even":
            h, v = h[1:, 1:], v[1:, 1:]  # drop the decoupled stationary row
        w, vl, vr = sla.eig(h, left=True, right=True)
        sector_data[sector] = (w, vl, vr, v)

    c_out = np.empty(n_modes)
    diagnostics: list[str] = []
    for n in range(1, n_modes + 1):
        sector = "odd" if n % 2 else "even"
        w, vl, vr, v = sector_data[sector]
        target = 1j * n * omega_tilde
        j = int(np.argmin(np.abs(w - target)))
        if abs(w[j] - target) > 0.2 * omega_tilde:
            diagnostics.append(
                f"mode n={n}: drift eigenvalue {w[j]:.4g} far from target "
                f"{target:.4g}; truncation edge or near-critical regime"
            )
        overlap = vl[:, j].conj() @ vr[:, j]
        nu1 = (vl[:, j].conj() @ (v @ vr[:, j])) / overlap
        if abs(nu1.imag) > 1e-6 * abs(nu1):
            diagnostics.append(
                f"mode n={n}: first-order shift {nu1:.6g} has relative "
                f"imaginary part {abs(nu1.imag) / abs(nu1):.2e}"
            )
        c_out[n - 1] = -nu1.real
    return c_out, diagnostics


# ---------------------------------------------------------------------------
# quantum activation


@dataclass(frozen=True)
class KramersRates:
    """Escape rates over the two phase-potential barriers (absolute units).

    ``gamma_gap`` is twice the dominant-direction rate: the two wells sit
    on a circle, so each escape swaps the well populations and the
    relaxation eigenvalue doubles the per-well escape rate.
    """

    gamma_right: float
    gamma_left: float
    gamma_gap: float
    suppression_ratio: float

    @property
    def total_escape_rate(self) -> float:
        """Per-well escape rate (the rate at which jumps are observed)."""
        return self.gamma_right + self.gamma_left


def kramers_rates(params: ModelParams) -> KramersRates:
    """Activation rates over the washboard barriers for eta > eta_c.

    Small-noise escape-rate formula with diffusion D = 3/(8 n_ex): the
    barrier heights differ by |delta| pi (the tilt over one half period),
    so one direction is exponentially suppressed.
    """
    if params.eta <= params.eta_c:
        raise WrongRegimeError(
            f"activation requires eta > eta_c, got eta={params.eta}, "
            f"eta_c={params.eta_c}"
        )
    dt_, et_ = abs(params.delta_tilde), params.eta_tilde
    root = math.sqrt(4.0 * et_**2 - dt_**2)
    prefactor = root / math.pi  # (1/2pi) sqrt(|V''_max| V''_min) = C/2
    common = root + dt_ * math.asin(dt_ / (2.0 * et_))
    scale = 8.0 * params.n_ex / 3.0
    uphill = prefactor * math.exp(-scale * (common + dt_ * math.pi / 2.0))
    downhill = prefactor * math.exp(-scale * (common - dt_ * math.pi / 2.0))
    if params.delta >= 0:
        gamma_right, gamma_left = uphill, downhill
    else:
        gamma_right, gamma_left = downhill, uphill
    return KramersRates(
        gamma_right=gamma_right * params.gamma1,
        gamma_left=gamma_left * params.gamma1,
        gamma_gap=2.0 * downhill * params.gamma1,
        suppression_ratio=math.exp(-scale * dt_ * math.pi),
    )


# ---------------------------------------------------------------------------
# exceptional point of the phase operator


def _leading_pair(op: PhaseFPOperator) -> np.ndarray:
    w = phase_spectrum(op, include_conjugate_block=False)
    return w[:2]


def detect_ep_semiclassical(
    params_base: ModelParams,
    eta_bracket: tuple[float, float],
    m_trunc: int = DEFAULT_TRUNCATION,
    rel_tol: float = 1e-4,
) -> EPResult:
    """Locate the collision of the two leading odd-sector eigenvalues.

    Bisection on eta between a complex-pair end and a real-pair end of the
    bracket; cheap enough (tridiagonal) to run up to n_ex = 1e4.
    """

    def leading_imag(eta: float) -> float:
        op = build_phase_fp(params_base.with_eta(eta), "odd", m_trunc)
        return abs(_leading_pair(op)[0].imag)

    result = bisect_imag_crossing(
        leading_imag, eta_bracket[0], eta_bracket[1], rel_tol=rel_tol,
        scale=params_base.gamma1,
    )
    op = build_phase_fp(params_base.with_eta(result.eta_ep), "odd", m_trunc)
    w, vr = sla.eig(op.matrix)
    order = np.argsort(-w.real)
    r1, r2 = vr[:, order[0]], vr[:, order[1]]
    coalescence = abs(r1.conj() @ r2) / (np.linalg.norm(r1) * np.linalg.norm(r2))
    return result.with_coalescence(float(coalescence))
