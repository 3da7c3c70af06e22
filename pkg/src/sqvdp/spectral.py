"""Liouvillian eigenanalysis.

Diagonalization runs per parity sector by default: every term of the
generator preserves coherence parity, so the matrix splits into two
blocks of size d^2/2 and the cubic eigensolver cost halves twice.  The
full-matrix path is kept for cross-checks at small cutoff.

Eigenvalue ordering is (-Re, |Im|, Im) lexicographic so output is
deterministic across runs and platforms.  Absolute tolerances below are
stated for gamma1 = 1 and scale with gamma1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._ep import EPResult, bisect_imag_crossing
from .errors import NumericFailureError, UsageError, WrongRegimeError
from .fock import DensityMatrix, FockSpace, build_fock_space, trace_distance
from .liouvillian import (
    Superoperator,
    build_rotating_liouvillian,
    parity_sector_indices,
    restrict_to_indices,
    unvec,
    vec,
)
from .params import ModelParams

__all__ = [
    "SpectralDecomposition",
    "BandStructure",
    "SymmetryBrokenPair",
    "GapInfo",
    "EPScalingFit",
    "diagonalize",
    "sector_eigenvalues",
    "steady_state",
    "steady_state_direct",
    "liouvillian_gap",
    "band_structure",
    "detect_ep",
    "ep_scaling_fit",
    "symmetry_broken_states",
    "trace_distance",
    "spectrum_records",
]

MAX_SUPEROP_DIM = 16384
MAX_SECTOR_DIM = 8192
NORMALIZATION_FLAG_TOL = 1e-6


@dataclass
class _SectorBlock:
    parity: int  # +1 even, -1 odd, 0 = full matrix (per-mode labels instead)
    indices: np.ndarray
    eigenvalues: np.ndarray
    right: np.ndarray | None
    left: np.ndarray | None
    flags: np.ndarray
    mode_parities: np.ndarray | None = None


@dataclass
class SpectralDecomposition:
    """Ordered Liouvillian eigensystem with parity labels.

    Eigenvectors are kept in sector coordinates and expanded to d x d
    matrices on demand via :meth:`right_mode` / :meth:`left_mode` (storing
    every mode densely would square the memory).  ``norm_flags[j]`` marks
    modes whose left/right overlap was below 1e-6 (near an exceptional
    point); those are stored unnormalised.
    """

    eigenvalues: np.ndarray
    parities: np.ndarray
    norm_flags: np.ndarray
    params: ModelParams | None
    cutoff: int
    superop: Superoperator | None
    _blocks: list[_SectorBlock]
    _locator: list[tuple[int, int]]

    @property
    def has_modes(self) -> bool:
        return all(b.right is not None for b in self._blocks)

    def _column(self, j: int, side: str) -> np.ndarray:
        block_id, col = self._locator[j]
        block = self._blocks[block_id]
        mat = block.right if side == "right" else block.left
        if mat is None:
            raise UsageError("decomposition was computed without eigenmodes")
        full = np.zeros(self.cutoff * self.cutoff, dtype=np.complex128)
        full[block.indices] = mat[:, col]
        return full

    def right_mode(self, j: int) -> np.ndarray:
        """Right eigenmatrix r_j as a d x d array."""
        return unvec(self._column(j, "right"))

    def left_mode(self, j: int) -> np.ndarray:
        """Left eigenmatrix l_j, normalised so Tr[l_j^dag r_j] = 1 unless flagged."""
        return unvec(self._column(j, "left"))

    def steady_index(self) -> int:
        return int(np.argmin(np.abs(self.eigenvalues)))


def _eig_sector(matrix: np.ndarray, want_modes: bool):
    """LAPACK eigensolve with left/right pairing and biorthonormalisation."""
    try:
        if not want_modes:
            return sla.eigvals(matrix), None, None, None
        w, vl, vr = sla.eig(matrix, left=True, right=True)
    except sla.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NumericFailureError(
            "eigensolver failed",
            diagnostics={"size": matrix.shape[0], "norm": float(np.abs(matrix).max())},
        ) from exc
    flags = np.zeros(w.size, dtype=bool)
    for j in range(w.size):
        overlap = vl[:, j].conj() @ vr[:, j]
        if abs(overlap) < NORMALIZATION_FLAG_TOL:
            flags[j] = True  # near-EP: keep unnormalised
        else:
            vl[:, j] /= np.conj(overlap)
    return w, vr, vl, flags


def _sort_key(values: np.ndarray) -> np.ndarray:
    # quantized keys keep the (-Re, |Im|, Im) ordering deterministic under
    # eigensolver noise in otherwise-tied real parts
    return np.lexsort(
        (
            np.round(values.imag, 12),
            np.round(np.abs(values.imag), 12),
            np.round(-values.real, 12),
        )
    )


def diagonalize(
    superop: Superoperator,
    sector_reduce: bool = True,
    want_modes: bool = True,
    sectors: tuple[str, ...] = ("even", "odd"),
) -> SpectralDecomposition:
    """Full eigensystem of a Liouvillian superoperator.

    ``sector_reduce`` (default) diagonalises the even/odd parity blocks
    independently and labels modes by their sector; the full path labels
    each mode by its parity expectation instead.  ``sectors`` restricts
    the reduced path when only one symmetry sector is needed.
    """
    dim = superop.dim
    if dim > MAX_SUPEROP_DIM:
        raise UsageError(f"superoperator dimension {dim} exceeds {MAX_SUPEROP_DIM}")
    blocks: list[_SectorBlock] = []
    if sector_reduce:
        even_idx, odd_idx = parity_sector_indices(superop.cutoff)
        chosen = {"even": (1, even_idx), "odd": (-1, odd_idx)}
        for name in sectors:
            parity, idx = chosen[name]
            if idx.size > MAX_SECTOR_DIM:
                raise UsageError(
                    f"sector size {idx.size} exceeds {MAX_SECTOR_DIM}"
                )
            mat = restrict_to_indices(superop.matrix, idx).toarray()
            w, vr, vl, flags = _eig_sector(mat, want_modes)
            if flags is None:
                flags = np.zeros(w.size, dtype=bool)
            blocks.append(_SectorBlock(parity, idx, w, vr, vl, flags))
    else:
        mat = superop.matrix.toarray()
        w, vr, vl, flags = _eig_sector(mat, want_modes)
        if flags is None:
            flags = np.zeros(w.size, dtype=bool)
        mode_parities = np.zeros(w.size, dtype=np.int8)
        if want_modes:
            from .liouvillian import parity_superoperator

            space = build_fock_space(superop.cutoff)
            pmat = parity_superoperator(space).matrix
            for j in range(w.size):
                v = vr[:, j]
                expect = (v.conj() @ (pmat @ v)) / (v.conj() @ v)
                mode_parities[j] = 1 if expect.real >= 0 else -1
        blocks.append(
            _SectorBlock(0, np.arange(dim), w, vr, vl, flags, mode_parities)
        )

    all_vals = np.concatenate([b.eigenvalues for b in blocks])
    all_pars = np.concatenate(
        [
            b.mode_parities
            if b.mode_parities is not None
            else np.full(b.eigenvalues.size, b.parity, dtype=np.int8)
            for b in blocks
        ]
    )
    all_flags = np.concatenate([b.flags for b in blocks])
    locator = [
        (bi, col) for bi, b in enumerate(blocks) for col in range(b.eigenvalues.size)
    ]
    order = _sort_key(all_vals)
    return SpectralDecomposition(
        eigenvalues=all_vals[order],
        parities=all_pars[order],
        norm_flags=all_flags[order],
        params=superop.params,
        cutoff=superop.cutoff,
        superop=superop,
        _blocks=blocks,
        _locator=[locator[i] for i in order],
    )


def sector_eigenvalues(superop: Superoperator, sector: str) -> np.ndarray:
    """Sorted eigenvalues of one parity block (no eigenvectors).

    The cheap path for gap curves and EP bisection scans.
    """
    even_idx, odd_idx = parity_sector_indices(superop.cutoff)
    idx = even_idx if sector == "even" else odd_idx
    mat = restrict_to_indices(superop.matrix, idx).toarray()
    w = sla.eigvals(mat)
    return w[_sort_key(w)]


# ---------------------------------------------------------------------------
# steady state


def _gamma_scale(params: ModelParams | None) -> float:
    return params.gamma1 if params is not None else 1.0


def steady_state(dec: SpectralDecomposition) -> DensityMatrix:
    """Normalised steady state r_0 / Tr[r_0].

    Requires |lambda_0| < 1e-8 (in gamma1 units); hermitises, checks
    positivity to 1e-9 and the residual ||L rho||_max to 1e-9.
    """
    scale = _gamma_scale(dec.params)
    j0 = dec.steady_index()
    if abs(dec.eigenvalues[j0]) > 1e-8 * scale:
        raise NumericFailureError(
            f"no zero eigenvalue: min |lambda| = {abs(dec.eigenvalues[j0]):.3e}"
        )
    others = np.abs(np.delete(dec.eigenvalues, j0))
    if others.size and others.min() < 1e-8 * scale:
        warnings.warn(
            "near-degenerate zero eigenvalue: steady state may be ill-defined",
            stacklevel=2,
        )
    rho = dec.right_mode(j0)
    rho = (rho + rho.conj().T) / 2.0
    rho = rho / np.trace(rho).real
    w = np.linalg.eigvalsh(rho)
    if w.min() < -1e-9:
        raise NumericFailureError(
            f"steady state not positive: min eigenvalue {w.min():.3e}"
        )
    if dec.superop is not None:
        residual = np.abs(dec.superop.matrix @ vec(rho)).max()
        if residual > 1e-9 * scale:
            raise NumericFailureError(
                f"steady-state residual {residual:.3e} exceeds 1e-9"
            )
    return DensityMatrix(rho=rho, cutoff=dec.cutoff)


def steady_state_direct(params: ModelParams, space: FockSpace) -> DensityMatrix:
    """Steady state from a sparse direct solve of the even parity block.

    Avoids any eigendecomposition: the kernel equation restricted to the
    even sector is solved with the trace condition substituted into the
    row of |0><0|.  Preferred for occupation scans where only rho_ss is
    needed.
    """
    superop = build_rotating_liouvillian(params, space)
    even_idx, _ = parity_sector_indices(space.cutoff)
    mat = restrict_to_indices(superop.matrix, even_idx).tolil()
    d = space.cutoff
    diag_positions = np.searchsorted(even_idx, np.arange(d) * d + np.arange(d))
    # vec index 0 (= |0><0|) is the first even index; overwrite its row
    mat[0, :] = 0.0
    mat[0, diag_positions] = 1.0
    rhs = np.zeros(even_idx.size, dtype=np.complex128)
    rhs[0] = 1.0
    x = spla.spsolve(mat.tocsc(), rhs)
    full = np.zeros(d * d, dtype=np.complex128)
    full[even_idx] = x
    rho = unvec(full)
    rho = (rho + rho.conj().T) / 2.0
    rho = rho / np.trace(rho).real
    residual = np.abs(superop.matrix @ vec(rho)).max()
    if residual > 1e-8 * params.gamma1:
        raise NumericFailureError(f"direct steady-state residual {residual:.3e}")
    return DensityMatrix(rho=rho, cutoff=d)


# ---------------------------------------------------------------------------
# gap and bands


@dataclass(frozen=True)
class GapInfo:
    gap: float
    parity: int
    lambda1: complex
    lambda2: complex | None
    leading_pair_real: bool


def liouvillian_gap(dec: SpectralDecomposition) -> GapInfo:
    """Smallest nonzero decay rate Gamma_1 = -Re lambda_1 and its parity.

    Also reports whether the two leading excitation eigenvalues are both
    real (the signature of the activation regime past the exceptional
    point).
    """
    scale = _gamma_scale(dec.params)
    j0 = dec.steady_index()
    rest = [j for j in range(dec.eigenvalues.size) if j != j0]
    j1 = rest[0]
    lam1 = dec.eigenvalues[j1]
    lam2 = dec.eigenvalues[rest[1]] if len(rest) > 1 else None
    real_pair = abs(lam1.imag) < 1e-9 * scale and (
        lam2 is None or abs(lam2.imag) < 1e-9 * scale
    )
    return GapInfo(
        gap=-lam1.real,
        parity=int(dec.parities[j1]),
        lambda1=lam1,
        lambda2=lam2,
        leading_pair_real=real_pair,
    )


@dataclass(frozen=True)
class BandStructure:
    """Eigenmodes clustered by frequency near multiples of Omega."""

    bands: list[np.ndarray]  # mode indices per cluster, n = 1..n_bands
    band_frequencies: list[float]
    fundamental: list[int]  # lowest-decay mode index per cluster
    fundamental_rates: np.ndarray
    second_rates: np.ndarray
    omega: float
    tolerance: float


def band_structure(
    dec: SpectralDecomposition, omega: float, n_bands: int = 4
) -> BandStructure:
    """Group eigenvalues by |Im lambda| close to n Omega, n = 1..n_bands.

    Clustering tolerance max(0.25 Omega, 3 gamma1 / n_ex): finite-size
    frequency shifts shrink as 1/n_ex but clusters must not merge at
    small Omega.  Modes are assigned to their nearest multiple only, so
    membership is exclusive.
    """
    if omega <= 0:
        raise WrongRegimeError("band clustering requires Omega > 0 (limit cycle)")
    scale = _gamma_scale(dec.params)
    n_ex = dec.params.n_ex if dec.params is not None else 1.0
    tol = max(0.25 * omega, 3.0 * scale / n_ex)
    freq = np.abs(dec.eigenvalues.imag)
    nearest = np.rint(freq / omega).astype(int)
    bands, freqs, fundamental = [], [], []
    for n in range(1, n_bands + 1):
        members = np.flatnonzero((nearest == n) & (np.abs(freq - n * omega) < tol))
        if members.size == 0:
            raise NumericFailureError(
                f"no eigenvalues within {tol:.3g} of band frequency {n * omega:.3g}"
            )
        rates = -dec.eigenvalues[members].real
        best = members[np.argmin(rates)]
        bands.append(members)
        fundamental.append(int(best))
        freqs.append(float(abs(dec.eigenvalues[best].imag)))
    fund_rates = np.array([-dec.eigenvalues[j].real for j in fundamental])
    second = np.empty(n_bands)
    for i, members in enumerate(bands):
        rates = np.sort(-dec.eigenvalues[members].real)
        above = rates[rates > fund_rates[i] * (1.0 + 1e-9) + 1e-12 * scale]
        second[i] = above[0] if above.size else math.nan
    return BandStructure(
        bands=bands,
        band_frequencies=freqs,
        fundamental=fundamental,
        fundamental_rates=fund_rates,
        second_rates=second,
        omega=omega,
        tolerance=tol,
    )


# ---------------------------------------------------------------------------
# exceptional point


def detect_ep(
    params_base: ModelParams,
    space: FockSpace,
    eta_bracket: tuple[float, float],
    rel_tol: float = 1e-4,
    compute_coalescence: bool = False,
) -> EPResult:
    """Bisect the squeezing strength to the collision of lambda_1,2.

    The two leading excitation eigenvalues live in the odd parity sector,
    so each probe is a single odd-block eigenvalue solve.  With
    ``compute_coalescence`` the right eigenvectors of the leading pair
    are compared at eta_EP (their overlap tends to 1 at the collision).
    """

    def leading_imag(eta: float) -> float:
        superop = build_rotating_liouvillian(params_base.with_eta(eta), space)
        w = sector_eigenvalues(superop, "odd")
        return abs(w[0].imag)

    result = bisect_imag_crossing(
        leading_imag,
        eta_bracket[0],
        eta_bracket[1],
        rel_tol=rel_tol,
        scale=params_base.gamma1,
    )
    if compute_coalescence:
        superop = build_rotating_liouvillian(
            params_base.with_eta(result.eta_ep), space
        )
        dec = diagonalize(superop, sectors=("odd",))
        r1 = vec(dec.right_mode(0))
        r2 = vec(dec.right_mode(1))
        overlap = abs(r1.conj() @ r2) / (np.linalg.norm(r1) * np.linalg.norm(r2))
        result = result.with_coalescence(float(overlap))
    return result


@dataclass(frozen=True)
class EPScalingFit:
    beta: float
    beta_stderr: float
    prefactor: float
    n_points: int


def ep_scaling_fit(points: list[tuple[float, float]], eta_c: float) -> EPScalingFit:
    """Least-squares exponent of (eta_EP - eta_c) ~ n_ex^(-beta).

    ``points`` are (n_ex, eta_EP) pairs; at least four, all above eta_c.
    """
    if len(points) < 4:
        raise UsageError(f"need >= 4 points for the scaling fit, got {len(points)}")
    n_ex = np.array([p[0] for p in points], dtype=float)
    gaps = np.array([p[1] for p in points], dtype=float) - eta_c
    if np.any(gaps <= 0):
        raise UsageError("all eta_EP must exceed eta_c for the log-log fit")
    coeffs, cov = np.polyfit(np.log(n_ex), np.log(gaps), 1, cov=True)
    return EPScalingFit(
        beta=-coeffs[0],
        beta_stderr=float(np.sqrt(cov[0, 0])),
        prefactor=float(np.exp(coeffs[1])),
        n_points=len(points),
    )


# ---------------------------------------------------------------------------
# symmetry-broken states


@dataclass(frozen=True)
class SymmetryBrokenPair:
    rho_plus: DensityMatrix
    rho_minus: DensityMatrix
    xi: DensityMatrix
    trace_distance_ss_xi: float
    scale: float  # s in rho_+- = rho_ss +- s h1


def symmetry_broken_states(dec: SpectralDecomposition) -> SymmetryBrokenPair:
    """Emergent parity-broken pair past the exceptional point.

    r_1 (real lambda_1, odd parity) is hermitised, made traceless and
    unit Frobenius norm, then scaled by the largest s keeping both
    rho_ss +- s h_1 positive: the maximal symmetric decomposition.  xi is
    the average of the two density matrices obtained from the positive
    and negative spectral parts of r_1 itself; its trace distance to
    rho_ss vanishes as the gap closes.
    """
    scale = _gamma_scale(dec.params)
    j0 = dec.steady_index()
    rest = [j for j in range(dec.eigenvalues.size) if j != j0]
    j1 = rest[0]
    lam1 = dec.eigenvalues[j1]
    if abs(lam1.imag) > 1e-9 * scale:
        raise WrongRegimeError(
            f"leading excitation eigenvalue is complex ({lam1:.4g}); "
            "symmetry-broken states exist only past the exceptional point"
        )
    if dec.parities[j1] != -1:
        raise WrongRegimeError("leading excitation mode is not parity-odd")
    rho_ss = steady_state(dec).rho
    h1 = dec.right_mode(j1)
    h1 = (h1 + h1.conj().T) / 2.0
    h1 -= np.trace(h1).real / dec.cutoff * np.eye(dec.cutoff)
    h1 /= np.linalg.norm(h1)

    # orient so that <a>_+ aligns with the mean-field alpha_+
    if dec.params is not None and dec.params.eta > dec.params.eta_c:
        from .meanfield import fixed_points

        alpha_plus, _ = fixed_points(dec.params)
        a_op = build_fock_space(dec.cutoff).a
        if (np.conj(alpha_plus) * np.trace(a_op @ h1)).real < 0:
            h1 = -h1

    def _min_eig(s: float) -> float:
        return min(
            np.linalg.eigvalsh(rho_ss + s * h1).min(),
            np.linalg.eigvalsh(rho_ss - s * h1).min(),
        )

    lo, hi = 0.0, 1.0
    while _min_eig(hi) > -1e-10 and hi < 1e3:
        lo, hi = hi, 2.0 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _min_eig(mid) > -1e-10:
            lo = mid
        else:
            hi = mid
    s_max = lo

    rho_plus = DensityMatrix(rho=rho_ss + s_max * h1, cutoff=dec.cutoff)
    rho_minus = DensityMatrix(rho=rho_ss - s_max * h1, cutoff=dec.cutoff)

    # xi from the positive/negative parts of r1 normalised to half trace
    w, v = np.linalg.eigh(h1)
    pos = (v[:, w > 0] * w[w > 0]) @ v[:, w > 0].conj().T
    neg = -(v[:, w < 0] * w[w < 0]) @ v[:, w < 0].conj().T
    tau = np.trace(pos).real
    xi = DensityMatrix(rho=(pos + neg) / (2.0 * tau), cutoff=dec.cutoff)
    return SymmetryBrokenPair(
        rho_plus=rho_plus,
        rho_minus=rho_minus,
        xi=xi,
        trace_distance_ss_xi=trace_distance(rho_ss, xi.rho),
        scale=s_max,
    )


# ---------------------------------------------------------------------------
# serialization


def spectrum_records(dec: SpectralDecomposition) -> list[list[float]]:
    """[[re, im, parity], ...] rows for the JSON spectrum artifact."""
    return [
        [float(v.real), float(v.imag), int(p)]
        for v, p in zip(dec.eigenvalues, dec.parities)
    ]
