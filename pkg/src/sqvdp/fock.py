"""Truncated Fock-space operators and states.

Exactly the four operators the model needs (annihilation, creation,
number, parity) plus coherent/density-matrix constructors.  Operators are
dense ``complex128`` arrays: at the cutoffs used here (d <= 128) dense
storage is cheaper and simpler than sparse for the subsequent
superoperator products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, TruncationOverflowError

__all__ = [
    "FockSpace",
    "DensityMatrix",
    "build_fock_space",
    "coherent_state",
    "default_cutoff",
    "trace_distance",
]

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9


@dataclass(frozen=True)
class FockSpace:
    """Bosonic operators truncated to the first ``cutoff`` Fock states.

    All arrays are immutable by convention: construction goes through
    :func:`build_fock_space` and nothing mutates them afterwards, so a
    space can be shared freely across threads.
    """

    cutoff: int
    a: np.ndarray
    a_dag: np.ndarray
    n_op: np.ndarray
    parity: np.ndarray


@dataclass(frozen=True)
class DensityMatrix:
    """State on a truncated Fock space: Hermitian, unit trace, PSD."""

    rho: np.ndarray
    cutoff: int

    def validate(self) -> None:
        """Raise if Hermiticity/trace/positivity exceed the type tolerances."""
        herm = np.max(np.abs(self.rho - self.rho.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian: deviation {herm:.3e}")
        tr = abs(np.trace(self.rho) - 1.0)
        if tr > TRACE_TOL:
            raise ValueError(f"density matrix trace deviates by {tr:.3e}")
        w = np.linalg.eigvalsh((self.rho + self.rho.conj().T) / 2.0)
        if w.min() < -POSITIVITY_TOL:
            raise ValueError(f"density matrix not positive: min eigenvalue {w.min():.3e}")

    def expect(self, op: np.ndarray) -> complex:
        """Tr[op rho]."""
        return complex(np.trace(op @ self.rho))


def build_fock_space(d: int) -> FockSpace:
    """Construct the operator set at cutoff ``d`` (d >= 2).

    ``a[m, m+1] = sqrt(m+1)``; the parity operator is diag((-1)^m).
    """
    if d < 2:
        raise InvalidDimensionError(f"Fock cutoff must be >= 2, got {d}")
    a = np.zeros((d, d), dtype=np.complex128)
    m = np.arange(d - 1)
    a[m, m + 1] = np.sqrt(m + 1.0)
    n_op = np.diag(np.arange(d).astype(np.complex128))
    parity = np.diag(((-1.0) ** np.arange(d)).astype(np.complex128))
    return FockSpace(cutoff=d, a=a, a_dag=a.conj().T, n_op=n_op, parity=parity)


# maximum coherent-state weight allowed beyond the truncation boundary
COHERENT_TAIL_TOL = 1e-8


def coherent_state(space: FockSpace, amplitude: complex) -> DensityMatrix:
    """Projector onto the truncated coherent state |alpha><alpha|.

    Built from the normalised truncated number-basis series and
    renormalised to unit trace.  The truncation-safety guard is the
    actual figure of merit: the Poisson weight beyond the cutoff must be
    below 1e-8, which the cutoff heuristic guarantees by construction
    (and which reduces to the d >= 4|alpha|^2 rule of thumb at small
    amplitudes).
    """
    alpha = complex(amplitude)
    d = space.cutoff
    # log-space amplitudes avoid overflow of alpha^m / sqrt(m!)
    m = np.arange(d)
    if alpha == 0:
        psi = np.zeros(d, dtype=np.complex128)
        psi[0] = 1.0
    else:
        mean = abs(alpha) ** 2
        log_weights = m * math.log(mean) - np.array(
            [math.lgamma(k + 1.0) for k in m]
        ) - mean
        captured = np.exp(log_weights).sum()
        if 1.0 - captured > COHERENT_TAIL_TOL:
            raise TruncationOverflowError(
                f"coherent state with |alpha|^2 = {mean:.3g} leaves "
                f"{1.0 - captured:.2e} weight beyond cutoff {d}; raise the cutoff"
            )
        phase = np.exp(1j * np.angle(alpha) * m)
        psi = np.exp((log_weights - log_weights.max()) / 2.0) * phase
        psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    rho /= np.trace(rho).real
    return DensityMatrix(rho=rho, cutoff=d)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) Tr |rho - sigma| for Hermitian arguments."""
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - sigma))))


def default_cutoff(n_ex: float) -> int:
    """Heuristic Fock cutoff for a target occupation ``n_ex``.

    d = max(16, ceil(n_ex + 8 sqrt(n_ex) + 8)) leaves < 1e-8 weight at the
    boundary for the Poisson-like photon distributions encountered in the
    parameter ranges of interest.  Pass the effective occupation (e.g. the
    bistable fixed-point intensity) rather than the bare n_ex when the
    state sits above the limit-cycle intensity.  Every operation that uses
    it accepts an explicit override.
    """
    if n_ex <= 0:
        raise ValueError(f"n_ex must be positive, got {n_ex}")
    return max(16, math.ceil(n_ex + 8.0 * math.sqrt(n_ex) + 8.0))
