"""Rotating-frame Liouvillian, lab-frame generator and parity superoperator.

Vectorization convention (fixed, used by every module)
------------------------------------------------------
Column stacking: ``vec(A rho B) = (B^T kron A) vec(rho)``, so the matrix
element rho[m, n] sits at vector index ``n * d + m``.  Use :func:`vec` /
:func:`unvec` / :func:`spre` / :func:`spost` / :func:`sandwich`; never
hand-roll the Kronecker products.

Superoperator matrices are stored sparse (CSR).  They have O(d^2) nonzero
entries, and the dense D x D form (D = d^2) would dominate memory from
d ~ 64 on; eigensolvers densify per parity sector instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import MissingDriveFrequencyError
from .fock import FockSpace
from .params import ModelParams

__all__ = [
    "Superoperator",
    "vec",
    "unvec",
    "spre",
    "spost",
    "sandwich",
    "dissipator",
    "hamiltonian_superop",
    "build_rotating_liouvillian",
    "build_lab_hamiltonian",
    "LabFrameGenerator",
    "lab_generator",
    "parity_superoperator",
    "parity_sector_indices",
    "parity_sectors",
    "restrict_to_indices",
]

VECTORIZATION = "column-stacking"


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a d x d matrix into a d^2 vector."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    return v.reshape(d, d, order="F")


def spre(op: np.ndarray) -> sp.csr_matrix:
    """Superoperator of rho -> op rho."""
    d = op.shape[0]
    return sp.kron(sp.identity(d, dtype=np.complex128), sp.csr_matrix(op), format="csr")


def spost(op: np.ndarray) -> sp.csr_matrix:
    """Superoperator of rho -> rho op."""
    d = op.shape[0]
    return sp.kron(sp.csr_matrix(op.T), sp.identity(d, dtype=np.complex128), format="csr")


def sandwich(left: np.ndarray, right: np.ndarray) -> sp.csr_matrix:
    """Superoperator of rho -> left rho right."""
    return sp.kron(sp.csr_matrix(right.T), sp.csr_matrix(left), format="csr")


def dissipator(op: np.ndarray) -> sp.csr_matrix:
    """Matrix of rho -> 2 L rho L^dag - L^dag L rho - rho L^dag L."""
    op_dag = op.conj().T
    op2 = op_dag @ op
    return 2.0 * sandwich(op, op_dag) - spre(op2) - spost(op2)


def hamiltonian_superop(h: np.ndarray) -> sp.csr_matrix:
    """Matrix of rho -> -i [H, rho]."""
    return -1j * (spre(h) - spost(h))


@dataclass(frozen=True)
class Superoperator:
    """A map on vectorized density matrices.

    ``matrix`` is D x D sparse CSR with D = cutoff^2, in the
    column-stacking convention recorded by ``convention``.
    """

    matrix: sp.csr_matrix
    cutoff: int
    convention: str = VECTORIZATION
    params: ModelParams | None = None

    @property
    def dim(self) -> int:
        return self.cutoff * self.cutoff

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Action on a d x d matrix, returned as a d x d matrix."""
        return unvec(self.matrix @ vec(rho))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def rotating_hamiltonian(params: ModelParams, space: FockSpace) -> np.ndarray:
    """H = delta a^dag a + i eta (a^2 - a^dag^2) in the co-rotating frame."""
    a, a_dag = space.a, space.a_dag
    return params.delta * space.n_op + 1j * params.eta * (a @ a - a_dag @ a_dag)


def build_rotating_liouvillian(params: ModelParams, space: FockSpace) -> Superoperator:
    """Generator of the rotating-frame master equation.

    rho' = -i[H, rho] + (gamma1/2) D[a^dag] rho + (gamma2/2) D[a^2] rho
    with D[L] rho = 2 L rho L^dag - L^dag L rho - rho L^dag L.
    """
    a, a_dag = space.a, space.a_dag
    mat = hamiltonian_superop(rotating_hamiltonian(params, space))
    mat = mat + 0.5 * params.gamma1 * dissipator(a_dag)
    mat = mat + 0.5 * params.gamma2 * dissipator(a @ a)
    return Superoperator(matrix=mat.tocsr(), cutoff=space.cutoff, params=params)


def build_lab_hamiltonian(params: ModelParams, space: FockSpace, t: float) -> np.ndarray:
    """Lab-frame Hamiltonian omega_0 n + i eta (a^2 e^{2i w_s t} - h.c.).

    omega_0 = delta + omega_s; the result is Hermitian by construction and
    T-periodic with T = pi / omega_s.
    """
    if params.omega_s <= 0:
        raise MissingDriveFrequencyError("lab frame requires omega_s > 0")
    a, a_dag = space.a, space.a_dag
    phase = np.exp(2j * params.omega_s * t)
    drive = 1j * params.eta * (a @ a * phase - a_dag @ a_dag * np.conj(phase))
    return params.omega_0 * space.n_op + drive


class LabFrameGenerator:
    """Time-dependent lab-frame Liouvillian, exposed as generator-at-time-t.

    The full D x D matrix for a given t is never cached across times:
    the generator splits exactly into a static part (number term plus both
    dissipators) and two squeezing blocks carrying the e^{+-2i w_s t}
    phases, so evaluation is three sparse terms.
    """

    def __init__(self, params: ModelParams, space: FockSpace):
        if params.omega_s <= 0:
            raise MissingDriveFrequencyError("lab frame requires omega_s > 0")
        self.params = params
        self.cutoff = space.cutoff
        a, a_dag = space.a, space.a_dag
        static = hamiltonian_superop(params.omega_0 * space.n_op)
        static = static + 0.5 * params.gamma1 * dissipator(a_dag)
        static = static + 0.5 * params.gamma2 * dissipator(a @ a)
        self._static = static.tocsr()
        # -i [i eta a^2, .] and -i [-i eta a^dag^2, .] blocks
        self._fwd = (params.eta * (spre(a @ a) - spost(a @ a))).tocsr()
        self._bwd = (-params.eta * (spre(a_dag @ a_dag) - spost(a_dag @ a_dag))).tocsr()

    def at(self, t: float) -> sp.csr_matrix:
        """Full generator matrix at time t."""
        phase = np.exp(2j * self.params.omega_s * t)
        return self._static + phase * self._fwd + np.conj(phase) * self._bwd

    def apply(self, t: float, rho_vec: np.ndarray) -> np.ndarray:
        """Action on a vectorized state at time t (three sparse matvecs)."""
        phase = np.exp(2j * self.params.omega_s * t)
        out = self._static @ rho_vec
        out += phase * (self._fwd @ rho_vec)
        out += np.conj(phase) * (self._bwd @ rho_vec)
        return out


def lab_generator(params: ModelParams, space: FockSpace) -> LabFrameGenerator:
    return LabFrameGenerator(params, space)


def parity_superoperator(space: FockSpace) -> Superoperator:
    """Matrix of rho -> P rho P with P = exp(i pi a^dag a); involutory."""
    mat = sandwich(space.parity, space.parity)
    return Superoperator(matrix=mat.tocsr(), cutoff=space.cutoff)


def parity_sector_indices(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized basis indices split by coherence parity at cutoff d.

    |m><n| is even when m - n is even.  Every term of the model changes m
    and n by equal parity, so the Liouvillian is exactly block-diagonal in
    these two index sets.
    """
    k = np.arange(d * d)
    m = k % d
    n = k // d
    even = k[(m - n) % 2 == 0]
    odd = k[(m - n) % 2 == 1]
    return even, odd


def parity_sectors(space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    """Sector index split for a built Fock space; see parity_sector_indices."""
    return parity_sector_indices(space.cutoff)


def restrict_to_indices(mat: sp.spmatrix, idx: np.ndarray) -> sp.csr_matrix:
    """Sector block mat[idx, idx] as CSR."""
    return mat.tocsr()[idx, :].tocsc()[:, idx].tocsr()
