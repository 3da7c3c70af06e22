"""Squeezed quantum van der Pol oscillator toolkit.

Numerical study of the nonequilibrium transition between the
incommensurate/continuous and discrete time-crystal phases of a quantum
van der Pol oscillator under two-boson (squeezed) driving: exact
Liouvillian spectra, the semiclassical phase/intensity fluctuation model,
stochastic oracles, and rotating/lab-frame dynamics.
"""

__version__ = "0.1.0"

from .params import ModelParams
from .fock import FockSpace, DensityMatrix, build_fock_space, coherent_state, default_cutoff

__all__ = [
    "__version__",
    "ModelParams",
    "FockSpace",
    "DensityMatrix",
    "build_fock_space",
    "coherent_state",
    "default_cutoff",
]
