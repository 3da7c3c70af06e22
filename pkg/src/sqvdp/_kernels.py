"""Euler-Maruyama stepping kernels: numba-jitted with a numpy fallback.

The hot loops of the stochastic module live here in two interchangeable
implementations.  The jitted path iterates trajectories then steps; the
numpy path iterates steps with vectorised trajectory batches.  Which one
runs is decided once at import time: set ``SQVDP_DISABLE_NUMBA=1`` to
force the numpy path (it is also selected automatically when numba is
not importable).  ``benchmarks/kernels_bench.py`` compares the two.

Kernels consume pre-generated standard-normal increments, so trajectory
content depends only on the noise arrays (hence on the seed contract of
``sqvdp.langevin``), not on the backend's RNG.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "active_backend",
    "phase_steps",
    "intensity_steps",
    "amplitude_steps",
    "well_stats",
]

_FORCE_NUMPY = os.environ.get("SQVDP_DISABLE_NUMBA", "").strip() not in ("", "0")

if not _FORCE_NUMPY:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False


def active_backend() -> str:
    """'numba' or 'numpy', fixed at import time."""
    return "numba" if _HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations (reference semantics)


def _phase_steps_numpy(phi0, delta, eta, noise, amp, dt, store_every, out):
    phi = phi0.copy()
    out[:, 0] = phi
    n_steps = noise.shape[1]
    for k in range(n_steps):
        phi += (-delta + 2.0 * eta * np.sin(2.0 * phi)) * dt + amp * noise[:, k]
        if (k + 1) % store_every == 0:
            out[:, (k + 1) // store_every] = phi


def _intensity_steps_numpy(x0, rate, noise, amp, dt, store_every, out):
    x = x0.copy()
    out[:, 0] = x
    n_steps = noise.shape[1]
    for k in range(n_steps):
        x += -rate * x * dt + amp * noise[:, k]
        if (k + 1) % store_every == 0:
            out[:, (k + 1) // store_every] = x


def _amplitude_steps_numpy(
    alpha0, delta, gamma1, gamma2, eta, noise_re, noise_im, amp, dt,
    store_every, guard, out,
):
    alpha = alpha0.copy()
    out[:, 0] = alpha
    n_steps = noise_re.shape[1]
    blown = -1
    for k in range(n_steps):
        drift = (
            -1j * delta * alpha
            + 0.5 * gamma1 * alpha
            - gamma2 * np.abs(alpha) ** 2 * alpha
            - 2.0 * eta * np.conj(alpha)
        )
        alpha += drift * dt + amp * (noise_re[:, k] + 1j * noise_im[:, k])
        if np.any(np.abs(alpha) ** 2 > guard):
            blown = k
            break
        if (k + 1) % store_every == 0:
            out[:, (k + 1) // store_every] = alpha
    return blown


# ---------------------------------------------------------------------------
# numba implementations

if _HAVE_NUMBA:

    @njit(cache=True)
    def _phase_steps_numba(phi0, delta, eta, noise, amp, dt, store_every, out):
        n_traj, n_steps = noise.shape
        for i in range(n_traj):
            phi = phi0[i]
            out[i, 0] = phi
            for k in range(n_steps):
                phi += (-delta + 2.0 * eta * math.sin(2.0 * phi)) * dt + amp * noise[i, k]
                if (k + 1) % store_every == 0:
                    out[i, (k + 1) // store_every] = phi

    @njit(cache=True)
    def _intensity_steps_numba(x0, rate, noise, amp, dt, store_every, out):
        n_traj, n_steps = noise.shape
        for i in range(n_traj):
            x = x0[i]
            out[i, 0] = x
            for k in range(n_steps):
                x += -rate * x * dt + amp * noise[i, k]
                if (k + 1) % store_every == 0:
                    out[i, (k + 1) // store_every] = x

    @njit(cache=True)
    def _amplitude_steps_numba(
        alpha0, delta, gamma1, gamma2, eta, noise_re, noise_im, amp, dt,
        store_every, guard, out,
    ):
        n_traj, n_steps = noise_re.shape
        blown = -1
        for i in range(n_traj):
            alpha = alpha0[i]
            out[i, 0] = alpha
            for k in range(n_steps):
                drift = (
                    -1j * delta * alpha
                    + 0.5 * gamma1 * alpha
                    - gamma2 * (alpha.real**2 + alpha.imag**2) * alpha
                    - 2.0 * eta * np.conj(alpha)
                )
                alpha += drift * dt + amp * complex(noise_re[i, k], noise_im[i, k])
                if alpha.real**2 + alpha.imag**2 > guard:
                    return k
                if (k + 1) % store_every == 0:
                    out[i, (k + 1) // store_every] = alpha
        return blown

    phase_steps = _phase_steps_numba
    intensity_steps = _intensity_steps_numba
    amplitude_steps = _amplitude_steps_numba
else:
    phase_steps = _phase_steps_numpy
    intensity_steps = _intensity_steps_numpy
    amplitude_steps = _amplitude_steps_numpy


# ---------------------------------------------------------------------------
# well bookkeeping for bistable phase ensembles
#
# x is the unwrapped phase shifted and scaled so that barriers sit at the
# integers and each basin spans one unit.  A hysteresis state machine
# tracks the basin index: crossings count only once the path clears a
# barrier by hh.  Per trajectory the kernel returns right/left crossing
# counts, the time integral of the well indicator sign(t)*sign(0), and
# the final indicator product (the pieces the relaxation-rate estimator
# needs).


def _well_stats_python(x, hh, dt_store, rights, lefts, areas, tails):
    n_traj, n_t = x.shape
    for i in range(n_traj):
        cell = math.floor(x[i, 0])
        s0 = 1.0 - 2.0 * (cell % 2)
        r = l = 0
        area = 0.0
        sign = 1.0  # sigma(t) * sigma(0)
        for k in range(n_t):
            v = x[i, k]
            while v > cell + 1.0 + hh:
                cell += 1
                r += 1
            while v < cell - hh:
                cell -= 1
                l += 1
            sign = (1.0 - 2.0 * (cell % 2)) * s0
            area += sign * dt_store
        rights[i] = r
        lefts[i] = l
        areas[i] = area
        tails[i] = sign


if _HAVE_NUMBA:
    well_stats = njit(cache=True)(_well_stats_python)
else:
    well_stats = _well_stats_python
