import numpy as np
import pytest

from sqvdp.fock import build_fock_space
from sqvdp.params import ModelParams


@pytest.fixture(scope="session")
def space12():
    return build_fock_space(12)


@pytest.fixture(scope="session")
def random_params_battery():
    """Seeded battery of O(1) parameter sets spanning both regimes."""
    rng = np.random.default_rng(20240809)
    battery = []
    for _ in range(5):
        battery.append(
            ModelParams(
                gamma1=float(rng.uniform(0.5, 2.0)),
                gamma2=float(rng.uniform(0.05, 0.6)),
                delta=float(rng.uniform(-0.5, 0.5)),
                eta=float(rng.uniform(0.0, 0.5)),
            )
        )
    return battery
