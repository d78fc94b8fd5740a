import math

import numpy as np
import pytest

from holonomic_gate.spin import ModelParams, build_spin_ops


@pytest.fixture(scope="session")
def ops():
    return build_spin_ops()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def generic_params():
    return ModelParams(1.0, 0.5, math.pi / 6)
