import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tmsv_trimer import kernels  # noqa: E402
from tmsv_trimer.optics import solve_zf  # noqa: E402


@pytest.fixture(scope="session")
def theta_f():
    return math.sqrt(2) * solve_zf(1.0)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)
