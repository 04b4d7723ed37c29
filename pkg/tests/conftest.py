import numpy as np
import pytest

from l4sparsify._accel import HAVE_NUMBA


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# run kernel-level tests on every available backend
BACKENDS = [False, True] if HAVE_NUMBA else [False]


@pytest.fixture(params=BACKENDS, ids=lambda v: "numba" if v else "numpy")
def use_numba(request):
    return request.param
