import numpy as np
import pytest
from hypothesis import settings

from uscsim import HilbertConfig, SystemParams

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def cfg8():
    return HilbertConfig(8)


@pytest.fixture
def ref_params():
    return SystemParams.reference()


def rel_err(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1.0)
