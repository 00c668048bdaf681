from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from folia.exactla import GF, QQ

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

P = 32003
FP = GF(P)


@pytest.fixture
def fp():
    return FP


@pytest.fixture
def qq():
    return QQ


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
