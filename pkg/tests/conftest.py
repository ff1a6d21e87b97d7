"""Shared fixtures; puts the project root on sys.path like main.py does"""

import sys
from pathlib import Path

import numpy as np
import pytest

project_root = Path(__file__).resolve().parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from tools.space_tools import Dimension, DimensionKind, ParamSpace  # noqa: E402
from tools.surrogate_tools import Dataset, SurrogateConfig  # noqa: E402


@pytest.fixture
def unit_space():
    return ParamSpace(dims=(Dimension(name="x", kind=DimensionKind.REAL, low=0.0, high=1.0),))


@pytest.fixture
def mixed_space():
    return ParamSpace(dims=(
        Dimension(name="num_leaves", kind=DimensionKind.INTEGER, low=4, high=100),
        Dimension(name="min_child_samples", kind=DimensionKind.INTEGER, low=1, high=100),
        Dimension(name="subsample", kind=DimensionKind.REAL, low=0.1, high=1.0),
    ))


@pytest.fixture
def fast_surrogates():
    """Smaller ensembles and fewer GP restarts for loop-level tests"""
    return SurrogateConfig(n_trees=20, gp_restarts=2, gbrt_stages=30)


@pytest.fixture
def sine_data():
    x = np.array([[0.1], [0.5], [0.9]])
    return Dataset(x, np.sin(6 * x).ravel())


def rng(seed=0):
    return np.random.default_rng(seed)
