import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dsltlab import HurstModel, TimeGrid, generate_ensemble


@lru_cache(maxsize=8)
def _cached_ensemble(H, d, n, t, n_paths, seed):
    model = HurstModel(H=H, d=d, t=t)
    grid = TimeGrid(n=n, t=t)
    values = generate_ensemble(model, grid, seed, n_paths)
    values.flags.writeable = False
    return model, grid, values


@pytest.fixture(scope="session")
def ensemble_d3():
    """400 paths, d=3, H=1/3, n=256: shared across statistical tests."""
    return _cached_ensemble(1 / 3, 3, 256, 1.0, 400, 1234)


@pytest.fixture(scope="session")
def ensemble_d3_fine():
    """600 paths, d=3, H=1/3, n=1024: for identity checks needing small bias."""
    return _cached_ensemble(1 / 3, 3, 1024, 1.0, 600, 77)


@pytest.fixture(scope="session")
def ensemble_d2():
    """400 paths, d=2, H=1/2 (planar critical), n=512."""
    return _cached_ensemble(0.5, 2, 512, 1.0, 400, 2024)
