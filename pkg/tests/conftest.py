import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import lstree as ls  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    """Trigger numba compilation once, so timed tests see steady-state speed."""
    rng = np.random.default_rng(0)
    y = np.array([1, 1, 2, 2, 1, 2, 1, 2, 1, 2])
    x = rng.normal(size=(10, 1))
    d = ls.Dataset(y=y, x=x, specs=(ls.VariableSpec("x1", "metric", 0),))
    ls.fit_mle(ls.TreeStructure(), d, "logit")
    ls.search_best_split(ls.TreeStructure(), d, min_node_size=1)
