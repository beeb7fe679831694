"""Shared builders for the test suite."""

import numpy as np

import lstree as ls


def metric_specs(p):
    return tuple(ls.VariableSpec(f"x{j + 1}", "metric", j) for j in range(p))


def dataset(y, x, kinds=None):
    """Dataset from raw arrays with auto-generated variable specs."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if kinds is None:
        kinds = ["metric"] * x.shape[1]
    specs = tuple(
        ls.VariableSpec(f"x{j + 1}", kinds[j], j) for j in range(x.shape[1])
    )
    return ls.Dataset(y=np.asarray(y, dtype=np.int64), x=x, specs=specs)


def two_group_dataset(counts_left, counts_right, threshold=0.0):
    """One binary covariate; group 'left' has x=0 (<= threshold), 'right' x=1.

    counts_* give per-category counts (category r = position r-1).
    """
    y = []
    x = []
    for xval, counts in ((0.0, counts_left), (1.0, counts_right)):
        for r, c in enumerate(counts, start=1):
            y.extend([r] * c)
            x.extend([xval] * c)
    return dataset(y, np.asarray(x), kinds=["binary"])


def intercept_only_dataset(counts):
    """Single metric covariate, response with the given category counts."""
    y = []
    for r, c in enumerate(counts, start=1):
        y.extend([r] * c)
    rng = np.random.default_rng(12345)
    x = rng.normal(size=len(y))
    return dataset(y, x)


def random_instance(rng, n, k, p=2):
    """Random dataset guaranteed to contain every category."""
    y = np.concatenate([np.arange(1, k + 1), rng.integers(1, k + 1, n - k)])
    rng.shuffle(y)
    x = np.round(rng.normal(size=(n, p)), 3)
    return dataset(y, x)
