"""Synthetic-data generator based on the latent-variable mechanism.

A latent response y* = location(x) + scale(x) * eps is categorized by a
fixed threshold grid: Y = r iff thr_{r-1} < y* <= thr_r.  With scale == 1
and logistic noise the data follow the proportional odds model exactly,
which is what the validation suite leans on.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .data_model import Dataset, VariableSpec
from .errors import FormulaError

_FORMULA_NAMES = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "where": np.where,
    "minimum": np.minimum,
    "maximum": np.maximum,
    "I": lambda cond: np.asarray(cond, dtype=np.float64),
    "pi": np.pi,
}

GENERATORS = ("normal", "uniform", "binary")


@dataclass(frozen=True)
class SimSpec:
    """Recipe for one synthetic dataset.

    ``covariates`` is a sequence of "name:generator" strings; generators
    are ``normal`` (standard normal), ``uniform`` (on [-1, 1]) and
    ``binary`` (fair 0/1), optionally suffixed with ":d" to round to d
    decimals (e.g. "x1:normal:2"), which keeps the number of distinct
    split points manageable.
    """

    n: int
    thresholds: tuple
    location: str = "0"
    scale: str = "1"
    noise: str = "logistic"
    covariates: tuple = ("x1:normal",)
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        thr = tuple(float(t) for t in self.thresholds)
        if len(thr) < 1 or any(b <= a for a, b in zip(thr, thr[1:])):
            raise ValueError("thresholds must be strictly increasing, length >= 1")
        object.__setattr__(self, "thresholds", thr)
        if self.noise not in ("logistic", "normal"):
            raise ValueError("noise must be 'logistic' or 'normal'")
        object.__setattr__(self, "covariates", tuple(self.covariates))


def _parse_covariate(text):
    parts = text.split(":")
    if len(parts) not in (2, 3) or not parts[0]:
        raise FormulaError(f"bad covariate spec {text!r}; use name:generator[:decimals]")
    name, gen = parts[0], parts[1]
    if gen not in GENERATORS:
        raise FormulaError(f"unknown generator {gen!r}; choose from {GENERATORS}")
    decimals = None
    if len(parts) == 3:
        try:
            decimals = int(parts[2])
        except ValueError:
            raise FormulaError(f"bad decimals in covariate spec {text!r}")
    return name, gen, decimals


def _evaluate(expr, env, n):
    try:
        value = eval(expr, {"__builtins__": {}}, env)  # noqa: S307 - sandboxed names
    except Exception as err:
        raise FormulaError(f"cannot evaluate formula {expr!r}: {err}")
    out = np.asarray(value, dtype=np.float64)
    if out.ndim == 0:
        out = np.full(n, float(out))
    if out.shape != (n,):
        raise FormulaError(f"formula {expr!r} has shape {out.shape}, expected ({n},)")
    if not np.all(np.isfinite(out)):
        raise FormulaError(f"formula {expr!r} produced non-finite values")
    return out


def simulate(spec):
    """Generate (names, kinds, X, y) per a SimSpec."""
    rng = np.random.default_rng(spec.seed)
    parsed = [_parse_covariate(c) for c in spec.covariates]
    names = [name for name, _, _ in parsed]
    if len(set(names)) != len(names):
        raise FormulaError("covariate names must be unique")
    n = spec.n
    columns = {}
    kinds = []
    for name, gen, decimals in parsed:
        if gen == "normal":
            col = rng.standard_normal(n)
            kinds.append("metric")
        elif gen == "uniform":
            col = rng.uniform(-1.0, 1.0, n)
            kinds.append("metric")
        else:
            col = rng.integers(0, 2, n).astype(np.float64)
            kinds.append("binary")
        if decimals is not None:
            col = np.round(col, decimals)
        columns[name] = col

    env = dict(_FORMULA_NAMES)
    env.update(columns)
    loc = _evaluate(spec.location, env, n)
    scale = _evaluate(spec.scale, env, n)
    if np.any(scale <= 0.0):
        raise FormulaError("scale formula must be strictly positive")
    eps = rng.logistic(0.0, 1.0, n) if spec.noise == "logistic" else rng.standard_normal(n)
    ystar = loc + scale * eps
    thr = np.asarray(spec.thresholds)
    y = np.searchsorted(thr, ystar, side="left") + 1
    X = np.column_stack([columns[name] for name in names])
    return names, kinds, X, y


def simulate_dataset(spec):
    """Simulate and wrap into a validated Dataset."""
    names, kinds, X, y = simulate(spec)
    specs = tuple(
        VariableSpec(name=name, kind=kind, column_index=i)
        for i, (name, kind) in enumerate(zip(names, kinds))
    )
    return Dataset(y=y, x=X, specs=specs)


def write_csv(path, names, X, y, response_name="y"):
    """Write a simulated table in the package's CSV schema."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + [response_name])
        for i in range(len(y)):
            writer.writerow([repr(float(v)) for v in X[i]] + [int(y[i])])
