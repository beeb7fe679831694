"""Maximum-likelihood fitting for a fixed two-tree structure.

Thresholds are handled through the exp-increment reparameterization (see
``_kernel``), so the optimization is unconstrained apart from box caps
that guard against quasi-separation.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernel
from .errors import ConvergenceError, DimensionError, NumericalError
from .links import get_link
from .model_core import (
    LOCATION,
    SCALE,
    ModelParams,
    category_probs_matrix,
    node_assignments,
)

DELTA_FLOOR = np.log(1e-8)
DELTA_CAP = np.log(60.0)


@dataclass(frozen=True)
class FitOptions:
    """Optimizer controls; defaults suit node-wise fits of modest size."""

    max_iterations: int = 200
    rel_tol: float = 1e-10
    grad_tol: float = 1e-6
    beta_cap: float = 15.0
    gamma_cap: float = 7.0

    def __post_init__(self):
        for name in ("max_iterations", "rel_tol", "grad_tol", "beta_cap", "gamma_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class FitResult:
    """Outcome of one maximum-likelihood fit."""

    params: ModelParams
    free: np.ndarray
    loglik: float
    n_iter: int
    converged: bool
    degenerate: bool
    collision: bool


def params_to_free(params):
    """Map ModelParams to the unconstrained free-parameter vector."""
    thr = params.thresholds
    deltas = np.log(np.maximum(np.diff(thr), 1e-8))
    return np.concatenate(
        ([thr[0]], deltas, params.location_increments, params.scale_increments)
    )


def free_to_params(theta, k, m_loc, m_sc):
    """Inverse of :func:`params_to_free` for given dimensions."""
    theta = np.asarray(theta, dtype=np.float64)
    km1 = k - 1
    thr = np.empty(km1)
    thr[0] = theta[0]
    for r in range(1, km1):
        thr[r] = thr[r - 1] + np.exp(theta[r])
    return ModelParams(
        thresholds=thr,
        location_increments=theta[km1 : km1 + m_loc],
        scale_increments=theta[km1 + m_loc : km1 + m_loc + m_sc],
    )


def n_free_params(k, structure):
    return (k - 1) + len(structure.location_splits) + len(structure.scale_splits)


def free_bounds(k, m_loc, m_sc, options):
    """Box caps per free coordinate (quasi-separation guard)."""
    lower = np.concatenate(
        (
            [-options.beta_cap],
            np.full(k - 2, DELTA_FLOOR),
            np.full(m_loc, -options.beta_cap),
            np.full(m_sc, -options.gamma_cap),
        )
    )
    upper = np.concatenate(
        (
            [options.beta_cap],
            np.full(k - 2, DELTA_CAP),
            np.full(m_loc, options.beta_cap),
            np.full(m_sc, options.gamma_cap),
        )
    )
    return lower, upper


def _subtree_contains(node, region):
    while node > region:
        node //= 2
    return node == region


def cell_designs(structure, terminal_ids_loc, terminal_ids_sc):
    """Left-region indicator designs for the cross of terminal nodes."""
    cells = [(a, b) for a in terminal_ids_loc for b in terminal_ids_sc]
    L = np.zeros((len(cells), len(structure.location_splits)))
    S = np.zeros((len(cells), len(structure.scale_splits)))
    for c, (a, b) in enumerate(cells):
        for s_idx, s in enumerate(structure.location_splits):
            if _subtree_contains(a, s.left_child_id):
                L[c, s_idx] = 1.0
        for s_idx, s in enumerate(structure.scale_splits):
            if _subtree_contains(b, s.left_child_id):
                S[c, s_idx] = 1.0
    return cells, L, S


@dataclass(frozen=True)
class CollapsedDesign:
    """Data collapsed to (location node, scale node) cells."""

    cells: tuple
    counts: np.ndarray
    L: np.ndarray
    S: np.ndarray
    row_cell: np.ndarray
    k: int


def collapse(structure, data):
    """Collapse a dataset onto the cell design implied by a structure."""
    loc_nodes = node_assignments(structure, LOCATION, data.x)
    sc_nodes = node_assignments(structure, SCALE, data.x)
    k = data.k
    terminal_loc = structure.terminal_node_ids(LOCATION)
    terminal_sc = structure.terminal_node_ids(SCALE)
    cells, L, S = cell_designs(structure, terminal_loc, terminal_sc)
    index = {cell: i for i, cell in enumerate(cells)}
    row_cell = np.fromiter(
        (index[(a, b)] for a, b in zip(loc_nodes, sc_nodes)), dtype=np.int64, count=data.n
    )
    counts = np.zeros((len(cells), k))
    np.add.at(counts, (row_cell, data.y - 1), 1.0)
    return CollapsedDesign(tuple(cells), counts, L, S, row_cell, k)


def log_likelihood(structure, params, data, link):
    """Multinomial log-likelihood sum_i log pi_{y_i}(x_i), row level."""
    link = get_link(link)
    probs = category_probs_matrix(structure, params, link, data.x)
    p_obs = probs[np.arange(data.n), data.y - 1]
    if np.any(p_obs <= 0.0):
        raise NumericalError("a fitted probability underflowed to zero")
    return float(np.sum(np.log(p_obs)))


def gradient(structure, params, data, link):
    """Analytic score in free-parameter coordinates."""
    link = get_link(link)
    design = collapse(structure, data)
    theta = params_to_free(params)
    g = np.empty(len(theta))
    ll = _kernel.loglik_grad(
        theta, design.counts, design.L, design.S, design.k, link.link_id, g
    )
    if ll < -1e307:
        raise NumericalError("a fitted probability underflowed to zero")
    return g


def start_values(structure, data, link):
    """Intercepts from marginal cumulative quantiles; increments at zero."""
    link = get_link(link)
    k = data.k
    counts = np.bincount(data.y, minlength=k + 1)[1:]
    cum = np.cumsum(counts)[:-1] / data.n
    thr = link.inverse_cdf(cum)
    params = ModelParams(
        thresholds=thr,
        location_increments=np.zeros(len(structure.location_splits)),
        scale_increments=np.zeros(len(structure.scale_splits)),
    )
    return params_to_free(params)


def fit_mle(structure, data, link, options=None, warm_start=None):
    """Maximize the likelihood for a fixed structure.

    ``warm_start`` is a free-parameter vector (typically from a nested
    model with the new increment at zero); the optimizer never returns a
    log-likelihood below the warm start's.

    Raises
    ------
    ConvergenceError
        When the iteration budget is exhausted before any tolerance is met.
    """
    link = get_link(link)
    options = options or FitOptions()
    design = collapse(structure, data)
    m_loc = len(structure.location_splits)
    m_sc = len(structure.scale_splits)
    theta0 = (
        np.asarray(warm_start, dtype=np.float64).copy()
        if warm_start is not None
        else start_values(structure, data, link)
    )
    lower, upper = free_bounds(data.k, m_loc, m_sc, options)
    theta, ll, n_iter, status = _kernel.newton_fit(
        theta0, design.counts, design.L, design.S, design.k, link.link_id,
        lower, upper, options.max_iterations, options.rel_tol, options.grad_tol,
    )
    if status == _kernel.STATUS_MAX_ITER:
        raise ConvergenceError(
            f"no convergence in {options.max_iterations} iterations"
        )
    return _result_from_theta(theta, ll, n_iter, status, data.k, m_loc, m_sc, options)


def _result_from_theta(theta, ll, n_iter, status, k, m_loc, m_sc, options):
    params = free_to_params(theta, k, m_loc, m_sc)
    km1 = k - 1
    eps = 1e-6
    degenerate = (
        abs(theta[0]) >= options.beta_cap - eps
        or np.any(np.abs(theta[km1 : km1 + m_loc]) >= options.beta_cap - eps)
        or np.any(np.abs(theta[km1 + m_loc :]) >= options.gamma_cap - eps)
    )
    collision = bool(np.any(theta[1:km1] <= DELTA_FLOOR + 1e-9))
    return FitResult(
        params=params,
        free=theta,
        loglik=float(ll),
        n_iter=int(n_iter),
        converged=status != _kernel.STATUS_MAX_ITER,
        degenerate=bool(degenerate),
        collision=collision,
    )


def oracle_fit(structure, data, link, n_grid=15, n_passes=30, width=8.0):
    """Brute-force grid-refinement fitter, for validating :func:`fit_mle`.

    Searches the free-parameter space on a grid that contracts slowly
    around the running best point; the gentle contraction keeps enough
    width to escape flat plateaus before the grid collapses.  Only usable
    for models with at most 4 free parameters; intended for tests.
    """
    link = get_link(link)
    design = collapse(structure, data)
    m_loc = len(structure.location_splits)
    m_sc = len(structure.scale_splits)
    m = n_free_params(data.k, structure)
    if m > 4:
        raise DimensionError(f"oracle_fit supports at most 4 free parameters, got {m}")
    center = start_values(structure, data, link)
    best_theta = center.copy()
    best_ll = _grid_loglik(best_theta[None, :], design, link)[0]
    w = float(width)
    for _ in range(n_passes):
        axes = [np.linspace(c - w, c + w, n_grid) for c in center]
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([g.ravel() for g in mesh], axis=1)
        lls = _grid_loglik(points, design, link)
        i = int(np.argmax(lls))
        if lls[i] > best_ll:
            best_ll = float(lls[i])
            best_theta = points[i].copy()
        center = best_theta
        w *= 0.6
    return free_to_params(best_theta, data.k, m_loc, m_sc), float(best_ll)


def _grid_loglik(points, design, link):
    """Vectorized collapsed log-likelihood over a batch of theta vectors."""
    k = design.k
    km1 = k - 1
    m_loc = design.L.shape[1]
    P = points.shape[0]
    thr = np.empty((P, km1))
    thr[:, 0] = points[:, 0]
    for r in range(1, km1):
        thr[:, r] = thr[:, r - 1] + np.exp(points[:, r])
    beta = points[:, km1 : km1 + m_loc]
    gamma = points[:, km1 + m_loc :]
    loc = beta @ design.L.T  # P x C
    sc = gamma @ design.S.T
    eta = (thr[:, None, :] - loc[:, :, None]) * np.exp(-sc)[:, :, None]
    cum = link.cdf(eta)
    full = np.concatenate(
        [np.zeros((P, loc.shape[1], 1)), cum, np.ones((P, loc.shape[1], 1))], axis=2
    )
    pi = np.diff(full, axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        logpi = np.where(design.counts[None, :, :] > 0, np.log(np.maximum(pi, 1e-300)), 0.0)
    return np.sum(design.counts[None, :, :] * logpi, axis=(1, 2))
