"""Two-tree predictor structure and cumulative-model probabilities.

The predictor for observation i and category r is

    eta_ir = (b0_r - loc(x_i)) / exp(sc(x_i))

where loc and sc are each a sum of split increments over the location tree
and the scale tree.  Every split attaches its single increment to the
"x_var <= c" (left) child; the root carries effect 0 in both components,
which anchors identifiability.

Node ids use heap numbering per component: root is 1, splitting node m
produces children 2m (left, <= c) and 2m + 1 (right, > c).
"""

from dataclasses import dataclass, field, replace

import numpy as np

LOCATION = "location"
SCALE = "scale"
COMPONENTS = (LOCATION, SCALE)

ROOT_ID = 1


@dataclass(frozen=True)
class Split:
    """One binary split of a node, carrying its fitted increment."""

    component: str
    node_id: int
    variable: int
    threshold: float
    increment: float = 0.0

    @property
    def left_child_id(self):
        return 2 * self.node_id

    @property
    def right_child_id(self):
        return 2 * self.node_id + 1


@dataclass(frozen=True)
class TreeStructure:
    """Ordered split lists for the location and scale components."""

    location_splits: tuple = ()
    scale_splits: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "location_splits", tuple(self.location_splits))
        object.__setattr__(self, "scale_splits", tuple(self.scale_splits))
        for comp, splits in ((LOCATION, self.location_splits), (SCALE, self.scale_splits)):
            live = {ROOT_ID}
            for s in splits:
                if s.component != comp:
                    raise ValueError(f"split {s} filed under wrong component {comp}")
                if s.node_id not in live:
                    raise ValueError(f"split of non-terminal node {s.node_id} in {comp} tree")
                live.remove(s.node_id)
                live.update((s.left_child_id, s.right_child_id))

    def splits_of(self, component):
        if component == LOCATION:
            return self.location_splits
        if component == SCALE:
            return self.scale_splits
        raise ValueError(f"unknown component {component!r}")

    def terminal_node_ids(self, component):
        live = [ROOT_ID]
        for s in self.splits_of(component):
            live.remove(s.node_id)
            live.extend((s.left_child_id, s.right_child_id))
        return sorted(live)

    def with_split(self, split):
        """New structure with one more split appended to its component."""
        if split.component == LOCATION:
            return TreeStructure(self.location_splits + (split,), self.scale_splits)
        return TreeStructure(self.location_splits, self.scale_splits + (split,))

    def with_increments(self, params):
        """Copy with split increments taken from a ModelParams."""
        loc = tuple(
            replace(s, increment=float(b))
            for s, b in zip(self.location_splits, params.location_increments)
        )
        sc = tuple(
            replace(s, increment=float(g))
            for s, g in zip(self.scale_splits, params.scale_increments)
        )
        return TreeStructure(loc, sc)

    def node_conditions(self, component, node_id, names=None):
        """Path conditions defining a node, as readable strings."""
        path = []
        nid = node_id
        while nid > ROOT_ID:
            parent = nid // 2
            is_left = nid % 2 == 0
            for s in self.splits_of(component):
                if s.node_id == parent:
                    var = s.variable if names is None else names[s.variable]
                    op = "<=" if is_left else ">"
                    path.append(f"{var} {op} {s.threshold + 0.0:g}")
                    break
            nid = parent
        return list(reversed(path))


@dataclass(frozen=True)
class ModelParams:
    """Free parameters of a fitted model for a given TreeStructure."""

    thresholds: np.ndarray
    location_increments: np.ndarray
    scale_increments: np.ndarray

    def __post_init__(self):
        thr = np.atleast_1d(np.asarray(self.thresholds, dtype=np.float64))
        loc = np.asarray(self.location_increments, dtype=np.float64).reshape(-1)
        sc = np.asarray(self.scale_increments, dtype=np.float64).reshape(-1)
        for a in (thr, loc, sc):
            if not np.all(np.isfinite(a)):
                raise ValueError("parameters must be finite")
        if len(thr) > 1 and np.any(np.diff(thr) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        object.__setattr__(self, "thresholds", thr)
        object.__setattr__(self, "location_increments", loc)
        object.__setattr__(self, "scale_increments", sc)
        thr.setflags(write=False)
        loc.setflags(write=False)
        sc.setflags(write=False)

    @property
    def k(self):
        return len(self.thresholds) + 1


@dataclass(frozen=True)
class FittedModel:
    """Final model: structure (with increments), params, link, and fit info."""

    structure: TreeStructure
    params: ModelParams
    link: object
    loglik: float
    n_obs: int
    k: int
    specs: tuple = ()
    trace: object = field(default=None, repr=False, compare=False)


def _component_increments(structure, params, component):
    if component == LOCATION:
        return params.location_increments
    return params.scale_increments


def locate(structure, component, x, params=None):
    """Drop one covariate row through a component's tree.

    Returns ``(terminal_node_id, accumulated_effect)`` where the effect is
    the sum of increments of every left-child region on the path.  With
    ``params`` given, increments are read from it; otherwise from the
    splits themselves.
    """
    x = np.asarray(x, dtype=np.float64)
    node = ROOT_ID
    effect = 0.0
    splits = structure.splits_of(component)
    incs = None if params is None else _component_increments(structure, params, component)
    for idx, s in enumerate(splits):
        if s.node_id == node:
            inc = s.increment if incs is None else incs[idx]
            if x[s.variable] <= s.threshold:
                node = s.left_child_id
                effect += inc
            else:
                node = s.right_child_id
    return node, effect


def design_matrix(structure, component, X):
    """0/1 matrix whose column s marks rows in the left-child region of split s."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    splits = structure.splits_of(component)
    Z = np.zeros((n, len(splits)))
    node = np.full(n, ROOT_ID, dtype=np.int64)
    for idx, s in enumerate(splits):
        in_node = node == s.node_id
        left = in_node & (X[:, s.variable] <= s.threshold)
        Z[left, idx] = 1.0
        node[left] = s.left_child_id
        node[in_node & ~left] = s.right_child_id
    return Z


def node_assignments(structure, component, X):
    """Terminal node id of every row for one component."""
    X = np.asarray(X, dtype=np.float64)
    node = np.full(X.shape[0], ROOT_ID, dtype=np.int64)
    for s in structure.splits_of(component):
        in_node = node == s.node_id
        left = in_node & (X[:, s.variable] <= s.threshold)
        node[left] = s.left_child_id
        node[in_node & ~left] = s.right_child_id
    return node


def component_effects(structure, params, X):
    """(location effect, scale effect) vectors for a matrix of rows."""
    Z_loc = design_matrix(structure, LOCATION, X)
    Z_sc = design_matrix(structure, SCALE, X)
    return Z_loc @ params.location_increments, Z_sc @ params.scale_increments


def linear_predictor(structure, params, x, r):
    """eta_{r} = (b0_r - loc(x)) / exp(sc(x)) for a single row, 1 <= r <= k-1."""
    if not 1 <= r <= params.k - 1:
        raise ValueError(f"category index r={r} outside 1..{params.k - 1}")
    _, loc = locate(structure, LOCATION, x, params)
    _, sc = locate(structure, SCALE, x, params)
    return (params.thresholds[r - 1] - loc) / np.exp(sc)


def category_probs(structure, params, link, x):
    """Probability vector (pi_1, ..., pi_k) for one covariate row."""
    x = np.asarray(x, dtype=np.float64)
    return category_probs_matrix(structure, params, link, x[None, :])[0]


def category_probs_matrix(structure, params, link, X):
    """Row-wise category probabilities for a matrix of covariate rows.

    Each probability is a difference of two cdf values; the difference is
    taken on the survival side whenever both predictors are positive, so
    upper-tail probabilities keep full relative precision.
    """
    loc, sc = component_effects(structure, params, X)
    eta = (params.thresholds[None, :] - loc[:, None]) / np.exp(sc)[:, None]
    n = X.shape[0]
    cdf_full = np.hstack([np.zeros((n, 1)), link.cdf(eta), np.ones((n, 1))])
    sf_full = np.hstack([np.ones((n, 1)), link.sf(eta), np.zeros((n, 1))])
    from_cdf = np.diff(cdf_full, axis=1)
    from_sf = sf_full[:, :-1] - sf_full[:, 1:]
    lower_eta = np.hstack([np.full((n, 1), -np.inf), eta])
    return np.where(lower_eta > 0.0, from_sf, from_cdf)


def cumulative_odds_ratio(structure, params, link, x_a, x_b, r):
    """Ratio of cumulative odds gamma_r(x_a) / gamma_r(x_b).

    gamma_r(x) = P(Y > r | x) / P(Y <= r | x).  Under the logit link this
    ratio is constant over r whenever the two rows share a scale terminal
    node; under probit it varies with r.
    """
    probs_a = category_probs(structure, params, link, x_a)
    probs_b = category_probs(structure, params, link, x_b)
    cum_a = np.cumsum(probs_a)[r - 1]
    cum_b = np.cumsum(probs_b)[r - 1]
    return ((1.0 - cum_a) / cum_a) / ((1.0 - cum_b) / cum_b)
