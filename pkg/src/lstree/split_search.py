"""Candidate-split enumeration, LR statistics, and best-split selection.

Every candidate adds exactly one free parameter (df = 1), so ordering by
p-value is the same as ordering by the LR statistic; selection therefore
maximizes T directly.  Candidate models are always fitted with all
parameters free, warm-started from the current model's fit.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernel
from .data_model import candidate_thresholds  # noqa: F401  (re-exported rule)
from .errors import NoCandidatesError
from .estimation import (
    FitOptions,
    _result_from_theta,
    collapse,
    fit_mle,
    free_bounds,
)
from .links import get_link
from .model_core import COMPONENTS, LOCATION, SCALE, Split, node_assignments

DEFAULT_MIN_NODE_SIZE = 10

_COMP_RANK = {LOCATION: 0, SCALE: 1}


@dataclass(frozen=True)
class SplitCandidate:
    """One evaluated candidate split with its fitted full model."""

    component: str
    node_id: int
    variable: int
    threshold: float
    lr_stat: float
    params: object = None
    loglik: float = np.nan
    free: object = None
    degenerate: bool = False
    collision: bool = False

    def sort_key(self):
        """Deterministic total order: larger T first, then the tie-break chain."""
        return (
            -self.lr_stat,
            self.variable,
            _COMP_RANK[self.component],
            self.node_id,
            self.threshold,
        )

    def as_split(self):
        return Split(
            component=self.component,
            node_id=self.node_id,
            variable=self.variable,
            threshold=float(self.threshold),
        )


@dataclass(frozen=True)
class SearchResult:
    """Best split plus the per-variable maximal statistics."""

    best: SplitCandidate
    per_variable_max: dict
    all_evaluated: int


def lr_statistic(full_loglik, restricted_loglik):
    """max(0, 2 (full - restricted)); clamps tiny negative noise to zero."""
    return max(0.0, 2.0 * (full_loglik - restricted_loglik))


class _NodeScan:
    """Reusable scan machinery for one (component, node) pair.

    Precomputes the cell bookkeeping so the same node can be re-scanned
    cheaply with many different covariate columns (the permutation test
    re-scans with permuted columns).
    """

    def __init__(self, design, structure, component, node_id, options):
        self.component = component
        self.node_id = node_id
        self.k = design.k
        comp_pos = 0 if component == LOCATION else 1
        cell_in_node = np.array(
            [cell[comp_pos] == node_id for cell in design.cells], dtype=bool
        )
        self.in_cell_idx = np.flatnonzero(cell_in_node).astype(np.int64)
        mask = cell_in_node[design.row_cell]
        self.rows = np.flatnonzero(mask)
        a_map = np.full(len(design.cells), -1, dtype=np.int64)
        a_map[self.in_cell_idx] = np.arange(len(self.in_cell_idx))
        self.a_of_row = a_map[design.row_cell[self.rows]]
        self.base_counts = design.counts

        nA = len(self.in_cell_idx)
        m_loc = design.L.shape[1]
        m_sc = design.S.shape[1]
        if component == LOCATION:
            L = np.zeros((design.L.shape[0] + nA, m_loc + 1))
            L[: design.L.shape[0], :m_loc] = design.L
            L[design.L.shape[0] :, :m_loc] = design.L[self.in_cell_idx]
            L[design.L.shape[0] :, m_loc] = 1.0
            S = np.vstack([design.S, design.S[self.in_cell_idx]])
            self.insert_pos = (self.k - 1) + m_loc
            m_loc += 1
        else:
            S = np.zeros((design.S.shape[0] + nA, m_sc + 1))
            S[: design.S.shape[0], :m_sc] = design.S
            S[design.S.shape[0] :, :m_sc] = design.S[self.in_cell_idx]
            S[design.S.shape[0] :, m_sc] = 1.0
            L = np.vstack([design.L, design.L[self.in_cell_idx]])
            self.insert_pos = (self.k - 1) + m_loc + m_sc
            m_sc += 1
        self.L_cand = np.ascontiguousarray(L)
        self.S_cand = np.ascontiguousarray(S)
        self.lower, self.upper = free_bounds(self.k, m_loc, m_sc, options)

    def scan(self, values, ym1, theta_restricted, link_id, options, min_node_size):
        """Fit every admissible threshold for one covariate column.

        ``values`` and ``ym1`` are aligned with ``self.rows``.  Returns
        ``(thresholds, logliks, thetas, statuses)``; all empty when the
        column admits no split of this node.
        """
        n_node = len(values)
        if n_node == 0:
            return _EMPTY_SCAN
        uniq, ucounts = np.unique(values, return_counts=True)
        if len(uniq) < 2:
            return _EMPTY_SCAN
        left_sizes = np.cumsum(ucounts)[:-1]
        admissible = (left_sizes >= min_node_size) & (n_node - left_sizes >= min_node_size)
        thresholds = uniq[:-1][admissible]
        if len(thresholds) == 0:
            return _EMPTY_SCAN
        positions = left_sizes[admissible]

        order = np.argsort(values, kind="stable")
        nA = len(self.in_cell_idx)
        k = self.k
        onehot = np.zeros((n_node, nA * k))
        onehot[np.arange(n_node), self.a_of_row[order] * k + ym1[order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        left_counts = np.ascontiguousarray(
            cum[positions - 1].reshape(len(positions), nA, k)
        )

        theta_warm = np.insert(theta_restricted, self.insert_pos, 0.0)
        T = len(thresholds)
        out_ll = np.empty(T)
        out_theta = np.empty((T, len(theta_warm)))
        out_status = np.empty(T, dtype=np.int64)
        _kernel.scan_thresholds(
            theta_warm, self.base_counts, left_counts, self.in_cell_idx,
            self.L_cand, self.S_cand, k, link_id, self.lower, self.upper,
            options.max_iterations, options.rel_tol, options.grad_tol,
            out_ll, out_theta, out_status,
        )
        return thresholds, out_ll, out_theta, out_status


_EMPTY_SCAN = (np.empty(0), np.empty(0), np.empty((0, 0)), np.empty(0, dtype=np.int64))


def build_node_scans(structure, design, component, options=None):
    """One _NodeScan per terminal node of a component."""
    options = options or FitOptions()
    return [
        _NodeScan(design, structure, component, nid, options)
        for nid in structure.terminal_node_ids(component)
    ]


def enumerate_candidates(current, data, min_node_size=DEFAULT_MIN_NODE_SIZE):
    """Unfitted candidate stubs: every admissible (component, node, variable, c)."""
    stubs = []
    for component in COMPONENTS:
        nodes = node_assignments(current, component, data.x)
        for nid in current.terminal_node_ids(component):
            rows = np.flatnonzero(nodes == nid)
            for j in range(data.p):
                values = data.x[rows, j]
                uniq, ucounts = np.unique(values, return_counts=True)
                if len(uniq) < 2:
                    continue
                left_sizes = np.cumsum(ucounts)[:-1]
                ok = (left_sizes >= min_node_size) & (
                    len(rows) - left_sizes >= min_node_size
                )
                for c in uniq[:-1][ok]:
                    stubs.append(
                        SplitCandidate(
                            component=component,
                            node_id=nid,
                            variable=j,
                            threshold=float(c),
                            lr_stat=np.nan,
                        )
                    )
    return stubs


def search_best_split(current, data, link="logit", options=None,
                      min_node_size=DEFAULT_MIN_NODE_SIZE, restricted=None):
    """Fit every admissible candidate and select the maximal-LR split.

    ``restricted`` may carry the current structure's FitResult to avoid a
    refit.  Raises :class:`NoCandidatesError` when nothing is admissible.
    """
    link = get_link(link)
    options = options or FitOptions()
    if restricted is None:
        restricted = fit_mle(current, data, link, options)
    design = collapse(current, data)
    k = data.k

    finalists = []
    evaluated = 0
    for component in COMPONENTS:
        for scan in build_node_scans(current, design, component, options):
            ym1 = data.y[scan.rows] - 1
            for j in range(data.p):
                values = data.x[scan.rows, j]
                thresholds, lls, thetas, statuses = scan.scan(
                    values, ym1, restricted.free, link.link_id, options, min_node_size
                )
                if len(thresholds) == 0:
                    continue
                evaluated += len(thresholds)
                lrs = np.maximum(0.0, 2.0 * (lls - restricted.loglik))
                i = int(np.argmax(lrs))  # first max = smallest threshold
                m_loc = len(current.location_splits) + (component == LOCATION)
                m_sc = len(current.scale_splits) + (component == SCALE)
                fit = _result_from_theta(
                    thetas[i], lls[i], 0, int(statuses[i]), k, m_loc, m_sc, options
                )
                finalists.append(
                    SplitCandidate(
                        component=component,
                        node_id=scan.node_id,
                        variable=j,
                        threshold=float(thresholds[i]),
                        lr_stat=float(lrs[i]),
                        params=fit.params,
                        loglik=float(lls[i]),
                        free=thetas[i],
                        degenerate=fit.degenerate,
                        collision=fit.collision,
                    )
                )
    if not finalists:
        raise NoCandidatesError("no admissible candidate splits")

    best = min(finalists, key=SplitCandidate.sort_key)
    per_variable_max = {}
    for cand in sorted(finalists, key=SplitCandidate.sort_key):
        key = (cand.component, cand.variable)
        per_variable_max.setdefault(key, cand)
    return SearchResult(best=best, per_variable_max=per_variable_max, all_evaluated=evaluated)
