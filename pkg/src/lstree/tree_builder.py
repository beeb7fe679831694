"""Full fitting procedure: search, test, commit, repeat until non-significant.

Each step searches all candidate splits in both components, runs the
permutation test for the selected (variable, component) at level alpha/p,
and, when significant, commits the split and refits every parameter of
the enlarged model.  The terminating non-significant step stays in the
report; rerunning with a larger alpha is the intended exploratory mode.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .data_model import Dataset
from .errors import ConvergenceError, NoCandidatesError, SchemaError
from .estimation import FitOptions, fit_mle, log_likelihood
from .inference import PermutationTestSpec, permutation_test
from .links import get_link
from .model_core import (
    LOCATION,
    SCALE,
    FittedModel,
    TreeStructure,
    category_probs_matrix,
    node_assignments,
)
from .split_search import DEFAULT_MIN_NODE_SIZE, search_best_split

STOP_NONSIGNIFICANT = "nonsignificant"
STOP_NO_CANDIDATES = "no_candidates"
STOP_MAX_STEPS = "max_steps"


@dataclass(frozen=True)
class BuildOptions:
    alpha_global: float = 0.05
    n_permutations: int = 1000
    seed: int = 0
    min_node_size: int = DEFAULT_MIN_NODE_SIZE
    max_steps: int = 30
    link: str = "logit"
    fit_options: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        if not 0.0 < self.alpha_global < 1.0:
            raise ValueError("alpha_global must be in (0, 1)")
        if self.min_node_size < 1 or self.max_steps < 1:
            raise ValueError("min_node_size and max_steps must be positive")


@dataclass(frozen=True)
class StepRecord:
    """Audit record of one tree-building step."""

    step: int
    component: str
    node_id: int
    variable: int
    variable_name: str
    threshold: float
    lr_stat: float
    p_value: float
    decision: str
    n_permutations: int
    permutation_seed: int
    loglik_before: float
    loglik_after: float  # NaN when the split was rejected
    candidates_evaluated: int
    degenerate: bool
    collision: bool


@dataclass(frozen=True)
class TerminalNodeInfo:
    node_id: int
    conditions: tuple
    effect: float
    n: int


@dataclass(frozen=True)
class FitReport:
    steps: tuple
    stop_reason: str
    final_loglik: float
    location_terminals: tuple
    scale_terminals: tuple
    options: BuildOptions


def _step_seed(master_seed, step):
    """Per-step permutation seed; adding steps never perturbs earlier tests."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(step,))
    return int(ss.generate_state(1, np.uint64)[0])


def _terminal_table(structure, params, data, component):
    names = [s.name for s in data.specs] if data.specs else None
    nodes = node_assignments(structure, component, data.x)
    incs = (
        params.location_increments if component == LOCATION else params.scale_increments
    )
    splits = structure.splits_of(component)
    table = []
    for nid in structure.terminal_node_ids(component):
        effect = 0.0
        for idx, s in enumerate(splits):
            node = nid
            while node > s.left_child_id:
                node //= 2
            if node == s.left_child_id:
                effect += incs[idx]
        table.append(
            TerminalNodeInfo(
                node_id=nid,
                conditions=tuple(structure.node_conditions(component, nid, names)),
                effect=float(effect),
                n=int(np.sum(nodes == nid)),
            )
        )
    return tuple(table)


def build(data, options=None):
    """Grow the two-tree location-scale model on a dataset.

    Returns ``(FittedModel, FitReport)``.  The model never contains a
    split whose permutation p-value exceeded alpha/p at its step, and
    identical (data, options) reproduce the result bit for bit.
    """
    options = options or BuildOptions()
    link = get_link(options.link)
    structure = TreeStructure()
    current_fit = fit_mle(structure, data, link, options.fit_options)

    steps = []
    stop_reason = STOP_MAX_STEPS
    step = 0
    while step < options.max_steps:
        step += 1
        try:
            search = search_best_split(
                structure, data, link, options.fit_options,
                min_node_size=options.min_node_size, restricted=current_fit,
            )
        except NoCandidatesError:
            stop_reason = STOP_NO_CANDIDATES
            break
        cand = search.best
        seed = _step_seed(options.seed, step)
        spec = PermutationTestSpec(
            n_permutations=options.n_permutations,
            seed=seed,
            alpha_global=options.alpha_global,
            p=data.p,
        )
        perm = permutation_test(
            structure, data, cand, spec, link, options.fit_options,
            min_node_size=options.min_node_size, restricted=current_fit,
        )
        record = StepRecord(
            step=step,
            component=cand.component,
            node_id=cand.node_id,
            variable=cand.variable,
            variable_name=data.specs[cand.variable].name if data.specs else str(cand.variable),
            threshold=cand.threshold,
            lr_stat=cand.lr_stat,
            p_value=perm.p_value,
            decision=perm.decision,
            n_permutations=spec.n_permutations,
            permutation_seed=seed,
            loglik_before=current_fit.loglik,
            loglik_after=np.nan,
            candidates_evaluated=search.all_evaluated,
            degenerate=cand.degenerate,
            collision=cand.collision,
        )
        if perm.decision != "split":
            steps.append(record)
            stop_reason = STOP_NONSIGNIFICANT
            break
        new_structure = structure.with_split(cand.as_split())
        try:
            refit = fit_mle(
                new_structure, data, link, options.fit_options, warm_start=cand.free
            )
        except ConvergenceError as err:
            err.report = _make_report(steps, "aborted", current_fit, structure, data, options)
            raise
        structure = new_structure
        current_fit = refit
        steps.append(replace(record, loglik_after=refit.loglik))

    # Final refit of the committed structure with all parameters free.
    final_fit = fit_mle(structure, data, link, options.fit_options, warm_start=current_fit.free)
    final_loglik = log_likelihood(structure, final_fit.params, data, link)
    report = _make_report(steps, stop_reason, final_fit, structure, data, options, final_loglik)
    model = FittedModel(
        structure=structure.with_increments(final_fit.params),
        params=final_fit.params,
        link=link,
        loglik=final_loglik,
        n_obs=data.n,
        k=data.k,
        specs=data.specs,
        trace=report,
    )
    return model, report


def _make_report(steps, stop_reason, fit, structure, data, options, final_loglik=None):
    return FitReport(
        steps=tuple(steps),
        stop_reason=stop_reason,
        final_loglik=fit.loglik if final_loglik is None else final_loglik,
        location_terminals=_terminal_table(structure, fit.params, data, LOCATION),
        scale_terminals=_terminal_table(structure, fit.params, data, SCALE),
        options=options,
    )


def _check_schema(model, specs):
    if len(specs) != len(model.specs):
        raise SchemaError(
            f"expected {len(model.specs)} covariates, got {len(specs)}"
        )
    for mine, theirs in zip(model.specs, specs):
        if mine.name != theirs.name or mine.kind != theirs.kind:
            raise SchemaError(
                f"column mismatch: trained on {mine.name!r} ({mine.kind}), "
                f"got {theirs.name!r} ({theirs.kind})"
            )


def predict(model, newdata):
    """Category probabilities and terminal-node ids for new rows.

    ``newdata`` is a Dataset (schema-checked against the training specs)
    or a plain covariate matrix.  Returns ``(probs, loc_nodes, sc_nodes)``.
    """
    if isinstance(newdata, Dataset):
        if model.specs:
            _check_schema(model, newdata.specs)
        X = newdata.x
    else:
        X = np.asarray(newdata, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if model.specs and X.shape[1] != len(model.specs):
            raise SchemaError(
                f"expected {len(model.specs)} covariate columns, got {X.shape[1]}"
            )
    probs = category_probs_matrix(model.structure, model.params, model.link, X)
    loc_nodes = node_assignments(model.structure, LOCATION, X)
    sc_nodes = node_assignments(model.structure, SCALE, X)
    return probs, loc_nodes, sc_nodes
