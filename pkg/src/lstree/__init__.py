"""Tree-structured location-scale models for binary and ordinal regression.

Fits a cumulative (proportional-odds-style) model whose location and
scaling predictors are each a recursively grown tree; split significance
is controlled by permutation tests on maximally selected likelihood-ratio
statistics.
"""

from .data_model import Dataset, VariableSpec, candidate_thresholds, ingest_csv
from .errors import (
    ConvergenceError,
    DimensionError,
    FormulaError,
    IngestError,
    LstreeError,
    NoCandidatesError,
    NumericalError,
    SchemaError,
)
from .estimation import (
    FitOptions,
    FitResult,
    fit_mle,
    free_to_params,
    gradient,
    log_likelihood,
    oracle_fit,
    params_to_free,
)
from .inference import (
    PermutationResult,
    PermutationTestSpec,
    bonferroni_level,
    permutation_test,
)
from .links import LOGIT, PROBIT, LinkFunction, get_link
from .model_core import (
    LOCATION,
    SCALE,
    FittedModel,
    ModelParams,
    Split,
    TreeStructure,
    category_probs,
    category_probs_matrix,
    cumulative_odds_ratio,
    linear_predictor,
    locate,
)
from .render import export_dot, write_dot
from .serialize import (
    document_to_model,
    dumps_model,
    model_to_document,
    read_model,
    write_model,
)
from .simulate import SimSpec, simulate, simulate_dataset, write_csv
from .split_search import (
    SearchResult,
    SplitCandidate,
    enumerate_candidates,
    lr_statistic,
    search_best_split,
)
from .tree_builder import BuildOptions, FitReport, StepRecord, build, predict

__version__ = "0.1.0"

__all__ = [
    "BuildOptions", "ConvergenceError", "Dataset", "DimensionError",
    "FitOptions", "FitReport", "FitResult", "FittedModel", "FormulaError",
    "IngestError", "LOCATION", "LOGIT", "LinkFunction", "LstreeError",
    "ModelParams", "NoCandidatesError", "NumericalError", "PROBIT",
    "PermutationResult", "PermutationTestSpec", "SCALE", "SchemaError",
    "SearchResult", "SimSpec", "Split", "SplitCandidate", "StepRecord",
    "TreeStructure", "VariableSpec", "bonferroni_level", "build",
    "candidate_thresholds", "category_probs", "category_probs_matrix",
    "cumulative_odds_ratio", "document_to_model", "dumps_model",
    "enumerate_candidates", "export_dot", "fit_mle", "free_to_params",
    "get_link", "gradient", "ingest_csv", "linear_predictor", "locate",
    "log_likelihood", "lr_statistic", "model_to_document", "oracle_fit",
    "params_to_free", "permutation_test", "predict", "read_model",
    "search_best_split", "simulate", "simulate_dataset", "write_csv",
    "write_dot", "write_model",
]
