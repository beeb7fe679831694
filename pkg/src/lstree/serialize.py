"""JSON model document (schema version 1) with exact round-tripping.

Floats are serialized with their shortest round-trip representation, so a
deserialized model reproduces every prediction bit for bit.
"""

import json
import math

import numpy as np

from .data_model import VariableSpec
from .errors import SchemaError
from .links import get_link
from .model_core import FittedModel, ModelParams, Split, TreeStructure
from .tree_builder import BuildOptions, FitReport, StepRecord, TerminalNodeInfo

SCHEMA_VERSION = "1"


def _split_entry(split, names):
    return {
        "node_id": split.node_id,
        "variable": split.variable,
        "variable_name": names[split.variable] if names else str(split.variable),
        "threshold": split.threshold,
        "increment": split.increment,
        "left_child_id": split.left_child_id,
        "right_child_id": split.right_child_id,
    }


def _terminal_entry(t):
    return {
        "node_id": t.node_id,
        "conditions": list(t.conditions),
        "effect": t.effect,
        "n": t.n,
    }


def _step_entry(s):
    return {
        "step": s.step,
        "component": s.component,
        "node_id": s.node_id,
        "variable": s.variable,
        "variable_name": s.variable_name,
        "threshold": s.threshold,
        "lr_stat": s.lr_stat,
        "p_value": s.p_value,
        "decision": s.decision,
        "n_permutations": s.n_permutations,
        "permutation_seed": s.permutation_seed,
        "loglik_before": s.loglik_before,
        "loglik_after": None if math.isnan(s.loglik_after) else s.loglik_after,
        "candidates_evaluated": s.candidates_evaluated,
        "degenerate": s.degenerate,
        "collision": s.collision,
    }


def model_to_document(model):
    """Serializable dict for a FittedModel and its fit report."""
    names = [s.name for s in model.specs] if model.specs else None
    report = model.trace
    doc = {
        "schema_version": SCHEMA_VERSION,
        "link": model.link.kind,
        "k": model.k,
        "n_obs": model.n_obs,
        "loglik": model.loglik,
        "thresholds": [float(t) for t in model.params.thresholds],
        "location_splits": [_split_entry(s, names) for s in model.structure.location_splits],
        "scale_splits": [_split_entry(s, names) for s in model.structure.scale_splits],
        "variables": [
            {"name": s.name, "kind": s.kind, "column_index": s.column_index}
            for s in model.specs
        ],
    }
    if report is not None:
        doc["fit"] = {
            "stop_reason": report.stop_reason,
            "final_loglik": report.final_loglik,
            "steps": [_step_entry(s) for s in report.steps],
            "location_terminals": [_terminal_entry(t) for t in report.location_terminals],
            "scale_terminals": [_terminal_entry(t) for t in report.scale_terminals],
            "options": {
                "alpha_global": report.options.alpha_global,
                "n_permutations": report.options.n_permutations,
                "seed": report.options.seed,
                "min_node_size": report.options.min_node_size,
                "max_steps": report.options.max_steps,
                "link": report.options.link,
            },
        }
    return doc


def _splits_from(entries, component):
    return tuple(
        Split(
            component=component,
            node_id=int(e["node_id"]),
            variable=int(e["variable"]),
            threshold=float(e["threshold"]),
            increment=float(e["increment"]),
        )
        for e in entries
    )


def document_to_model(doc):
    """Rebuild a FittedModel from a schema-1 document."""
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported model document (schema_version "
                          f"{doc.get('schema_version')!r} expected {SCHEMA_VERSION!r})"
                          if isinstance(doc, dict) else "model document must be an object")
    try:
        structure = TreeStructure(
            _splits_from(doc["location_splits"], "location"),
            _splits_from(doc["scale_splits"], "scale"),
        )
        params = ModelParams(
            thresholds=np.asarray(doc["thresholds"], dtype=np.float64),
            location_increments=np.array(
                [s.increment for s in structure.location_splits]
            ),
            scale_increments=np.array([s.increment for s in structure.scale_splits]),
        )
        specs = tuple(
            VariableSpec(name=v["name"], kind=v["kind"], column_index=int(v["column_index"]))
            for v in doc["variables"]
        )
        link = get_link(doc["link"])
        trace = _report_from(doc.get("fit"))
        return FittedModel(
            structure=structure,
            params=params,
            link=link,
            loglik=float(doc["loglik"]),
            n_obs=int(doc["n_obs"]),
            k=int(doc["k"]),
            specs=specs,
            trace=trace,
        )
    except (KeyError, TypeError, ValueError) as err:
        raise SchemaError(f"malformed model document: {err}")


def _report_from(fit):
    if fit is None:
        return None
    opts = fit["options"]
    steps = tuple(
        StepRecord(
            step=int(s["step"]),
            component=s["component"],
            node_id=int(s["node_id"]),
            variable=int(s["variable"]),
            variable_name=s["variable_name"],
            threshold=float(s["threshold"]),
            lr_stat=float(s["lr_stat"]),
            p_value=float(s["p_value"]),
            decision=s["decision"],
            n_permutations=int(s["n_permutations"]),
            permutation_seed=int(s["permutation_seed"]),
            loglik_before=float(s["loglik_before"]),
            loglik_after=float("nan") if s["loglik_after"] is None else float(s["loglik_after"]),
            candidates_evaluated=int(s["candidates_evaluated"]),
            degenerate=bool(s["degenerate"]),
            collision=bool(s["collision"]),
        )
        for s in fit["steps"]
    )
    terminals = {
        side: tuple(
            TerminalNodeInfo(
                node_id=int(t["node_id"]),
                conditions=tuple(t["conditions"]),
                effect=float(t["effect"]),
                n=int(t["n"]),
            )
            for t in fit[side]
        )
        for side in ("location_terminals", "scale_terminals")
    }
    return FitReport(
        steps=steps,
        stop_reason=fit["stop_reason"],
        final_loglik=float(fit["final_loglik"]),
        location_terminals=terminals["location_terminals"],
        scale_terminals=terminals["scale_terminals"],
        options=BuildOptions(
            alpha_global=float(opts["alpha_global"]),
            n_permutations=int(opts["n_permutations"]),
            seed=int(opts["seed"]),
            min_node_size=int(opts["min_node_size"]),
            max_steps=int(opts["max_steps"]),
            link=opts["link"],
        ),
    )


def dumps_model(model):
    """Canonical JSON text (sorted keys, fixed layout) for byte-stable output."""
    return json.dumps(model_to_document(model), indent=2, sort_keys=True) + "\n"


def write_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model))


def read_model(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise SchemaError(f"model file is not valid JSON: {err}")
    return document_to_model(doc)
