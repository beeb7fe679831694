"""Command-line interface: fit, simulate, predict.

Exit codes: 0 success, 2 input or usage error, 3 numerical failure.
"""

import argparse
import csv
import sys

import numpy as np

from .data_model import VARIABLE_KINDS, VariableSpec, ingest_csv
from .errors import (
    ConvergenceError,
    FormulaError,
    IngestError,
    NumericalError,
    SchemaError,
)
from .estimation import FitOptions
from .model_core import LOCATION, SCALE
from .render import write_dot
from .serialize import read_model, write_model
from .simulate import SimSpec, simulate, write_csv
from .tree_builder import BuildOptions, build, predict


def _parse_vars(text):
    specs = []
    for i, item in enumerate(text.split(",")):
        parts = item.split(":")
        if len(parts) != 2 or not parts[0]:
            raise IngestError(f"bad --vars entry {item!r}; use name:kind")
        name, kind = parts
        if kind not in VARIABLE_KINDS:
            raise IngestError(f"unknown kind {kind!r} in --vars; choose from {VARIABLE_KINDS}")
        specs.append(VariableSpec(name=name, kind=kind, column_index=i))
    return specs


def _cmd_fit(args):
    specs = _parse_vars(args.vars)
    data = ingest_csv(args.data, args.response, specs)
    options = BuildOptions(
        alpha_global=args.alpha,
        n_permutations=args.permutations,
        seed=args.seed,
        min_node_size=args.min_node_size,
        max_steps=args.max_steps,
        link=args.link,
        fit_options=FitOptions(),
    )
    model, report = build(data, options)

    print(f"n={data.n} k={data.k} p={data.p} link={args.link} "
          f"alpha={args.alpha:g} B={args.permutations} seed={args.seed}")
    header = f"{'step':>4} {'component':>9} {'node':>4} {'variable':>12} {'threshold':>10} {'LR':>9} {'p-value':>8} {'decision':>8}"
    print(header)
    for s in report.steps:
        print(f"{s.step:>4} {s.component:>9} {s.node_id:>4} {s.variable_name:>12} "
              f"{s.threshold:>10.4g} {s.lr_stat:>9.4f} {s.p_value:>8.4f} {s.decision:>8}")
    print(f"stop reason: {report.stop_reason}")
    print(f"final log-likelihood: {report.final_loglik:.6f}")
    print(f"location terminal nodes: {len(report.location_terminals)}, "
          f"scale terminal nodes: {len(report.scale_terminals)}")

    if args.out_model:
        write_model(model, args.out_model)
    if args.out_dot_location:
        write_dot(model, LOCATION, args.out_dot_location)
    if args.out_dot_scale:
        write_dot(model, SCALE, args.out_dot_scale)
    return 0


def _cmd_simulate(args):
    spec = SimSpec(
        n=args.n,
        thresholds=tuple(float(t) for t in args.thresholds.split(",")),
        location=args.location,
        scale=args.scale,
        noise=args.noise,
        covariates=tuple(args.covariates.split(",")),
        seed=args.seed,
    )
    names, _, X, y = simulate(spec)
    write_csv(args.out, names, X, y, response_name=args.response_name)
    counts = np.bincount(y)[1:]
    print(f"wrote {args.out}: n={args.n}, categories {list(counts)}")
    return 0


def _cmd_predict(args):
    model = read_model(args.model)
    specs = [
        VariableSpec(name=s.name, kind=s.kind, column_index=s.column_index)
        for s in model.specs
    ]
    data = ingest_csv(args.data, args.response, specs)
    probs, loc_nodes, sc_nodes = predict(model, data)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [f"pi_{r}" for r in range(1, model.k + 1)] + ["location_node", "scale_node"]
        )
        for i in range(len(loc_nodes)):
            writer.writerow(
                [f"{p:.6f}" for p in probs[i]] + [int(loc_nodes[i]), int(sc_nodes[i])]
            )
    print(f"wrote {args.out}: {len(loc_nodes)} rows")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lstree",
        description="Tree-structured location-scale models for binary and ordinal regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="grow the two-tree model on a CSV dataset")
    fit.add_argument("--data", required=True)
    fit.add_argument("--response", required=True)
    fit.add_argument("--vars", required=True, help="covariates as name:kind[,name:kind...]")
    fit.add_argument("--alpha", type=float, default=0.05)
    fit.add_argument("--permutations", type=int, default=1000)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--min-node-size", type=int, default=10)
    fit.add_argument("--link", choices=["logit", "probit"], default="logit")
    fit.add_argument("--max-steps", type=int, default=30)
    fit.add_argument("--out-model")
    fit.add_argument("--out-dot-location")
    fit.add_argument("--out-dot-scale")
    fit.set_defaults(func=_cmd_fit)

    sim = sub.add_parser("simulate", help="generate a synthetic ordinal dataset")
    sim.add_argument("--out", required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--thresholds", required=True, help="comma-separated, e.g. -1,1")
    sim.add_argument("--location", default="0")
    sim.add_argument("--scale", default="1")
    sim.add_argument("--noise", choices=["logistic", "normal"], default="logistic")
    sim.add_argument("--covariates", default="x1:normal",
                     help="name:generator[:decimals][,...]; generators: normal, uniform, binary")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--response-name", default="y")
    sim.set_defaults(func=_cmd_simulate)

    pred = sub.add_parser("predict", help="category probabilities for new rows")
    pred.add_argument("--model", required=True)
    pred.add_argument("--data", required=True)
    pred.add_argument("--response", default="y")
    pred.add_argument("--out", required=True)
    pred.set_defaults(func=_cmd_predict)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IngestError, SchemaError, FormulaError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ConvergenceError, NumericalError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
