"""Command line entry point: ``polymnn run | list-targets | emit-plots``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import benchmarks, experiments, polynomials


def _cmd_run(args) -> int:
    cfg = experiments.load_config(args.config)
    if args.scale:
        cfg.scale = args.scale.upper()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.nan_policy:
        cfg.nan_policy = args.nan_policy
    cfg.validate()
    report = experiments.run(cfg)
    paths = experiments.emit_report(report, args.out)
    failed = [c for c in report.cells if c["status"] != "ok"]
    for p in paths:
        print(p)
    if failed:
        print(f"{len(failed)} cell(s) failed; see report.json", file=sys.stderr)
    return 0


def _cmd_list(args) -> int:
    print("experiments:", ", ".join(experiments.EXPERIMENTS))
    print("models:", ", ".join(experiments.ALL_MODELS))
    print("configs:", ", ".join(experiments.shipped_configs()))
    print("POLY targets:")
    for text in polynomials.load_manifest():
        e = polynomials.parse_polynomial(text)
        print(f"  {text}  (vars {len(e.variables)}, order {polynomials.polynomial_order(e)}, "
              f"interactions {polynomials.interactions(e)})")
    print("SYNTH targets:")
    for b in benchmarks.BENCHMARKS.values():
        print(f"  {b.name}  (arity {b.arity}, order {b.order}, domain {list(b.domain)})")
    print("FIG1_DEMO targets:", ", ".join(experiments.FIG1_FUNCTIONS))
    print("SIR_DURATION: T in 2,6,12,24,30,40,60,120 at L=1")
    print("SIR_LAG: L in 1..5 at T=120")
    return 0


def _cmd_plots(args) -> int:
    report = experiments.RunReport.from_json(Path(args.report).read_text(encoding="utf-8"))
    out = args.out or Path(args.report).parent
    for p in experiments.emit_plots(report, out):
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polymnn", description="MNN experiment runner")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress per cell")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiments of a config file")
    run.add_argument("--config", required=True, help="config path or shipped name (see list-targets)")
    run.add_argument("--scale", choices=["desk", "full", "DESK", "FULL"])
    run.add_argument("--seed", type=int)
    run.add_argument("--out", default="results")
    run.add_argument("--nan-policy", choices=["propagate", "skip"])
    run.set_defaults(func=_cmd_run)

    lst = sub.add_parser("list-targets", help="list experiments, models and targets")
    lst.set_defaults(func=_cmd_list)

    plots = sub.add_parser("emit-plots", help="write plot-data CSVs from a report.json")
    plots.add_argument("--report", required=True)
    plots.add_argument("--out")
    plots.set_defaults(func=_cmd_plots)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")
    try:
        return args.func(args)
    except experiments.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
