"""Command line entry point: simulate, analyze, chsh, scan, polytope."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .chsh import chsh_all_variants, chsh_f, chsh_max, variant_names
from .hv import context_tables_from_table, polytope_membership
from .local_model import ModelConfig, correlation_quad, read_config
from .simulate import Schedule, SimConfig, analyze, contextual_quad, format_scan_csv, scan, simulate
from .table import ValidationError, format_csv, read_csv

EXIT_VALIDATION = 2


def _write(text: str, dest) -> None:
    if dest is None or str(dest) == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def _model(args) -> ModelConfig:
    return read_config(args.config) if args.config else ModelConfig()


def cmd_simulate(args) -> int:
    cfg = SimConfig(_model(args), args.runs, args.seed, Schedule.parse(args.schedule))
    result = simulate(cfg, n_jobs=args.jobs)
    _write(format_csv(result.table, result.metadata()), args.out)
    return 0


def cmd_analyze(args) -> int:
    report = analyze(read_csv(args.input))
    text = json.dumps(report, indent=2) + "\n"
    if args.json:
        Path(args.json).write_text(text)
        chsh = report["chsh"]
        summary = "contextual CHSH unavailable (a joint context has no runs)" if chsh is None else (
            f"N={report['n_runs']}  contextual max|f|={chsh['max']:.12g} ({chsh['max_variant']})"
        )
        print(summary)
    else:
        sys.stdout.write(text)
    return 0


def cmd_chsh(args) -> int:
    if args.input:
        quad = contextual_quad(read_csv(args.input))
        source = "contextual (data)"
    else:
        quad = correlation_quad(_model(args))
        source = "contextual (analytic)"
    best, name = chsh_max(quad)
    out = {
        "source": source,
        "correlations": dict(zip(("AB", "AB'", "A'B", "A'B'"), (float(f"{v:.12g}") for v in quad.values()))),
        "f": float(f"{chsh_f(quad):.12g}"),
        "variants": {n: float(f"{v:.12g}") for n, v in zip(variant_names(), chsh_all_variants(quad))},
        "max": float(f"{best:.12g}"),
        "max_variant": name,
        "single_space_bound": 2.0,
        "tsirelson": float(f"{2 * math.sqrt(2):.12g}"),
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_scan(args) -> int:
    _write(format_scan_csv(scan(args.step_deg)), args.out)
    return 0


def _tables_from_report(report: dict) -> dict:
    try:
        joint = report["joint"]
    except (KeyError, TypeError):
        raise ValidationError("report has no 'joint' block") from None
    tables = {}
    for block in joint:
        ctx, probs = block.get("context"), block.get("p")
        if probs is None:
            raise ValidationError(f"context {ctx} has no measured runs")
        split = ctx.upper().find("B")
        key = (ctx[:split], ctx[split:])
        tables[key] = {(o[0], o[1]): v for o, v in probs.items()}
    return tables


def cmd_polytope(args) -> int:
    path = Path(args.input)
    if path.suffix.lower() == ".csv":
        tables = context_tables_from_table(read_csv(path))
    else:
        try:
            report = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
        tables = _tables_from_report(report)
    result = polytope_membership(tables)
    text = json.dumps(result.to_json(), indent=2) + "\n"
    _write(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctxbell", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo runs of the local model to runs.csv")
    p.add_argument("--config", help="key=value model config (angles in degrees)")
    p.add_argument("--runs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule", default="random", help="fixed:AB | fixed:A'B' | random | random:p,p,p,p")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (output does not depend on it)")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="interval, contextual and CHSH statistics of a runs CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--json", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("chsh", help="CHSH values, analytic or from data")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--analytic", action="store_true")
    src.add_argument("--in", dest="input")
    p.add_argument("--config")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("scan", help="analytic probability/correlation/CHSH curves")
    p.add_argument("--step-deg", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("polytope", help="single-distribution membership of contextual statistics")
    p.add_argument("--in", dest="input", required=True, help="analyze report JSON (or runs CSV)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_polytope)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
