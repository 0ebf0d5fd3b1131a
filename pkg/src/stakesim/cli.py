"""Command line interface: simulate, verify, sweep, figures.

Exit codes: 0 success/pass, 2 validation error, 3 audit or deviation
failure, 4 infeasible scenario.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, parse_scenario, serialize_scenario
from .engine import (
    COMPLETED,
    INFEASIBLE,
    TWO_TOKEN,
    deviation_suite,
    run_all_audits,
    run_scenario,
    scenario_constants,
)
from .sweeps import SweepError, figures_preset, preset_header, sweep_bisect, sweep_grid
from .traceio import trace_csv_text, write_trace_csv
from .two_token import deviation_value_bound, two_token_constants

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_AUDIT = 3
EXIT_INFEASIBLE = 4


def _load_config(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return None
    try:
        return parse_scenario(text)
    except ConfigError as exc:
        print(f"{path}: {len(exc.errors)} validation error(s)", file=sys.stderr)
        for err in exc.errors:
            print(f"  - {err}", file=sys.stderr)
        return None


def _cmd_simulate(args) -> int:
    config = _load_config(args.config)
    if config is None:
        return EXIT_VALIDATION
    trace = run_scenario(config)
    if trace.status == INFEASIBLE and not trace.rounds:
        print(f"infeasible at round {trace.status_round}: {trace.reason}", file=sys.stderr)
        return EXIT_INFEASIBLE
    destination = args.output or config.output
    if destination:
        write_trace_csv(trace, destination)
        print(f"{trace.status} ({len(trace.rounds)} rounds) -> {destination}")
    else:
        sys.stdout.write(trace_csv_text(trace))
    if trace.status == INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_verify(args) -> int:
    config = _load_config(args.config)
    if config is None:
        return EXIT_VALIDATION
    trace = run_scenario(config)
    print(f"scenario status: {trace.status}" + (f" at round {trace.status_round}" if trace.status != COMPLETED else ""))
    if trace.status == INFEASIBLE:
        print(f"  reason: {trace.reason}")
        return EXIT_INFEASIBLE
    params = config.model_params()
    consts = scenario_constants(config)
    failed = False
    for report in run_all_audits(trace, params, consts):
        for check in report.checks:
            mark = "PASS" if check.passed else "FAIL"
            extra = "" if check.first_failing_round is None else f" first failure at t={check.first_failing_round}"
            print(f"  [{mark}] {check.name}: max residual {check.max_residual:.3e} (tol {check.tolerance:.0e}){extra}")
            failed = failed or not check.passed
    results = deviation_suite(trace, params, consts)
    worst = max((r.gain for r in results), default=0.0)
    dev_failed = [r for r in results if not r.passed]
    mark = "PASS" if not dev_failed else "FAIL"
    print(f"  [{mark}] one_shot_deviations: {len(results)} probes, max gain {worst:.3e}")
    for r in dev_failed:
        print(f"      {r.role} t={r.t} eps={r.eps}: gain {r.gain:.3e} > bound {r.bound:.3e}")
    failed = failed or bool(dev_failed)
    if config.mode == TWO_TOKEN:
        consts2 = two_token_constants(params, config.price_b0)
        service = config.service_values(config.horizon + 1)
        prices_a = [rec.price_a for rec in trace.rounds]
        dev, eq, ok = deviation_value_bound(
            params, config.a_v0, prices_a, min(1, len(prices_a) - 1), service, consts2.tight_l
        )
        print(f"  info: sell-all-stake value {dev:.6g} vs equilibrium value {eq:.6g} (bounded: {ok})")
        if eq < 0.0:
            print("  warning: equilibrium value is negative; validators would not stay (viability)")
    if failed:
        return EXIT_AUDIT
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _load_config(args.config)
    if config is None:
        return EXIT_VALIDATION
    try:
        if args.grid:
            values = [float(v) for v in args.grid.split(",") if v.strip()]
            result = sweep_grid(config, args.var, values)
            for point, status in zip(result.points, result.statuses):
                print(f"{args.var} = {point:g}: {status}")
        else:
            lo, hi = args.bisect
            result = sweep_bisect(config, args.var, lo, hi)
            print(
                f"{args.var} threshold = {result.threshold!r}"
                f" ({result.iterations} iterations, bracket [{result.points[0]!r}, {result.points[1]!r}])"
            )
    except (SweepError, ValueError) as exc:
        print(f"sweep error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_figures(args) -> int:
    try:
        configs = figures_preset(args.which, outdir=args.outdir)
    except SweepError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    os.makedirs(args.outdir, exist_ok=True)
    for config in configs:
        label = os.path.splitext(os.path.basename(config.output))[0]
        config_path = os.path.join(args.outdir, f"{label}.cfg")
        with open(config_path, "w", newline="\n") as fh:
            fh.write(serialize_scenario(config, header=preset_header(args.which)))
        trace = run_scenario(config)
        write_trace_csv(trace, config.output)
        print(f"{label}: {trace.status} ({len(trace.rounds)} rounds) -> {config.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stakesim",
        description="Simulate and verify proof-of-stake tokenomics equilibria.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario and write its CSV trace")
    p.add_argument("config")
    p.add_argument("--output", help="override the config's output path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="run all audits and the deviation suite")
    p.add_argument("config")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="grid or bisection sweep of one variable")
    p.add_argument("config")
    p.add_argument("--var", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--bisect", nargs=2, type=float, metavar=("LO", "HI"))
    group.add_argument("--grid", help="comma-separated values")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("figures", help="emit and run a figure-reproduction preset")
    p.add_argument("which", choices=("fig2", "fig3", "fig4", "fig5"))
    p.add_argument("--outdir", default="out")
    p.set_defaults(func=_cmd_figures)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
