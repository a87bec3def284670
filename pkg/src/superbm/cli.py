"""Command-line interface: run experiments, render reports, run the selftest.

Exit codes: 0 all enabled checks pass, 1 at least one check failed,
2 invalid configuration or input, 3 particle cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import backend, config, harness, reporting
from .errors import ConfigError, ParticleCapError, PlanError
from .selftest import run_selftest

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3

OUT_DIR_ENV = "SUPERBM_OUT_DIR"


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="superbm",
        description=(
            "Branching-particle simulation of super-Brownian motion with "
            "analytic oracles and statistical verification checks"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the experiment described by a config file")
    run_p.add_argument("config", help="path to a JSON config file")
    run_p.add_argument("--seed", type=int, default=None, help="override config seed")
    run_p.add_argument(
        "--replicates", type=int, default=None, help="override replicate count"
    )
    run_p.add_argument("--out-dir", default=None, help="override output directory")
    run_p.add_argument(
        "--threads",
        type=int,
        default=None,
        help="parallelism width over replicates; 1 forces sequential",
    )

    rep_p = sub.add_parser("report", help="print the verdict table for a summary.json")
    rep_p.add_argument("summary", help="path to summary.json")

    sub.add_parser(
        "selftest", help="run the deterministic analytic identity suite (no simulation)"
    )
    return parser


def _cmd_run(args) -> int:
    try:
        settings = config.load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        settings.seed = args.seed
    if args.replicates is not None:
        settings.replicates = args.replicates
    out_dir = settings.out_dir
    if os.environ.get(OUT_DIR_ENV):
        out_dir = os.environ[OUT_DIR_ENV]
    if args.out_dir is not None:
        out_dir = args.out_dir
    threads = settings.threads if args.threads is None else args.threads
    if threads < 1:
        print("config error: threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    try:
        plan = config.build_plan(settings)
    except (ConfigError, PlanError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    try:
        result = harness.run_experiment(plan, threads=threads)
    except ParticleCapError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    wall = time.perf_counter() - t0

    row_count = reporting.write_results_csv(
        os.path.join(out_dir, "results.csv"), plan, result
    )
    reporting.write_plotdata(out_dir, plan, result)
    summary = {
        "meta": {
            **result["meta"],
            "wall_seconds": wall,
            "row_count": row_count,
            "backend": backend.backend_name(),
            "config": {
                "dimension": settings.dimension,
                "beta": settings.beta,
                "alpha": settings.alpha,
                "domain": settings.domain,
                "scaling": settings.scaling,
                "replicates": settings.replicates,
                "t_max": settings.t_max,
                "dt": settings.dt,
                "seed": settings.seed,
                "snapshot_times": list(settings.snapshot_times),
                "checks": list(settings.checks),
                "start": list(settings.start),
            },
        },
        "checks": result["checks"],
    }
    reporting.write_summary(os.path.join(out_dir, "summary.json"), summary)

    verdicts = {name: rep["verdict"] for name, rep in result["checks"].items()}
    for name, ok in verdicts.items():
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
    print(f"outputs written to {out_dir} ({row_count} result rows, {wall:.1f}s)")
    return EXIT_OK if all(verdicts.values()) else EXIT_CHECK_FAILED


def _cmd_report(args) -> int:
    try:
        with open(args.summary, "r", encoding="utf-8") as fh:
            summary = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read summary: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if "checks" not in summary or not isinstance(summary["checks"], dict):
        print("malformed summary: missing 'checks' object", file=sys.stderr)
        return EXIT_CONFIG
    try:
        print(reporting.render_report(summary))
    except (KeyError, TypeError) as exc:
        print(f"malformed summary: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    failed = [n for n, rep in summary["checks"].items() if not rep.get("verdict")]
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _cmd_selftest() -> int:
    results = run_selftest()
    all_ok = True
    for name, err, tol, ok in results:
        status = "PASS" if ok else "FAIL"
        print(f"{status} {name}: max error {err:.3e} (tolerance {tol:.0e})")
        all_ok &= ok
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "report":
        return _cmd_report(args)
    if args.command == "selftest":
        return _cmd_selftest()
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
