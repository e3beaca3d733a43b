"""Command line front end.

Four subcommands: ``run`` executes one experiment batch and writes the
tidy CSV (plus an optional episode archive), ``sweep`` scans one
manipulated variable, ``replay`` re-runs an episode archive and checks
it reproduces, and ``serve`` starts the interaction service.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    SWEEP_HEADER,
    replay_log_file,
    rows_from_result,
    run_experiment,
    summarize,
    sweep,
    write_csv,
    write_log_file,
)
from .fixtures import (
    ExperimentConfig,
    config_from_fixture,
    fixture_names,
)
from .planner import MODE_STD, MODE_TICC

QUICK_RUNS = 10
QUICK_SAMPLES = 10_000


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ticc",
        description="Capability-aware planning experiments and service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one experiment batch")
    run_p.add_argument("--setup", default="setup1", choices=fixture_names(),
                       help="named scenario fixture")
    run_p.add_argument("--config", metavar="FILE",
                       help="JSON config file mirroring the config fields; "
                            "overrides --setup")
    run_p.add_argument("--mode", default=MODE_TICC, choices=(MODE_TICC, MODE_STD))
    run_p.add_argument("--samples", type=int, help="search samples per decision")
    run_p.add_argument("--runs", type=int, help="independent runs")
    run_p.add_argument("--seed", type=int, help="master seed")
    run_p.add_argument("--out", default="results.csv", help="CSV output path")
    run_p.add_argument("--logs", metavar="FILE",
                       help="also write a replayable episode archive")
    run_p.add_argument("--quick", action="store_true",
                       help=f"reduced fidelity: {QUICK_RUNS} runs at "
                            f"{QUICK_SAMPLES} samples")

    sweep_p = sub.add_parser("sweep", help="scan one manipulated variable")
    sweep_p.add_argument("--axis", required=True,
                         choices=("samples", "item_types", "lists"))
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated axis values")
    sweep_p.add_argument("--setup", default="setup1", choices=fixture_names())
    sweep_p.add_argument("--modes", default=f"{MODE_TICC},{MODE_STD}",
                         help="comma-separated planner modes")
    sweep_p.add_argument("--samples", type=int)
    sweep_p.add_argument("--runs", type=int)
    sweep_p.add_argument("--seed", type=int)
    sweep_p.add_argument("--out", default="sweep.csv")
    sweep_p.add_argument("--quick", action="store_true")

    replay_p = sub.add_parser("replay", help="verify an episode archive")
    replay_p.add_argument("--log", required=True, metavar="FILE")

    serve_p = sub.add_parser("serve", help="start the interaction service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--ui", metavar="DIR", default=None,
                         help="also serve a built web client from DIR")

    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides: dict = {}
    if args.quick:
        overrides["num_runs"] = QUICK_RUNS
        overrides["num_search_samples"] = QUICK_SAMPLES
    if getattr(args, "mode", None) is not None:
        overrides["mode"] = args.mode
    if args.samples is not None:
        overrides["num_search_samples"] = args.samples
    if args.runs is not None:
        overrides["num_runs"] = args.runs
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "config", None):
        with open(args.config) as fh:
            payload = json.load(fh)
        payload.update(overrides)
        payload["shopping_lists"] = tuple(
            tuple(lst) for lst in payload["shopping_lists"]
        )
        payload["human_capability"] = tuple(payload["human_capability"])
        payload["robot_capability"] = tuple(payload["robot_capability"])
        return ExperimentConfig(**payload)
    return config_from_fixture(args.setup, **overrides)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    result = run_experiment(config)
    write_csv(rows_from_result(result), args.out)
    if args.logs:
        write_log_file(result, args.logs)
    summary = summarize(result)
    print(f"{config.name} mode={config.mode} runs={summary.completed_runs}"
          f"/{config.num_runs} samples={config.num_search_samples}")
    if summary.aborted:
        for run_index, diagnostic in summary.aborted:
            print(f"aborted run {run_index}: {diagnostic}", file=sys.stderr)
    if summary.evaluation_reward is not None:
        stat = summary.evaluation_reward
        err = "" if stat.stderr is None else f" +- {stat.stderr:.4f}"
        print(f"evaluation reward {stat.mean:.4f}{err}")
    print(f"wrote {args.out}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args)
    values = [int(v) for v in args.values.split(",") if v]
    modes = tuple(m for m in args.modes.split(",") if m)
    rows = sweep(config, args.axis, values, modes)
    write_csv(rows, args.out, header=SWEEP_HEADER)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    report = replay_log_file(args.log)
    status = "ok" if not report["mismatches"] else "MISMATCH"
    print(f"{report['runs']} runs, {report['rounds']} rounds: {status}")
    for run_index, round_index in report["mismatches"]:
        print(f"run {run_index} round {round_index} does not reproduce",
              file=sys.stderr)
    return 0 if not report["mismatches"] else 1


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(ui_dir=args.ui), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "replay": _cmd_replay,
        "serve": _cmd_serve,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
