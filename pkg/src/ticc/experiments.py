"""Batch experiment harness.

Runs seeded batches of collaboration rounds, aggregates the dependent
measures, and emits tidy CSV. Each run owns a randomness stream keyed
by (master seed, run index, round index), so a batch reproduces bit
for bit regardless of how many worker processes execute it.
"""

from __future__ import annotations

import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from .domain import Action
from .engine import EpisodeLog, PersistentState, make_human, run_round
from .fixtures import ExperimentConfig, config_for_list_prefix, config_from_fixture
from .planner import MODE_STD, MODE_TICC

CSV_HEADER = ("run_id", "seed", "mode", "stage", "round", "step", "metric", "value")
SWEEP_HEADER = ("axis", "value", "mode", "stage", "round", "metric", "mean", "stderr")

PER_ROUND_METRICS = ("task_reward", "psi_correctness", "phi_correctness")

SWEEP_SAMPLE_BOUNDS = (5_000, 50_000)
SWEEP_ITEM_VALUES = (2, 3, 4, 5)
SWEEP_LIST_BOUNDS = (5, 10)


@dataclass(frozen=True)
class RunResult:
    """One independent run: its logs, or the diagnostic that ended it."""

    run_index: int
    logs: tuple[EpisodeLog, ...]
    error: str | None = None


@dataclass(frozen=True)
class MetricStat:
    mean: float
    stderr: float | None


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    runs: tuple[RunResult, ...]

    @property
    def completed(self) -> tuple[RunResult, ...]:
        return tuple(r for r in self.runs if r.error is None)

    @property
    def aborted(self) -> tuple[tuple[int, str], ...]:
        return tuple((r.run_index, r.error) for r in self.runs if r.error is not None)


@dataclass(frozen=True)
class MetricsSummary:
    """Run-level statistics for each dependent measure.

    ``per_round[metric][r]`` aggregates round r over completed runs.
    ``evaluation_theta_by_step[s]`` aggregates each run's mean
    likelihood of the true list at step s across its evaluation
    rounds. Standard errors are sample stdev / sqrt(completed runs);
    a single run reports no standard error.
    """

    per_round: dict[str, tuple[MetricStat, ...]]
    evaluation_theta_by_step: tuple[MetricStat, ...]
    evaluation_reward: MetricStat | None
    completed_runs: int
    aborted: tuple[tuple[int, str], ...]


def run_single(config: ExperimentConfig, run_index: int) -> RunResult:
    """All rounds of one run, with fresh beliefs and a fresh partner.

    A failure anywhere inside the run aborts and excludes the whole
    run; the diagnostic travels back in the result so batch summaries
    can report which seeds dropped out.
    """
    state = PersistentState.initial(config.num_item_types)
    human = make_human(config)
    logs = []
    try:
        for round_index in range(config.total_rounds):
            logs.append(run_round(config, state, human, run_index, round_index))
    except Exception as exc:
        return RunResult(run_index, (), f"{type(exc).__name__}: {exc}")
    return RunResult(run_index, tuple(logs))


def _run_task(args: tuple[ExperimentConfig, int]) -> RunResult:
    return run_single(*args)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute every run, optionally across worker processes.

    Results come back keyed by run index and are reduced in index
    order, so the worker count never changes the output.
    """
    workers = config.effective_workers()
    if workers <= 1 or config.num_runs == 1:
        runs = [run_single(config, r) for r in range(config.num_runs)]
    else:
        tasks = [(config, r) for r in range(config.num_runs)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_task, tasks))
    runs.sort(key=lambda r: r.run_index)
    return ExperimentResult(config, tuple(runs))


def _stat(values: Sequence[float]) -> MetricStat:
    if len(values) == 1:
        return MetricStat(values[0], None)
    return MetricStat(
        statistics.mean(values),
        statistics.stdev(values) / len(values) ** 0.5,
    )


def summarize(result: ExperimentResult) -> MetricsSummary:
    config = result.config
    completed = result.completed
    if not completed:
        raise RuntimeError("no completed runs to summarize")
    per_round: dict[str, tuple[MetricStat, ...]] = {}
    for metric in PER_ROUND_METRICS:
        per_round[metric] = tuple(
            _stat([getattr(run.logs[rnd], metric) for run in completed])
            for rnd in range(config.total_rounds)
        )
    theta: list[MetricStat] = []
    evaluation_reward = None
    if config.evaluation_rounds > 0:
        for step in range(config.horizon):
            per_run = [
                statistics.mean(
                    log.steps[step].theta_likelihood
                    for log in run.logs
                    if log.stage == "evaluation"
                )
                for run in completed
            ]
            theta.append(_stat(per_run))
        evaluation_reward = _stat([
            statistics.mean(
                log.task_reward for log in run.logs if log.stage == "evaluation"
            )
            for run in completed
        ])
    return MetricsSummary(
        per_round=per_round,
        evaluation_theta_by_step=tuple(theta),
        evaluation_reward=evaluation_reward,
        completed_runs=len(completed),
        aborted=result.aborted,
    )


def rows_from_result(result: ExperimentResult) -> list[tuple[str, ...]]:
    """Tidy long rows, one per logged scalar, aborted runs excluded."""
    config = result.config
    seed = str(config.master_seed)
    rows: list[tuple[str, ...]] = []
    for run in result.completed:
        run_id = str(run.run_index)
        for log in run.logs:
            base = (run_id, seed, config.mode, log.stage, str(log.round_index))
            for metric in PER_ROUND_METRICS:
                rows.append(base + ("", metric, repr(getattr(log, metric))))
            for rec in log.steps:
                rows.append(
                    base + (str(rec.step), "theta_likelihood", repr(rec.theta_likelihood))
                )
    return rows


def write_csv(rows: Sequence[Sequence[str]], path, header: Sequence[str] = CSV_HEADER) -> None:
    """Plain comma-joined rows with newline terminators.

    No cell the harness emits needs quoting, so the writer stays
    trivial and the byte stream depends only on the row values.
    """
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def _carried_fields(base: ExperimentConfig) -> dict:
    carried = (
        "num_search_samples",
        "learning_rounds",
        "evaluation_rounds",
        "num_runs",
        "master_seed",
        "num_particles",
        "ucb_c",
        "gamma",
        "epsilon",
        "human_temp",
        "intent_temp",
        "intent_burn_in",
        "calibration_weight",
        "human_policy",
        "signal_threshold",
        "num_workers",
    )
    return {name: getattr(base, name) for name in carried}


def config_for_axis(
    base: ExperimentConfig, axis: str, value: int, mode: str
) -> ExperimentConfig:
    """Resolve one sweep cell to a concrete config.

    The samples axis rescales the base scenario's search budget; the
    item-types axis swaps in the matching benchmark table; the lists
    axis keeps the base scenario's first n candidate lists. Run
    parameters carry over unchanged in the latter two cases.
    """
    if axis == "samples":
        lo, hi = SWEEP_SAMPLE_BOUNDS
        if not lo <= value <= hi:
            raise ValueError(f"samples axis takes values in {lo}..{hi}")
        return base.with_overrides(num_search_samples=value, mode=mode)
    if axis == "item_types":
        if value not in SWEEP_ITEM_VALUES:
            raise ValueError(f"item_types axis takes values in {SWEEP_ITEM_VALUES}")
        return config_from_fixture(
            f"setup2_items{value}", mode=mode, **_carried_fields(base)
        )
    if axis == "lists":
        lo, hi = SWEEP_LIST_BOUNDS
        if not lo <= value <= hi:
            raise ValueError(f"lists axis takes values in {lo}..{hi}")
        return config_for_list_prefix(value, mode=mode, **_carried_fields(base))
    raise ValueError(f"unknown sweep axis {axis!r}; known: samples, item_types, lists")


def sweep(
    base: ExperimentConfig,
    axis: str,
    values: Sequence[int],
    modes: Sequence[str] = (MODE_TICC, MODE_STD),
) -> list[tuple[str, ...]]:
    """One experiment per (value, mode) cell, reduced to summary rows."""
    rows: list[tuple[str, ...]] = []
    for value in values:
        for mode in modes:
            cfg = config_for_axis(base, axis, value, mode)
            summary = summarize(run_experiment(cfg))
            for metric, stats in summary.per_round.items():
                for rnd, stat in enumerate(stats):
                    rows.append((
                        axis,
                        str(value),
                        mode,
                        cfg.stage_of(rnd),
                        str(rnd),
                        metric,
                        repr(stat.mean),
                        "" if stat.stderr is None else repr(stat.stderr),
                    ))
            if summary.evaluation_reward is not None:
                stat = summary.evaluation_reward
                rows.append((
                    axis,
                    str(value),
                    mode,
                    "evaluation",
                    "",
                    "evaluation_reward",
                    repr(stat.mean),
                    "" if stat.stderr is None else repr(stat.stderr),
                ))
    return rows


def config_to_payload(config: ExperimentConfig) -> dict:
    payload = asdict(config)
    payload["human_script"] = [
        {"kind": a.kind, "item": a.item} for a in config.human_script
    ]
    return payload


def config_from_payload(payload: dict) -> ExperimentConfig:
    payload = dict(payload)
    payload["shopping_lists"] = tuple(tuple(lst) for lst in payload["shopping_lists"])
    payload["human_capability"] = tuple(payload["human_capability"])
    payload["robot_capability"] = tuple(payload["robot_capability"])
    payload["human_script"] = tuple(
        Action(a["kind"], a["item"]) for a in payload["human_script"]
    )
    return ExperimentConfig(**payload)


def write_log_file(result: ExperimentResult, path) -> None:
    """Self-contained episode archive: a config header line, then one
    JSON log per completed round. Enough to replay every run."""
    with Path(path).open("w") as fh:
        fh.write(json.dumps({"config": config_to_payload(result.config)}) + "\n")
        for run in result.completed:
            for log in run.logs:
                fh.write(log.to_json() + "\n")


def replay_log_file(path) -> dict:
    """Re-run every archived round and compare against the record.

    Rounds within a run share carried-over capability counts, so each
    run replays from its own fresh start. Returns counts plus any
    (run, round) pairs whose recomputed log differs.
    """
    with Path(path).open() as fh:
        header = json.loads(fh.readline())
        config = config_from_payload(header["config"])
        archived = [EpisodeLog.from_json(line) for line in fh if line.strip()]
    by_run: dict[int, list[EpisodeLog]] = {}
    for log in archived:
        by_run.setdefault(log.run_index, []).append(log)
    mismatches: list[tuple[int, int]] = []
    for run_index in sorted(by_run):
        logs = sorted(by_run[run_index], key=lambda log: log.round_index)
        state = PersistentState.initial(config.num_item_types)
        human = make_human(config)
        for log in logs:
            replayed = run_round(config, state, human, run_index, log.round_index)
            if replayed != log:
                mismatches.append((run_index, log.round_index))
    return {
        "runs": len(by_run),
        "rounds": len(archived),
        "mismatches": mismatches,
    }
