"""Experiment harness: train / evaluate / coverage / compare pipelines.

Everything here is deterministic given (config file, seed): reports are
JSON with sorted keys and no timestamps, so regenerating a run produces
byte-identical report and CSV files. Figures are rendered alongside the
delimited output unless turned off.
"""

from __future__ import annotations

import csv
import json
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .coverage import run_coverage, serpentine_path
from .env import EnvConfig, EpisodeTrace, TerminalReason
from .errors import ConfigError
from .planners import (
    EpisodicEpsilon,
    LearnerParams,
    QTable,
    TrainResult,
    greedy_rollout,
    train,
)
from .power import DragTable, PowerParams

EPISODES_CSV_COLUMNS = (
    "episode",
    "wind_id",
    "steps",
    "total_reward",
    "energy",
    "detections",
    "terminal_reason",
)

MODE_BATTERY = "battery"
MODE_UNLIMITED = "unlimited"


def _trace_row(trace: EpisodeTrace) -> list:
    terminal = trace.terminal.value if trace.terminal is not None else ""
    return [
        trace.episode,
        trace.wind_id,
        trace.totals.steps,
        trace.totals.reward,
        trace.totals.energy,
        trace.totals.detections,
        terminal,
    ]


def write_episodes_csv(path, traces: Sequence[EpisodeTrace]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EPISODES_CSV_COLUMNS)
        for trace in traces:
            writer.writerow(_trace_row(trace))


def write_mode_csv(path, rows: Sequence[tuple[str, EpisodeTrace]]) -> None:
    """Evaluation/coverage CSV: the episode column is replaced by a mode
    column (battery vs unlimited)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("mode",) + EPISODES_CSV_COLUMNS[1:])
        for mode, trace in rows:
            writer.writerow([mode] + _trace_row(trace)[1:])


def _time_to_all_goals(trace: EpisodeTrace | None) -> float | None:
    if trace is None or trace.terminal is not TerminalReason.ALL_GOALS_FOUND:
        return None
    return trace.totals.time_s


def _per_detection(energy: float, detections: int) -> float | None:
    return energy / detections if detections > 0 else None


def compare(
    rl_traces: Sequence[EpisodeTrace],
    cov_trace: EpisodeTrace,
    rl_unlimited: EpisodeTrace | None = None,
    cov_unlimited: EpisodeTrace | None = None,
) -> dict:
    """Comparison metrics for one wind field.

    The last RL trace is treated as the converged battery-life
    representative; reward statistics average the last 10% of the RL
    traces. Time-to-all-goals comes from the unlimited-battery runs and
    stays None for a run that ended without finding every goal.
    """
    if not rl_traces:
        raise ConfigError("compare() needs at least one RL trace")
    digests = {t.config_digest for t in rl_traces}
    digests.add(cov_trace.config_digest)
    for extra in (rl_unlimited, cov_unlimited):
        if extra is not None:
            digests.add(extra.config_digest)
    if len(digests) != 1:
        raise ConfigError(
            "compare() refuses traces from different configs: digests " + ", ".join(sorted(digests))
        )
    rl_last = rl_traces[-1]
    tail = max(1, len(rl_traces) // 10)
    mean_reward = sum(t.totals.reward for t in rl_traces[-tail:]) / tail
    rl_det = rl_last.totals.detections
    cov_det = cov_trace.totals.detections
    report: dict = {
        "config_digest": rl_last.config_digest,
        "detections_per_battery": {"rl": rl_det, "coverage": cov_det},
        "mean_reward_last_10pct": mean_reward,
        "energy_per_detection": {
            "rl": _per_detection(rl_last.totals.energy, rl_det),
            "coverage": _per_detection(cov_trace.totals.energy, cov_det),
        },
        "time_to_all_goals_s": {
            "rl": _time_to_all_goals(rl_unlimited),
            "coverage": _time_to_all_goals(cov_unlimited),
        },
    }
    if cov_det > 0:
        report["detections_ratio"] = rl_det / cov_det
        report["note"] = None
    else:
        report["detections_ratio"] = None
        report["note"] = "coverage: 0 detections"
    t_rl = report["time_to_all_goals_s"]["rl"]
    t_cov = report["time_to_all_goals_s"]["coverage"]
    report["time_ratio"] = t_rl / t_cov if (t_rl is not None and t_cov and t_cov > 0) else None
    return report


def dump_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")


def run_pipeline(
    config: EnvConfig,
    *,
    out_dir,
    algo: str = "q",
    episodes: int = 100,
    seed: int | None = None,
    wind_ids: Sequence[int] | None = None,
    drag_table: DragTable | None = None,
    power_params: PowerParams | None = None,
    phase1_episodes: int = 0,
    eps_init: float = 0.5,
    emit_plot_data: bool = False,
    figures: bool = True,
    scenario_name: str | None = None,
) -> dict:
    """Full train → evaluate → coverage → compare run.

    Writes qtable.txt, episodes.csv, eval.csv, coverage.csv, report.json
    and (by default) the figures into out_dir, then returns the report.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = seed if seed is not None else config.seed
    table = drag_table if drag_table is not None else DragTable.default()
    winds = list(wind_ids) if wind_ids is not None else list(range(len(config.wind_set)))
    for wid in winds:
        if not 0 <= wid < len(config.wind_set):
            raise ConfigError(f"wind index {wid} outside 0..{len(config.wind_set) - 1}")

    params = LearnerParams(algorithm=algo)
    schedule = EpisodicEpsilon(eps_init)
    result: TrainResult = train(
        config,
        params,
        schedule,
        episodes=episodes,
        seed=seed,
        wind_ids=winds,
        drag_table=table,
        power_params=power_params,
        phase1_episodes=phase1_episodes,
    )
    result.qtable.save(out / "qtable.txt")
    write_episodes_csv(out / "episodes.csv", result.traces)

    unlimited = replace(config, unlimited_battery=True)
    eval_rows: list[tuple[str, EpisodeTrace]] = []
    cov_rows: list[tuple[str, EpisodeTrace]] = []
    wind_reports = []
    for wid in winds:
        eval_b = greedy_rollout(config, result.qtable, wid, seed=seed,
                                drag_table=table, power_params=power_params)
        eval_u = greedy_rollout(unlimited, result.qtable, wid, seed=seed,
                                drag_table=table, power_params=power_params)
        cov_b = run_coverage(config, wind_id=wid, drag_table=table, power_params=power_params)
        cov_u = run_coverage(unlimited, wind_id=wid, drag_table=table, power_params=power_params)
        eval_rows += [(MODE_BATTERY, eval_b), (MODE_UNLIMITED, eval_u)]
        cov_rows += [(MODE_BATTERY, cov_b), (MODE_UNLIMITED, cov_u)]
        trained_here = [t for t in result.traces if t.wind_id == wid] or list(result.traces)
        row = compare(trained_here + [eval_b], cov_b, eval_u, cov_u)
        row["wind_id"] = wid
        row["w_x"] = config.wind_set[wid].w_x
        row["w_y"] = config.wind_set[wid].w_y
        wind_reports.append(row)
    write_mode_csv(out / "eval.csv", eval_rows)
    write_mode_csv(out / "coverage.csv", cov_rows)

    report = {
        "scenario": scenario_name,
        "algo": algo,
        "episodes": episodes,
        "phase1_episodes": phase1_episodes,
        "seed": seed,
        "config_digest": config.digest(),
        "drag_table_digest": table.digest(),
        "coverage_path_transitions": len(serpentine_path(config.world_width,
                                                         config.world_height)) - 1,
        "winds": wind_reports,
    }
    dump_report(report, out / "report.json")

    if emit_plot_data:
        _write_plot_data(out, result.traces, eval_rows, wind_reports)
    if figures:
        from . import plots

        plots.render_all(out, config, result.traces, eval_rows, wind_reports,
                         drag_table=table, power_params=power_params)
    return report


def _rolling_mean(values: Sequence[float], window: int = 10) -> list[float]:
    means = []
    for i in range(len(values)):
        lo = max(0, i - window + 1)
        means.append(sum(values[lo:i + 1]) / (i + 1 - lo))
    return means


def _write_plot_data(
    out: Path,
    traces: Sequence[EpisodeTrace],
    eval_rows: Sequence[tuple[str, EpisodeTrace]],
    wind_reports: Sequence[dict],
) -> None:
    rewards = [t.totals.reward for t in traces]
    rolling = _rolling_mean(rewards)
    with open(out / "plotdata_reward_curve.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("episode", "reward", "rolling_mean_10"))
        for t, r, m in zip(traces, rewards, rolling):
            writer.writerow([t.episode, r, m])
    with open(out / "plotdata_detections_per_battery.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("wind_id", "w_x", "rl", "coverage"))
        for row in wind_reports:
            det = row["detections_per_battery"]
            writer.writerow([row["wind_id"], row["w_x"], det["rl"], det["coverage"]])
    with open(out / "plotdata_time_to_all_goals.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("wind_id", "w_x", "rl_s", "coverage_s"))
        for row in wind_reports:
            times = row["time_to_all_goals_s"]
            writer.writerow([row["wind_id"], row["w_x"],
                             "" if times["rl"] is None else times["rl"],
                             "" if times["coverage"] is None else times["coverage"]])
    for mode, trace in eval_rows:
        if mode != MODE_BATTERY:
            continue
        with open(out / f"plotdata_path_wind{trace.wind_id}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("step", "x", "y", "z", "action", "battery"))
            for i, rec in enumerate(trace.steps):
                writer.writerow([i, rec.x, rec.y, rec.z, rec.action, rec.battery])


def evaluate_qtable(
    config: EnvConfig,
    qtable: QTable,
    wind_ids: Sequence[int],
    seed: int = 0,
    drag_table: DragTable | None = None,
    power_params: PowerParams | None = None,
    unlimited: bool = False,
) -> list[tuple[str, EpisodeTrace]]:
    """Greedy rollouts for the given wind fields, battery plus optionally
    unlimited mode, as (mode, trace) rows."""
    rows: list[tuple[str, EpisodeTrace]] = []
    cfg_unlimited = replace(config, unlimited_battery=True)
    for wid in wind_ids:
        rows.append((MODE_BATTERY, greedy_rollout(config, qtable, wid, seed=seed,
                                                  drag_table=drag_table,
                                                  power_params=power_params)))
        if unlimited:
            rows.append((MODE_UNLIMITED, greedy_rollout(cfg_unlimited, qtable, wid, seed=seed,
                                                        drag_table=drag_table,
                                                        power_params=power_params)))
    return rows
