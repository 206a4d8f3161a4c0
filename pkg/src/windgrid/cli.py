"""Command-line interface.

Subcommands: train, eval, coverage, compare, scenario. The seed is taken
from --seed, else the WINDGRID_SEED environment variable, else the config
file's seed. Exit codes: 0 success, 2 configuration error, 3 contract
violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .coverage import run_coverage
from .env import EnvConfig, load_env_config
from .errors import ConfigError, ContractViolation
from .harness import (
    MODE_BATTERY,
    MODE_UNLIMITED,
    compare,
    dump_report,
    evaluate_qtable,
    run_pipeline,
    write_episodes_csv,
    write_mode_csv,
)
from .planners import EpisodicEpsilon, LearnerParams, QTable, train
from .power import DragTable
from .scenarios import get_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONTRACT = 3

SEED_ENV_VAR = "WINDGRID_SEED"


def _add_common(parser: argparse.ArgumentParser, *, config_required: bool) -> None:
    parser.add_argument("--config", type=Path, required=config_required,
                        help="scenario config file (key = value lines)")
    parser.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (falls back to ${SEED_ENV_VAR}, then the config)")
    parser.add_argument("--wind", default="all",
                        help="wind field index, or 'all' (default)")
    parser.add_argument("--drag-table", type=Path, default=None,
                        help="drag-coefficient table CSV (default: built-in cosine table)")
    parser.add_argument("--out", type=Path, default=Path("windgrid-out"),
                        help="output directory (default: windgrid-out)")
    parser.add_argument("--emit-plot-data", action="store_true",
                        help="also write the per-figure CSV data files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="windgrid",
        description="Energy-aware grid-world path planning: training, "
                    "evaluation, coverage baseline and comparisons.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a Q table and write it with episode metrics")
    _add_common(p_train, config_required=True)
    p_train.add_argument("--episodes", type=int, default=400)
    p_train.add_argument("--algo", choices=("q", "sarsa"), default="q")
    p_train.add_argument("--phase1-episodes", type=int, default=0)

    p_eval = sub.add_parser("eval", help="greedy rollouts from a saved Q table")
    _add_common(p_eval, config_required=True)
    p_eval.add_argument("--qtable", type=Path, required=True)

    p_cov = sub.add_parser("coverage", help="run the serpentine coverage baseline")
    _add_common(p_cov, config_required=True)

    p_cmp = sub.add_parser("compare", help="compare greedy rollouts against coverage")
    _add_common(p_cmp, config_required=True)
    p_cmp.add_argument("--qtable", type=Path, required=True)

    p_scn = sub.add_parser("scenario", help="full train/eval/coverage/compare pipeline "
                                            "for a named preset")
    p_scn.add_argument("id", help="S1_Planar5x5, S2_SparseGoalsCharging, S3_ThreeD, "
                                  "S4_LargeExploration (or s1..s4)")
    _add_common(p_scn, config_required=False)
    p_scn.add_argument("--episodes", type=int, default=None)
    p_scn.add_argument("--algo", choices=("q", "sarsa"), default="q")

    return parser


def _resolve_seed(args, config: EnvConfig) -> int:
    if args.seed is not None:
        return args.seed
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            return int(env_seed)
        except ValueError:
            raise ConfigError(f"${SEED_ENV_VAR} must be an integer, got {env_seed!r}") from None
    return config.seed


def _resolve_winds(args, config: EnvConfig) -> list[int]:
    if args.wind == "all":
        return list(range(len(config.wind_set)))
    try:
        wid = int(args.wind)
    except ValueError:
        raise ConfigError(f"--wind must be an index or 'all', got {args.wind!r}") from None
    if not 0 <= wid < len(config.wind_set):
        raise ConfigError(f"wind index {wid} outside 0..{len(config.wind_set) - 1}")
    return [wid]


def _resolve_drag(args) -> DragTable:
    if args.drag_table is None:
        return DragTable.default()
    return DragTable.from_csv(args.drag_table)


def _cmd_train(args) -> int:
    config = load_env_config(args.config)
    seed = _resolve_seed(args, config)
    winds = _resolve_winds(args, config)
    table = _resolve_drag(args)
    result = train(
        config,
        LearnerParams(algorithm=args.algo),
        EpisodicEpsilon(),
        episodes=args.episodes,
        seed=seed,
        wind_ids=winds,
        drag_table=table,
        phase1_episodes=args.phase1_episodes,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.qtable.save(out / "qtable.txt")
    write_episodes_csv(out / "episodes.csv", result.traces)
    from . import plots

    plots.render_reward_curve(out / "fig_reward_curve.png", result.traces)
    if args.emit_plot_data:
        from .harness import _write_plot_data

        _write_plot_data(out, result.traces, [], [])
    last = result.traces[-1]
    print(f"trained {len(result.traces)} episodes ({args.algo}); "
          f"final reward {last.totals.reward:.1f}; wrote {out}/qtable.txt")
    return EXIT_OK


def _load_qtable(args, config: EnvConfig) -> QTable:
    expected = (config.world_width, config.world_height, config.world_altitude,
                len(config.wind_set), 10)
    return QTable.load(args.qtable, expected_shape=expected)


def _cmd_eval(args) -> int:
    config = load_env_config(args.config)
    seed = _resolve_seed(args, config)
    winds = _resolve_winds(args, config)
    table = _resolve_drag(args)
    qtable = _load_qtable(args, config)
    rows = evaluate_qtable(config, qtable, winds, seed=seed, drag_table=table, unlimited=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_mode_csv(out / "eval.csv", rows)
    from . import plots

    for mode, trace in rows:
        if mode == MODE_BATTERY:
            plots.render_path_map(out / f"fig_path_wind{trace.wind_id}.png", config, trace, table)
    for mode, trace in rows:
        print(f"wind {trace.wind_id} [{mode}]: {trace.totals.detections} detections, "
              f"reward {trace.totals.reward:.1f}, terminal {trace.terminal.value}")
    return EXIT_OK


def _cmd_coverage(args) -> int:
    config = load_env_config(args.config)
    winds = _resolve_winds(args, config)
    table = _resolve_drag(args)
    from dataclasses import replace

    rows = []
    for wid in winds:
        rows.append((MODE_BATTERY, run_coverage(config, wind_id=wid, drag_table=table)))
        rows.append((MODE_UNLIMITED, run_coverage(replace(config, unlimited_battery=True),
                                                  wind_id=wid, drag_table=table)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_mode_csv(out / "coverage.csv", rows)
    for mode, trace in rows:
        print(f"wind {trace.wind_id} [{mode}]: {trace.totals.steps} steps, "
              f"{trace.totals.detections} detections, terminal {trace.terminal.value}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    config = load_env_config(args.config)
    seed = _resolve_seed(args, config)
    winds = _resolve_winds(args, config)
    table = _resolve_drag(args)
    qtable = _load_qtable(args, config)
    from dataclasses import replace

    unlimited = replace(config, unlimited_battery=True)
    wind_reports = []
    eval_rows = []
    for wid in winds:
        rows = evaluate_qtable(config, qtable, [wid], seed=seed, drag_table=table, unlimited=True)
        eval_b = rows[0][1]
        eval_u = rows[1][1]
        cov_b = run_coverage(config, wind_id=wid, drag_table=table)
        cov_u = run_coverage(unlimited, wind_id=wid, drag_table=table)
        row = compare([eval_b], cov_b, eval_u, cov_u)
        row["wind_id"] = wid
        row["w_x"] = config.wind_set[wid].w_x
        row["w_y"] = config.wind_set[wid].w_y
        wind_reports.append(row)
        eval_rows += rows
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "config_digest": config.digest(),
        "drag_table_digest": table.digest(),
        "seed": seed,
        "winds": wind_reports,
    }
    dump_report(report, out / "compare.json")
    from . import plots

    plots.render_detections_bars(out / "fig_detections_per_battery.png", wind_reports)
    plots.render_time_bars(out / "fig_time_to_all_goals.png", wind_reports)
    for row in wind_reports:
        det = row["detections_per_battery"]
        ratio = row["detections_ratio"]
        ratio_s = f"{ratio:.2f}" if ratio is not None else row["note"]
        print(f"wind {row['wind_id']}: RL {det['rl']} vs coverage {det['coverage']} "
              f"detections per battery ({ratio_s})")
    return EXIT_OK


def _cmd_scenario(args) -> int:
    spec = get_scenario(args.id)
    config = spec.config
    if args.config is not None:
        config = load_env_config(args.config, base=config)
    seed = _resolve_seed(args, config)
    winds = _resolve_winds(args, config)
    table = _resolve_drag(args)
    episodes = args.episodes if args.episodes is not None else spec.episodes
    report = run_pipeline(
        config,
        out_dir=args.out,
        algo=args.algo,
        episodes=episodes,
        seed=seed,
        wind_ids=winds,
        drag_table=table,
        phase1_episodes=spec.phase1_episodes,
        eps_init=spec.eps_init,
        emit_plot_data=args.emit_plot_data,
        scenario_name=spec.name,
    )
    for row in report["winds"]:
        det = row["detections_per_battery"]
        print(f"wind {row['wind_id']} (w_x {row['w_x']:+g}): RL {det['rl']} vs "
              f"coverage {det['coverage']} detections per battery")
    print(f"report: {Path(args.out) / 'report.json'}")
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "coverage": _cmd_coverage,
    "compare": _cmd_compare,
    "scenario": _cmd_scenario,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"windgrid: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolation as exc:
        print(f"windgrid: contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
