"""Figure rendering for harness runs (headless Agg backend).

These are quick-look diagnostics, not publication plots: a reward curve
with its rolling mean, per-wind detections and travel-time bars, and one
x/y path map per evaluated wind field.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .env import EnvConfig, EpisodeTrace, GridWorld  # noqa: E402
from .power import DragTable, PowerParams  # noqa: E402


def render_reward_curve(path, traces: Sequence[EpisodeTrace], window: int = 10) -> None:
    rewards = [t.totals.reward for t in traces]
    rolling = []
    for i in range(len(rewards)):
        lo = max(0, i - window + 1)
        rolling.append(sum(rewards[lo:i + 1]) / (i + 1 - lo))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(rewards, lw=0.6, alpha=0.5, label="episode reward")
    ax.plot(rolling, lw=1.8, label=f"rolling mean ({window})")
    ax.set_xlabel("episode")
    ax.set_ylabel("total reward")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_detections_bars(path, wind_reports: Sequence[dict]) -> None:
    labels = [f"{row['w_x']:+g} m/s" for row in wind_reports]
    rl = [row["detections_per_battery"]["rl"] for row in wind_reports]
    cov = [row["detections_per_battery"]["coverage"] for row in wind_reports]
    xs = range(len(labels))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar([x - 0.2 for x in xs], rl, width=0.4, label="RL")
    ax.bar([x + 0.2 for x in xs], cov, width=0.4, label="coverage")
    ax.set_xticks(list(xs), labels)
    ax.set_xlabel("wind")
    ax.set_ylabel("detections per battery")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_time_bars(path, wind_reports: Sequence[dict]) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    labels, rl, cov = [], [], []
    for row in wind_reports:
        times = row["time_to_all_goals_s"]
        labels.append(f"{row['w_x']:+g} m/s")
        rl.append(times["rl"] if times["rl"] is not None else 0.0)
        cov.append(times["coverage"] if times["coverage"] is not None else 0.0)
    xs = range(len(labels))
    ax.bar([x - 0.2 for x in xs], rl, width=0.4, label="RL")
    ax.bar([x + 0.2 for x in xs], cov, width=0.4, label="coverage")
    ax.set_xticks(list(xs), labels)
    ax.set_xlabel("wind")
    ax.set_ylabel("time to all goals [s] (0 = not all found)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_path_map(
    path,
    config: EnvConfig,
    trace: EpisodeTrace,
    drag_table: DragTable | None = None,
    power_params: PowerParams | None = None,
) -> None:
    """X/Y path of one episode over the block-0 goal layout."""
    env = GridWorld(config, drag_table, power_params, wind_ids=[trace.wind_id])
    env.reset(0)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    w_m = config.world_width * config.cell_size
    h_m = config.world_height * config.cell_size
    for i in range(config.world_width + 1):
        ax.axvline(i * config.cell_size, color="0.85", lw=0.6, zorder=0)
    for j in range(config.world_height + 1):
        ax.axhline(j * config.cell_size, color="0.85", lw=0.6, zorder=0)
    for goal in env.goals:
        ax.add_patch(plt.Circle((goal.gx, goal.gy), goal.radius, color="tab:green",
                                alpha=0.7, zorder=2))
    if config.charging_station is not None:
        cx, cy = config.charging_station
        ax.plot((cx + 0.5) * config.cell_size, (cy + 0.5) * config.cell_size,
                marker="s", ms=10, color="tab:orange", zorder=3, label="charging")
    cell = config.cell_size
    xs = [(r.x + 0.5) * cell for r in trace.steps]
    ys = [(r.y + 0.5) * cell for r in trace.steps]
    zs = [r.z for r in trace.steps]
    ax.plot(xs, ys, "-", color="tab:blue", lw=1.4, zorder=4)
    sc = ax.scatter(xs, ys, c=zs, cmap="viridis", vmin=0,
                    vmax=max(1, config.world_altitude - 1), s=26, zorder=5)
    if config.world_altitude > 1:
        fig.colorbar(sc, ax=ax, label="altitude level")
    ax.plot(xs[0], ys[0], marker="^", ms=11, color="tab:red", zorder=6, label="start")
    ax.set_xlim(-0.02 * w_m, 1.02 * w_m)
    ax.set_ylim(-0.02 * h_m, 1.02 * h_m)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    wind = config.wind_set[trace.wind_id]
    ax.set_title(f"wind {wind.w_x:+g} m/s — {trace.totals.detections} detections")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_all(
    out_dir,
    config: EnvConfig,
    traces: Sequence[EpisodeTrace],
    eval_rows: Sequence[tuple[str, EpisodeTrace]],
    wind_reports: Sequence[dict],
    drag_table: DragTable | None = None,
    power_params: PowerParams | None = None,
) -> list[str]:
    """Render the standard figure set for a harness run; returns filenames."""
    out = Path(out_dir)
    written = []
    if traces:
        render_reward_curve(out / "fig_reward_curve.png", traces)
        written.append("fig_reward_curve.png")
    if wind_reports:
        render_detections_bars(out / "fig_detections_per_battery.png", wind_reports)
        render_time_bars(out / "fig_time_to_all_goals.png", wind_reports)
        written += ["fig_detections_per_battery.png", "fig_time_to_all_goals.png"]
    for mode, trace in eval_rows:
        if mode != "battery":
            continue
        name = f"fig_path_wind{trace.wind_id}.png"
        render_path_map(out / name, config, trace, drag_table, power_params)
        written.append(name)
    return written
