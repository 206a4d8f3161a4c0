"""Serpentine coverage baseline.

The baseline sweeps the bottom altitude level row by row, reversing
direction on each row, and pays the same movement costs as any other
policy. It terminates early on battery depletion like the learned
policies do; a sweep that reaches the last cell ends with the
PATH_COMPLETE reason instead.
"""

from __future__ import annotations

from typing import Sequence

from .env import (
    ACTION_DELTAS,
    EnvConfig,
    EpisodeTrace,
    GridWorld,
    StepRecord,
    TerminalReason,
    build_trace,
    leg_time_s,
)
from .errors import ConfigError, ContractViolation
from .power import DragTable, PowerParams

_DELTA_TO_ACTION = {(dx, dy): a for a, (dx, dy, dz) in ACTION_DELTAS.items() if dz == 0}


def serpentine_path(width: int, height: int) -> list[tuple[int, int]]:
    """Boustrophedon cell sequence: row 0 west-to-east, row 1 back, ..."""
    if width < 1 or height < 1:
        raise ConfigError(f"grid must be at least 1x1, got {width}x{height}")
    path: list[tuple[int, int]] = []
    for y in range(height):
        xs = range(width) if y % 2 == 0 else range(width - 1, -1, -1)
        path.extend((x, y) for x in xs)
    return path


def run_coverage(
    config: EnvConfig,
    path: Sequence[tuple[int, int]] | None = None,
    *,
    wind_id: int,
    episode_index: int = 0,
    drag_table: DragTable | None = None,
    power_params: PowerParams | None = None,
) -> EpisodeTrace:
    """Fly a fixed lateral path at the bottom level and trace the episode.

    The path defaults to the serpentine sweep, must start at the config's
    start cell, stay inside the grid, and move between 8-adjacent cells.
    """
    if path is None:
        path = serpentine_path(config.world_width, config.world_height)
    if not path:
        raise ConfigError("coverage path must contain at least the start cell")
    if tuple(path[0]) != config.start_cell:
        raise ConfigError(
            f"coverage path must start at the start cell {config.start_cell}, got {tuple(path[0])}"
        )
    for i, (x, y) in enumerate(path):
        if not (0 <= x < config.world_width and 0 <= y < config.world_height):
            raise ConfigError(f"coverage path cell {i} = ({x}, {y}) is outside the grid")
    env = GridWorld(config, drag_table, power_params, wind_ids=[wind_id])
    env.reset(episode_index)
    records: list[StepRecord] = []
    time_s = 0.0
    terminal: TerminalReason | None = TerminalReason.PATH_COMPLETE
    for i in range(1, len(path)):
        px, py = path[i - 1]
        nx, ny = path[i]
        delta = (nx - px, ny - py)
        if delta not in _DELTA_TO_ACTION:
            raise ConfigError(
                f"coverage path cells {i - 1} and {i} are not 8-adjacent: {path[i - 1]} -> {path[i]}"
            )
        action = _DELTA_TO_ACTION[delta]
        state = env.state
        if (state.x, state.y) != (px, py):
            raise ContractViolation("coverage drift: environment disagrees with the path")
        outcome = env.step(action)
        records.append(
            StepRecord(
                x=px,
                y=py,
                z=state.z,
                action=action,
                r_t=outcome.r_t,
                battery=outcome.next_state.battery,
                detections=outcome.n_new_detections,
                energy=-outcome.r_movement,
            )
        )
        time_s += leg_time_s(config, env.power_params, action)
        if outcome.terminal is not None:
            terminal = outcome.terminal
            break
    return build_trace(records, terminal, env.state.wind_id, episode_index,
                       env.config_digest, time_s)
