"""Tabular Q-learning and SARSA planners over the grid world.

The Q table is indexed by (x, y, z, wind field, action); battery level is
deliberately not part of the index. Action selection is epsilon-greedy
over the currently valid actions with uniform random tie-breaking, and
actions masked by the once-per-episode pair rule are also excluded from
the bootstrap max. Edge-state entries whose lateral action would leave
the domain start at -100 instead of 0.

Training runs in two phases: an optional first phase visits each wind
field separately under a constant epsilon, then the main phase trains
across the selected wind fields with the episodic decay schedule.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence, Union

import numpy as np

from .env import (
    ACTION_DELTAS,
    LATERAL_ACTIONS,
    N_ACTIONS,
    EnvConfig,
    EpisodeTrace,
    GridState,
    GridWorld,
    StepRecord,
    build_trace,
    leg_time_s,
)
from .errors import ConfigError, ContractViolation
from .power import DragTable, PowerParams

QTABLE_FORMAT = "windgrid-qtable"
QTABLE_VERSION = 1
EDGE_ACTION_VALUE = -100.0

_TRAIN_STREAM = 11
_EVAL_STREAM = 17


class QTable:
    """Dense action-value table with plain-text persistence."""

    def __init__(self, width: int, height: int, altitude: int, n_winds: int) -> None:
        if min(width, height, altitude, n_winds) < 1:
            raise ConfigError("QTable dimensions must be at least 1")
        self.values = np.zeros((width, height, altitude, n_winds, N_ACTIONS), dtype=np.float64)

    @classmethod
    def for_config(cls, config: EnvConfig) -> "QTable":
        """A fresh table with domain-leaving lateral actions preset to -100."""
        table = cls(config.world_width, config.world_height, config.world_altitude,
                    len(config.wind_set))
        w, h = config.world_width, config.world_height
        for action in LATERAL_ACTIONS:
            dx, dy, _ = ACTION_DELTAS[action]
            # A lateral leg exits the grid when either component crosses its
            # edge, so diagonals mark a full column and a full row.
            if dx > 0:
                table.values[w - 1, :, :, :, action - 1] = EDGE_ACTION_VALUE
            elif dx < 0:
                table.values[0, :, :, :, action - 1] = EDGE_ACTION_VALUE
            if dy > 0:
                table.values[:, h - 1, :, :, action - 1] = EDGE_ACTION_VALUE
            elif dy < 0:
                table.values[:, 0, :, :, action - 1] = EDGE_ACTION_VALUE
        return table

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def _index(self, state: GridState, action: int) -> tuple[int, int, int, int, int]:
        x, y, z, w = state.x, state.y, state.z, state.wind_id
        w_, h_, a_, nw, na = self.values.shape
        if not (0 <= x < w_ and 0 <= y < h_ and 0 <= z < a_ and 0 <= w < nw):
            raise ContractViolation(f"state {state} outside the table bounds {self.values.shape}")
        if not 1 <= action <= na:
            raise ContractViolation(f"action {action} outside 1..{na}")
        return (x, y, z, w, action - 1)

    def get(self, state: GridState, action: int) -> float:
        return float(self.values[self._index(state, action)])

    def set(self, state: GridState, action: int, value: float) -> None:
        self.values[self._index(state, action)] = value

    # -- persistence ----------------------------------------------------
    def save(self, path) -> None:
        """Write the header plus one ``x y z wind_id action value`` line per
        non-zero entry."""
        w, h, a, nw, na = self.values.shape
        lines = [f"{QTABLE_FORMAT} {QTABLE_VERSION}", f"{w} {h} {a} {nw} {na}"]
        for x, y, z, wi, ai in np.argwhere(self.values != 0.0):
            v = float(self.values[x, y, z, wi, ai])
            lines.append(f"{x} {y} {z} {wi} {ai + 1} {v!r}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path, expected_shape: tuple[int, ...] | None = None) -> "QTable":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read Q table {path}: {exc}") from exc
        lines = text.splitlines()
        if len(lines) < 2:
            raise ConfigError(f"{path}: truncated Q-table file")
        head = lines[0].split()
        if len(head) != 2 or head[0] != QTABLE_FORMAT:
            raise ConfigError(f"{path}: not a {QTABLE_FORMAT} file")
        if head[1] != str(QTABLE_VERSION):
            raise ConfigError(f"{path}: unsupported format version {head[1]}")
        try:
            dims = tuple(int(t) for t in lines[1].split())
        except ValueError:
            raise ConfigError(f"{path}: line 2: bad dimension header") from None
        if len(dims) != 5:
            raise ConfigError(f"{path}: line 2: expected 5 dimensions, got {len(dims)}")
        if expected_shape is not None and dims != tuple(expected_shape):
            raise ConfigError(
                f"{path}: table dimensions {dims} do not match the expected {tuple(expected_shape)}"
            )
        if dims[4] != N_ACTIONS:
            raise ConfigError(f"{path}: expected {N_ACTIONS} actions, got {dims[4]}")
        table = cls(dims[0], dims[1], dims[2], dims[3])
        for lineno, line in enumerate(lines[2:], start=3):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ConfigError(f"{path}: line {lineno}: expected 6 fields")
            try:
                x, y, z, wi, action = (int(p) for p in parts[:5])
                value = float(parts[5])
            except ValueError:
                raise ConfigError(f"{path}: line {lineno}: bad entry {line!r}") from None
            if not (0 <= x < dims[0] and 0 <= y < dims[1] and 0 <= z < dims[2]
                    and 0 <= wi < dims[3] and 1 <= action <= dims[4]):
                raise ConfigError(f"{path}: line {lineno}: entry outside the declared dimensions")
            table.values[x, y, z, wi, action - 1] = value
        return table


@dataclass(frozen=True)
class LearnerParams:
    alpha: float = 0.5
    gamma: float = 1.0
    algorithm: str = "q"  # "q" or "sarsa"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.algorithm not in ("q", "sarsa"):
            raise ConfigError(f"algorithm must be 'q' or 'sarsa', got {self.algorithm!r}")


def epsilon_episodic(eps_init: float, e: int, total: int) -> float:
    """Episodic decay: eps_init ** ((e/E) / (1 - e/E)).

    Equals 1 at e = 0, eps_init at e = E/2, and 0 at e = E.
    """
    if not 0.0 < eps_init < 1.0:
        raise ConfigError(f"eps_init must be in (0, 1), got {eps_init}")
    if total < 1:
        raise ConfigError(f"episode count must be >= 1, got {total}")
    if not 0 <= e <= total:
        raise ContractViolation(f"episode index {e} outside 0..{total}")
    if e == total:
        return 0.0
    frac = e / total
    return eps_init ** (frac / (1.0 - frac))


@dataclass(frozen=True)
class ConstantEpsilon:
    epsilon: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must be in [0, 1], got {self.epsilon}")

    def value(self, e: int, total: int) -> float:
        return self.epsilon


@dataclass(frozen=True)
class EpisodicEpsilon:
    eps_init: float = 0.5

    def value(self, e: int, total: int) -> float:
        return epsilon_episodic(self.eps_init, e, total)


EpsilonSchedule = Union[ConstantEpsilon, EpisodicEpsilon]


def select_action(
    q: QTable,
    state: GridState,
    valid: Sequence[int],
    epsilon: float,
    rng: np.random.Generator,
) -> int:
    """Epsilon-greedy over the valid actions, uniform on value ties."""
    if not valid:
        raise ContractViolation("select_action needs at least one valid action")
    if epsilon > 0.0 and rng.random() < epsilon:
        return valid[int(rng.integers(len(valid)))]
    values = [q.get(state, a) for a in valid]
    best = max(values)
    candidates = [a for a, v in zip(valid, values) if v == best]
    if len(candidates) == 1:
        return candidates[0]
    return candidates[int(rng.integers(len(candidates)))]


def q_update(
    q: QTable,
    state: GridState,
    action: int,
    reward: float,
    next_state: GridState,
    valid_next: Sequence[int],
    params: LearnerParams,
) -> float:
    """Off-policy update; the target maxes over the unmasked next actions
    and bootstraps 0 when none remain (terminal included)."""
    if params.algorithm != "q":
        raise ContractViolation("q_update called with non-Q learner params")
    bootstrap = max(q.get(next_state, a) for a in valid_next) if valid_next else 0.0
    old = q.get(state, action)
    new = old + params.alpha * (reward + params.gamma * bootstrap - old)
    q.set(state, action, new)
    return new


def sarsa_update(
    q: QTable,
    state: GridState,
    action: int,
    reward: float,
    next_state: GridState,
    next_action: int | None,
    params: LearnerParams,
) -> float:
    """On-policy update; bootstraps the actually selected next action, or 0
    at terminal states (next_action None)."""
    if params.algorithm != "sarsa":
        raise ContractViolation("sarsa_update called with non-SARSA learner params")
    bootstrap = q.get(next_state, next_action) if next_action is not None else 0.0
    old = q.get(state, action)
    new = old + params.alpha * (reward + params.gamma * bootstrap - old)
    q.set(state, action, new)
    return new


def run_episode(
    env: GridWorld,
    q: QTable,
    params: LearnerParams,
    epsilon: float,
    rng: np.random.Generator,
    reset_index: int = 0,
    episode_label: int = 0,
    learn: bool = True,
) -> EpisodeTrace:
    """Drive one episode, optionally updating the table, and trace it."""
    env.reset(reset_index)
    state = env.state
    records: list[StepRecord] = []
    time_s = 0.0
    max_steps = env.config.n_cells * N_ACTIONS + 1
    valid = env.valid_actions()
    action = select_action(q, state, valid, epsilon, rng)
    while True:
        outcome = env.step(action)
        records.append(
            StepRecord(
                x=state.x,
                y=state.y,
                z=state.z,
                action=action,
                r_t=outcome.r_t,
                battery=outcome.next_state.battery,
                detections=outcome.n_new_detections,
                energy=-outcome.r_movement,
            )
        )
        time_s += leg_time_s(env.config, env.power_params, action)
        if outcome.terminal is not None:
            if learn:
                if params.algorithm == "q":
                    q_update(q, state, action, outcome.r_t, outcome.next_state, [], params)
                else:
                    sarsa_update(q, state, action, outcome.r_t, outcome.next_state, None, params)
            terminal = outcome.terminal
            break
        valid = env.valid_actions()
        if params.algorithm == "q":
            if learn:
                q_update(q, state, action, outcome.r_t, outcome.next_state, valid, params)
            next_action = select_action(q, outcome.next_state, valid, epsilon, rng)
        else:
            next_action = select_action(q, outcome.next_state, valid, epsilon, rng)
            if learn:
                sarsa_update(q, state, action, outcome.r_t, outcome.next_state, next_action, params)
        state, action = outcome.next_state, next_action
        if len(records) > max_steps:
            raise ContractViolation("episode exceeded the state-action pair bound")
    return build_trace(records, terminal, env.state.wind_id, episode_label,
                       env.config_digest, time_s)


def reward_plateaued(rewards: Sequence[float], window: int = 10, tol: float = 0.01) -> bool:
    """True when the rolling mean changed by less than tol between the last
    two windows."""
    if len(rewards) < 2 * window:
        return False
    recent = sum(rewards[-window:]) / window
    previous = sum(rewards[-window - 1:-1]) / window
    return abs(recent - previous) < tol * max(abs(previous), 1.0)


class TrainResult(NamedTuple):
    qtable: QTable
    traces: list[EpisodeTrace]


def train(
    config: EnvConfig,
    params: LearnerParams | None = None,
    schedule: EpsilonSchedule | None = None,
    episodes: int = 100,
    seed: int = 0,
    wind_ids: Sequence[int] | None = None,
    drag_table: DragTable | None = None,
    power_params: PowerParams | None = None,
    phase1_episodes: int = 0,
    phase1_epsilon: float = 0.3,
    convergence_window: int = 10,
    convergence_tol: float = 0.01,
) -> TrainResult:
    """Train a Q table and return it with one trace per episode.

    Phase 1 (when phase1_episodes > 0) visits each selected wind field in
    turn under a constant phase1_epsilon, stopping a field early once its
    reward curve plateaus. The main phase then runs ``episodes`` episodes
    across the selected wind fields under ``schedule`` (episodic decay by
    default). Goal layouts follow the config's relocation cadence.
    """
    if episodes < 1:
        raise ConfigError(f"episodes must be >= 1, got {episodes}")
    if phase1_episodes < 0:
        raise ConfigError(f"phase1_episodes must be >= 0, got {phase1_episodes}")
    params = params if params is not None else LearnerParams()
    schedule = schedule if schedule is not None else EpisodicEpsilon()
    winds = list(wind_ids) if wind_ids is not None else list(range(len(config.wind_set)))
    q = QTable.for_config(config)
    rng = np.random.default_rng([seed, _TRAIN_STREAM])
    traces: list[EpisodeTrace] = []
    label = 0
    if phase1_episodes > 0:
        for wid in winds:
            env = GridWorld(config, drag_table, power_params, wind_ids=[wid])
            rewards: list[float] = []
            for e in range(phase1_episodes):
                trace = run_episode(env, q, params, phase1_epsilon, rng,
                                    reset_index=e, episode_label=label)
                traces.append(trace)
                rewards.append(trace.totals.reward)
                label += 1
                if reward_plateaued(rewards, convergence_window, convergence_tol):
                    break
    env = GridWorld(config, drag_table, power_params, wind_ids=winds)
    for e in range(episodes):
        eps = schedule.value(e, episodes)
        trace = run_episode(env, q, params, eps, rng, reset_index=e, episode_label=label)
        traces.append(trace)
        label += 1
    return TrainResult(q, traces)


def greedy_rollout(
    config: EnvConfig,
    q: QTable,
    wind_id: int,
    episode_index: int = 0,
    seed: int = 0,
    drag_table: DragTable | None = None,
    power_params: PowerParams | None = None,
) -> EpisodeTrace:
    """Run the greedy (epsilon = 0) policy once under a fixed wind field."""
    env = GridWorld(config, drag_table, power_params, wind_ids=[wind_id])
    rng = np.random.default_rng([seed, _EVAL_STREAM])
    params = LearnerParams()
    return run_episode(env, q, params, 0.0, rng, reset_index=episode_index,
                       episode_label=episode_index, learn=False)
