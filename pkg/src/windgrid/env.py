"""Coarse grid-world UAV exploration environment.

States are (x, y, z, battery, wind field). Ten actions: 1-8 move to the
eight lateral neighbours (1 = +x, counted counter-clockwise), 9 ascends,
10 descends. Each step pays a drag-based battery cost, runs the camera
at the endpoint cell and composes the reward from movement cost,
per-detection bonuses, an optional charging penalty and terminal
bonuses/penalties. Within an episode every (cell, action) pair may be
used at most once; exhausting them ends the episode.

Episodes terminate on, checked in this order: leaving the domain (-100),
battery depletion (-100), all goals found (+100), or no valid actions
remaining at the new state (-200).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContractViolation
from .kinematics import WindVector
from .perception import CameraModel, DetectionRegistry, GoalObject, detect
from .power import DragTable, PowerParams, calibrate, step_power_cost

FULL_BATTERY = 100.0
CHARGING_PENALTY = 30.0
GOAL_BONUS = 100.0
EDGE_PENALTY = 100.0
DEAD_END_PENALTY = 200.0

ACTION_DELTAS: dict[int, tuple[int, int, int]] = {
    1: (1, 0, 0),
    2: (1, 1, 0),
    3: (0, 1, 0),
    4: (-1, 1, 0),
    5: (-1, 0, 0),
    6: (-1, -1, 0),
    7: (0, -1, 0),
    8: (1, -1, 0),
    9: (0, 0, 1),
    10: (0, 0, -1),
}
LATERAL_ACTIONS: tuple[int, ...] = tuple(range(1, 9))
ASCEND, DESCEND = 9, 10
ALL_ACTIONS: tuple[int, ...] = tuple(range(1, 11))
N_ACTIONS = 10

# Fixed substream tags so every random draw is a pure function of
# (seed, purpose, block).
_GOAL_STREAM = 7
_WIND_STREAM = 13


class TerminalReason(str, Enum):
    ALL_GOALS_FOUND = "all_goals_found"
    BATTERY_DEPLETED = "battery_depleted"
    LEFT_DOMAIN = "left_domain"
    NO_VALID_ACTIONS = "no_valid_actions"
    # Baseline sweeps that run out of path rather than hitting an
    # environment terminal report this pseudo-reason.
    PATH_COMPLETE = "path_complete"

    def __str__(self) -> str:  # csv-friendly
        return self.value


def default_wind_set(w_max: float) -> tuple[WindVector, ...]:
    """Five x-aligned wind fields: -w_max, -w_max/2, 0, +w_max/2, +w_max."""
    if not (math.isfinite(w_max) and w_max >= 0.0):
        raise ConfigError(f"wind_max must be non-negative, got {w_max!r}")
    return tuple(WindVector(f * w_max, 0.0) for f in (-1.0, -0.5, 0.0, 0.5, 1.0))


@dataclass(frozen=True)
class GridState:
    x: int
    y: int
    z: int
    battery: float
    wind_id: int


@dataclass(frozen=True)
class StepOutcome:
    next_state: GridState
    r_movement: float
    n_new_detections: int
    r_t: float
    recharged: bool
    terminal: TerminalReason | None


@dataclass(frozen=True)
class StepRecord:
    x: int
    y: int
    z: int
    action: int
    r_t: float
    battery: float
    detections: int
    energy: float


@dataclass(frozen=True)
class TraceTotals:
    steps: int
    reward: float
    energy: float
    detections: int
    time_s: float


@dataclass
class EpisodeTrace:
    steps: list[StepRecord]
    terminal: TerminalReason | None
    totals: TraceTotals
    wind_id: int
    episode: int
    config_digest: str


def compose_reward(r_movement: float, n_new_detections: int, c_r: float) -> float:
    """Movement cost plus per-detection bonus; terminal terms are added by step()."""
    return r_movement + c_r * n_new_detections


# Keys accepted by the plain-text scenario config format, with their parsers.
_CONFIG_FILE_KEYS = {
    "world_width": int,
    "world_height": int,
    "world_altitude": int,
    "cell_size_m": float,
    "wind_max_mps": float,
    "n_goals": int,
    "c_r": float,
    "charging_x": int,
    "charging_y": int,
    "start_x": int,
    "start_y": int,
    "relocation_period": int,
    "seed": int,
}


@dataclass(frozen=True)
class EnvConfig:
    """World geometry, wind set, goal generation and reward constants.

    base_altitude/altitude_step default to 0.6 * cell_size, which makes
    the lowest-level footprint cover the occupied cell's centre band and
    each climb widen coverage by roughly one cell ring.
    """

    world_width: int
    world_height: int
    world_altitude: int = 1
    cell_size: float = 10.0
    wind_set: tuple[WindVector, ...] = default_wind_set(10.0)
    n_goals: int = 1
    c_r: float = 50.0
    charging_station: tuple[int, int] | None = None
    start_cell: tuple[int, int] = (0, 0)
    goal_relocation_period: int = 100
    seed: int = 0
    # --- plumbing beyond the scenario-file schema ---
    goals_at_cell_centers: bool = False
    fixed_goals: tuple[GoalObject, ...] | None = None
    goal_radius_range: tuple[float, float] = (0.5, 0.5)
    goal_min_start_distance: float = 0.0
    base_altitude: float | None = None
    altitude_step: float | None = None
    camera: CameraModel = field(default_factory=CameraModel)
    merge_radius: float | None = None
    min_goal_separation: float | None = None
    unlimited_battery: bool = False

    def __post_init__(self) -> None:
        if self.world_width < 1 or self.world_height < 1 or self.world_altitude < 1:
            raise ConfigError("world dimensions must be at least 1")
        if not (math.isfinite(self.cell_size) and self.cell_size > 0.0):
            raise ConfigError("cell_size must be positive")
        if not self.wind_set:
            raise ConfigError("wind_set must not be empty")
        if self.n_goals < 1:
            raise ConfigError("n_goals must be at least 1")
        if not (math.isfinite(self.c_r) and self.c_r > 0.0):
            raise ConfigError("c_r must be positive")
        if self.charging_station is not None:
            cx, cy = self.charging_station
            if not (0 <= cx < self.world_width and 0 <= cy < self.world_height):
                raise ConfigError(f"charging station {self.charging_station} outside the grid")
        sx, sy = self.start_cell
        if not (0 <= sx < self.world_width and 0 <= sy < self.world_height):
            raise ConfigError(f"start cell {self.start_cell} outside the grid")
        if self.goal_relocation_period < 1:
            raise ConfigError("goal_relocation_period must be at least 1")
        lo, hi = self.goal_radius_range
        if not (0.0 < lo <= hi):
            raise ConfigError(f"bad goal radius range {self.goal_radius_range!r}")
        if self.fixed_goals is not None and len(self.fixed_goals) != self.n_goals:
            raise ConfigError(
                f"fixed_goals holds {len(self.fixed_goals)} goals but n_goals={self.n_goals}"
            )
        for name in ("base_altitude", "altitude_step", "merge_radius", "min_goal_separation"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0.0):
                raise ConfigError(f"{name} must be positive when given, got {v!r}")

    # resolved defaults -------------------------------------------------
    @property
    def base_altitude_m(self) -> float:
        return self.base_altitude if self.base_altitude is not None else 0.6 * self.cell_size

    @property
    def altitude_step_m(self) -> float:
        return self.altitude_step if self.altitude_step is not None else 0.6 * self.cell_size

    @property
    def merge_radius_m(self) -> float:
        return self.merge_radius if self.merge_radius is not None else self.cell_size / 2.0

    @property
    def min_goal_separation_m(self) -> float:
        return self.min_goal_separation if self.min_goal_separation is not None else self.cell_size

    @property
    def wind_max(self) -> float:
        return max(w.magnitude() for w in self.wind_set)

    @property
    def n_cells(self) -> int:
        return self.world_width * self.world_height * self.world_altitude

    def digest(self) -> str:
        """Digest of everything that defines the world (run-mode flags excluded)."""
        parts = [
            f"world={self.world_width}x{self.world_height}x{self.world_altitude}",
            f"cell={self.cell_size!r}",
            "winds=" + ";".join(f"{w.w_x!r},{w.w_y!r}" for w in self.wind_set),
            f"n_goals={self.n_goals}",
            f"c_r={self.c_r!r}",
            f"charging={self.charging_station}",
            f"start={self.start_cell}",
            f"period={self.goal_relocation_period}",
            f"seed={self.seed}",
            f"centers={self.goals_at_cell_centers}",
            "fixed=" + (
                ";".join(f"{g.gx!r},{g.gy!r},{g.radius!r}" for g in self.fixed_goals)
                if self.fixed_goals
                else "none"
            ),
            f"radius={self.goal_radius_range[0]!r},{self.goal_radius_range[1]!r}",
            f"mindist={self.goal_min_start_distance!r}",
            f"alt={self.base_altitude_m!r}+{self.altitude_step_m!r}",
            f"camera={self.camera}",
            f"merge={self.merge_radius_m!r}",
            f"sep={self.min_goal_separation_m!r}",
        ]
        return hashlib.sha256("|".join(parts).encode()).hexdigest()


def load_env_config(path, base: EnvConfig | None = None) -> EnvConfig:
    """Parse a line-oriented ``key = value`` scenario file.

    Blank lines and '#' comments are skipped; unknown keys are errors.
    When ``base`` is given the file overrides only the keys it names,
    otherwise world_width and world_height are required.
    """
    values: dict[str, object] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_FILE_KEYS:
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}: line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _CONFIG_FILE_KEYS[key](val)
        except ValueError:
            raise ConfigError(f"{path}: line {lineno}: bad value {val!r} for {key!r}") from None

    if ("charging_x" in values) != ("charging_y" in values):
        raise ConfigError(f"{path}: charging_x and charging_y must be given together")

    kwargs: dict[str, object] = {}
    if base is not None:
        kwargs = {
            "world_width": base.world_width,
            "world_height": base.world_height,
            "world_altitude": base.world_altitude,
            "cell_size": base.cell_size,
            "wind_set": base.wind_set,
            "n_goals": base.n_goals,
            "c_r": base.c_r,
            "charging_station": base.charging_station,
            "start_cell": base.start_cell,
            "goal_relocation_period": base.goal_relocation_period,
            "seed": base.seed,
            "goals_at_cell_centers": base.goals_at_cell_centers,
            "fixed_goals": base.fixed_goals,
            "goal_radius_range": base.goal_radius_range,
            "goal_min_start_distance": base.goal_min_start_distance,
            "base_altitude": base.base_altitude,
            "altitude_step": base.altitude_step,
            "camera": base.camera,
            "merge_radius": base.merge_radius,
            "min_goal_separation": base.min_goal_separation,
        }
    elif "world_width" not in values or "world_height" not in values:
        raise ConfigError(f"{path}: world_width and world_height are required")

    simple = {
        "world_width": "world_width",
        "world_height": "world_height",
        "world_altitude": "world_altitude",
        "cell_size_m": "cell_size",
        "n_goals": "n_goals",
        "c_r": "c_r",
        "relocation_period": "goal_relocation_period",
        "seed": "seed",
    }
    for file_key, attr in simple.items():
        if file_key in values:
            kwargs[attr] = values[file_key]
    if "wind_max_mps" in values:
        kwargs["wind_set"] = default_wind_set(float(values["wind_max_mps"]))  # type: ignore[arg-type]
    if "charging_x" in values:
        kwargs["charging_station"] = (values["charging_x"], values["charging_y"])
    if "start_x" in values or "start_y" in values:
        sx = values.get("start_x", kwargs.get("start_cell", (0, 0))[0] if base else 0)
        sy = values.get("start_y", kwargs.get("start_cell", (0, 0))[1] if base else 0)
        kwargs["start_cell"] = (sx, sy)
    if base is not None and "start_cell" not in kwargs:
        kwargs["start_cell"] = base.start_cell
    return EnvConfig(**kwargs)  # type: ignore[arg-type]


def leg_time_s(config: EnvConfig, params: PowerParams, action: int) -> float:
    """Wall-clock duration of one leg at the constant ground speed."""
    dx, dy, dz = ACTION_DELTAS[action]
    if dz != 0:
        length = config.altitude_step_m
    else:
        length = config.cell_size * math.sqrt(float(dx * dx + dy * dy))
    return length / params.ground_speed


def build_trace(
    records: list[StepRecord],
    terminal: TerminalReason | None,
    wind_id: int,
    episode: int,
    config_digest: str,
    time_s: float,
) -> EpisodeTrace:
    totals = TraceTotals(
        steps=len(records),
        reward=float(sum(r.r_t for r in records)),
        energy=float(sum(r.energy for r in records)),
        detections=int(sum(r.detections for r in records)),
        time_s=time_s,
    )
    return EpisodeTrace(records, terminal, totals, wind_id, episode, config_digest)


class GridWorld:
    """Stateful episode driver over an EnvConfig.

    reset() regenerates the goal layout from the seeded stream at every
    relocation-block boundary and redraws the wind field for the block
    (restricted to ``wind_ids`` when given). All post-reset dynamics are
    deterministic.
    """

    def __init__(
        self,
        config: EnvConfig,
        drag_table: DragTable | None = None,
        power_params: PowerParams | None = None,
        wind_ids: list[int] | tuple[int, ...] | None = None,
    ) -> None:
        self.config = config
        self.drag_table = drag_table if drag_table is not None else DragTable.default()
        if power_params is None:
            power_params = calibrate(
                self.drag_table,
                PowerParams(cell_size=config.cell_size),
                w_max=config.wind_max,
            )
        if power_params.cell_size != config.cell_size:
            raise ConfigError(
                f"power params cell_size {power_params.cell_size} does not match "
                f"config cell_size {config.cell_size}"
            )
        self.power_params = power_params
        n_winds = len(config.wind_set)
        if wind_ids is None:
            wind_ids = tuple(range(n_winds))
        else:
            wind_ids = tuple(wind_ids)
            if not wind_ids:
                raise ConfigError("wind_ids must not be empty")
            for w in wind_ids:
                if not 0 <= w < n_winds:
                    raise ConfigError(f"wind id {w} outside the configured wind set")
        self.wind_ids = wind_ids
        self.config_digest = config.digest()
        self._step_costs: dict[tuple[int, int], float] = {}
        for wid, wind in enumerate(config.wind_set):
            for action, delta in ACTION_DELTAS.items():
                self._step_costs[(wid, action)] = step_power_cost(
                    delta, wind, self.drag_table, self.power_params
                )
        self._state: GridState | None = None
        self._block: int | None = None
        self._goals: tuple[GoalObject, ...] = ()
        self._visited: set[tuple[tuple[int, int, int], int]] = set()
        self._found: set[int] = set()
        self._registry = DetectionRegistry(config.merge_radius_m)
        self._done = True

    # ------------------------------------------------------------------
    @property
    def state(self) -> GridState:
        if self._state is None:
            raise ContractViolation("environment not reset")
        return self._state

    @property
    def done(self) -> bool:
        return self._done

    @property
    def goals(self) -> tuple[GoalObject, ...]:
        return self._goals

    @property
    def found_goal_ids(self) -> frozenset[int]:
        return frozenset(self._found)

    def world_position(self, x: int, y: int, z: int) -> tuple[float, float, float]:
        """Cell centre and flight altitude in metres."""
        c = self.config
        return (
            (x + 0.5) * c.cell_size,
            (y + 0.5) * c.cell_size,
            c.base_altitude_m + z * c.altitude_step_m,
        )

    def step_cost(self, wind_id: int, action: int) -> float:
        return self._step_costs[(wind_id, action)]

    # ------------------------------------------------------------------
    def reset(self, episode_index: int = 0) -> GridState:
        """Start an episode; layouts depend only on (config.seed, block)."""
        if episode_index < 0:
            raise ContractViolation(f"episode index must be >= 0, got {episode_index}")
        c = self.config
        block = episode_index // c.goal_relocation_period
        if block != self._block:
            self._goals = self._generate_goals(block)
            self._block = block
        if len(self.wind_ids) == 1:
            wind_id = self.wind_ids[0]
        else:
            wind_rng = np.random.default_rng([c.seed, _WIND_STREAM, block])
            wind_id = self.wind_ids[int(wind_rng.integers(len(self.wind_ids)))]
        self._visited = set()
        self._found = set()
        self._registry = DetectionRegistry(c.merge_radius_m)
        self._state = GridState(c.start_cell[0], c.start_cell[1], 0, FULL_BATTERY, wind_id)
        self._done = False
        return self._state

    def _generate_goals(self, block: int) -> tuple[GoalObject, ...]:
        c = self.config
        if c.fixed_goals is not None:
            return c.fixed_goals
        rng = np.random.default_rng([c.seed, _GOAL_STREAM, block])
        lo, hi = c.goal_radius_range
        goals: list[GoalObject] = []
        if c.goals_at_cell_centers:
            # Detection happens at leg endpoints, and the start cell is never
            # an endpoint of a fresh sweep, so goals avoid the launch cell.
            start_flat = c.start_cell[1] * c.world_width + c.start_cell[0]
            candidates = [i for i in range(c.world_width * c.world_height) if i != start_flat]
            if len(candidates) < c.n_goals:
                raise ConfigError("not enough cells for the requested goals")
            picks = rng.choice(len(candidates), size=c.n_goals, replace=False)
            for gid, pick in enumerate(picks):
                flat = candidates[int(pick)]
                gx = (flat % c.world_width + 0.5) * c.cell_size
                gy = (flat // c.world_width + 0.5) * c.cell_size
                radius = lo if lo == hi else float(rng.uniform(lo, hi))
                goals.append(GoalObject(gid, gx, gy, radius))
            return tuple(goals)
        sx = (c.start_cell[0] + 0.5) * c.cell_size
        sy = (c.start_cell[1] + 0.5) * c.cell_size
        max_attempts = 10000 * c.n_goals
        attempts = 0
        while len(goals) < c.n_goals:
            attempts += 1
            if attempts > max_attempts:
                raise ConfigError(
                    "could not place goals: world too small for the separation constraints"
                )
            gx = float(rng.uniform(0.0, c.world_width * c.cell_size))
            gy = float(rng.uniform(0.0, c.world_height * c.cell_size))
            if math.hypot(gx - sx, gy - sy) < c.goal_min_start_distance:
                continue
            if any(math.hypot(gx - g.gx, gy - g.gy) < c.min_goal_separation_m for g in goals):
                continue
            radius = lo if lo == hi else float(rng.uniform(lo, hi))
            goals.append(GoalObject(len(goals), gx, gy, radius))
        return tuple(goals)

    # ------------------------------------------------------------------
    @staticmethod
    def _cell(state: GridState) -> tuple[int, int, int]:
        return (state.x, state.y, state.z)

    def _in_domain(self, x: int, y: int, z: int) -> bool:
        c = self.config
        return 0 <= x < c.world_width and 0 <= y < c.world_height and 0 <= z < c.world_altitude

    def valid_actions(self, state: GridState | None = None) -> list[int]:
        """Actions usable from the state under the once-per-episode pair rule.

        Lateral moves off the grid edge stay listed (taking one terminates
        the episode); vertical moves beyond the altitude bounds do not.
        The list may legally be empty.
        """
        s = self.state if state is None else state
        cell = self._cell(s)
        out = []
        for action in ALL_ACTIONS:
            if action == ASCEND and s.z + 1 >= self.config.world_altitude:
                continue
            if action == DESCEND and s.z - 1 < 0:
                continue
            if (cell, action) in self._visited:
                continue
            out.append(action)
        return out

    def step(self, action: int) -> StepOutcome:
        """Apply one action from the current state.

        Order: battery decrement, endpoint detection, charging, terminal
        checks (left domain, battery depleted, all goals found), then the
        dead-end check on the successor.
        """
        if self._state is None or self._done:
            raise ContractViolation("step() on a finished or unreset environment")
        if action not in ACTION_DELTAS:
            raise ContractViolation(f"unknown action {action!r}")
        s = self._state
        if action not in self.valid_actions(s):
            raise ContractViolation(f"action {action} not valid in state {s}")
        c = self.config

        cost = self._step_costs[(s.wind_id, action)]
        r_movement = -cost
        if c.unlimited_battery:
            battery = FULL_BATTERY
        else:
            battery = max(0.0, s.battery - cost)

        dx, dy, dz = ACTION_DELTAS[action]
        nx, ny, nz = s.x + dx, s.y + dy, s.z + dz
        in_domain = self._in_domain(nx, ny, nz)

        n_new = 0
        if in_domain:
            new_goals = detect(
                self.world_position(nx, ny, nz), c.camera, self._goals, self._registry
            )
            n_new = len(new_goals)
            self._found.update(g.id for g in new_goals)
        r_t = compose_reward(r_movement, n_new, c.c_r)

        recharged = False
        if in_domain and c.charging_station is not None and (nx, ny) == c.charging_station:
            battery = FULL_BATTERY
            r_t -= CHARGING_PENALTY
            recharged = True

        terminal: TerminalReason | None = None
        if not in_domain:
            terminal = TerminalReason.LEFT_DOMAIN
            r_t -= EDGE_PENALTY
        elif battery <= 0.0:
            terminal = TerminalReason.BATTERY_DEPLETED
            r_t -= EDGE_PENALTY
        elif len(self._found) == len(self._goals):
            terminal = TerminalReason.ALL_GOALS_FOUND
            r_t += GOAL_BONUS

        self._visited.add((self._cell(s), action))
        next_state = GridState(nx, ny, nz, battery, s.wind_id)
        if terminal is None and not self.valid_actions(next_state):
            terminal = TerminalReason.NO_VALID_ACTIONS
            r_t -= DEAD_END_PENALTY

        self._state = next_state
        if terminal is not None:
            self._done = True
        return StepOutcome(next_state, r_movement, n_new, r_t, recharged, terminal)
