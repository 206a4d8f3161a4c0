"""Named scenario presets.

Each preset bundles a world config with training knobs sized for a quick
run on a laptop. The S2 and S4 worlds keep the structure of the larger
studies they are modeled on (charging, many goals) at a footprint where
an episodic-decay training run finishes in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .env import EnvConfig, default_wind_set
from .errors import ConfigError
from .perception import GoalObject


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    description: str
    config: EnvConfig
    episodes: int = 400
    phase1_episodes: int = 0
    eps_init: float = 0.5


def _s1_config() -> EnvConfig:
    return EnvConfig(
        world_width=5,
        world_height=5,
        world_altitude=1,
        cell_size=10.0,
        wind_set=default_wind_set(10.0),
        n_goals=4,
        c_r=50.0,
        start_cell=(0, 0),
        goal_relocation_period=100,
        seed=42,
        goals_at_cell_centers=True,
    )


def _s2_config() -> EnvConfig:
    return EnvConfig(
        world_width=9,
        world_height=9,
        world_altitude=1,
        cell_size=10.0,
        wind_set=default_wind_set(10.0),
        n_goals=2,
        c_r=50.0,
        charging_station=(4, 4),
        start_cell=(0, 0),
        goal_relocation_period=100,
        seed=42,
        goal_min_start_distance=50.0,
    )


def _s3_config() -> EnvConfig:
    goals = tuple(
        GoalObject(id=i, gx=(x + 0.5) * 10.0, gy=(y + 0.5) * 10.0, radius=0.5)
        for i, (x, y) in enumerate([(1, 2), (2, 2), (3, 2)])
    )
    return EnvConfig(
        world_width=5,
        world_height=5,
        world_altitude=3,
        cell_size=10.0,
        wind_set=default_wind_set(10.0),
        n_goals=3,
        c_r=50.0,
        start_cell=(0, 0),
        goal_relocation_period=100,
        seed=42,
        fixed_goals=goals,
    )


def _s4_config() -> EnvConfig:
    return EnvConfig(
        world_width=21,
        world_height=21,
        world_altitude=5,
        cell_size=30.0,
        wind_set=default_wind_set(10.0),
        n_goals=10,
        c_r=50.0,
        start_cell=(0, 0),
        goal_relocation_period=200,
        seed=42,
        goal_radius_range=(0.5, 2.0),
    )


SCENARIOS: dict[str, ScenarioSpec] = {
    "S1_Planar5x5": ScenarioSpec(
        name="S1_Planar5x5",
        description="5x5 planar world, four goals at cell centres",
        config=_s1_config(),
        episodes=400,
        phase1_episodes=60,
    ),
    "S2_SparseGoalsCharging": ScenarioSpec(
        name="S2_SparseGoalsCharging",
        description="9x9 planar world, two distant goals, central charging station",
        config=_s2_config(),
        episodes=600,
        phase1_episodes=50,
    ),
    "S3_ThreeD": ScenarioSpec(
        name="S3_ThreeD",
        description="5x5x3 world, three fixed goals in a row, altitude pays off",
        config=_s3_config(),
        episodes=400,
        phase1_episodes=60,
    ),
    "S4_LargeExploration": ScenarioSpec(
        name="S4_LargeExploration",
        description="21x21x5 exploration world, ten goals",
        config=_s4_config(),
        episodes=200,
        phase1_episodes=20,
    ),
}

_ALIASES = {spec.name.lower(): key for key, spec in SCENARIOS.items()}
_ALIASES.update({key.split("_")[0].lower(): key for key in SCENARIOS})


def get_scenario(name: str) -> ScenarioSpec:
    key = _ALIASES.get(name.strip().lower())
    if key is None:
        known = ", ".join(SCENARIOS)
        raise ConfigError(f"unknown scenario {name!r}; known scenarios: {known}")
    return SCENARIOS[key]


def scenario_with_config(spec: ScenarioSpec, config: EnvConfig) -> ScenarioSpec:
    """The same training knobs over a different world config."""
    return replace(spec, config=config)
