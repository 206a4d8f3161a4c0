"""Energy-aware UAV path planning on a windy grid world.

A deterministic simulator with a drag-based power model, simulated goal
detection, tabular Q-learning/SARSA planners, a serpentine coverage
baseline, and an experiment harness with a CLI.
"""

from .coverage import run_coverage, serpentine_path
from .env import (
    ACTION_DELTAS,
    FULL_BATTERY,
    EnvConfig,
    EpisodeTrace,
    GridState,
    GridWorld,
    StepOutcome,
    StepRecord,
    TerminalReason,
    default_wind_set,
    load_env_config,
)
from .errors import ConfigError, ContractViolation, WindgridError
from .harness import compare, evaluate_qtable, run_pipeline
from .kinematics import (
    AirRelativeState,
    Pose,
    TurnCommand,
    WindVector,
    ground_velocity,
    pose_at_time,
    relative_air_velocity,
)
from .perception import (
    CameraModel,
    DetectionRegistry,
    GoalObject,
    detect,
    footprint,
    global_label,
    project_centroid,
)
from .planners import (
    ConstantEpsilon,
    EpisodicEpsilon,
    LearnerParams,
    QTable,
    TrainResult,
    epsilon_episodic,
    greedy_rollout,
    q_update,
    run_episode,
    sarsa_update,
    select_action,
    train,
)
from .power import (
    HEADWIND_STEP_COST,
    DragTable,
    PowerParams,
    calibrate,
    drag_coefficient,
    drag_force,
    step_power_cost,
)
from .scenarios import SCENARIOS, ScenarioSpec, get_scenario

__version__ = "0.1.0"

__all__ = [
    "ACTION_DELTAS",
    "FULL_BATTERY",
    "HEADWIND_STEP_COST",
    "SCENARIOS",
    "AirRelativeState",
    "CameraModel",
    "ConfigError",
    "ConstantEpsilon",
    "ContractViolation",
    "DetectionRegistry",
    "DragTable",
    "EnvConfig",
    "EpisodeTrace",
    "EpisodicEpsilon",
    "GoalObject",
    "GridState",
    "GridWorld",
    "LearnerParams",
    "Pose",
    "PowerParams",
    "QTable",
    "ScenarioSpec",
    "StepOutcome",
    "StepRecord",
    "TerminalReason",
    "TrainResult",
    "TurnCommand",
    "WindVector",
    "WindgridError",
    "calibrate",
    "compare",
    "default_wind_set",
    "detect",
    "drag_coefficient",
    "drag_force",
    "epsilon_episodic",
    "evaluate_qtable",
    "footprint",
    "get_scenario",
    "global_label",
    "greedy_rollout",
    "ground_velocity",
    "load_env_config",
    "pose_at_time",
    "project_centroid",
    "q_update",
    "relative_air_velocity",
    "run_coverage",
    "run_episode",
    "run_pipeline",
    "sarsa_update",
    "select_action",
    "serpentine_path",
    "step_power_cost",
    "train",
]
