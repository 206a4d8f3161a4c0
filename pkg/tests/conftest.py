"""Shared helpers: calibrated cost models and the exhaustive-path oracle."""

import copy
import math

import pytest

from windgrid.env import EnvConfig, GridWorld
from windgrid.power import DragTable, PowerParams, calibrate


@pytest.fixture(scope="session")
def const_table():
    return DragTable.constant(1.0)


@pytest.fixture(scope="session")
def cosine_table():
    return DragTable.default()


@pytest.fixture(scope="session")
def const_params(const_table):
    # scale_k = 18.5 / (1.0 * 32^2 * 10) = 0.001806640625
    return calibrate(const_table, PowerParams(cell_size=10.0), w_max=10.0)


@pytest.fixture(scope="session")
def cosine_params(cosine_table):
    return calibrate(cosine_table, PowerParams(cell_size=10.0), w_max=10.0)


def exhaustive_best_reward(
    config: EnvConfig,
    wind_id: int,
    drag_table: DragTable,
    power_params: PowerParams,
    node_cap: int = 2_000_000,
) -> float:
    """Best achievable episode reward by exhaustive search over action
    sequences.

    Depth-first branch and bound: every remaining detection is worth at
    most c_r, plus the final all-goals bonus of 100, and every other
    reward term is non-positive, so total + c_r*missing + 100 bounds any
    completion from above. The environment is deterministic after
    reset(), which makes deep-copied branches exact.
    """
    env = GridWorld(config, drag_table, power_params, wind_ids=[wind_id])
    env.reset(0)
    best = -math.inf
    nodes = 0

    def rec(env: GridWorld, total: float) -> None:
        nonlocal best, nodes
        for action in env.valid_actions():
            nodes += 1
            if nodes > node_cap:
                raise RuntimeError("oracle node cap exceeded; world too large")
            child = copy.deepcopy(env)
            outcome = child.step(action)
            t2 = total + outcome.r_t
            if outcome.terminal is not None:
                if t2 > best:
                    best = t2
            else:
                missing = len(child.goals) - len(child.found_goal_ids)
                if t2 + config.c_r * missing + 100.0 > best:
                    rec(child, t2)

    rec(env, 0.0)
    return best
