import math

import pytest

from windgrid.errors import ConfigError, ContractViolation
from windgrid.kinematics import WindVector
from windgrid.power import (
    DEFAULT_SPEED_SAMPLES,
    HEADWIND_STEP_COST,
    THETA_SAMPLES,
    DragTable,
    PowerParams,
    calibrate,
    drag_coefficient,
    drag_coefficient_from_force,
    drag_force,
    step_power_cost,
)

E = (1, 0, 0)
NE = (1, 1, 0)
N = (0, 1, 0)
UP = (0, 0, 1)
DOWN = (0, 0, -1)


def test_calibration_scale_constant_table(const_table):
    # scale_k = 18.5 / (c_d * (22+10)^2 * cell) = 18.5 / (1 * 1024 * 10)
    params = calibrate(const_table, PowerParams(cell_size=10.0), w_max=10.0)
    assert params.scale_k == pytest.approx(18.5 / 10240.0, abs=1e-15)
    assert params.scale_k == pytest.approx(0.001806640625, abs=1e-15)


def test_headwind_anchor_exact(const_table, const_params, cosine_table, cosine_params):
    # The calibration anchor: axis step straight into the max headwind
    # costs exactly 18.5 for any admissible table.
    headwind = WindVector(-10.0)
    c1 = step_power_cost(E, headwind, const_table, const_params)
    c2 = step_power_cost(E, headwind, cosine_table, cosine_params)
    assert abs(c1 - HEADWIND_STEP_COST) < 1e-9
    assert abs(c2 - HEADWIND_STEP_COST) < 1e-9


def test_zero_wind_axis_step_constant_table(const_table, const_params):
    # 18.5 * (22/32)^2 = 18.5 * 484/1024 = 8.744140625
    cost = step_power_cost(E, WindVector(0.0), const_table, const_params)
    assert cost == pytest.approx(8.744140625, abs=1e-12)


def test_diagonal_step_is_sqrt2_of_axis(const_table, const_params):
    axis = step_power_cost(E, WindVector(0.0), const_table, const_params)
    diag = step_power_cost(NE, WindVector(0.0), const_table, const_params)
    assert diag == pytest.approx(axis * math.sqrt(2.0), rel=1e-12)
    # 8.744140625 * sqrt(2) = 12.3660822...
    assert diag == pytest.approx(12.366082263172553, abs=1e-12)


def test_cosine_table_anchor_costs(cosine_table, cosine_params):
    # cd(0)=1.25, cd(pi/2)=1.0, cd(pi)=0.75 under c_d = 1 + 0.25*cos(theta);
    # scale_k = 18.5 / (0.75 * 1024 * 10).
    assert step_power_cost(E, WindVector(0.0), cosine_table, cosine_params) == pytest.approx(
        14.573567708333334, abs=1e-9
    )
    assert step_power_cost(E, WindVector(10.0), cosine_table, cosine_params) == pytest.approx(
        4.3359375, abs=1e-12
    )
    # crosswind: flying north against a +x wind, theta_rel = 3*pi/2 -> cd = 1
    assert step_power_cost(N, WindVector(10.0), cosine_table, cosine_params) == pytest.approx(
        14.067708333333332, abs=1e-9
    )


def test_vertical_step_costs(const_table, const_params):
    assert step_power_cost(UP, WindVector(-10.0), const_table, const_params) == 3.0
    assert step_power_cost(DOWN, WindVector(-10.0), const_table, const_params) == 1.0


def test_headwind_monotonicity_constant_table(const_table, const_params):
    # For a fixed eastward move, a stronger opposing wind costs strictly more.
    costs = [
        step_power_cost(E, WindVector(w), const_table, const_params)
        for w in (10.0, 5.0, 0.0, -5.0, -10.0)
    ]
    for weaker, stronger in zip(costs, costs[1:]):
        assert stronger > weaker


def test_battery_feasibility_bound(const_table, const_params):
    # at most floor(100/18.5) = 5 pure-headwind axis steps on one battery
    cost = step_power_cost(E, WindVector(-10.0), const_table, const_params)
    assert math.floor(100.0 / cost) == 5


def test_step_cost_rejects_non_unit_move(const_table, const_params):
    with pytest.raises(ContractViolation):
        step_power_cost((2, 0, 0), WindVector(0.0), const_table, const_params)
    with pytest.raises(ContractViolation):
        step_power_cost((1, 1, 1), WindVector(0.0), const_table, const_params)


def test_drag_force_hand_value():
    # 0.5 * 1.2 * 1.225 * 32^2 * 0.1 = 75.264
    assert drag_force(1.2, 1.225, 32.0, 0.1) == pytest.approx(75.264, abs=1e-12)


def test_drag_coefficient_force_round_trip():
    f = drag_force(0.9, 1.225, 27.0, 0.1)
    assert drag_coefficient_from_force(f, 1.225, 27.0, 0.1) == pytest.approx(0.9, rel=1e-12)


def test_drag_coefficient_at_nodes(cosine_table):
    # interpolation must reproduce the table exactly at the sample points
    for i, theta in enumerate(THETA_SAMPLES):
        for j, speed in enumerate(DEFAULT_SPEED_SAMPLES):
            got = drag_coefficient(cosine_table, theta, speed)
            assert got == pytest.approx(cosine_table.cd_values[i][j], abs=1e-12)


def test_drag_coefficient_angle_wraparound(cosine_table):
    # halfway between 315 deg and 360 deg: mean of cd(7*pi/4) and cd(0)
    expected = 0.5 * (1.0 + 0.25 * math.cos(7 * math.pi / 4)) + 0.5 * 1.25
    got = drag_coefficient(cosine_table, math.radians(337.5), 22.0)
    assert got == pytest.approx(expected, abs=1e-12)


def test_drag_coefficient_speed_clamping():
    rows = tuple((1.0, 2.0, 3.0, 4.0, 5.0) for _ in range(8))
    table = DragTable(THETA_SAMPLES, DEFAULT_SPEED_SAMPLES, rows)
    assert drag_coefficient(table, 0.0, 5.0) == 1.0  # below the range
    assert drag_coefficient(table, 0.0, 99.0) == 5.0  # above the range
    assert drag_coefficient(table, 0.0, 19.5) == pytest.approx(2.5)  # midpoint 17..22


def test_table_validation_errors():
    with pytest.raises(ConfigError):
        DragTable(THETA_SAMPLES[:4], DEFAULT_SPEED_SAMPLES, ((1.0,) * 5,) * 4)
    with pytest.raises(ConfigError):
        DragTable(THETA_SAMPLES, (22.0, 12.0), ((1.0, 1.0),) * 8)
    with pytest.raises(ConfigError):
        DragTable(THETA_SAMPLES, DEFAULT_SPEED_SAMPLES, ((0.0,) * 5,) * 8)


def test_csv_round_trip(tmp_path, cosine_table):
    path = tmp_path / "table.csv"
    path.write_text(cosine_table.to_csv_text())
    loaded = DragTable.from_csv(path)
    assert loaded == cosine_table
    assert loaded.digest() == cosine_table.digest()


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("theta,speed,cd\n0,22,1.0\n")
    with pytest.raises(ConfigError, match="line 1"):
        DragTable.from_csv(path)


def test_csv_bad_row_reports_line_number(tmp_path, cosine_table):
    path = tmp_path / "bad.csv"
    lines = cosine_table.to_csv_text().splitlines()
    lines[3] = "0,not-a-number,1.0"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ConfigError, match="line 4"):
        DragTable.from_csv(path)


def test_csv_duplicate_sample(tmp_path, cosine_table):
    path = tmp_path / "dup.csv"
    text = cosine_table.to_csv_text()
    first_row = text.splitlines()[1]
    path.write_text(text + first_row + "\n")
    with pytest.raises(ConfigError, match="duplicate"):
        DragTable.from_csv(path)


def test_csv_missing_angle(tmp_path, cosine_table):
    path = tmp_path / "missing.csv"
    lines = [ln for ln in cosine_table.to_csv_text().splitlines() if not ln.startswith("45,")]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ConfigError, match="8 distinct angles"):
        DragTable.from_csv(path)


def test_csv_off_grid_angle(tmp_path):
    path = tmp_path / "offgrid.csv"
    path.write_text("theta_deg,v_rel_mps,c_d\n30,22,1.0\n")
    with pytest.raises(ConfigError, match="theta_deg"):
        DragTable.from_csv(path)


def test_calibrate_rejects_degenerate_inputs(const_table):
    with pytest.raises(ConfigError):
        calibrate(const_table, PowerParams(cell_size=10.0), w_max=-1.0)
    with pytest.raises(ConfigError):
        calibrate(const_table, PowerParams(cell_size=10.0), w_max=10.0, anchor_cost=0.0)


def test_power_params_validation():
    with pytest.raises(ConfigError):
        PowerParams(rho=0.0)
    with pytest.raises(ConfigError):
        PowerParams(descend_cost=-0.5)
    # descend may be free
    assert PowerParams(descend_cost=0.0).descend_cost == 0.0
