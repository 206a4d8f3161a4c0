"""Drag-based battery cost model for grid flight legs.

A drag-coefficient table sampled over 8 relative-wind angles and a small
set of airspeeds is interpolated bilinearly (wrapping in angle, clamping
in speed). Lateral step cost scales with c_d * airspeed^2 * leg length;
vertical steps use flat climb/descend costs. ``calibrate`` pins the scale
factor so the worst lateral step, an axis leg straight into the maximum
headwind, costs exactly HEADWIND_STEP_COST battery units.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, replace

from .errors import ConfigError, ContractViolation
from .kinematics import WindVector, relative_air_velocity

# Battery cost of the calibrated worst-case lateral step.
HEADWIND_STEP_COST = 18.5

# The canonical 8 relative-wind angle samples: 0, pi/4, ..., 7*pi/4.
THETA_SAMPLES: tuple[float, ...] = tuple(i * math.pi / 4.0 for i in range(8))

# Airspeeds seen on axis legs when a 22 m/s ground speed meets winds of
# -10, -5, 0, +5, +10 m/s along the track.
DEFAULT_SPEED_SAMPLES: tuple[float, ...] = (12.0, 17.0, 22.0, 27.0, 32.0)

DRAG_CSV_HEADER = ("theta_deg", "v_rel_mps", "c_d")

# Unit moves the cost model accepts: 8 lateral neighbours plus ascend and
# descend.
LEGAL_MOVE_DIRS: frozenset[tuple[int, int, int]] = frozenset(
    [
        (1, 0, 0),
        (1, 1, 0),
        (0, 1, 0),
        (-1, 1, 0),
        (-1, 0, 0),
        (-1, -1, 0),
        (0, -1, 0),
        (1, -1, 0),
        (0, 0, 1),
        (0, 0, -1),
    ]
)


@dataclass(frozen=True)
class DragTable:
    """Drag coefficients sampled on an (angle, airspeed) grid.

    cd_values[i][j] is the coefficient at THETA_SAMPLES[i] and
    speed_samples[j].
    """

    theta_samples: tuple[float, ...]
    speed_samples: tuple[float, ...]
    cd_values: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.theta_samples) != 8:
            raise ConfigError(
                f"drag table needs exactly 8 angle samples, got {len(self.theta_samples)}"
            )
        for got, want in zip(self.theta_samples, THETA_SAMPLES):
            if abs(got - want) > 1e-9:
                raise ConfigError(
                    f"angle samples must be 0, pi/4, ..., 7*pi/4; got {got!r}"
                )
        if not self.speed_samples:
            raise ConfigError("drag table needs at least one speed sample")
        for a, b in zip(self.speed_samples, self.speed_samples[1:]):
            if not a < b:
                raise ConfigError("speed samples must be strictly increasing")
        if any(s <= 0.0 for s in self.speed_samples):
            raise ConfigError("speed samples must be positive")
        if len(self.cd_values) != len(self.theta_samples):
            raise ConfigError("cd_values must have one row per angle sample")
        for row in self.cd_values:
            if len(row) != len(self.speed_samples):
                raise ConfigError("cd_values rows must match the speed samples")
            for c in row:
                if not (math.isfinite(c) and c > 0.0):
                    raise ConfigError(f"drag coefficients must be positive, got {c!r}")

    @classmethod
    def constant(cls, c_d: float = 1.0, speed_samples: tuple[float, ...] = DEFAULT_SPEED_SAMPLES) -> "DragTable":
        """A table with the same coefficient everywhere."""
        row = (float(c_d),) * len(speed_samples)
        return cls(THETA_SAMPLES, tuple(float(s) for s in speed_samples), (row,) * 8)

    @classmethod
    def default(cls, speed_samples: tuple[float, ...] = DEFAULT_SPEED_SAMPLES) -> "DragTable":
        """The shipped synthetic table: c_d(theta, v) = 1 + 0.25*cos(theta)."""
        values = tuple(
            ((1.0 + 0.25 * math.cos(theta)),) * len(speed_samples) for theta in THETA_SAMPLES
        )
        return cls(THETA_SAMPLES, tuple(float(s) for s in speed_samples), values)

    @classmethod
    def from_csv(cls, path) -> "DragTable":
        """Load a table from a ``theta_deg,v_rel_mps,c_d`` CSV file."""
        entries: dict[tuple[int, float], float] = {}
        speeds: set[float] = set()
        try:
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                try:
                    header = next(reader)
                except StopIteration:
                    raise ConfigError(f"{path}: empty drag-table CSV") from None
                if tuple(h.strip() for h in header) != DRAG_CSV_HEADER:
                    raise ConfigError(
                        f"{path}: line 1: expected header "
                        f"'{','.join(DRAG_CSV_HEADER)}', got '{','.join(header)}'"
                    )
                for lineno, row in enumerate(reader, start=2):
                    if not row or (len(row) == 1 and not row[0].strip()):
                        continue
                    if len(row) != 3:
                        raise ConfigError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
                    try:
                        theta_deg = float(row[0])
                        speed = float(row[1])
                        c_d = float(row[2])
                    except ValueError:
                        raise ConfigError(f"{path}: line {lineno}: non-numeric field in {row!r}") from None
                    theta_idx = _theta_index(theta_deg)
                    if theta_idx is None:
                        raise ConfigError(
                            f"{path}: line {lineno}: theta_deg must be one of "
                            f"0, 45, ..., 315; got {row[0]}"
                        )
                    key = (theta_idx, speed)
                    if key in entries:
                        raise ConfigError(f"{path}: line {lineno}: duplicate sample {row[0]}, {row[1]}")
                    entries[key] = c_d
                    speeds.add(speed)
        except OSError as exc:
            raise ConfigError(f"cannot read drag table {path}: {exc}") from exc
        if not entries:
            raise ConfigError(f"{path}: drag-table CSV holds no samples")
        theta_idxs = {k[0] for k in entries}
        if len(theta_idxs) != 8:
            raise ConfigError(
                f"{path}: drag table must sample exactly 8 distinct angles, got {len(theta_idxs)}"
            )
        speed_samples = tuple(sorted(speeds))
        values = []
        for i in range(8):
            row_vals = []
            for s in speed_samples:
                if (i, s) not in entries:
                    raise ConfigError(
                        f"{path}: missing sample at theta_deg={math.degrees(THETA_SAMPLES[i]):g}, "
                        f"v_rel_mps={s:g}"
                    )
                row_vals.append(entries[(i, s)])
            values.append(tuple(row_vals))
        return cls(THETA_SAMPLES, speed_samples, tuple(values))

    def to_csv_text(self) -> str:
        """Canonical CSV rendering; also the digest input."""
        lines = [",".join(DRAG_CSV_HEADER)]
        for i, theta in enumerate(self.theta_samples):
            for j, s in enumerate(self.speed_samples):
                lines.append(f"{math.degrees(theta):.6g},{s!r},{self.cd_values[i][j]!r}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_csv_text().encode()).hexdigest()


def _theta_index(theta_deg: float) -> int | None:
    idx = round(theta_deg / 45.0)
    if 0 <= idx <= 7 and abs(theta_deg - idx * 45.0) <= 1e-6:
        return idx
    return None


def drag_coefficient(table: DragTable, theta_rel: float, speed: float) -> float:
    """Bilinear lookup: angle wraps at 2*pi, speed clamps to the sampled range."""
    if not (math.isfinite(theta_rel) and math.isfinite(speed)):
        raise ContractViolation("drag_coefficient requires finite inputs")
    theta = theta_rel % (2.0 * math.pi)
    step = math.pi / 4.0
    i0 = int(theta // step) % 8
    i1 = (i0 + 1) % 8
    ft = (theta - THETA_SAMPLES[i0]) / step

    speeds = table.speed_samples
    if speed <= speeds[0]:
        j0 = j1 = 0
        fs = 0.0
    elif speed >= speeds[-1]:
        j0 = j1 = len(speeds) - 1
        fs = 0.0
    else:
        j1 = 1
        while speeds[j1] < speed:
            j1 += 1
        j0 = j1 - 1
        fs = (speed - speeds[j0]) / (speeds[j1] - speeds[j0])

    c00 = table.cd_values[i0][j0]
    c01 = table.cd_values[i0][j1]
    c10 = table.cd_values[i1][j0]
    c11 = table.cd_values[i1][j1]
    low = c00 + (c01 - c00) * fs
    high = c10 + (c11 - c10) * fs
    return low + (high - low) * ft


def drag_force(c_d: float, rho: float, speed: float, area: float) -> float:
    """Aerodynamic drag force: c_d * rho * speed^2 * area / 2."""
    return 0.5 * c_d * rho * speed * speed * area


def drag_coefficient_from_force(f_d: float, rho: float, speed: float, area: float) -> float:
    """Invert drag_force: c_d = 2 * F_d / (rho * speed^2 * area)."""
    if speed <= 0.0 or rho <= 0.0 or area <= 0.0:
        raise ContractViolation("drag inversion needs positive speed, rho and area")
    return 2.0 * f_d / (rho * speed * speed * area)


@dataclass(frozen=True)
class PowerParams:
    """Cost-model parameters. scale_k converts the drag proxy to battery units."""

    rho: float = 1.225          # kg/m^3
    area: float = 0.1           # m^2 reference area
    cell_size: float = 1.0      # m per lateral grid cell
    ground_speed: float = 22.0  # m/s held constant on every leg
    scale_k: float = 1.0
    climb_cost: float = 3.0     # battery units per ascend step
    descend_cost: float = 1.0   # battery units per descend step

    def __post_init__(self) -> None:
        for name in ("rho", "area", "cell_size", "ground_speed", "scale_k", "climb_cost"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ConfigError(f"PowerParams.{name} must be positive, got {value!r}")
        if not (math.isfinite(self.descend_cost) and self.descend_cost >= 0.0):
            raise ConfigError(f"PowerParams.descend_cost must be >= 0, got {self.descend_cost!r}")


def step_power_cost(
    move_dir: tuple[int, int, int],
    wind: WindVector,
    table: DragTable,
    params: PowerParams,
) -> float:
    """Battery cost of one grid step in the given unit direction.

    Lateral legs fly at params.ground_speed along the move direction and
    pay scale_k * c_d(theta_rel, airspeed) * airspeed^2 * leg_length,
    where the leg is cell_size (axis) or cell_size * sqrt(2) (diagonal).
    Vertical legs pay the flat climb/descend cost.
    """
    if move_dir not in LEGAL_MOVE_DIRS:
        raise ContractViolation(f"not a legal move direction: {move_dir!r}")
    dx, dy, dz = move_dir
    if dz != 0:
        return params.climb_cost if dz > 0 else params.descend_cost
    norm = math.sqrt(float(dx * dx + dy * dy))
    v_ground = (params.ground_speed * dx / norm, params.ground_speed * dy / norm)
    air = relative_air_velocity(v_ground, wind)
    c_d = drag_coefficient(table, air.theta_rel, air.speed)
    leg = params.cell_size * norm
    return params.scale_k * c_d * air.speed * air.speed * leg


def calibrate(
    table: DragTable,
    params: PowerParams,
    w_max: float,
    anchor_cost: float = HEADWIND_STEP_COST,
) -> PowerParams:
    """Return params with scale_k set so the pure-headwind axis step at
    wind speed w_max costs exactly anchor_cost battery units."""
    if not (math.isfinite(w_max) and w_max >= 0.0):
        raise ConfigError(f"w_max must be non-negative, got {w_max!r}")
    if anchor_cost <= 0.0:
        raise ConfigError(f"anchor cost must be positive, got {anchor_cost!r}")
    air = relative_air_velocity((params.ground_speed, 0.0), WindVector(-w_max, 0.0))
    c_d = drag_coefficient(table, air.theta_rel, air.speed)
    denom = c_d * air.speed * air.speed * params.cell_size
    if not (math.isfinite(denom) and denom > 0.0):
        raise ConfigError("degenerate drag table: worst-case step has zero drag")
    return replace(params, scale_k=anchor_cost / denom)
