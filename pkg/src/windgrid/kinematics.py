"""Continuous-motion flight primitives under a uniform wind field.

Ground velocity is the vector sum of the air-relative velocity and the
wind. Constant-rate turns integrate to a closed-form circular arc that
drifts with the wind; commanding a turn rate of zero degenerates to
straight-line flight. The wind-relative state (airspeed and the angle
between ground track and wind) is what the power model consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractViolation

TWO_PI = 2.0 * math.pi

# Turn-rate commands below this magnitude are treated as straight-line
# flight; the arc equations divide by u and go singular at zero.
U_EPS = 1e-6


def wrap_angle(theta: float) -> float:
    """Map an angle in radians onto [0, 2*pi)."""
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod of a tiny negative can round back up to exactly 2*pi
    return wrapped if wrapped < TWO_PI else 0.0


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ContractViolation(f"{name} requires finite values, got {v!r}")


@dataclass(frozen=True)
class Pose:
    """Planar pose: ground position in metres and heading in [0, 2*pi)."""

    x_g: float
    y_g: float
    psi: float

    def __post_init__(self) -> None:
        _require_finite("Pose", self.x_g, self.y_g, self.psi)
        object.__setattr__(self, "psi", wrap_angle(self.psi))


@dataclass(frozen=True)
class WindVector:
    """Horizontal wind components in m/s."""

    w_x: float
    w_y: float = 0.0

    def __post_init__(self) -> None:
        _require_finite("WindVector", self.w_x, self.w_y)

    def magnitude(self) -> float:
        return math.hypot(self.w_x, self.w_y)


@dataclass(frozen=True)
class AirRelativeState:
    """Airspeed magnitude plus the ground-track-to-wind angle in [0, 2*pi)."""

    speed: float
    theta_rel: float


@dataclass(frozen=True)
class TurnCommand:
    """Normalized turn-rate command u in [-1, 1] at airspeed v_air.

    u = +/-1 commands the tightest turn (radius r_min); u = 0 flies
    straight.
    """

    u: float
    v_air: float
    r_min: float

    def __post_init__(self) -> None:
        _require_finite("TurnCommand", self.u, self.v_air, self.r_min)
        if not -1.0 <= self.u <= 1.0:
            raise ContractViolation(f"turn command u must be in [-1, 1], got {self.u}")
        if self.v_air <= 0.0:
            raise ContractViolation(f"airspeed must be positive, got {self.v_air}")
        if self.r_min <= 0.0:
            raise ContractViolation(f"minimum turn radius must be positive, got {self.r_min}")


def ground_velocity(psi: float, v_air: float, wind: WindVector) -> tuple[float, float]:
    """Ground-frame velocity for heading psi at airspeed v_air under wind.

    Args:
        psi: heading in radians.
        v_air: airspeed in m/s, strictly positive.
        wind: ambient wind vector.

    Returns:
        (vx, vy) ground velocity components in m/s.
    """
    _require_finite("ground_velocity", psi, v_air)
    if v_air <= 0.0:
        raise ContractViolation(f"airspeed must be positive, got {v_air}")
    return (v_air * math.cos(psi) + wind.w_x, v_air * math.sin(psi) + wind.w_y)


def pose_at_time(p0: Pose, cmd: TurnCommand, wind: WindVector, t: float) -> Pose:
    """Integrate a constant turn-rate command forward by t seconds.

    The heading advances linearly at rate (v_air / r_min) * u while the
    position follows the corresponding wind-drifting arc. The integration
    constant is chosen so that pose_at_time(p0, cmd, wind, 0) == p0. For
    |u| below U_EPS the straight-line limit is used instead.

    Args:
        p0: pose at t = 0.
        cmd: turn command held constant over the interval.
        wind: ambient wind vector.
        t: elapsed time in seconds, non-negative.

    Returns:
        The pose after t seconds.
    """
    _require_finite("pose_at_time", t)
    if t < 0.0:
        raise ContractViolation(f"time must be non-negative, got {t}")
    if abs(cmd.u) < U_EPS:
        vx, vy = ground_velocity(p0.psi, cmd.v_air, wind)
        return Pose(p0.x_g + vx * t, p0.y_g + vy * t, p0.psi)
    omega = cmd.u * cmd.v_air / cmd.r_min
    psi_t = p0.psi + omega * t
    # signed turn radius: v_air / omega
    radius = cmd.r_min / cmd.u
    x = p0.x_g + radius * (math.sin(psi_t) - math.sin(p0.psi)) + wind.w_x * t
    y = p0.y_g - radius * (math.cos(psi_t) - math.cos(p0.psi)) + wind.w_y * t
    return Pose(x, y, psi_t)


def relative_air_velocity(v_ground: tuple[float, float], wind: WindVector) -> AirRelativeState:
    """Airspeed and ground-track-to-wind angle for a given ground velocity.

    The air-relative velocity is v_ground - wind. theta_rel is the angle
    of the wind vector measured from the ground-track direction, mapped to
    [0, 2*pi): 0 means pure tailwind, pi means pure headwind. It is
    defined as 0 when the wind magnitude is zero.
    """
    vx, vy = v_ground
    _require_finite("relative_air_velocity", vx, vy)
    ax = vx - wind.w_x
    ay = vy - wind.w_y
    speed = math.hypot(ax, ay)
    if wind.w_x == 0.0 and wind.w_y == 0.0:
        return AirRelativeState(speed, 0.0)
    theta = wrap_angle(math.atan2(wind.w_y, wind.w_x) - math.atan2(vy, vx))
    return AirRelativeState(speed, theta)
