"""Geometric downward-camera model for goal detection.

A pinhole camera looks straight down from the drone. Its ground footprint
is an axis-aligned rectangle whose half-extents grow linearly with
altitude. A goal is detected when its centre lies inside the footprint,
its projected diameter clears the minimum blob size, and its recovered
global label has not been registered before in the episode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, ContractViolation


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus the blob-size detection threshold.

    The principal point sits at the image centre by construction. The
    default focal length gives a 90 degree horizontal field of view for
    the 256 px image width.
    """

    image_w: int = 256
    image_h: int = 144
    f_x: float = 128.0
    f_y: float = 128.0
    x_scale: float = 1.0
    y_scale: float = 1.0
    z_scale: float = 1.0
    min_blob_px: float = 4.0

    def __post_init__(self) -> None:
        if self.image_w <= 0 or self.image_h <= 0:
            raise ConfigError("image dimensions must be positive")
        for name in ("f_x", "f_y", "x_scale", "y_scale", "z_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ConfigError(f"CameraModel.{name} must be positive, got {v!r}")
        if self.min_blob_px <= 0.0:
            raise ConfigError("min_blob_px must be positive")

    @property
    def c_x(self) -> float:
        return self.image_w / 2.0

    @property
    def c_y(self) -> float:
        return self.image_h / 2.0


@dataclass(frozen=True)
class GoalObject:
    """A circular ground object to be found."""

    id: int
    gx: float
    gy: float
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ConfigError(f"goal radius must be positive, got {self.radius!r}")


@dataclass(frozen=True)
class Footprint:
    """Axis-aligned ground rectangle seen by the camera."""

    center_x: float
    center_y: float
    half_w: float
    half_h: float

    @property
    def empty(self) -> bool:
        return self.half_w <= 0.0 or self.half_h <= 0.0

    def contains(self, px: float, py: float) -> bool:
        if self.empty:
            return False
        return (
            abs(px - self.center_x) <= self.half_w
            and abs(py - self.center_y) <= self.half_h
        )


def footprint(drone_pos: tuple[float, float, float], cam: CameraModel) -> Footprint:
    """Ground rectangle visible from (x, y, altitude).

    Altitude at or below zero yields an empty footprint.
    """
    x, y, h = drone_pos
    if h <= 0.0:
        return Footprint(x, y, 0.0, 0.0)
    return Footprint(x, y, h * cam.c_x / cam.f_x, h * cam.c_y / cam.f_y)


def project_centroid(
    drone_pos: tuple[float, float, float],
    goal_xy: tuple[float, float],
    cam: CameraModel,
) -> tuple[float, float]:
    """Image-plane pixel coordinates of a ground point."""
    x, y, h = drone_pos
    if h <= 0.0:
        raise ContractViolation("projection needs positive altitude")
    gx, gy = goal_xy
    x_f = cam.c_x + (gx - x * cam.x_scale) * cam.f_x / (h * cam.z_scale)
    y_f = cam.c_y + (gy - y * cam.y_scale) * cam.f_y / (h * cam.z_scale)
    return (x_f, y_f)


def global_label(
    drone_pos: tuple[float, float, float],
    centroid: tuple[float, float],
    cam: CameraModel,
) -> tuple[float, float]:
    """Recover the world-frame label of an image centroid.

    O_x = X * x_scale + (x_f - c_x) * (h * z_scale) / f_x, and the same
    form for O_y. The centroid must lie inside the image bounds.
    """
    x, y, h = drone_pos
    x_f, y_f = centroid
    if not (0.0 <= x_f <= cam.image_w and 0.0 <= y_f <= cam.image_h):
        raise ContractViolation(f"centroid {centroid!r} outside the image bounds")
    o_x = x * cam.x_scale + (x_f - cam.c_x) * (h * cam.z_scale) / cam.f_x
    o_y = y * cam.y_scale + (y_f - cam.c_y) * (h * cam.z_scale) / cam.f_y
    return (o_x, o_y)


@dataclass
class DetectionRegistry:
    """Per-episode store of detected-object labels.

    A new label is merged (rejected) when an existing label lies within
    merge_radius of it.
    """

    merge_radius: float
    labels: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.merge_radius) and self.merge_radius > 0.0):
            raise ConfigError("merge_radius must be positive")

    def register(self, label: tuple[float, float]) -> bool:
        """Add a label; returns False when it merges into an existing one."""
        ox, oy = label
        for ex, ey in self.labels:
            if math.hypot(ox - ex, oy - ey) <= self.merge_radius:
                return False
        self.labels.append((ox, oy))
        return True

    def clear(self) -> None:
        self.labels.clear()

    def __len__(self) -> int:
        return len(self.labels)


def detect(
    drone_pos: tuple[float, float, float],
    cam: CameraModel,
    goals: tuple[GoalObject, ...] | list[GoalObject],
    registry: DetectionRegistry,
) -> list[GoalObject]:
    """Goals newly detected from this position.

    A goal is reported when (a) its centre lies in the footprint, (b) its
    projected diameter 2 * radius * f_x / altitude reaches min_blob_px,
    and (c) its recovered global label registers as new.
    """
    x, y, h = drone_pos
    fp = footprint(drone_pos, cam)
    if fp.empty:
        return []
    found: list[GoalObject] = []
    for goal in goals:
        if not fp.contains(goal.gx, goal.gy):
            continue
        if 2.0 * goal.radius * cam.f_x / h < cam.min_blob_px:
            continue
        centroid = project_centroid(drone_pos, (goal.gx, goal.gy), cam)
        label = global_label(drone_pos, centroid, cam)
        if registry.register(label):
            found.append(goal)
    return found
