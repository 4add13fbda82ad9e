"""Body-forward estimation, recentering and position-sector binning.

Coordinates follow the headset convention: +y up, +z forward, +x right.
Angles are in degrees; positive yaw turns right, positive pitch looks up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from arcontext.errors import GazeVertical

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class SpatialConfig:
    fov_diagonal_deg: float = 52.0
    aspect_w: float = 16.0
    aspect_h: float = 9.0
    far_turn_threshold_deg: float = 45.0
    orientation_dot_threshold: float = 0.85
    vertical_eye_band_deg: float = 10.0
    motion_epsilon_m: float = 0.01

    def __post_init__(self):
        for name in ("fov_diagonal_deg", "aspect_w", "aspect_h", "far_turn_threshold_deg",
                     "vertical_eye_band_deg", "motion_epsilon_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.orientation_dot_threshold < 1:
            raise ValueError("orientation_dot_threshold must lie in (0, 1)")

    @property
    def horizontal_fov_deg(self) -> float:
        return self.fov_diagonal_deg * math.cos(math.atan2(self.aspect_h, self.aspect_w))

    @property
    def vertical_fov_deg(self) -> float:
        return self.fov_diagonal_deg * math.sin(math.atan2(self.aspect_h, self.aspect_w))

    @classmethod
    def from_dict(cls, overrides: dict | None) -> "SpatialConfig":
        return cls(**(overrides or {}))


class HeadSector(str, Enum):
    TOP_LEFT = "TopLeft"
    TOP_CENTER = "TopCenter"
    TOP_RIGHT = "TopRight"
    LEFT_CENTER = "LeftCenter"
    CENTER = "Center"
    RIGHT_CENTER = "RightCenter"
    BOTTOM_LEFT = "BottomLeft"
    BOTTOM_CENTER = "BottomCenter"
    BOTTOM_RIGHT = "BottomRight"


class BodySector(str, Enum):
    TOP_LEFT = "TopLeft"
    TOP_CENTER = "TopCenter"
    TOP_RIGHT = "TopRight"
    LEFT_CENTER = "LeftCenter"
    CENTER = "Center"
    RIGHT_CENTER = "RightCenter"
    BOTTOM_LEFT = "BottomLeft"
    BOTTOM_CENTER = "BottomCenter"
    BOTTOM_RIGHT = "BottomRight"
    FAR_LEFT = "FarLeft"
    FAR_RIGHT = "FarRight"


# (row, column) -> name; row 0 is top, column 0 is left
_GRID = (
    ("TopLeft", "TopCenter", "TopRight"),
    ("LeftCenter", "Center", "RightCenter"),
    ("BottomLeft", "BottomCenter", "BottomRight"),
)

ALL_SECTOR_LABELS: tuple[str, ...] = tuple(s.value for s in BodySector)


@dataclass(frozen=True)
class BodyPose:
    position: Vec3 = (0.0, 0.0, 0.0)
    forward: Vec3 = field(default=(0.0, 0.0, 1.0))

    def __post_init__(self):
        fx, fy, fz = self.forward
        if abs(fy) > 1e-9 or abs(math.hypot(fx, fz) - 1.0) > 1e-6:
            raise ValueError(f"forward must be a unit vector on the floor plane, got {self.forward}")

    @property
    def heading_deg(self) -> float:
        return heading_of(self.forward)


def heading_of(v: Vec3) -> float:
    """Yaw of a floor-plane direction, degrees clockwise from +z."""
    return math.degrees(math.atan2(v[0], v[2]))


def _floor_unit(v: Vec3) -> tuple[Vec3, float]:
    x, _, z = v
    mag = math.hypot(x, z)
    if mag == 0.0:
        return (0.0, 0.0, 0.0), 0.0
    return (x / mag, 0.0, z / mag), mag


def update_body_forward(pose: BodyPose, prev_move: Vec3, curr_move: Vec3,
                        config: SpatialConfig = SpatialConfig()) -> tuple[BodyPose, Vec3]:
    """One frame of the movement-direction heuristic.

    The vertical component of ``curr_move`` is dropped. Moves shorter than the
    motion epsilon leave everything unchanged. Otherwise the forward direction
    jumps to the new heading only when ``dot(prev, curr) < threshold``.
    """
    curr, mag = _floor_unit(curr_move)
    if mag < config.motion_epsilon_m:
        return pose, prev_move
    dot = prev_move[0] * curr[0] + prev_move[1] * curr[1] + prev_move[2] * curr[2]
    if dot < config.orientation_dot_threshold:
        pose = BodyPose(pose.position, curr)
    return pose, curr


def forward_from_yaw(yaw_deg: float) -> Vec3:
    r = math.radians(yaw_deg)
    return (math.sin(r), 0.0, math.cos(r))


def gaze_direction(yaw_deg: float, pitch_deg: float) -> Vec3:
    y, p = math.radians(yaw_deg), math.radians(pitch_deg)
    return (math.cos(p) * math.sin(y), math.sin(p), math.cos(p) * math.cos(y))


def recenter(head_yaw_deg: float, head_pitch_deg: float = 0.0) -> Vec3:
    """Body forward taken from the floor projection of the current gaze."""
    gaze = gaze_direction(head_yaw_deg, head_pitch_deg)
    forward, mag = _floor_unit(gaze)
    if mag < 1e-9:
        raise GazeVertical(f"gaze pitch {head_pitch_deg} deg has no floor projection")
    return forward


def angles_relative(direction: Vec3, forward: Vec3) -> tuple[float, float]:
    """(yaw, pitch) of ``direction`` measured from a floor-plane ``forward``."""
    f, _ = _floor_unit(forward)
    right = (f[2], 0.0, -f[0])
    dx, dy, dz = direction
    along = dx * f[0] + dz * f[2]
    side = dx * right[0] + dz * right[2]
    yaw = math.degrees(math.atan2(side, along))
    pitch = math.degrees(math.atan2(dy, math.hypot(along, side)))
    return yaw, pitch


def _third(value: float, half_width: float) -> int:
    edge = half_width / 3.0
    if value < -edge:
        return 0
    if value > edge:
        return 2
    return 1


def _check_finite(yaw: float, pitch: float) -> None:
    if not (math.isfinite(yaw) and math.isfinite(pitch)):
        raise ValueError(f"non-finite angle ({yaw}, {pitch})")


def wrap_deg(angle: float) -> float:
    """Map to [-180, 180)."""
    return (angle + 180.0) % 360.0 - 180.0


def bin_head_sector(yaw_deg: float, pitch_deg: float, config: SpatialConfig = SpatialConfig()) -> HeadSector:
    """Nine-way split of the display field of view into equal thirds.

    Offsets beyond the field of view fall into the nearest edge third.
    """
    _check_finite(yaw_deg, pitch_deg)
    col = _third(wrap_deg(yaw_deg), config.horizontal_fov_deg / 2.0)
    # pitch up -> top row
    row = 2 - _third(pitch_deg, config.vertical_fov_deg / 2.0)
    return HeadSector(_GRID[row][col])


def bin_body_sector(yaw_deg: float, pitch_deg: float, config: SpatialConfig = SpatialConfig()) -> BodySector:
    _check_finite(yaw_deg, pitch_deg)
    yaw = wrap_deg(yaw_deg)
    far = config.far_turn_threshold_deg
    if yaw > far:
        return BodySector.FAR_RIGHT
    if yaw < -far:
        return BodySector.FAR_LEFT
    col = _third(yaw, far)
    band = config.vertical_eye_band_deg
    row = 0 if pitch_deg > band else 2 if pitch_deg < -band else 1
    return BodySector(_GRID[row][col])


def vertical_band(sector: str) -> str:
    """'Top', 'Center' or 'Bottom' for a sector label (far sectors count as Center)."""
    if sector.startswith("Top"):
        return "Top"
    if sector.startswith("Bottom"):
        return "Bottom"
    return "Center"


def horizontal_band(sector: str) -> str:
    if sector in ("FarLeft", "FarRight"):
        return sector
    if sector.endswith("Left") or sector == "LeftCenter":
        return "Left"
    if sector.endswith("Right") or sector == "RightCenter":
        return "Right"
    return "Center"
