"""Core value types for the procedural 2D interaction world."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

RGB = tuple[float, float, float]

DEFAULT_PALETTE: tuple[RGB, ...] = (
    (0.85, 0.25, 0.25),
    (0.25, 0.65, 0.85),
    (0.30, 0.80, 0.35),
    (0.90, 0.75, 0.20),
    (0.70, 0.35, 0.85),
    (0.95, 0.55, 0.25),
)


class WorldError(Exception):
    """Base class for simulator errors."""


class PlacementError(WorldError):
    """Raised when object placement fails after bounded retries."""


class InfeasibleTaskError(WorldError):
    """Raised when an action script cannot be generated for a scene."""


class ObjectKind(Enum):
    FREE = "free"
    ARTICULATED = "articulated"


@dataclass(frozen=True)
class WorldConfig:
    world_size: int = 128
    view_size: int = 64
    num_frames: int = 16
    palette: tuple[RGB, ...] = DEFAULT_PALETTE
    object_count_range: tuple[int, int] = (1, 3)

    def __post_init__(self):
        if self.view_size > self.world_size:
            raise ValueError("view_size must not exceed world_size")
        if self.num_frames < 2:
            raise ValueError("num_frames must be >= 2")
        if self.object_count_range[0] < 0 or self.object_count_range[0] > self.object_count_range[1]:
            raise ValueError(f"bad object_count_range {self.object_count_range}")
        for c in self.palette:
            if len(c) != 3 or any(not (0.0 <= v <= 1.0) for v in c):
                raise ValueError(f"palette entry out of [0,1]: {c}")


@dataclass(frozen=True)
class ObjectSpec:
    kind: ObjectKind
    anchor: tuple[int, int]  # (x, y) top-left in world coords
    extent: tuple[int, int]  # (w, h)
    color: RGB
    # ARTICULATED only:
    handle_region: Optional[tuple[int, int, int, int]] = None  # (x0, y0, x1, y1), exclusive upper
    axis: Optional[tuple[int, int]] = None  # (1,0) or (0,1)
    max_offset: int = 0

    def __post_init__(self):
        if self.extent[0] < 2 or self.extent[1] < 2:
            raise ValueError(f"extent must be >= (2,2), got {self.extent}")
        if self.kind is ObjectKind.ARTICULATED:
            if self.handle_region is None or self.axis is None or self.max_offset <= 0:
                raise ValueError("articulated object needs handle_region, axis, max_offset")
            if self.axis not in ((1, 0), (0, 1)):
                raise ValueError(f"axis must be unit-aligned, got {self.axis}")
            x0, y0, x1, y1 = self.handle_region
            ax, ay = self.anchor
            w, h = self.extent
            if not (ax <= x0 < x1 <= ax + w and ay <= y0 < y1 <= ay + h):
                raise ValueError("handle_region must lie inside object footprint")

    def footprint(self, pose) -> tuple[int, int, int, int]:
        """Axis-aligned (x0, y0, x1, y1) of the body at the given pose."""
        ax, ay = self.anchor
        w, h = self.extent
        if self.kind is ObjectKind.FREE:
            dx, dy = pose
            return (ax + dx, ay + dy, ax + dx + w, ay + dy + h)
        return (ax, ay, ax + w, ay + h)

    def panel_displacement(self, s: float) -> tuple[int, int]:
        d = int(round(s * self.max_offset))
        return (d * self.axis[0], d * self.axis[1])


@dataclass(frozen=True)
class HandState:
    position: tuple[int, int]  # (x, y) world coords; may lie outside the world
    aperture: float  # 0 = closed/grasping, 1 = fully open

    def __post_init__(self):
        if not (0.0 <= self.aperture <= 1.0):
            raise ValueError(f"aperture out of [0,1]: {self.aperture}")


@dataclass(frozen=True)
class CameraPose:
    offset: tuple[int, int]  # viewport top-left in world coords

    def validate(self, cfg: WorldConfig):
        x, y = self.offset
        if not (0 <= x <= cfg.world_size - cfg.view_size and 0 <= y <= cfg.world_size - cfg.view_size):
            raise ValueError(f"camera offset {self.offset} out of world bounds")


@dataclass
class WorldState:
    cfg: WorldConfig
    background: np.ndarray  # (world, world, 3) float32
    objects: list[tuple[ObjectSpec, object]]  # pose: (dx,dy) for FREE, float s for ARTICULATED
    attached: Optional[int] = None  # object index grasped by the hand

    def copy(self) -> "WorldState":
        return WorldState(self.cfg, self.background, list(self.objects), self.attached)


class Task(Enum):
    NOOP = 0
    NAV_ONLY = 1
    PICK_PLACE = 2
    OPEN_ARTICULATED = 3


TASK_NAMES = {t: t.name.lower().replace("_", "-") for t in Task}
LABEL_VOCAB = len(Task)


@dataclass(frozen=True)
class ActionScript:
    camera_traj: tuple[CameraPose, ...]
    hand_traj: tuple[HandState, ...]
    label: int
    label_name: str

    def __post_init__(self):
        if len(self.camera_traj) != len(self.hand_traj):
            raise ValueError("camera and hand trajectories must have equal length")
        if not (0 <= self.label < LABEL_VOCAB):
            raise ValueError(f"label {self.label} outside vocabulary")

    def __len__(self):
        return len(self.camera_traj)
