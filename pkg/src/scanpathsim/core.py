"""Shared domain types: video geometry, gaze events, scanpath records, angles.

Coordinate convention: origin at the top-left pixel, x grows rightward,
y grows downward (row-major image layout). Angles are reported in the
mathematical convention (y upward), i.e. the screen y axis is flipped
before computing directions, so 0 deg points right and +90 deg points up
on screen. All angles live in the half-open interval (-180, 180].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# A LabelMap is a 2-D integer array assigning one segment id per pixel.
# A ScalarField is a 2-D float array with a documented value range.
LabelMap = np.ndarray
ScalarField = np.ndarray


@dataclass(frozen=True)
class VideoSpec:
    """Pixel grid, frame timing, and the isotropic px-to-dva scale of one video."""

    width_px: int
    height_px: int
    n_frames: int
    fps: float
    dva_per_px: float

    def __post_init__(self):
        if self.width_px < 1 or self.height_px < 1 or self.n_frames < 1:
            raise ValueError("width_px, height_px and n_frames must all be >= 1")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.dva_per_px <= 0:
            raise ValueError("dva_per_px must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height_px, self.width_px)

    @property
    def frame_ms(self) -> float:
        return 1000.0 / self.fps

    @property
    def duration_ms(self) -> float:
        return self.n_frames * self.frame_ms


@dataclass(frozen=True)
class FlowField:
    """Per-pixel displacement (px/frame) along x (dx) and y (dy)."""

    dx: np.ndarray
    dy: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.dx.shape


@dataclass(frozen=True)
class GazePoint:
    """Gaze position in pixels at a continuous time within a frame."""

    x_px: float
    y_px: float
    frame: int
    t_ms: float


class EventKind(str, enum.Enum):
    FOVEATION = "Foveation"
    SACCADE = "Saccade"


class FoveationCategory(str, enum.Enum):
    BACKGROUND = "Background"
    DETECTION = "Detection"
    INSPECTION = "Inspection"
    RETURN = "Return"


@dataclass
class GazeEvent:
    """One foveation or saccade; foveations and saccades strictly alternate.

    ``amplitude_dva`` and ``angle_deg`` are set for saccades only;
    ``category`` is set for foveations only (after classification against
    ground truth). ``target_gt_id`` is filled during evaluation.
    """

    kind: EventKind
    start: GazePoint
    end: GazePoint
    target_model_id: int | None = None
    target_gt_id: int | None = None
    amplitude_dva: float | None = None
    angle_deg: float | None = None
    category: FoveationCategory | None = None

    @property
    def duration_ms(self) -> float:
        return self.end.t_ms - self.start.t_ms


@dataclass
class ScanpathRecord:
    """One simulated or reference scanpath: events plus a per-frame gaze trace."""

    video_id: str
    seed: int
    events: list[GazeEvent] = field(default_factory=list)
    trace: list[GazePoint] = field(default_factory=list)

    def foveations(self) -> list[GazeEvent]:
        return [e for e in self.events if e.kind is EventKind.FOVEATION]

    def saccades(self) -> list[GazeEvent]:
        return [e for e in self.events if e.kind is EventKind.SACCADE]


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic random stream for one scanpath realization.

    Identical seeds yield identical draw sequences across runs and
    platforms (PCG64). Streams are single-owner: one per realization,
    never shared.
    """
    return np.random.default_rng(seed)


def px_to_dva(distance_px: float, spec: VideoSpec) -> float:
    """Convert a pixel distance to degrees of visual angle."""
    if distance_px < 0:
        raise ValueError("distance_px must be non-negative")
    return distance_px * spec.dva_per_px


def saccade_angle(start: GazePoint, end: GazePoint) -> float:
    """Direction of the start->end displacement, degrees in (-180, 180].

    0 deg is rightward; the screen y axis is flipped so that upward
    on screen maps to +90 deg.
    """
    dx = end.x_px - start.x_px
    dy = end.y_px - start.y_px
    if dx == 0.0 and dy == 0.0:
        raise ValueError("zero-length displacement has no direction")
    ang = math.degrees(math.atan2(-dy, dx))
    if ang <= -180.0:
        ang += 360.0
    return ang


def relative_angle(prev_angle: float, next_angle: float) -> float:
    """Wrapped difference next - prev, degrees in (-180, 180]."""
    d = math.fmod(next_angle - prev_angle, 360.0)
    if d <= -180.0:
        d += 360.0
    elif d > 180.0:
        d -= 360.0
    return d
