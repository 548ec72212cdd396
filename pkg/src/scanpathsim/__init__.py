"""Segmentation-coupled scanpath simulation and evaluation toolkit."""

__version__ = "0.1.0"

from .core import (
    EventKind,
    FlowField,
    FoveationCategory,
    GazeEvent,
    GazePoint,
    ScanpathRecord,
    VideoSpec,
    make_rng,
    px_to_dva,
    relative_angle,
    saccade_angle,
)

__all__ = [
    "EventKind",
    "FlowField",
    "FoveationCategory",
    "GazeEvent",
    "GazePoint",
    "ScanpathRecord",
    "VideoSpec",
    "__version__",
    "make_rng",
    "px_to_dva",
    "relative_angle",
    "saccade_angle",
]
