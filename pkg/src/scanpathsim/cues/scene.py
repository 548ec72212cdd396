"""Scene containers: per-frame cue bundles, ground truth, and cue downsampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import FlowField, LabelMap, ScalarField, VideoSpec
from ..raster import resize_area, resize_nearest, scaled_shape


@dataclass
class CueBundle:
    """The four segmentation cues plus saliency and flow for one frame.

    All grids share one resolution; a bundle can live at full video
    resolution or at the downsampled cue resolution.
    """

    appearance: LabelMap
    motion: LabelMap
    semantic: LabelMap
    saliency: ScalarField
    flow: FlowField

    @property
    def shape(self) -> tuple[int, int]:
        return self.semantic.shape

    def global_cue(self, name: str) -> LabelMap:
        if name not in ("appearance", "motion", "semantic"):
            raise KeyError(f"unknown global cue {name!r}")
        return getattr(self, name)


@dataclass
class GroundTruth:
    """Per-frame true object id maps (0 = background) with stable ids."""

    labels: list[LabelMap]
    first_present: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.first_present:
            self.first_present = first_presence(self.labels)

    def objects_in_frame(self, frame: int) -> list[int]:
        ids = np.unique(self.labels[frame])
        return [int(i) for i in ids if i != 0]


def first_presence(labels: list[LabelMap]) -> dict[int, int]:
    """First frame index at which each nonzero object id has pixels."""
    seen: dict[int, int] = {}
    for f, lab in enumerate(labels):
        for obj in np.unique(lab):
            if obj != 0 and int(obj) not in seen:
                seen[int(obj)] = f
    return seen


@dataclass
class Scene:
    """A full dynamic scene: spec, per-frame full-resolution cues, ground truth."""

    spec: VideoSpec
    cues: list[CueBundle]
    gt: GroundTruth
    rgb: list[np.ndarray] | None = None
    video_id: str = "scene"

    def __post_init__(self):
        if len(self.cues) != self.spec.n_frames:
            raise ValueError("one CueBundle required per frame")
        if len(self.gt.labels) != self.spec.n_frames:
            raise ValueError("one ground-truth map required per frame")


def downsample_cues(bundle: CueBundle, r_scale: float) -> CueBundle:
    """Rescale a bundle: labels nearest-neighbour, scalars by area averaging.

    Flow channels are area-averaged and their displacement values are
    multiplied by r_scale so they stay expressed in output pixels.
    """
    out_shape = scaled_shape(bundle.shape, r_scale)
    if out_shape == bundle.shape:
        return CueBundle(
            appearance=bundle.appearance.copy(),
            motion=bundle.motion.copy(),
            semantic=bundle.semantic.copy(),
            saliency=bundle.saliency.copy().astype(float),
            flow=FlowField(bundle.flow.dx.astype(float), bundle.flow.dy.astype(float)),
        )
    return CueBundle(
        appearance=resize_nearest(bundle.appearance, out_shape),
        motion=resize_nearest(bundle.motion, out_shape),
        semantic=resize_nearest(bundle.semantic, out_shape),
        saliency=resize_area(bundle.saliency, out_shape),
        flow=FlowField(
            resize_area(bundle.flow.dx, out_shape) * r_scale,
            resize_area(bundle.flow.dy, out_shape) * r_scale,
        ),
    )
