"""Deterministic synthetic dynamic scenes with controllable cue disagreement.

Objects are stacks of coloured parts moving along piecewise-linear
trajectories. The generator renders RGB frames and derives all cues by
construction: the appearance cue segments by part colour (so multi-part
objects fall apart), the motion cue groups by shared motion (static
objects vanish from it), the semantic cue sees whole objects, saliency
is a sum of Gaussian bumps on designated objects, and flow is the exact
per-pixel ground-truth displacement. Configurable noise (per-cue vertex
jitter, appearance dropout of low-contrast objects) reproduces the
partial disagreement between cues that the segmentation filter is
supposed to resolve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from matplotlib.path import Path

from ..core import FlowField, LabelMap, VideoSpec
from .scene import CueBundle, GroundTruth, Scene

# An object only participates in appearance dropout when at least one of
# its parts sits this close (euclidean RGB) to the background colour.
LOW_CONTRAST_RGB_DIST = 100.0

ELLIPSE_VERTICES = 24


@dataclass(frozen=True)
class ShapePart:
    """One coloured shape of an object, in object-local pixel coordinates.

    kind "rectangle": geometry = (cx, cy, width, height)
    kind "ellipse":   geometry = (cx, cy, semi_x, semi_y)
    kind "polygon":   geometry = ((x0, y0), (x1, y1), ...)
    """

    kind: str
    geometry: tuple
    color: tuple[int, int, int]

    def vertices(self) -> np.ndarray:
        if self.kind == "rectangle":
            cx, cy, w, h = self.geometry
            return np.array(
                [
                    (cx - w / 2, cy - h / 2),
                    (cx + w / 2, cy - h / 2),
                    (cx + w / 2, cy + h / 2),
                    (cx - w / 2, cy + h / 2),
                ]
            )
        if self.kind == "ellipse":
            cx, cy, sx, sy = self.geometry
            t = np.linspace(0, 2 * math.pi, ELLIPSE_VERTICES, endpoint=False)
            return np.column_stack((cx + sx * np.cos(t), cy + sy * np.sin(t)))
        if self.kind == "polygon":
            return np.asarray(self.geometry, dtype=float)
        raise ValueError(f"unknown shape kind {self.kind!r}")


@dataclass(frozen=True)
class SyntheticObject:
    """A multi-part object on a piecewise-linear trajectory.

    ``trajectory`` is a tuple of (frame, x, y) keypoints; positions are
    interpolated linearly between keypoints and clamped outside them, so
    the trajectory is defined for every frame. Objects sharing a
    ``motion_group`` merge into one segment in the motion cue. Higher
    ``z_order`` is drawn on top.
    """

    parts: tuple[ShapePart, ...]
    trajectory: tuple[tuple[float, float, float], ...]
    motion_group: int = 0
    z_order: int = 0

    def __post_init__(self):
        if not self.parts:
            raise ValueError("an object needs at least one part")
        if not self.trajectory:
            raise ValueError("an object needs at least one trajectory keypoint")

    def position(self, frame: float) -> tuple[float, float]:
        pts = sorted(self.trajectory)
        if frame <= pts[0][0]:
            return pts[0][1], pts[0][2]
        if frame >= pts[-1][0]:
            return pts[-1][1], pts[-1][2]
        for (f0, x0, y0), (f1, x1, y1) in zip(pts, pts[1:]):
            if f0 <= frame <= f1:
                if f1 == f0:
                    return x1, y1
                a = (frame - f0) / (f1 - f0)
                return x0 + a * (x1 - x0), y0 + a * (y1 - y0)
        return pts[-1][1], pts[-1][2]

    def displacement(self, frame: int, n_frames: int) -> tuple[float, float]:
        if frame >= n_frames - 1:
            return 0.0, 0.0
        x0, y0 = self.position(frame)
        x1, y1 = self.position(frame + 1)
        return x1 - x0, y1 - y0


@dataclass(frozen=True)
class CueNoiseSpec:
    """Noise injected into the cue channels (never into the ground truth).

    Vertex jitter is drawn once per scene, independently per cue (and
    per object part), and then applied to every frame: each cue sees a
    persistently biased outline, the way real cue extractors are
    systematically rather than independently wrong per frame. Appearance
    dropout of low-contrast objects is an independent draw per frame.
    """

    boundary_jitter_px: float = 0.0
    dropout_prob: float = 0.0
    static_invisible: bool = True

    def __post_init__(self):
        if self.boundary_jitter_px < 0:
            raise ValueError("boundary_jitter_px must be >= 0")
        if not 0 <= self.dropout_prob <= 1:
            raise ValueError("dropout_prob must be in [0, 1]")


@dataclass(frozen=True)
class SyntheticSceneSpec:
    spec: VideoSpec
    objects: tuple[SyntheticObject, ...]
    background_color: tuple[int, int, int] = (32, 32, 32)
    saliency_hotspots: tuple[tuple[int, float], ...] = ()
    noise: CueNoiseSpec = CueNoiseSpec()
    seed: int = 0
    saliency_sigma_dva: float = 2.0
    video_id: str = "synthetic"


def rasterize_polygon(vertices: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Boolean mask of pixels whose centres fall inside the polygon."""
    h, w = shape
    xs, ys = vertices[:, 0], vertices[:, 1]
    x0 = max(0, int(np.floor(xs.min() - 0.5)))
    x1 = min(w - 1, int(np.ceil(xs.max() + 0.5)))
    y0 = max(0, int(np.floor(ys.min() - 0.5)))
    y1 = min(h - 1, int(np.ceil(ys.max() + 0.5)))
    mask = np.zeros(shape, dtype=bool)
    if x1 < x0 or y1 < y0:
        return mask
    gx, gy = np.meshgrid(np.arange(x0, x1 + 1) + 0.5, np.arange(y0, y1 + 1) + 0.5)
    pts = np.column_stack((gx.ravel(), gy.ravel()))
    # closed paths need the first vertex repeated (it becomes CLOSEPOLY)
    ring = np.vstack([vertices, vertices[:1]])
    inside = Path(ring, closed=True).contains_points(pts)
    mask[y0 : y1 + 1, x0 : x1 + 1] = inside.reshape(gy.shape)
    return mask


def _part_mask(part, offset, shape, jitter=None):
    verts = part.vertices() + np.asarray(offset)
    if jitter is not None:
        verts = verts + jitter
    return rasterize_polygon(verts, shape)


def _draw_jitter_tables(sspec: SyntheticSceneSpec, rng) -> dict:
    """Per-scene vertex displacements, keyed by (cue, object, part)."""
    sigma = sspec.noise.boundary_jitter_px
    tables = {}
    for cue in ("appearance", "semantic", "motion"):
        for i, obj in enumerate(sspec.objects):
            for j, part in enumerate(obj.parts):
                n_verts = len(part.vertices())
                tables[(cue, i, j)] = (
                    rng.normal(0.0, sigma, size=(n_verts, 2)) if sigma > 0 else None
                )
    return tables


def _is_low_contrast(obj: SyntheticObject, background: tuple[int, int, int]) -> bool:
    bg = np.asarray(background, dtype=float)
    dists = [np.linalg.norm(np.asarray(p.color, dtype=float) - bg) for p in obj.parts]
    return min(dists) < LOW_CONTRAST_RGB_DIST


def generate_synthetic_scene(sspec: SyntheticSceneSpec) -> Scene:
    """Render the scene and derive RGB frames, all cues, and ground truth.

    Deterministic in ``sspec.seed``: noise draws follow a fixed order
    (frame, then cue, then object, then part).
    """
    spec = sspec.spec
    shape = spec.shape
    rng = np.random.default_rng(sspec.seed)
    n = spec.n_frames
    # objects painted in ascending z_order so the highest z wins
    order = sorted(range(len(sspec.objects)), key=lambda i: (sspec.objects[i].z_order, i))
    sigma_px = sspec.saliency_sigma_dva / spec.dva_per_px
    jitter = _draw_jitter_tables(sspec, rng)

    rgb_frames: list[np.ndarray] = []
    bundles: list[CueBundle] = []
    gt_labels: list[LabelMap] = []

    for f in range(n):
        rgb = np.empty((*shape, 3), dtype=np.uint8)
        rgb[:] = np.asarray(sspec.background_color, dtype=np.uint8)
        gt = np.zeros(shape, dtype=np.uint16)
        appearance = np.zeros(shape, dtype=np.uint16)
        semantic = np.zeros(shape, dtype=np.uint16)
        motion = np.zeros(shape, dtype=np.uint16)
        flow_dx = np.zeros(shape, dtype=float)
        flow_dy = np.zeros(shape, dtype=float)

        # ground truth, RGB and flow share exact (noise-free) geometry
        for i in order:
            obj = sspec.objects[i]
            pos = obj.position(f)
            disp = obj.displacement(f, n)
            for part in obj.parts:
                m = _part_mask(part, pos, shape)
                gt[m] = i + 1
                rgb[m] = np.asarray(part.color, dtype=np.uint8)
                flow_dx[m] = disp[0]
                flow_dy[m] = disp[1]

        # appearance cue: one label per visible part, low-contrast dropout
        next_label = 1
        for i in order:
            obj = sspec.objects[i]
            dropped = False
            if sspec.noise.dropout_prob > 0 and _is_low_contrast(obj, sspec.background_color):
                dropped = rng.random() < sspec.noise.dropout_prob
            pos = obj.position(f)
            for j, part in enumerate(obj.parts):
                m = _part_mask(part, pos, shape, jitter[("appearance", i, j)])
                appearance[m] = 0 if dropped else next_label
                next_label += 1

        # semantic cue: whole objects, jittered outlines
        for i in order:
            obj = sspec.objects[i]
            pos = obj.position(f)
            for j, part in enumerate(obj.parts):
                m = _part_mask(part, pos, shape, jitter[("semantic", i, j)])
                semantic[m] = i + 1

        # motion cue: moving objects grouped by motion_group
        for i in order:
            obj = sspec.objects[i]
            disp = obj.displacement(f, n)
            moving = disp != (0.0, 0.0)
            if sspec.noise.static_invisible and not moving:
                continue
            pos = obj.position(f)
            for j, part in enumerate(obj.parts):
                m = _part_mask(part, pos, shape, jitter[("motion", i, j)])
                motion[m] = obj.motion_group + 1

        # saliency: gaussian bumps on hotspot objects, max-normalised
        sal = np.zeros(shape, dtype=float)
        yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
        for obj_idx, peak in sspec.saliency_hotspots:
            mask = gt == obj_idx + 1
            if not mask.any():
                continue
            cy, cx = np.mean(np.nonzero(mask), axis=1)
            r2 = (xx - cx) ** 2 + (yy - cy) ** 2
            sal += peak * np.exp(-r2 / (2 * sigma_px**2))
        if sal.max() > 0:
            sal /= sal.max()

        rgb_frames.append(rgb)
        gt_labels.append(gt)
        bundles.append(
            CueBundle(
                appearance=appearance,
                motion=motion,
                semantic=semantic,
                saliency=sal,
                flow=FlowField(flow_dx, flow_dy),
            )
        )

    return Scene(
        spec=spec,
        cues=bundles,
        gt=GroundTruth(labels=gt_labels),
        rgb=rgb_frames,
        video_id=sspec.video_id,
    )
