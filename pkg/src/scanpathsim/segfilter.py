"""Particle filter over scene segmentations with boundary uncertainty.

The belief over the current segmentation is a weighted set of label-map
particles. Each frame the filter forward-warps every particle with the
optic flow, weighs particles by their boundary distance to each cue,
stamps measured segments into a subset of particles, resamples, and
marginalizes the set into a single segmentation plus a per-pixel
boundary likelihood and its binary entropy. Object ids are kept stable
across frames by discounted-IOU matching against recent segmentations.

Per-frame randomness is drawn in a fixed order (segment insertion
choices first, then one uniform for systematic resampling) so runs are
reproducible for a given stream.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment

from .core import FlowField, LabelMap, ScalarField
from .raster import resize_bilinear, resize_nearest


@dataclass
class Particle:
    """One hypothesis segmentation with its (normalized) weight."""

    segmentation: LabelMap
    weight: float


@dataclass
class Belief:
    """Fixed-size weighted particle set for one frame."""

    particles: list[Particle]
    frame: int = 0

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.particles])


@dataclass(frozen=True)
class WeightConfig:
    """Importance exponents for the per-cue particle weights."""

    alpha_appearance: float = 0.4
    alpha_motion: float = 0.05
    alpha_semantic: float = 1.0
    alpha_foveated: float = 0.6

    def alpha(self, name: str) -> float:
        return getattr(self, f"alpha_{name}")


@dataclass(frozen=True)
class FilterConfig:
    n_particles: int = 50
    p_thresh: float = 0.5
    insert_fraction: float = 0.2
    epsilon_px: float = 1e-3
    id_discount: float = 0.7
    id_match_min: float = 0.05
    id_history_len: int = 10
    # the foveated cue is compared only inside the mask dilated by this
    # fraction of its bounding-box diagonal
    foveated_window_frac: float = 0.25
    weights: WeightConfig = WeightConfig()


@dataclass
class SegmentationState:
    """Marginalized filter output used by the decision stage.

    labelmap and uncertainty are upsampled to decision (video)
    resolution; the boundary likelihood stays at cue resolution.
    """

    labelmap: LabelMap
    boundary_likelihood: ScalarField
    uncertainty: ScalarField
    labelmap_cue: LabelMap


@dataclass
class CueMeasurement:
    """One segmentation measurement, optionally restricted to a window."""

    name: str
    labels: LabelMap
    alpha: float
    window: np.ndarray | None = None


def boundary_image(seg: LabelMap) -> np.ndarray:
    """Binary map of pixels with at least one 4-neighbour of another label."""
    b = np.zeros(seg.shape, dtype=bool)
    b[:-1, :] |= seg[:-1, :] != seg[1:, :]
    b[1:, :] |= seg[1:, :] != seg[:-1, :]
    b[:, :-1] |= seg[:, :-1] != seg[:, 1:]
    b[:, 1:] |= seg[:, 1:] != seg[:, :-1]
    return b


def _boundary_edt(boundary: np.ndarray) -> np.ndarray:
    """Exact euclidean distance to the nearest boundary pixel.

    With no boundary pixels at all the distance is undefined; the image
    diagonal is used as a finite worst-case stand-in.
    """
    if not boundary.any():
        h, w = boundary.shape
        return np.full(boundary.shape, math.hypot(h, w))
    return ndimage.distance_transform_edt(~boundary)


def _boundary_distance(b1, dt1, b2, dt2) -> float:
    return float(np.sum(b1 * dt2) + np.sum(b2 * dt1))


def seg_distance(s1: LabelMap, s2: LabelMap) -> float:
    """Symmetric boundary distance between two segmentations.

    Sum over each map's boundary pixels of the exact euclidean distance
    to the other map's nearest boundary pixel.
    """
    if s1.shape != s2.shape:
        raise ValueError("segmentations must share dimensions")
    b1, b2 = boundary_image(s1), boundary_image(s2)
    if not b1.any() and not b2.any():
        return 0.0
    return _boundary_distance(b1, _boundary_edt(b1), b2, _boundary_edt(b2))


def foveated_window(mask: np.ndarray, frac: float) -> np.ndarray:
    """Mask dilated by frac of its bounding-box diagonal (euclidean)."""
    if not mask.any():
        return mask.copy()
    ys, xs = np.nonzero(mask)
    diag = math.hypot(ys.max() - ys.min() + 1, xs.max() - xs.min() + 1)
    radius = frac * diag
    return ndimage.distance_transform_edt(~mask) <= radius


def foveated_measurement(mask: np.ndarray, alpha: float, window_frac: float) -> CueMeasurement:
    """Two-label map (mask / complement) compared within a local window."""
    return CueMeasurement(
        name="foveated",
        labels=mask.astype(np.uint16),
        alpha=alpha,
        window=foveated_window(mask, window_frac),
    )


def weigh_particles(
    belief: Belief, measurements: list[CueMeasurement], cfg: FilterConfig
) -> Belief:
    """Reweigh particles by inverse boundary distance to every measurement.

    w_i is proportional to the product over cues z of (1 / d(s_i, z))**alpha_z,
    normalized to sum 1. Distances below epsilon_px are floored so weights
    stay finite.
    """
    if not measurements:
        raise ValueError("at least one measurement is required")
    n = len(belief.particles)
    log_w = np.zeros(n)

    meas_prepared = []
    for m in measurements:
        b = boundary_image(m.labels)
        if m.window is not None:
            b = b & m.window
        meas_prepared.append((m, b, _boundary_edt(b)))

    seen: dict[int, int] = {}
    for i, p in enumerate(belief.particles):
        # resampled duplicates share arrays; compute each distance once
        key = id(p.segmentation)
        if key in seen:
            log_w[i] = log_w[seen[key]]
            continue
        seen[key] = i
        b_full = boundary_image(p.segmentation)
        dt_full = None
        acc = 0.0
        for m, b_m, dt_m in meas_prepared:
            if m.window is None:
                if dt_full is None:
                    dt_full = _boundary_edt(b_full)
                d = _boundary_distance(b_full, dt_full, b_m, dt_m)
            else:
                b_w = b_full & m.window
                d = _boundary_distance(b_w, _boundary_edt(b_w), b_m, dt_m)
            acc += -m.alpha * math.log(max(d, cfg.epsilon_px))
        log_w[i] = acc

    log_w -= log_w.max()
    w = np.exp(log_w)
    w /= w.sum()
    parts = [Particle(p.segmentation, float(wi)) for p, wi in zip(belief.particles, w)]
    return Belief(parts, belief.frame)


def warp_labels(seg: LabelMap, flow: FlowField) -> LabelMap:
    """Forward-warp a label map: push each label to its displaced pixel.

    Rounded target positions outside the frame are dropped; pixels left
    unfilled take the label of the nearest filled pixel.
    """
    h, w = seg.shape
    yy, xx = np.mgrid[0:h, 0:w]
    tx = np.rint(xx + flow.dx).astype(np.intp)
    ty = np.rint(yy + flow.dy).astype(np.intp)
    ok = (tx >= 0) & (tx < w) & (ty >= 0) & (ty < h)
    out = np.zeros_like(seg)
    filled = np.zeros(seg.shape, dtype=bool)
    # row-major scatter: on collisions the last source pixel wins
    out[ty[ok], tx[ok]] = seg[ok]
    filled[ty[ok], tx[ok]] = True
    if not filled.all():
        if not filled.any():
            return seg.copy()
        _, (iy, ix) = ndimage.distance_transform_edt(~filled, return_indices=True)
        out = out[iy, ix]
    return out


def predict(belief: Belief, flow: FlowField) -> Belief:
    """Shift every particle's boundaries along the optic flow; weights unchanged."""
    warped: dict[int, LabelMap] = {}
    parts = []
    for p in belief.particles:
        key = id(p.segmentation)
        if key not in warped:
            warped[key] = warp_labels(p.segmentation, flow)
        parts.append(Particle(warped[key], p.weight))
    return Belief(parts, belief.frame)


def systematic_resample(belief: Belief, rng: np.random.Generator) -> Belief:
    """Low-variance resampling with replacement; output weights uniform."""
    n = len(belief.particles)
    w = belief.weights
    total = w.sum()
    if total <= 0:
        raise ValueError("all particle weights are zero")
    positions = (np.arange(n) + rng.random()) / n
    cumulative = np.cumsum(w / total)
    cumulative[-1] = 1.0
    idx = np.searchsorted(cumulative, positions, side="right")
    parts = [Particle(belief.particles[i].segmentation, 1.0 / n) for i in idx]
    return Belief(parts, belief.frame)


def insert_measurements(
    belief: Belief,
    global_cues: list[LabelMap],
    foveated_mask: np.ndarray | None,
    rng: np.random.Generator,
    insert_fraction: float,
) -> Belief:
    """Stamp one measured segment into a random subset of particles.

    For each chosen particle one segment is stamped under a fresh label:
    the foveated mask with probability 0.5 when present, otherwise a
    uniformly chosen segment of a uniformly chosen global cue.
    """
    if not 0 <= insert_fraction <= 1:
        raise ValueError("insert_fraction must be in [0, 1]")
    n = len(belief.particles)
    n_insert = math.ceil(insert_fraction * n)
    if n_insert == 0:
        return belief
    have_mask = foveated_mask is not None and foveated_mask.any()
    if not have_mask and not global_cues:
        return belief

    parts = list(belief.particles)
    chosen = rng.choice(n, size=min(n_insert, n), replace=False)
    for i in chosen:
        use_mask = have_mask and (not global_cues or rng.random() < 0.5)
        if use_mask:
            stamp = foveated_mask
        else:
            cue = global_cues[int(rng.integers(len(global_cues)))]
            labels = np.unique(cue)
            stamp = cue == labels[int(rng.integers(len(labels)))]
        seg = parts[i].segmentation.copy()
        seg[stamp] = seg.max() + 1
        parts[i] = Particle(seg, parts[i].weight)
    return Belief(parts, belief.frame)


def binary_entropy(p: np.ndarray) -> np.ndarray:
    """Base-2 entropy of a Bernoulli likelihood, with 0*log(0) := 0."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    out = np.zeros_like(p)
    interior = (p > 0) & (p < 1)
    q = p[interior]
    out[interior] = -q * np.log2(q) - (1 - q) * np.log2(1 - q)
    return out


def marginalize(
    belief: Belief, p_thresh: float
) -> tuple[LabelMap, ScalarField, ScalarField]:
    """Collapse the particle set into one segmentation plus uncertainty.

    Returns (labelmap_raw, boundary likelihood p_b, binary entropy H).
    The boundary likelihood is the summed weight of particles with a
    boundary at each pixel; it is thresholded, closed (3x3, one
    iteration), and the non-boundary connected components become the raw
    segments, with boundary pixels absorbed into the nearest component.
    """
    w = belief.weights
    total = w.sum()
    shape = belief.particles[0].segmentation.shape
    p_b = np.zeros(shape, dtype=float)
    seen: dict[int, np.ndarray] = {}
    for p, wi in zip(belief.particles, w / total):
        key = id(p.segmentation)
        if key not in seen:
            seen[key] = boundary_image(p.segmentation)
        p_b += wi * seen[key]
    p_b = np.clip(p_b, 0.0, 1.0)

    boundary = p_b >= p_thresh
    boundary = ndimage.binary_closing(boundary, structure=np.ones((3, 3)), iterations=1)
    regions, n_regions = ndimage.label(~boundary)
    if n_regions == 0:
        labelmap = np.ones(shape, dtype=np.uint16)
    else:
        _, (iy, ix) = ndimage.distance_transform_edt(regions == 0, return_indices=True)
        labelmap = regions[iy, ix].astype(np.uint16)
    return labelmap, p_b, binary_entropy(p_b)


def _iou_matrix(raw: LabelMap, stable: LabelMap, raw_ids: np.ndarray, old_ids: np.ndarray):
    """Pairwise IOU between raw segments and stable-id masks, vectorized."""
    raw_idx = np.searchsorted(raw_ids, raw.ravel())
    k = len(old_ids)
    old_pos = {int(o): j for j, o in enumerate(old_ids)}
    stable_flat = stable.ravel()
    old_idx = np.full(stable_flat.shape, k, dtype=np.intp)
    for val, j in old_pos.items():
        old_idx[stable_flat == val] = j
    pair = raw_idx * (k + 1) + old_idx
    counts = np.bincount(pair, minlength=len(raw_ids) * (k + 1)).reshape(
        len(raw_ids), k + 1
    )
    inter = counts[:, :k].astype(float)
    area_raw = counts.sum(axis=1, keepdims=True).astype(float)
    area_old = np.array([(stable_flat == int(o)).sum() for o in old_ids], dtype=float)
    union = area_raw + area_old[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        iou = np.where(union > 0, inter / union, 0.0)
    return iou


def match_ids(
    labelmap_raw: LabelMap,
    id_history: list[LabelMap],
    beta: float,
    w_min: float,
    next_id: int,
) -> tuple[LabelMap, int]:
    """Relabel raw segments with stable ids via discounted-IOU matching.

    Matching weight of (new segment, old id) sums IOU over the history
    maps (most recent first) discounted by beta**age; a maximum-weight
    full matching assigns old ids, and segments whose best assignment
    weighs below w_min receive fresh ids. Returns the relabeled map and
    the updated fresh-id counter.
    """
    raw_ids = np.unique(labelmap_raw)
    old_ids = sorted({int(v) for m in id_history for v in np.unique(m)})
    out = np.zeros(labelmap_raw.shape, dtype=np.uint16)

    weights = np.zeros((len(raw_ids), len(old_ids)))
    if old_ids:
        old_arr = np.array(old_ids)
        for age, hist in enumerate(id_history):
            weights += (beta**age) * _iou_matrix(labelmap_raw, hist, raw_ids, old_arr)

    assigned: dict[int, int] = {}
    if old_ids:
        rows, cols = linear_sum_assignment(weights, maximize=True)
        for r, c in zip(rows, cols):
            if weights[r, c] >= w_min:
                assigned[int(raw_ids[r])] = old_ids[c]
    for raw_label in raw_ids:
        stable = assigned.get(int(raw_label))
        if stable is None:
            stable = next_id
            next_id += 1
        out[labelmap_raw == raw_label] = stable
    return out, next_id


class SegmentationFilter:
    """Stateful per-scene filter: belief update plus stable-id bookkeeping."""

    def __init__(self, cfg: FilterConfig, decision_shape: tuple[int, int]):
        self.cfg = cfg
        self.decision_shape = decision_shape
        self.history: deque[LabelMap] = deque(maxlen=cfg.id_history_len)
        self.next_id = 1

    def initialize(self, global_cues: list[LabelMap]) -> Belief:
        """Seed particles from the first frame's global cues (round-robin)."""
        if not global_cues:
            raise ValueError("cannot initialize a belief without global cues")
        n = self.cfg.n_particles
        parts = [
            Particle(global_cues[i % len(global_cues)].copy(), 1.0 / n) for i in range(n)
        ]
        return Belief(parts, frame=0)

    def step(
        self,
        belief: Belief,
        measurements: list[CueMeasurement],
        global_cues: list[LabelMap],
        foveated_mask: np.ndarray | None,
        flow: FlowField | None,
        rng: np.random.Generator,
        frame: int,
    ) -> tuple[Belief, SegmentationState]:
        """One filter cycle: predict, weigh, insert, resample, marginalize, match."""
        if flow is not None:
            belief = predict(belief, flow)
        belief = weigh_particles(belief, measurements, self.cfg)
        belief = insert_measurements(
            belief, global_cues, foveated_mask, rng, self.cfg.insert_fraction
        )
        belief = systematic_resample(belief, rng)
        belief.frame = frame
        raw, p_b, entropy = marginalize(belief, self.cfg.p_thresh)
        stable, self.next_id = match_ids(
            raw,
            list(self.history),
            self.cfg.id_discount,
            self.cfg.id_match_min,
            self.next_id,
        )
        self.history.appendleft(stable)
        state = SegmentationState(
            labelmap=resize_nearest(stable, self.decision_shape),
            boundary_likelihood=p_b,
            uncertainty=np.clip(resize_bilinear(entropy, self.decision_shape), 0.0, 1.0),
            labelmap_cue=stable,
        )
        return belief, state
