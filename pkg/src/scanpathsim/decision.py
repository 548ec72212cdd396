"""Saccadic decision-making: sensitivity, evidence maps, and the DDM race.

Every segment of the current segmentation is a potential saccade target
with its own decision variable. Per frame, evidence is the mean of the
pointwise product of gaze-dependent sensitivity, rescaled saliency, and
rescaled boundary uncertainty over the segment, scaled by the log of
the segment's area in dva^2. Variables accumulate toward a shared
threshold; the first crossing (linearly interpolated within the frame)
wins and triggers a saccade whose landing point is sampled within the
winning segment.

Optional extensions modulate the sensitivity map (saccadic momentum,
attention on likely next targets) or defer the saccade launch after a
crossing (saccadic dead time with a lowered threshold).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import LabelMap, ScalarField, VideoSpec


@dataclass(frozen=True)
class MomentumParams:
    enabled: bool = False
    peak: float = 2.5
    floor: float = 0.85
    half_width_deg: float = 35.0


@dataclass(frozen=True)
class PresaccadicParams:
    enabled: bool = False
    trigger_fraction: float = 0.3


@dataclass(frozen=True)
class DeadTimeParams:
    enabled: bool = False
    duration_ms: float = 50.0
    threshold: float = 3.5


@dataclass(frozen=True)
class DecisionParams:
    """Free and fixed parameters of the saccadic decision stage."""

    threshold: float = 4.0
    noise: float = 0.4
    u_min: float = 1.0 / 3.0
    f_min: float = 0.0
    sigma_s_dva: float = 7.0
    blur_sigma_dva: float = 1.0
    momentum: MomentumParams = MomentumParams()
    presaccadic: PresaccadicParams = PresaccadicParams()
    deadtime: DeadTimeParams = DeadTimeParams()

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if not 0 <= self.u_min < 1 or not 0 <= self.f_min < 1:
            raise ValueError("u_min and f_min must lie in [0, 1)")
        if self.sigma_s_dva <= 0:
            raise ValueError("sigma_s_dva must be positive")

    @property
    def effective_threshold(self) -> float:
        """Decision threshold in use (lowered when dead time is enabled)."""
        return self.deadtime.threshold if self.deadtime.enabled else self.threshold


@dataclass
class SaccadeInFlight:
    target_id: int
    landing: tuple[float, float]
    launch: tuple[float, float]
    start_t_ms: float
    end_t_ms: float
    amplitude_dva: float
    angle_deg: float


@dataclass
class DecisionState:
    """Accumulated evidence and gaze bookkeeping between frames."""

    evidence: dict[int, float] = field(default_factory=dict)
    gaze: tuple[float, float] = (0.0, 0.0)
    foveated_id: int | None = None
    prev_saccade_angle: float | None = None
    in_flight: SaccadeInFlight | None = None
    dead_until_ms: float | None = None


@dataclass(frozen=True)
class Decision:
    target_id: int
    crossing_fraction: float


def sensitivity_map(
    gaze: tuple[float, float],
    foveated_mask: np.ndarray,
    params: DecisionParams,
    spec: VideoSpec,
) -> ScalarField:
    """Peak-normalized gaussian of eccentricity, uniform 1 on the foveated object."""
    sigma_px = params.sigma_s_dva / spec.dva_per_px
    yy, xx = np.mgrid[0 : spec.height_px, 0 : spec.width_px]
    g = np.exp(-((xx - gaze[0]) ** 2 + (yy - gaze[1]) ** 2) / (2 * sigma_px**2))
    return np.where(foveated_mask, 1.0, g)


def rescale_feature(feature: ScalarField, f_min: float) -> ScalarField:
    """Linearly map a [0, 1] feature map onto [f_min, 1]."""
    return f_min + (1.0 - f_min) * feature


def rescale_uncertainty(
    entropy: ScalarField, u_min: float, blur_sigma_px: float
) -> ScalarField:
    """Blur the uncertainty so boundary ambiguity spreads onto both sides, then rescale."""
    blurred = ndimage.gaussian_filter(entropy, sigma=blur_sigma_px) if blur_sigma_px > 0 else entropy
    return u_min + (1.0 - u_min) * np.clip(blurred, 0.0, 1.0)


def evidence_map(s: ScalarField, f_prime: ScalarField, u_prime: ScalarField) -> ScalarField:
    if not s.shape == f_prime.shape == u_prime.shape:
        raise ValueError("evidence factors must share dimensions")
    return s * f_prime * u_prime


def drift_rates(
    evidence: ScalarField, labelmap: LabelMap, spec: VideoSpec
) -> dict[int, float]:
    """Per-segment drift: mean evidence scaled by max(1, log2 area_dva2).

    Every segment of the map, including background regions, is a
    candidate target.
    """
    ids, inverse = np.unique(labelmap.ravel(), return_inverse=True)
    counts = np.bincount(inverse)
    sums = np.bincount(inverse, weights=evidence.ravel())
    rates = {}
    for i, obj in enumerate(ids):
        area_dva2 = counts[i] * spec.dva_per_px**2
        mean_e = sums[i] / counts[i]
        rates[int(obj)] = float(mean_e * max(1.0, math.log2(area_dva2)))
    return rates


def ddm_step(
    evidence_vars: dict[int, float],
    rates: dict[int, float],
    params: DecisionParams,
    nu: float,
    rng: np.random.Generator,
) -> tuple[dict[int, float], Decision | None]:
    """Advance every decision variable by one frame.

    One independent standard-normal draw per object, in ascending id
    order (skipped entirely when the noise level is zero, so that
    noise-free runs consume randomness only for landing positions).
    Variables are clamped at zero from below. If any variable reaches
    the threshold, the winner is the earliest interpolated crossing,
    ties broken by larger final value then smaller id; on a decision all
    variables reset to zero.
    """
    if nu == 0.0:
        return dict(evidence_vars), None
    theta = params.effective_threshold
    ids = sorted(rates)
    noise = (
        rng.standard_normal(len(ids)) if params.noise > 0 else np.zeros(len(ids))
    )
    new_vars: dict[int, float] = {}
    crossings: list[tuple[float, float, int]] = []
    for eps, obj in zip(noise, ids):
        v_prev = evidence_vars.get(obj, 0.0)
        v_new = max(0.0, v_prev + nu * (rates[obj] + params.noise * float(eps)))
        new_vars[obj] = v_new
        if v_new >= theta:
            fraction = (theta - v_prev) / (v_new - v_prev)
            crossings.append((fraction, -v_new, obj))
    if not crossings:
        return new_vars, None
    fraction, neg_v, obj = min(crossings)
    return {obj_id: 0.0 for obj_id in new_vars}, Decision(obj, fraction)


def select_landing(
    target_id: int,
    labelmap: LabelMap,
    f_prime: ScalarField,
    sensitivity: ScalarField,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Sample the landing pixel within the target, weighted by F' * S.

    Returns pixel-centre coordinates; falls back to a uniform draw over
    the segment when all weights vanish.
    """
    ys, xs = np.nonzero(labelmap == target_id)
    if len(ys) == 0:
        raise ValueError(f"target segment {target_id} is empty")
    weights = f_prime[ys, xs] * sensitivity[ys, xs]
    total = weights.sum()
    if total <= 0:
        idx = int(rng.integers(len(ys)))
    else:
        idx = int(rng.choice(len(ys), p=weights / total))
    return float(xs[idx]) + 0.5, float(ys[idx]) + 0.5


def saccade_duration(amplitude_dva: float) -> float:
    """Saccade duration in ms, linear in amplitude: 2.7 ms/dva + 23 ms offset."""
    return 2.7 * amplitude_dva + 23.0


def pursue(
    gaze: tuple[float, float],
    flow_dx: np.ndarray,
    flow_dy: np.ndarray,
    fraction: float,
    spec: VideoSpec,
) -> tuple[float, float]:
    """Move the gaze with the optic flow sampled (bilinearly) at its position.

    ``fraction`` scales the per-frame displacement for partial-frame
    intervals; the result is clamped to the frame.
    """
    dx = _bilinear_at(flow_dx, gaze[0], gaze[1]) * fraction
    dy = _bilinear_at(flow_dy, gaze[0], gaze[1]) * fraction
    x = min(max(gaze[0] + dx, 0.0), spec.width_px - 1e-6)
    y = min(max(gaze[1] + dy, 0.0), spec.height_px - 1e-6)
    return x, y


def _bilinear_at(arr: np.ndarray, x: float, y: float) -> float:
    h, w = arr.shape
    x = min(max(x, 0.0), w - 1.0)
    y = min(max(y, 0.0), h - 1.0)
    x0, y0 = int(x), int(y)
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    fx, fy = x - x0, y - y0
    top = arr[y0, x0] * (1 - fx) + arr[y0, x1] * fx
    bot = arr[y1, x0] * (1 - fx) + arr[y1, x1] * fx
    return float(top * (1 - fy) + bot * fy)


def momentum_sensitivity(
    sensitivity: ScalarField,
    gaze: tuple[float, float],
    prev_saccade_angle: float | None,
    params: MomentumParams,
) -> ScalarField:
    """Boost sensitivity toward the previous saccade direction.

    The factor is ``peak`` exactly forward and falls off linearly to
    ``floor`` at ``half_width_deg`` away, staying there beyond.
    """
    if prev_saccade_angle is None:
        return sensitivity
    h, w = sensitivity.shape
    yy, xx = np.mgrid[0:h, 0:w]
    # screen y grows downward; flip for mathematical angles
    angles = np.degrees(np.arctan2(-(yy - gaze[1]), xx - gaze[0]))
    offset = np.abs((angles - prev_saccade_angle + 180.0) % 360.0 - 180.0)
    ramp = np.minimum(offset, params.half_width_deg) / params.half_width_deg
    factor = params.peak - (params.peak - params.floor) * ramp
    return sensitivity * factor


def presaccadic_sensitivity(
    sensitivity: ScalarField,
    evidence_vars: dict[int, float],
    theta: float,
    labelmap: LabelMap,
    params: PresaccadicParams,
    prompt_masks: dict[int, np.ndarray] | None = None,
) -> ScalarField:
    """Set sensitivity to 1 on objects whose evidence passed the trigger.

    ``prompt_masks`` maps object ids to their prompted masks; objects
    without one fall back to their own segment in the labelmap.
    """
    out = sensitivity
    for obj, value in sorted(evidence_vars.items()):
        if value <= params.trigger_fraction * theta:
            continue
        mask = None
        if prompt_masks is not None:
            mask = prompt_masks.get(obj)
        if mask is None:
            mask = labelmap == obj
        if mask.any():
            out = np.where(mask, 1.0, out)
    return out


def representative_point(mask: np.ndarray) -> tuple[float, float]:
    """A point inside the mask: its centroid, or the mask pixel nearest to it."""
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        raise ValueError("empty mask has no representative point")
    cy, cx = ys.mean(), xs.mean()
    iy, ix = int(round(cy)), int(round(cx))
    if 0 <= iy < mask.shape[0] and 0 <= ix < mask.shape[1] and mask[iy, ix]:
        return float(ix), float(iy)
    d2 = (ys - cy) ** 2 + (xs - cx) ** 2
    k = int(np.argmin(d2))
    return float(xs[k]), float(ys[k])
