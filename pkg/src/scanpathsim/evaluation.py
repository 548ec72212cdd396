"""Scanpath statistics: KS distances, foveation categories, temporal IOR,
angle histograms, dwell-time regression, detection agreement.

All functions are pure, read-only analytics over scanpath records (and
ground truth where needed) and work identically for simulated and
reference records. The first foveation of each record (which has no
preceding saccade) is included in duration statistics; outputs that pool
durations carry a metadata flag saying so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    EventKind,
    FoveationCategory,
    GazeEvent,
    ScanpathRecord,
    VideoSpec,
    relative_angle,
)
from .cues import GroundTruth

FIRST_FOVEATION_INCLUDED = True

IOR_N_BINS = 30
IOR_BIN_DEG = 360.0 / IOR_N_BINS
IOR_SMOOTH_BINS = 5


def ks_statistic(sample_a, sample_b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic: sup |ECDF_a - ECDF_b|."""
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


# ----------------------------------------------------------------------
# foveation categories


def _gt_target_at(
    gt_frame: np.ndarray, x: float, y: float, tol_px: float
) -> int | None:
    """Ground-truth object at (x, y), or the nearest one within tol_px."""
    h, w = gt_frame.shape
    ix = min(max(int(x), 0), w - 1)
    iy = min(max(int(y), 0), h - 1)
    label = int(gt_frame[iy, ix])
    if label != 0:
        return label
    if tol_px <= 0:
        return None
    r = int(math.ceil(tol_px))
    y0, y1 = max(0, iy - r), min(h, iy + r + 1)
    x0, x1 = max(0, ix - r), min(w, ix + r + 1)
    window = gt_frame[y0:y1, x0:x1]
    ys, xs = np.nonzero(window)
    if len(ys) == 0:
        return None
    d2 = (ys + y0 - y) ** 2 + (xs + x0 - x) ** 2
    k = int(np.argmin(d2))
    if d2[k] <= tol_px**2:
        return int(window[ys[k], xs[k]])
    return None


def _foveation_gt_target(
    event: GazeEvent,
    record: ScanpathRecord,
    gt: GroundTruth,
    tol_px: float,
) -> int | None:
    """Majority ground-truth object over the foveation's per-frame samples."""
    samples = [
        p for p in record.trace if event.start.t_ms <= p.t_ms < event.end.t_ms
    ]
    if not samples:
        samples = [event.start]
    votes: dict[int | None, int] = {}
    n_frames = len(gt.labels)
    for p in samples:
        frame = min(max(p.frame, 0), n_frames - 1)
        target = _gt_target_at(gt.labels[frame], p.x_px, p.y_px, tol_px)
        votes[target] = votes.get(target, 0) + 1
    best, count = max(votes.items(), key=lambda kv: (kv[1], -(kv[0] or 0)))
    if best is not None and count * 2 > len(samples):
        return best
    return None


def classify_foveations(
    record: ScanpathRecord,
    gt: GroundTruth,
    spec: VideoSpec,
    tol_dva: float = 0.5,
) -> ScanpathRecord:
    """Assign a ground-truth target and a category to every foveation.

    Detection: the target was never foveated before in this record.
    Inspection: same target as the immediately preceding foveation.
    Return: seen before, but not in the preceding foveation.
    Background: no ground-truth object owns the majority of samples.
    Categories are written in place (and the record is returned).
    """
    tol_px = tol_dva / spec.dva_per_px
    seen: set[int] = set()
    prev_target: int | None = None
    for event in record.events:
        if event.kind is not EventKind.FOVEATION:
            continue
        target = _foveation_gt_target(event, record, gt, tol_px)
        event.target_gt_id = target
        if target is None:
            event.category = FoveationCategory.BACKGROUND
        elif target not in seen:
            event.category = FoveationCategory.DETECTION
        elif target == prev_target:
            event.category = FoveationCategory.INSPECTION
        else:
            event.category = FoveationCategory.RETURN
        if target is not None:
            seen.add(target)
        prev_target = target
    return record


@dataclass
class FoveationCategorySeries:
    """Per-frame fractions of foveation categories across a record set."""

    frames: np.ndarray
    fractions: dict[FoveationCategory, np.ndarray]
    counts: np.ndarray


def _active_foveation(record: ScanpathRecord, t_ms: float) -> GazeEvent | None:
    for event in record.events:
        if event.start.t_ms <= t_ms < event.end.t_ms:
            return event if event.kind is EventKind.FOVEATION else None
    return None


def category_timecourse(
    records: list[ScanpathRecord], spec: VideoSpec
) -> FoveationCategorySeries:
    """Fraction of records in each category per frame (foveating records only)."""
    n = spec.n_frames
    cats = list(FoveationCategory)
    counts = {c: np.zeros(n) for c in cats}
    totals = np.zeros(n)
    for record in records:
        for f in range(n):
            t = (f + 0.5) * spec.frame_ms
            event = _active_foveation(record, t)
            if event is None or event.category is None:
                continue
            counts[event.category][f] += 1
            totals[f] += 1
    fractions = {
        c: np.where(totals > 0, counts[c] / np.maximum(totals, 1), 0.0) for c in cats
    }
    return FoveationCategorySeries(np.arange(n), fractions, totals)


def category_time_ratios(
    records: list[ScanpathRecord],
) -> dict[FoveationCategory, float]:
    """Ratio of total foveation time spent in each category."""
    total = 0.0
    per_cat = {c: 0.0 for c in FoveationCategory}
    for record in records:
        for event in record.foveations():
            if event.category is None:
                continue
            per_cat[event.category] += event.duration_ms
            total += event.duration_ms
    if total == 0:
        return {c: 0.0 for c in FoveationCategory}
    return {c: v / total for c, v in per_cat.items()}


# ----------------------------------------------------------------------
# temporal inhibition of return


@dataclass
class IorCurve:
    """Median preceding-foveation duration per relative-angle bin."""

    bin_centers_deg: np.ndarray
    median_ms: np.ndarray  # NaN where a bin is empty
    smoothed_ms: np.ndarray
    n_per_bin: np.ndarray


def relative_angle_bin(angle_deg: float, n_bins: int = IOR_N_BINS) -> int:
    """Bin index for angles in (-180, 180]; bins tile the circle."""
    width = 360.0 / n_bins
    idx = int(math.ceil((angle_deg + 180.0) / width)) - 1
    return min(max(idx, 0), n_bins - 1)


def angle_duration_pairs(records: list[ScanpathRecord]) -> list[tuple[float, float]]:
    """(relative angle, preceding foveation duration) for saccades with a predecessor."""
    pairs = []
    for record in records:
        prev_saccade: GazeEvent | None = None
        prev_foveation: GazeEvent | None = None
        for event in record.events:
            if event.kind is EventKind.FOVEATION:
                prev_foveation = event
                continue
            if prev_saccade is not None and prev_foveation is not None:
                rel = relative_angle(prev_saccade.angle_deg, event.angle_deg)
                pairs.append((rel, prev_foveation.duration_ms))
            prev_saccade = event
    return pairs


def circular_moving_average(values: np.ndarray, width: int = IOR_SMOOTH_BINS) -> np.ndarray:
    """Centred circular moving average ignoring NaN bins."""
    n = len(values)
    half = width // 2
    out = np.full(n, np.nan)
    for i in range(n):
        window = values[(np.arange(i - half, i + half + 1)) % n]
        good = ~np.isnan(window)
        if good.any():
            out[i] = float(np.mean(window[good]))
    return out


def _curve_from_pairs(pairs: list[tuple[float, float]], smooth: bool) -> IorCurve:
    bins: list[list[float]] = [[] for _ in range(IOR_N_BINS)]
    for rel, duration in pairs:
        bins[relative_angle_bin(rel)].append(duration)
    medians = np.array([np.median(b) if b else np.nan for b in bins])
    centers = -180.0 + IOR_BIN_DEG * (np.arange(IOR_N_BINS) + 0.5)
    smoothed = circular_moving_average(medians) if smooth else medians.copy()
    return IorCurve(centers, medians, smoothed, np.array([len(b) for b in bins]))


def temporal_ior_curve(records: list[ScanpathRecord], smooth: bool = True) -> IorCurve:
    return _curve_from_pairs(angle_duration_pairs(records), smooth)


def ior_by_timebin(
    records: list[ScanpathRecord], split_frame: int, spec: VideoSpec, smooth: bool = True
) -> tuple[IorCurve, IorCurve]:
    """IOR curves restricted to foveations ending before/after the split frame."""
    split_ms = split_frame * spec.frame_ms
    first_pairs: list[tuple[float, float]] = []
    second_pairs: list[tuple[float, float]] = []
    for record in records:
        prev_saccade = None
        prev_foveation = None
        for event in record.events:
            if event.kind is EventKind.FOVEATION:
                prev_foveation = event
                continue
            if prev_saccade is not None and prev_foveation is not None:
                rel = relative_angle(prev_saccade.angle_deg, event.angle_deg)
                pair = (rel, prev_foveation.duration_ms)
                if prev_foveation.end.t_ms < split_ms:
                    first_pairs.append(pair)
                else:
                    second_pairs.append(pair)
            prev_saccade = event
    return _curve_from_pairs(first_pairs, smooth), _curve_from_pairs(second_pairs, smooth)


def relative_angle_histogram(
    records: list[ScanpathRecord], n_bins: int = IOR_N_BINS
) -> tuple[np.ndarray, np.ndarray]:
    """(bin centers, counts) of relative saccade angles over (-180, 180]."""
    counts = np.zeros(n_bins)
    width = 360.0 / n_bins
    for rel, _ in angle_duration_pairs(records):
        counts[relative_angle_bin(rel, n_bins)] += 1
    centers = -180.0 + width * (np.arange(n_bins) + 0.5)
    return centers, counts


# ----------------------------------------------------------------------
# dwell times and regression


def dwell_times(
    records: list[ScanpathRecord],
    gt: GroundTruth,
    spec: VideoSpec,
    window_frames: int,
) -> dict[int, float]:
    """Mean (across records) foveated ms per ground-truth object within a window."""
    window_ms = window_frames * spec.frame_ms
    objects = sorted(gt.first_present)
    totals = {obj: 0.0 for obj in objects}
    for record in records:
        for event in record.foveations():
            if event.target_gt_id is None:
                continue
            overlap = min(event.end.t_ms, window_ms) - max(event.start.t_ms, 0.0)
            if overlap > 0 and event.target_gt_id in totals:
                totals[event.target_gt_id] += overlap
    n = max(len(records), 1)
    return {obj: v / n for obj, v in totals.items()}


@dataclass
class RegressionResult:
    slope: float
    intercept: float
    r2: float
    n_points: int


def ols_regression(x, y) -> RegressionResult:
    """Ordinary least squares y = m x + y0 with the coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("regression needs at least two points")
    mx, my = x.mean(), y.mean()
    sxx = np.sum((x - mx) ** 2)
    if sxx == 0:
        raise ValueError("regression over a degenerate (constant) predictor")
    slope = float(np.sum((x - mx) * (y - my)) / sxx)
    intercept = float(my - slope * mx)
    residuals = y - (slope * x + intercept)
    sst = np.sum((y - my) ** 2)
    r2 = float(1.0 - np.sum(residuals**2) / sst) if sst > 0 else 0.0
    return RegressionResult(slope, intercept, r2, int(x.size))


def dwell_regression(
    records_model: list[ScanpathRecord],
    records_reference: list[ScanpathRecord],
    gt: GroundTruth,
    spec: VideoSpec,
    windows: tuple[int, ...] = (30, 90),
) -> dict[int, RegressionResult]:
    """Per-window OLS of model dwell against reference dwell, per object."""
    out = {}
    for window in windows:
        model = dwell_times(records_model, gt, spec, window)
        reference = dwell_times(records_reference, gt, spec, window)
        objects = sorted(set(model) & set(reference))
        x = [reference[o] for o in objects]
        y = [model[o] for o in objects]
        out[window] = ols_regression(x, y)
    return out


def pooled_dwell_points(
    per_scene: list[tuple[list[ScanpathRecord], list[ScanpathRecord], GroundTruth, VideoSpec]],
    window_frames: int,
) -> tuple[list[float], list[float]]:
    """(reference, model) dwell pairs pooled over scenes for one window."""
    xs, ys = [], []
    for records_model, records_reference, gt, spec in per_scene:
        model = dwell_times(records_model, gt, spec, window_frames)
        reference = dwell_times(records_reference, gt, spec, window_frames)
        for obj in sorted(set(model) & set(reference)):
            xs.append(reference[obj])
            ys.append(model[obj])
    return xs, ys


# ----------------------------------------------------------------------
# first-detection agreement


def _majority_first_detection(records: list[ScanpathRecord]) -> int | None:
    votes: dict[int, int] = {}
    for record in records:
        for event in record.foveations():
            if event.category is FoveationCategory.DETECTION:
                votes[event.target_gt_id] = votes.get(event.target_gt_id, 0) + 1
                break
    if not votes:
        return None
    return max(sorted(votes), key=lambda obj: votes[obj])


def first_detection_agreement(
    per_scene: list[tuple[list[ScanpathRecord], list[ScanpathRecord], GroundTruth]],
) -> dict[str, float]:
    """Fraction of scenes whose majority first-detected object agrees.

    The chance base rate is the mean over scenes of 1 / (number of
    ground-truth objects present in the first frame).
    """
    agreements = []
    base_rates = []
    for records_model, records_reference, gt in per_scene:
        n0 = sum(1 for obj, f in gt.first_present.items() if f == 0)
        if n0 > 0:
            base_rates.append(1.0 / n0)
        model_first = _majority_first_detection(records_model)
        ref_first = _majority_first_detection(records_reference)
        if model_first is None or ref_first is None:
            agreements.append(0.0)
        else:
            agreements.append(1.0 if model_first == ref_first else 0.0)
    return {
        "fraction": float(np.mean(agreements)) if agreements else 0.0,
        "base_rate": float(np.mean(base_rates)) if base_rates else 0.0,
        "n_scenes": float(len(per_scene)),
    }


# ----------------------------------------------------------------------
# uncertainty time courses (from per-frame debug dumps)


def uncertainty_timecourse(
    uncertainty_dumps: list[list[np.ndarray]],
    gt: GroundTruth,
    u_min: float,
    blur_sigma_px: float,
) -> dict[str, object]:
    """Mean rescaled uncertainty per ground-truth object and globally.

    ``uncertainty_dumps`` holds, per realization, the per-frame
    decision-resolution entropy maps dumped during simulation. The
    per-object curves come from the first realization; the global curve
    is averaged across realizations with its standard deviation.
    """
    from .decision import rescale_uncertainty

    if not uncertainty_dumps or not uncertainty_dumps[0]:
        raise ValueError("at least one realization with one frame is required")
    n_frames = len(uncertainty_dumps[0])
    per_object: dict[int, np.ndarray] = {}
    first = [
        rescale_uncertainty(h, u_min, blur_sigma_px) for h in uncertainty_dumps[0]
    ]
    for obj in sorted(gt.first_present):
        curve = np.full(n_frames, np.nan)
        for f in range(min(n_frames, len(gt.labels))):
            mask = gt.labels[f] == obj
            if mask.any():
                curve[f] = float(first[f][mask].mean())
        per_object[obj] = curve

    global_curves = []
    for dumps in uncertainty_dumps:
        vals = [
            float(rescale_uncertainty(h, u_min, blur_sigma_px).mean()) for h in dumps
        ]
        global_curves.append(vals)
    arr = np.array(global_curves)
    return {
        "per_object": per_object,
        "global_mean": arr.mean(axis=0),
        "global_std": arr.std(axis=0),
    }


# ----------------------------------------------------------------------
# summary statistics


def summary_stats(records: list[ScanpathRecord]) -> dict[str, float]:
    """Mean/median foveation duration (ms) and saccade amplitude (dva)."""
    durations = [e.duration_ms for r in records for e in r.foveations()]
    amplitudes = [e.amplitude_dva for r in records for e in r.saccades()]
    out = {
        "n_foveations": float(len(durations)),
        "n_saccades": float(len(amplitudes)),
        "first_foveation_included": float(FIRST_FOVEATION_INCLUDED),
    }
    out["foveation_duration_mean_ms"] = float(np.mean(durations)) if durations else float("nan")
    out["foveation_duration_median_ms"] = (
        float(np.median(durations)) if durations else float("nan")
    )
    out["saccade_amplitude_mean_dva"] = float(np.mean(amplitudes)) if amplitudes else float("nan")
    out["saccade_amplitude_median_dva"] = (
        float(np.median(amplitudes)) if amplitudes else float("nan")
    )
    return out
