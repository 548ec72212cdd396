"""One scanpath realization: the gaze-coupled filter/decision frame loop.

Per frame the segmentation filter consumes the cues and the current
gaze (through the foveated prompt), the decision stage turns the
resulting segmentation and uncertainty into per-segment drift rates,
and the DDM race may fire a saccade at an exact within-frame crossing
time. Saccades launch immediately (or after the optional dead time),
keep the gaze at the launch point while in flight, and land at a
probabilistically selected pixel of the target segment. A saccade whose
flight would end after the video is suppressed and the foveation simply
continues, so the recorded events always tile the video duration.

Randomness is drawn in a fixed documented order per frame: segment
insertion choices, the resampling offset, then (only when the DDM noise
level is positive) one normal draw per candidate segment, then the
landing draw of a decision. Runs are byte-reproducible for a given
(config, scene, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .core import (
    EventKind,
    GazeEvent,
    GazePoint,
    ScanpathRecord,
    VideoSpec,
    make_rng,
    px_to_dva,
    saccade_angle,
)
from .cues import (
    CueBundle,
    FilePromptSource,
    Scene,
    downsample_cues,
    lowlevel_prompt_mask,
    oracle_prompt_mask,
)
from .decision import (
    DecisionParams,
    ddm_step,
    drift_rates,
    evidence_map,
    momentum_sensitivity,
    presaccadic_sensitivity,
    pursue,
    representative_point,
    rescale_feature,
    rescale_uncertainty,
    saccade_duration,
    select_landing,
    sensitivity_map,
)
from .raster import resize_nearest, scaled_shape
from .segfilter import (
    CueMeasurement,
    SegmentationFilter,
    foveated_measurement,
)

_TIME_EPS = 1e-9


@dataclass
class FrameDiagnostics:
    """Wall-time split of one frame, for the time-accounting invariant."""

    foveation_ms: float = 0.0
    saccade_ms: float = 0.0
    dead_ms: float = 0.0

    @property
    def nu(self) -> float:
        return self.foveation_ms / (self.foveation_ms + self.saccade_ms + self.dead_ms)


@dataclass
class PreparedScene:
    """Scene plus cue-resolution bundles, reusable across seeds."""

    scene: Scene
    cue_bundles: list[CueBundle]
    prompt_source: FilePromptSource | None = None

    @property
    def spec(self) -> VideoSpec:
        return self.scene.spec


def prepare_scene(
    scene: Scene, cfg: RunConfig, prompt_source: FilePromptSource | None = None
) -> PreparedScene:
    """Downsample all cue bundles to cue resolution once."""
    bundles = [downsample_cues(b, cfg.r_scale_other) for b in scene.cues]
    return PreparedScene(scene=scene, cue_bundles=bundles, prompt_source=prompt_source)


class _Pending:
    """Decision accepted but saccade not launched yet (dead time)."""

    def __init__(self, target_id: int, landing: tuple[float, float]):
        self.target_id = target_id
        self.landing = landing


class _Flight:
    def __init__(self, target_id, landing, end_t_ms, amplitude_dva, angle_deg):
        self.target_id = target_id
        self.landing = landing
        self.end_t_ms = end_t_ms
        self.amplitude_dva = amplitude_dva
        self.angle_deg = angle_deg


class _Simulator:
    def __init__(
        self,
        prepared: PreparedScene,
        cfg: RunConfig,
        seed: int,
        dump_dir: Path | None = None,
    ):
        self.prepared = prepared
        self.scene = prepared.scene
        self.spec = prepared.spec
        self.cfg = cfg
        self.params: DecisionParams = cfg.decision_params()
        self.fcfg = cfg.filter_config()
        self.seed = seed
        self.rng = make_rng(seed)
        self.frame_ms = self.spec.frame_ms
        self.duration_ms = self.spec.duration_ms
        self.cue_shape = prepared.cue_bundles[0].shape
        self.dump_dir = dump_dir

        self.filter = SegmentationFilter(self.fcfg, self.spec.shape)
        self.events: list[GazeEvent] = []
        self.trace: list[GazePoint] = []
        self.diagnostics: list[FrameDiagnostics] = []

        self.evidence: dict[int, float] = {}
        self.prev_saccade_angle: float | None = None
        self.flight: _Flight | None = None
        self.pending: _Pending | None = None
        self.dead_until_ms: float | None = None
        self.foveated_id: int | None = None
        self.fov_start: GazePoint | None = None
        self.fov_start_model_id: int | None = None

        # per-frame context, refreshed at the top of each frame
        self.labelmap = None
        self.f_prime = None
        self.sensitivity = None
        self.flow_full = None
        self.seg_state = None

    # ------------------------------------------------------------------
    # prompts

    def _prompt_mask(self, frame: int, x: float, y: float) -> np.ndarray | None:
        mode = self.cfg.prompt
        if mode == "none":
            return None
        if mode == "semantic-oracle":
            return oracle_prompt_mask(self.scene.gt.labels[frame], x, y)
        if mode == "lowlevel":
            return lowlevel_prompt_mask(self.scene.cues[frame].appearance, x, y)
        if mode == "file":
            if self.prepared.prompt_source is None:
                raise ValueError("prompt = file requires a scene with stored prompt masks")
            return self.prepared.prompt_source.lookup(frame, x, y)
        raise ValueError(f"unknown prompt mode {mode!r}")

    # ------------------------------------------------------------------
    # event helpers

    def _point(self, x: float, y: float, t_ms: float) -> GazePoint:
        frame = min(int(t_ms / self.frame_ms + _TIME_EPS), self.spec.n_frames)
        return GazePoint(x, y, frame, t_ms)

    def _launch(self, t_ms: float):
        """Close the foveation and start the saccade, unless it cannot finish."""
        pend = self.pending
        self.pending = None
        self.dead_until_ms = None
        gx, gy = self.gaze
        lx, ly = pend.landing
        amp = px_to_dva(math.hypot(lx - gx, ly - gy), self.spec)
        tau = saccade_duration(amp)
        end_t = t_ms + tau
        if end_t > self.duration_ms + _TIME_EPS:
            return  # suppressed: too close to the end of the video
        start_pt = self._point(gx, gy, t_ms)
        end_pt = self._point(lx, ly, end_t)
        angle = 0.0 if (lx == gx and ly == gy) else saccade_angle(start_pt, end_pt)
        self.events.append(
            GazeEvent(
                kind=EventKind.FOVEATION,
                start=self.fov_start,
                end=start_pt,
                target_model_id=self.fov_start_model_id,
            )
        )
        self.events.append(
            GazeEvent(
                kind=EventKind.SACCADE,
                start=start_pt,
                end=end_pt,
                target_model_id=pend.target_id,
                amplitude_dva=amp,
                angle_deg=angle,
            )
        )
        self.prev_saccade_angle = angle
        self.flight = _Flight(pend.target_id, (lx, ly), end_t, amp, angle)

    def _land(self, t_ms: float):
        fl = self.flight
        self.flight = None
        self.gaze = fl.landing
        self.fov_start = self._point(fl.landing[0], fl.landing[1], t_ms)
        self.foveated_id = self._label_at_gaze()
        self.fov_start_model_id = self.foveated_id

    def _label_at_gaze(self) -> int:
        x, y = self.gaze
        ix = min(max(int(x), 0), self.spec.width_px - 1)
        iy = min(max(int(y), 0), self.spec.height_px - 1)
        return int(self.labelmap[iy, ix])

    # ------------------------------------------------------------------
    # timeline

    def _pursue(self, dt_ms: float):
        if dt_ms <= 0:
            return
        self.gaze = pursue(
            self.gaze,
            self.flow_full.dx,
            self.flow_full.dy,
            dt_ms / self.frame_ms,
            self.spec,
        )

    def _consume_busy(self, t: float, frame_end: float, diag: FrameDiagnostics) -> float:
        """Advance through dead time and saccade flight until foveating or frame end."""
        while t < frame_end - _TIME_EPS:
            if self.dead_until_ms is not None:
                stop = min(self.dead_until_ms, frame_end)
                self._pursue(stop - t)
                diag.dead_ms += stop - t
                t = stop
                if stop < self.dead_until_ms - _TIME_EPS:
                    return t  # frame ended inside the dead interval
                self._launch(t)
                continue
            if self.flight is not None:
                stop = min(self.flight.end_t_ms, frame_end)
                diag.saccade_ms += stop - t
                landed = self.flight.end_t_ms <= frame_end + _TIME_EPS
                t = stop
                if landed:
                    self._land(t)
                    return t
                return t
            return t
        return t

    # ------------------------------------------------------------------
    # per-frame processing

    def _filter_step(self, frame: int):
        bundle_cue = self.prepared.cue_bundles[frame]
        fov_mask_full = None
        # the prompt is tied to foveation: no prompt while the eye is in flight
        if self.flight is None:
            fov_mask_full = self._prompt_mask(frame, *self.gaze)
        fov_mask_cue = (
            resize_nearest(fov_mask_full, self.cue_shape) if fov_mask_full is not None else None
        )

        wcfg = self.fcfg.weights
        global_maps = [bundle_cue.global_cue(name) for name in self.cfg.global_cues]
        measurements = [
            CueMeasurement(name=name, labels=bundle_cue.global_cue(name), alpha=wcfg.alpha(name))
            for name in self.cfg.global_cues
        ]
        if fov_mask_cue is not None and fov_mask_cue.any():
            measurements.append(
                foveated_measurement(
                    fov_mask_cue, wcfg.alpha_foveated, self.fcfg.foveated_window_frac
                )
            )

        if frame == 0:
            self.belief = self.filter.initialize(global_maps)
            flow_prev = None
        else:
            flow_prev = self.prepared.cue_bundles[frame - 1].flow
        self.belief, self.seg_state = self.filter.step(
            self.belief,
            measurements,
            global_maps,
            fov_mask_cue,
            flow_prev,
            self.rng,
            frame,
        )

    def _decision_maps(self, frame: int):
        full = self.scene.cues[frame]
        self.flow_full = full.flow
        if self.cfg.gt_objects:
            self.labelmap = self.scene.gt.labels[frame]
        else:
            self.labelmap = self.seg_state.labelmap

        if self.foveated_id is None or self.flight is None:
            self.foveated_id = self._label_at_gaze()
            if self.fov_start_model_id is None:
                self.fov_start_model_id = self.foveated_id

        params = self.params
        if self.cfg.use_uncertainty:
            blur_px = params.blur_sigma_dva / self.spec.dva_per_px
            u_prime = rescale_uncertainty(self.seg_state.uncertainty, params.u_min, blur_px)
        else:
            u_prime = np.full(self.spec.shape, params.u_min)
        self.f_prime = rescale_feature(full.saliency, params.f_min)

        s = sensitivity_map(self.gaze, self.labelmap == self.foveated_id, params, self.spec)
        if params.presaccadic.enabled:
            masks = self._presaccadic_masks(frame)
            s = presaccadic_sensitivity(
                s,
                self.evidence,
                params.effective_threshold,
                self.labelmap,
                params.presaccadic,
                masks,
            )
        if params.momentum.enabled:
            s = momentum_sensitivity(s, self.gaze, self.prev_saccade_angle, params.momentum)
        self.sensitivity = s
        self.rates = drift_rates(evidence_map(s, self.f_prime, u_prime), self.labelmap, self.spec)
        self.u_prime = u_prime
        # decision variables follow the live id set
        self.evidence = {obj: self.evidence.get(obj, 0.0) for obj in self.rates}

    def _presaccadic_masks(self, frame: int) -> dict[int, np.ndarray] | None:
        if self.cfg.prompt == "none":
            return None
        trigger = self.params.presaccadic.trigger_fraction * self.params.effective_threshold
        masks: dict[int, np.ndarray] = {}
        for obj, value in self.evidence.items():
            if value <= trigger:
                continue
            seg_mask = self.labelmap == obj
            if not seg_mask.any():
                continue
            x, y = representative_point(seg_mask)
            mask = self._prompt_mask(frame, x, y)
            if mask is not None:
                masks[obj] = mask
        return masks

    def _advance_frame(self, frame: int):
        t0 = frame * self.frame_ms
        t1 = t0 + self.frame_ms
        diag = FrameDiagnostics()
        self.trace.append(self._point(self.gaze[0], self.gaze[1], t0))

        self._filter_step(frame)
        self._decision_maps(frame)

        t = self._consume_busy(t0, t1, diag)
        if t >= t1 - _TIME_EPS:
            self.diagnostics.append(diag)
            return
        # foveating stretch [t, t1): single DDM update at frame resolution
        stretch = t1 - t
        nu = stretch / self.frame_ms
        self.evidence, decision = ddm_step(self.evidence, self.rates, self.params, nu, self.rng)
        if decision is None:
            self._pursue(stretch)
            diag.foveation_ms += stretch
            self.diagnostics.append(diag)
            return

        t_cross = t + decision.crossing_fraction * stretch
        self._pursue(t_cross - t)
        diag.foveation_ms += t_cross - t
        landing = select_landing(
            decision.target_id, self.labelmap, self.f_prime, self.sensitivity, self.rng
        )
        self.pending = _Pending(decision.target_id, landing)
        if self.params.deadtime.enabled:
            self.dead_until_ms = t_cross + self.params.deadtime.duration_ms
        else:
            self.dead_until_ms = t_cross  # launch immediately
        t = self._consume_busy(t_cross, t1, diag)
        if t < t1 - _TIME_EPS and self.flight is None and self.dead_until_ms is None:
            # post-landing (or suppressed-saccade) remainder: foveation time
            # that accumulates no evidence this frame
            self._pursue(t1 - t)
            diag.foveation_ms += t1 - t
        self.diagnostics.append(diag)

    def _maybe_dump(self, frame: int):
        if self.dump_dir is None:
            return
        from .cues.manifest import LABEL_DTYPE, SCALAR_DTYPE, _write_grid

        self.dump_dir.mkdir(parents=True, exist_ok=True)
        state = self.seg_state
        _write_grid(self.dump_dir / f"pb_{frame:04d}.bin", state.boundary_likelihood, SCALAR_DTYPE)
        _write_grid(
            self.dump_dir / f"uncertainty_{frame:04d}.bin", state.uncertainty, SCALAR_DTYPE
        )
        _write_grid(self.dump_dir / f"labelmap_{frame:04d}.bin", state.labelmap, LABEL_DTYPE)

    def run(self) -> ScanpathRecord:
        spec = self.spec
        gx = self.rng.uniform(0.0, spec.width_px)
        gy = self.rng.uniform(0.0, spec.height_px)
        self.gaze = (gx, gy)
        self.fov_start = GazePoint(gx, gy, 0, 0.0)

        for frame in range(spec.n_frames):
            self._advance_frame(frame)
            self._maybe_dump(frame)

        end_pt = self._point(self.gaze[0], self.gaze[1], self.duration_ms)
        self.events.append(
            GazeEvent(
                kind=EventKind.FOVEATION,
                start=self.fov_start,
                end=end_pt,
                target_model_id=self.fov_start_model_id,
            )
        )
        return ScanpathRecord(
            video_id=self.scene.video_id,
            seed=self.seed,
            events=self.events,
            trace=self.trace,
        )


def simulate_scanpath(
    scene: Scene | PreparedScene,
    cfg: RunConfig,
    seed: int,
    dump_dir: str | Path | None = None,
) -> ScanpathRecord:
    """Simulate one realization; see module docstring for the frame protocol."""
    record, _ = simulate_scanpath_detailed(scene, cfg, seed, dump_dir=dump_dir)
    return record


def simulate_scanpath_detailed(
    scene: Scene | PreparedScene,
    cfg: RunConfig,
    seed: int,
    dump_dir: str | Path | None = None,
) -> tuple[ScanpathRecord, list[FrameDiagnostics]]:
    """Like simulate_scanpath but also returns per-frame time diagnostics."""
    prepared = scene if isinstance(scene, PreparedScene) else prepare_scene(scene, cfg)
    sim = _Simulator(prepared, cfg, seed, dump_dir=Path(dump_dir) if dump_dir else None)
    record = sim.run()
    return record, sim.diagnostics
