"""On-disk scene format: a JSON manifest plus raw per-frame binary grids.

Layout of a scene directory:

    manifest.json           format_version, video spec, stored kinds,
                            optional prompt-mask index
    {kind}_{frame:04}.bin   one file per kind per frame

Grid encodings (all row-major, C order, at full video resolution):

    label maps (appearance, motion, semantic, gt, prompt masks)
        little-endian unsigned 16-bit, height*width values
    scalar fields and flow channels (saliency, flow_dx, flow_dy)
        little-endian 32-bit float, height*width values
    rgb
        unsigned 8-bit, height*width*3 values (interleaved channels)

Missing appearance or motion cues are derived on load with the graph
segmenter (appearance from rgb, motion from flow) so that externally
computed cue sets do not have to be complete.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..core import FlowField, VideoSpec
from .graphseg import felzenszwalb_segment, motion_segment
from .prompts import FilePromptSource
from .scene import CueBundle, GroundTruth, Scene

FORMAT_VERSION = 1

LABEL_DTYPE = np.dtype("<u2")
SCALAR_DTYPE = np.dtype("<f4")
RGB_DTYPE = np.dtype("u1")


class ManifestError(Exception):
    """Raised when a scene directory is missing, malformed, or inconsistent."""


def _bin_name(kind: str, frame: int) -> str:
    return f"{kind}_{frame:04d}.bin"


def _write_grid(path: Path, arr: np.ndarray, dtype: np.dtype) -> None:
    path.write_bytes(np.ascontiguousarray(arr).astype(dtype).tobytes())


def _read_grid(path: Path, dtype: np.dtype, shape: tuple) -> np.ndarray:
    if not path.exists():
        raise ManifestError(f"missing data file {path.name}")
    raw = np.frombuffer(path.read_bytes(), dtype=dtype)
    expected = int(np.prod(shape))
    if raw.size != expected:
        raise ManifestError(
            f"dimension mismatch in {path.name}: {raw.size} values, expected {expected}"
        )
    return raw.reshape(shape).copy()


def save_scene(scene: Scene, outdir: str | Path) -> Path:
    """Write a scene to a directory in the manifest format; returns the manifest path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    kinds = ["appearance", "motion", "semantic", "saliency", "flow_dx", "flow_dy", "gt"]
    if scene.rgb is not None:
        kinds.append("rgb")
    for f in range(scene.spec.n_frames):
        bundle = scene.cues[f]
        _write_grid(outdir / _bin_name("appearance", f), bundle.appearance, LABEL_DTYPE)
        _write_grid(outdir / _bin_name("motion", f), bundle.motion, LABEL_DTYPE)
        _write_grid(outdir / _bin_name("semantic", f), bundle.semantic, LABEL_DTYPE)
        _write_grid(outdir / _bin_name("saliency", f), bundle.saliency, SCALAR_DTYPE)
        _write_grid(outdir / _bin_name("flow_dx", f), bundle.flow.dx, SCALAR_DTYPE)
        _write_grid(outdir / _bin_name("flow_dy", f), bundle.flow.dy, SCALAR_DTYPE)
        _write_grid(outdir / _bin_name("gt", f), scene.gt.labels[f], LABEL_DTYPE)
        if scene.rgb is not None:
            _write_grid(outdir / _bin_name("rgb", f), scene.rgb[f], RGB_DTYPE)
    manifest = {
        "format_version": FORMAT_VERSION,
        "video_id": scene.video_id,
        "video": {
            "width_px": scene.spec.width_px,
            "height_px": scene.spec.height_px,
            "n_frames": scene.spec.n_frames,
            "fps": scene.spec.fps,
            "dva_per_px": scene.spec.dva_per_px,
        },
        "kinds": kinds,
        "prompts": [],
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def load_cue_manifest(
    path: str | Path,
    felz_k: float = 300.0,
    felz_min_size: int = 20,
    felz_k_motion: float = 8.0,
) -> tuple[Scene, FilePromptSource | None]:
    """Load and validate a scene directory written in the manifest format.

    Returns the scene and, when the manifest indexes stored prompt masks,
    a prompt source for them.
    """
    path = Path(path)
    manifest_path = path if path.name.endswith(".json") else path / "manifest.json"
    base = manifest_path.parent
    if not manifest_path.exists():
        raise ManifestError(f"missing manifest file {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"unparseable manifest {manifest_path.name}: {exc}") from exc

    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise ManifestError(
            f"unknown format_version {version!r} in {manifest_path.name} "
            f"(supported: {FORMAT_VERSION})"
        )
    try:
        video = manifest["video"]
        spec = VideoSpec(
            width_px=int(video["width_px"]),
            height_px=int(video["height_px"]),
            n_frames=int(video["n_frames"]),
            fps=float(video["fps"]),
            dva_per_px=float(video["dva_per_px"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"invalid video spec in {manifest_path.name}: {exc}") from exc

    kinds = set(manifest.get("kinds", []))
    required = {"semantic", "saliency", "flow_dx", "flow_dy", "gt"}
    missing = required - kinds
    if missing:
        raise ManifestError(
            f"{manifest_path.name} lists no {sorted(missing)} data; these kinds are required"
        )

    shape = spec.shape
    bundles: list[CueBundle] = []
    gt_labels = []
    rgb_frames = [] if "rgb" in kinds else None
    for f in range(spec.n_frames):
        semantic = _read_grid(base / _bin_name("semantic", f), LABEL_DTYPE, shape)
        saliency = _read_grid(base / _bin_name("saliency", f), SCALAR_DTYPE, shape).astype(float)
        dx = _read_grid(base / _bin_name("flow_dx", f), SCALAR_DTYPE, shape).astype(float)
        dy = _read_grid(base / _bin_name("flow_dy", f), SCALAR_DTYPE, shape).astype(float)
        flow = FlowField(dx, dy)
        gt_labels.append(_read_grid(base / _bin_name("gt", f), LABEL_DTYPE, shape))
        if rgb_frames is not None:
            rgb_frames.append(_read_grid(base / _bin_name("rgb", f), RGB_DTYPE, (*shape, 3)))

        if "appearance" in kinds:
            appearance = _read_grid(base / _bin_name("appearance", f), LABEL_DTYPE, shape)
        elif rgb_frames is not None:
            appearance = felzenszwalb_segment(rgb_frames[-1].astype(float), felz_k, felz_min_size)
        else:
            raise ManifestError(
                f"{manifest_path.name}: no appearance cue and no rgb data to derive it from"
            )
        if "motion" in kinds:
            motion = _read_grid(base / _bin_name("motion", f), LABEL_DTYPE, shape)
        else:
            motion = motion_segment(flow, felz_k_motion, felz_min_size)
        bundles.append(
            CueBundle(
                appearance=appearance,
                motion=motion,
                semantic=semantic,
                saliency=saliency,
                flow=flow,
            )
        )

    scene = Scene(
        spec=spec,
        cues=bundles,
        gt=GroundTruth(labels=gt_labels),
        rgb=rgb_frames,
        video_id=str(manifest.get("video_id", base.name)),
    )

    prompt_source = None
    prompt_entries = manifest.get("prompts") or []
    if prompt_entries:
        masks: dict[int, list] = {}
        for entry in prompt_entries:
            try:
                frame = int(entry["frame"])
                x, y = float(entry["x"]), float(entry["y"])
                fname = entry["file"]
            except (KeyError, TypeError, ValueError) as exc:
                raise ManifestError(
                    f"invalid prompt entry {entry!r} in {manifest_path.name}"
                ) from exc
            mask = _read_grid(base / fname, LABEL_DTYPE, shape) > 0
            masks.setdefault(frame, []).append((x, y, mask))
        prompt_source = FilePromptSource(masks)
    return scene, prompt_source
