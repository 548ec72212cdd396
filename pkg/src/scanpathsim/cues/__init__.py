"""Per-frame segmentation cues: synthetic scenes, graph segmentation, prompts, file IO."""

from .graphseg import felzenszwalb_segment, motion_segment
from .manifest import ManifestError, load_cue_manifest, save_scene
from .prompts import FilePromptSource, PromptError, lowlevel_prompt_mask, oracle_prompt_mask
from .scene import CueBundle, GroundTruth, Scene, downsample_cues, first_presence
from .synthetic import (
    CueNoiseSpec,
    ShapePart,
    SyntheticObject,
    SyntheticSceneSpec,
    generate_synthetic_scene,
    rasterize_polygon,
)

__all__ = [
    "CueBundle",
    "CueNoiseSpec",
    "FilePromptSource",
    "GroundTruth",
    "ManifestError",
    "PromptError",
    "Scene",
    "ShapePart",
    "SyntheticObject",
    "SyntheticSceneSpec",
    "downsample_cues",
    "felzenszwalb_segment",
    "first_presence",
    "generate_synthetic_scene",
    "load_cue_manifest",
    "lowlevel_prompt_mask",
    "motion_segment",
    "oracle_prompt_mask",
    "rasterize_polygon",
    "save_scene",
]
