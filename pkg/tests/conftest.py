"""Shared scene fixtures for the test suite."""

import numpy as np
import pytest

from scanpathsim.core import VideoSpec
from scanpathsim.cues import (
    CueNoiseSpec,
    ShapePart,
    SyntheticObject,
    SyntheticSceneSpec,
    generate_synthetic_scene,
)


def three_object_spec(
    width=96,
    height=96,
    n_frames=40,
    fps=30.0,
    dva_per_px=0.2,
    jitter=2.0,
    dropout=0.15,
    seed=7,
    moving=True,
    video_id="threeobj",
):
    """A 3-object scene: moving square, static two-part blob, moving box."""
    spec = VideoSpec(
        width_px=width, height_px=height, n_frames=n_frames, fps=fps, dva_per_px=dva_per_px
    )
    end = n_frames - 1
    drift = 6 if moving else 0
    objects = (
        SyntheticObject(
            parts=(ShapePart("rectangle", (0, 0, 20, 20), (200, 40, 40)),),
            trajectory=((0, 24, 24), (end, 24 + drift, 24)),
            motion_group=0,
            z_order=1,
        ),
        SyntheticObject(
            parts=(
                ShapePart("ellipse", (0, -4, 11, 8), (40, 200, 40)),
                ShapePart("rectangle", (0, 9, 14, 9), (60, 180, 60)),
            ),
            trajectory=((0, 68, 66),),
            motion_group=1,
            z_order=2,
        ),
        SyntheticObject(
            parts=(ShapePart("rectangle", (0, 0, 17, 14), (40, 40, 210)),),
            trajectory=((0, 30, 70), (end, 30 + drift, 73 if moving else 70)),
            motion_group=2,
            z_order=3,
        ),
    )
    return SyntheticSceneSpec(
        spec=spec,
        objects=objects,
        saliency_hotspots=((0, 1.0), (1, 0.8), (2, 0.6)),
        noise=CueNoiseSpec(boundary_jitter_px=jitter, dropout_prob=dropout),
        seed=seed,
        video_id=video_id,
    )


@pytest.fixture(scope="session")
def noisy_scene():
    return generate_synthetic_scene(three_object_spec())


@pytest.fixture(scope="session")
def clean_scene():
    return generate_synthetic_scene(
        three_object_spec(jitter=0.0, dropout=0.0, seed=3, video_id="clean")
    )


@pytest.fixture(scope="session")
def static_scene():
    """Noise-free, zero-flow scene for deterministic decision tests."""
    return generate_synthetic_scene(
        three_object_spec(
            jitter=0.0, dropout=0.0, seed=5, moving=False, n_frames=60, video_id="static"
        )
    )
