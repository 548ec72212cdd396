"""Units, angles, and wrapping behaviour of the shared domain types."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from scanpathsim.core import (
    GazePoint,
    VideoSpec,
    make_rng,
    px_to_dva,
    relative_angle,
    saccade_angle,
)


def gp(x, y):
    return GazePoint(x, y, 0, 0.0)


class TestVideoSpec:
    def test_valid_spec(self):
        spec = VideoSpec(64, 48, 30, 30.0, 0.25)
        assert spec.shape == (48, 64)
        assert spec.frame_ms == pytest.approx(1000.0 / 30.0)
        assert spec.duration_ms == pytest.approx(1000.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(width_px=0),
            dict(height_px=0),
            dict(n_frames=0),
            dict(fps=0.0),
            dict(dva_per_px=0.0),
            dict(dva_per_px=-1.0),
        ],
    )
    def test_invalid_spec(self, kwargs):
        base = dict(width_px=64, height_px=48, n_frames=30, fps=30.0, dva_per_px=0.25)
        base.update(kwargs)
        with pytest.raises(ValueError):
            VideoSpec(**base)


class TestPxToDva:
    def test_zero(self):
        spec = VideoSpec(64, 64, 1, 30.0, 0.1)
        assert px_to_dva(0.0, spec) == 0.0

    def test_arithmetic(self):
        spec = VideoSpec(64, 64, 1, 30.0, 0.025)
        assert px_to_dva(40.0, spec) == pytest.approx(1.0)
        spec = VideoSpec(64, 64, 1, 30.0, 0.0249)
        assert px_to_dva(100.0, spec) == pytest.approx(2.49)

    def test_negative_rejected(self):
        spec = VideoSpec(64, 64, 1, 30.0, 0.1)
        with pytest.raises(ValueError):
            px_to_dva(-1.0, spec)


class TestSaccadeAngle:
    def test_rightward(self):
        assert saccade_angle(gp(0, 0), gp(1, 0)) == 0.0

    def test_upward_on_screen(self):
        # screen y decreases upward; after the y-flip this is +90
        assert saccade_angle(gp(0, 0), gp(0, -1)) == pytest.approx(90.0)

    def test_down_left(self):
        # hand computation: atan2(-1, -1) after flipping y = +1 downward
        assert saccade_angle(gp(0, 0), gp(-1, 1)) == pytest.approx(-135.0)

    def test_leftward_maps_to_plus_180(self):
        assert saccade_angle(gp(0, 0), gp(-1, 0)) == pytest.approx(180.0)

    def test_zero_length_rejected(self):
        with pytest.raises(ValueError):
            saccade_angle(gp(3, 4), gp(3, 4))


class TestRelativeAngle:
    def test_identity(self):
        assert relative_angle(90.0, 90.0) == 0.0

    def test_wraparound(self):
        # brute-force modular arithmetic: -170 - 170 = -340 = +20 mod 360
        assert relative_angle(170.0, -170.0) == pytest.approx(20.0)

    def test_boundary_is_plus_180(self):
        assert relative_angle(0.0, 180.0) == 180.0
        assert relative_angle(10.0, -170.0) == 180.0

    @given(
        st.floats(-180, 180, allow_nan=False),
        st.floats(-180, 180, allow_nan=False),
    )
    def test_range_property(self, a, b):
        d = relative_angle(a, b)
        assert -180.0 < d <= 180.0

    @given(st.floats(-720, 720, allow_nan=False))
    def test_self_is_zero(self, a):
        assert relative_angle(a, a) == 0.0


class TestRng:
    def test_identical_seeds_identical_streams(self):
        a = make_rng(1234)
        b = make_rng(1234)
        assert np.array_equal(a.standard_normal(100), b.standard_normal(100))
        assert a.integers(1000) == b.integers(1000)

    def test_different_seeds_differ(self):
        assert not np.array_equal(
            make_rng(1).standard_normal(16), make_rng(2).standard_normal(16)
        )
