import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from arcontext.errors import GazeVertical
from arcontext.spatial import (
    BodyPose,
    BodySector,
    HeadSector,
    SpatialConfig,
    angles_relative,
    bin_body_sector,
    bin_head_sector,
    forward_from_yaw,
    heading_of,
    horizontal_band,
    recenter,
    update_body_forward,
    vertical_band,
)

CFG = SpatialConfig()
# by hand: diag 52 at 16:9 -> H = 52*16/sqrt(337), V = 52*9/sqrt(337)
H_EDGE = 52 * 16 / math.sqrt(337) / 6  # 7.5539
V_EDGE = 52 * 9 / math.sqrt(337) / 6  # 4.2491


def test_fov_split():
    assert CFG.horizontal_fov_deg == pytest.approx(45.32, abs=0.01)
    assert CFG.vertical_fov_deg == pytest.approx(25.49, abs=0.01)
    assert CFG.horizontal_fov_deg / 6 == pytest.approx(H_EDGE)


class TestForward:
    pose = BodyPose((0.0, 0.0, 0.0), (0.0, 0.0, 1.0))

    def test_straight(self):
        pose, prev = update_body_forward(self.pose, (0, 0, 1), (0, 0, 1))
        assert pose.forward == (0.0, 0.0, 1.0)

    def test_turn(self):
        pose, prev = update_body_forward(self.pose, (0, 0, 1), (1, 0, 0))
        assert pose.forward == (1.0, 0.0, 0.0) and prev == (1.0, 0.0, 0.0)

    def test_vertical_is_noop(self):
        assert update_body_forward(self.pose, (0, 0, 1), (0, 1, 0)) == (self.pose, (0, 0, 1))

    def test_jitter_below_epsilon(self):
        assert update_body_forward(self.pose, (0, 0, 1), (0.005, 0, 0)) == (self.pose, (0, 0, 1))

    def test_dot_exactly_threshold_does_not_update(self):
        # unit vector whose dot with +z is exactly 0.85
        curr = (math.sqrt(1 - 0.85**2), 0.0, 0.85)
        assert curr[2] * 1.0 == 0.85
        pose, _ = update_body_forward(self.pose, (0.0, 0.0, 1.0), curr)
        assert pose.forward == (0.0, 0.0, 1.0)

    def test_dot_just_below_threshold_updates(self):
        z = 0.85 - 1e-9
        curr = (math.sqrt(1 - z * z), 0.0, z)
        pose, _ = update_body_forward(self.pose, (0.0, 0.0, 1.0), curr)
        assert pose.forward != (0.0, 0.0, 1.0)

    def test_bad_pose(self):
        with pytest.raises(ValueError):
            BodyPose((0, 0, 0), (0, 1, 0))

    @given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)), max_size=40))
    def test_forward_stays_unit_and_planar(self, moves):
        pose, prev = self.pose, (0.0, 0.0, 1.0)
        for m in moves:
            pose, prev = update_body_forward(pose, prev, m)
            x, y, z = pose.forward
            assert y == 0.0
            assert math.hypot(x, z) == pytest.approx(1.0)


class TestRecenter:
    @pytest.mark.parametrize("yaw", [0.0, 30.0, -120.0])
    def test_heading(self, yaw):
        assert heading_of(recenter(yaw)) == pytest.approx(yaw)

    def test_pitch_ignored(self):
        assert heading_of(recenter(30.0, 40.0)) == pytest.approx(30.0)

    def test_straight_down(self):
        with pytest.raises(GazeVertical):
            recenter(0.0, -90.0)


class TestHeadBins:
    @pytest.mark.parametrize("yaw,pitch,expected", [
        (0, 0, "Center"),
        (-20, 10, "TopLeft"),
        (60, 0, "RightCenter"),
        (H_EDGE, 0, "Center"),  # boundary belongs to the middle third
        (H_EDGE + 1e-6, 0, "RightCenter"),
        (-H_EDGE - 1e-6, 0, "LeftCenter"),
        (0, V_EDGE + 1e-6, "TopCenter"),
        (0, -V_EDGE - 1e-6, "BottomCenter"),
        (7.0, -4.0, "Center"),
        (8.0, -5.0, "BottomRight"),
    ])
    def test_examples(self, yaw, pitch, expected):
        assert bin_head_sector(yaw, pitch) == HeadSector(expected)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            bin_head_sector(float("nan"), 0)


class TestBodyBins:
    @pytest.mark.parametrize("yaw,pitch,expected", [
        (0, 0, "Center"),
        (50, 0, "FarRight"),
        (-50, 30, "FarLeft"),
        (-20, 15, "TopLeft"),
        (45, 0, "RightCenter"),  # far needs strictly more than 45
        (15, 10, "Center"),
        (16, -11, "BottomRight"),
        (-14, -10.5, "BottomCenter"),
        (200, 0, "FarLeft"),  # wraps to -160
    ])
    def test_examples(self, yaw, pitch, expected):
        assert bin_body_sector(yaw, pitch) == BodySector(expected)

    def test_bands(self):
        assert vertical_band("TopLeft") == "Top" and vertical_band("FarRight") == "Center"
        assert horizontal_band("LeftCenter") == "Left" and horizontal_band("BottomCenter") == "Center"


def test_angles_relative_round_trip():
    rng = random.Random(3)
    for _ in range(200):
        fwd_yaw = rng.uniform(-180, 180)
        yaw, pitch = rng.uniform(-170, 170), rng.uniform(-80, 80)
        gy, gp = math.radians(fwd_yaw + yaw), math.radians(pitch)
        direction = (math.cos(gp) * math.sin(gy), math.sin(gp), math.cos(gp) * math.cos(gy))
        ry, rp = angles_relative(direction, forward_from_yaw(fwd_yaw))
        assert ry == pytest.approx(yaw, abs=1e-6) and rp == pytest.approx(pitch, abs=1e-6)


def test_gradual_turn_not_detected():
    # 30 degree steps stay above the 0.85 dot threshold (cos 30 = 0.866)
    pose, prev = BodyPose((0, 0, 0), (0.0, 0.0, 1.0)), (0.0, 0.0, 1.0)
    for k in range(1, 4):
        pose, prev = update_body_forward(pose, prev, forward_from_yaw(30 * k))
    assert pose.forward == (0.0, 0.0, 1.0)
