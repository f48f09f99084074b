import math

import numpy as np
import pytest

from quadmorph.kinematics import (
    SHORT,
    TALL,
    BodyGeometry,
    FootPoint,
    JointAngles,
    MorphologyConfig,
    Unreachable,
    forward_kinematics,
    gait_to_hip_frame,
    ground_height,
    inverse_kinematics,
    leg_workspace_contains,
)
from quadmorph.gait import BASE_GAIT, derive_control_points


def test_ground_height_goldens():
    assert ground_height(SHORT) == -782.0
    assert ground_height(TALL) == -430.0 - (205.0 + 331.0) * 0.8
    assert ground_height(TALL) == pytest.approx(-858.8, abs=1e-9)


def test_morphology_limits_rejected():
    with pytest.raises(ValueError):
        MorphologyConfig(0.0, 0.0)
    with pytest.raises(ValueError):
        MorphologyConfig(184.9, 255.0)
    with pytest.raises(ValueError):
        MorphologyConfig(185.0, 350.1)


def test_ground_height_slope():
    # -0.8 mm per mm of either link
    g0 = ground_height(MorphologyConfig(190.0, 300.0))
    assert ground_height(MorphologyConfig(191.0, 300.0)) - g0 == pytest.approx(-0.8)
    assert ground_height(MorphologyConfig(190.0, 301.0)) - g0 == pytest.approx(-0.8)


def test_fk_zero_angles():
    p = forward_kinematics(JointAngles(0.0, 0.0, 0.0), SHORT)
    assert (p.x, p.y, p.z) == (0.0, 0.0, -440.0)
    p = forward_kinematics(JointAngles(0.0, 0.0, 0.0), TALL)
    assert (p.x, p.y, p.z) == (0.0, 0.0, -536.0)


def test_fk_quarter_turn_femur():
    p = forward_kinematics(JointAngles(0.0, math.pi / 2.0, 0.0), SHORT)
    assert p.x == pytest.approx(0.0, abs=1e-9)
    assert p.y == pytest.approx(440.0, abs=1e-9)
    assert p.z == pytest.approx(0.0, abs=1e-9)


def test_ik_rejects_full_extension():
    with pytest.raises(Unreachable):
        inverse_kinematics(FootPoint(0.0, 0.0, -440.0), SHORT)


def test_ik_roundtrip_straight_down():
    target = FootPoint(0.0, 0.0, -430.0)
    angles = inverse_kinematics(target, SHORT)
    p = forward_kinematics(angles, SHORT)
    assert math.dist(tuple(p), tuple(target)) < 1e-6


def test_ik_roundtrip_first_control_point_tall():
    # First stance point of the base gait on the tall robot, rebased from
    # the trajectory datum onto the hip frame.
    target = gait_to_hip_frame(FootPoint(0.0, 92.5, -782.0))
    angles = inverse_kinematics(target, TALL)
    p = forward_kinematics(angles, TALL)
    assert math.dist(tuple(p), tuple(target)) < 1e-6


def _random_targets(morph, n, seed):
    rng = np.random.default_rng(seed)
    lo, hi = morph.min_reach + 1.0, morph.reach - 1.0
    out = []
    while len(out) < n:
        v = rng.normal(size=3)
        norm = math.sqrt(float(v @ v))
        if norm < 1e-9:
            continue
        r = rng.uniform(lo, hi)
        out.append(FootPoint(*(r * v / norm)))
    return out


@pytest.mark.parametrize("morph", [SHORT, TALL], ids=["short", "tall"])
def test_fk_ik_roundtrip_random(morph):
    for target in _random_targets(morph, 2000, seed=11):
        angles = inverse_kinematics(target, morph)
        p = forward_kinematics(angles, morph)
        assert math.dist(tuple(p), tuple(target)) < 1e-6


def test_ik_branch_consistency():
    # Knee fold keeps the same sign across the sagittal workspace half the
    # gait uses (forward/backward, below the hip).
    rng = np.random.default_rng(3)
    for _ in range(500):
        y = rng.uniform(-200.0, 200.0)
        z = rng.uniform(-430.0, -280.0)
        d = math.hypot(y, z)
        if not SHORT.min_reach + 1 < d < SHORT.reach - 1:
            continue
        angles = inverse_kinematics(FootPoint(0.0, y, z), SHORT)
        assert angles.tibia < 0.0


def test_ik_mirror_symmetry():
    a = inverse_kinematics(FootPoint(30.0, 50.0, -380.0), SHORT)
    b = inverse_kinematics(FootPoint(-30.0, 50.0, -380.0), SHORT)
    assert a.coxa == pytest.approx(-b.coxa)
    assert a.femur == pytest.approx(b.femur)
    assert a.tibia == pytest.approx(b.tibia)


def test_workspace_contains_base_gait():
    cp = derive_control_points(BASE_GAIT, SHORT)
    assert leg_workspace_contains(cp, SHORT) is True


def test_workspace_rejects_forced_ground():
    cp = derive_control_points(BASE_GAIT, SHORT, ground=-900.0)
    assert leg_workspace_contains(cp, SHORT) is False


def test_workspace_empty_is_true():
    assert leg_workspace_contains([], SHORT) is True


def test_body_geometry_hips():
    body = BodyGeometry()
    offsets = body.hip_offsets
    assert len(offsets) == 4
    assert offsets["front_left"] == (-135.0, 235.0, 0.0)
    assert offsets["rear_right"] == (135.0, -235.0, 0.0)
    assert body.mass == 5.5
