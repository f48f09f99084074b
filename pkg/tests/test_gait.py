import math
from dataclasses import replace

import numpy as np
import pytest

from quadmorph.gait import (
    BASE_GAIT,
    EXTENDED_GAIT,
    DegenerateSpline,
    GaitParams,
    LoopSpline,
    body_targets,
    build_loop_spline,
    derive_control_points,
    foot_target,
    leg_schedule,
    wag_offset,
)
from quadmorph.kinematics import SHORT, TALL


def test_control_points_base_short():
    cp = derive_control_points(BASE_GAIT, SHORT)
    expected = [
        (0.0, 92.5, -782.0),
        (0.0, -92.5, -782.0),
        (0.0, -92.5, -732.0),
        (0.0, 0.0, -707.0),
        (0.0, 142.5, -763.25),
    ]
    for point, want in zip(cp, expected):
        for got, ref in zip(point, want):
            assert got == pytest.approx(ref, abs=1e-9)


def test_control_points_extended_tall():
    cp = derive_control_points(EXTENDED_GAIT, TALL)
    assert tuple(cp.p1) == pytest.approx((0.0, 107.5, -858.8), abs=1e-9)
    assert tuple(cp.p4) == pytest.approx((0.0, 0.0, -783.8), abs=1e-9)


def test_control_points_degenerate_gait():
    flat = GaitParams(0.0, 0.0, 0.0, 0.275, 0.2, 0.0, 15.0, 10.0)
    cp = derive_control_points(flat, SHORT)
    for point in cp:
        assert tuple(point) == (0.0, 0.0, -782.0)
    with pytest.raises(DegenerateSpline):
        build_loop_spline(cp)


def test_spline_interpolates_knots():
    spline = build_loop_spline(derive_control_points(BASE_GAIT, SHORT))
    for i, point in enumerate(spline.points):
        got = spline.position(float(i))
        assert max(abs(a - b) for a, b in zip(got, point)) < 1e-9


def test_spline_closed_at_wrap():
    spline = build_loop_spline(derive_control_points(BASE_GAIT, SHORT))
    p0 = spline.position(0.0)
    p5 = spline.position(5.0)
    v0 = spline.velocity(0.0)
    v5 = spline.velocity(5.0)
    assert max(abs(a - b) for a, b in zip(p0, p5)) < 1e-9
    assert max(abs(a - b) for a, b in zip(v0, v5)) < 1e-9


def test_spline_circle_deviation():
    # Five points equally spaced on a circle: the loop stays within a few
    # percent of the radius.  The exact worst case for this tangent rule at
    # 72 degree spacing is 5.123 % of the radius, frozen here from a dense
    # sweep.
    radius = 100.0
    pts = [
        (radius * math.cos(2 * math.pi * i / 5), radius * math.sin(2 * math.pi * i / 5), 0.0)
        for i in range(5)
    ]
    spline = LoopSpline(pts)
    worst = 0.0
    for s in np.linspace(0.0, 5.0, 20000):
        x, y, _ = spline.position(float(s))
        worst = max(worst, abs(math.hypot(x, y) - radius))
    assert worst == pytest.approx(0.05123 * radius, abs=0.01 * radius)
    assert worst < 0.06 * radius


def _spline(gait=BASE_GAIT, morph=SHORT):
    return build_loop_spline(derive_control_points(gait, morph))


def test_foot_target_stance_endpoints():
    spline = _spline()
    T = BASE_GAIT.period
    p = foot_target(0.0, 0.0, BASE_GAIT, spline)
    assert tuple(p) == pytest.approx((0.0, 92.5, -782.0), abs=1e-9)
    # mid-stance: foot under the hip, still on the ground
    p = foot_target(0.4 * T, 0.0, BASE_GAIT, spline)
    assert p.y == pytest.approx(0.0, abs=1e-9)
    assert p.z == -782.0
    p = foot_target((0.8 - 1e-9) * T, 0.0, BASE_GAIT, spline)
    assert p.y == pytest.approx(-92.5, abs=1e-4)
    assert p.z == -782.0


def test_foot_target_swing_midpoint_is_p4():
    spline = _spline()
    T = BASE_GAIT.period
    p = foot_target(0.9 * T, 0.0, BASE_GAIT, spline)
    assert tuple(p) == pytest.approx((0.0, 0.0, -707.0), abs=1e-9)


def _hermite_oracle(points, s):
    # independent textbook evaluation of the closed Catmull-Rom loop
    n = len(points)
    pts = np.asarray(points, dtype=float)
    tangents = np.array([(pts[(i + 1) % n] - pts[(i - 1) % n]) / 2.0 for i in range(n)])
    s = s % n
    i = int(s)
    r = s - i
    j = (i + 1) % n
    h = np.array([
        2 * r**3 - 3 * r**2 + 1,
        r**3 - 2 * r**2 + r,
        -2 * r**3 + 3 * r**2,
        r**3 - r**2,
    ])
    return h[0] * pts[i] + h[1] * tangents[i] + h[2] * pts[j] + h[3] * tangents[j]


def test_forward_extreme_matches_oracle_sweep():
    # The forward extreme of the cycle sits at (or slightly beyond) the
    # smoothing point, depending on loop overshoot; verify against an
    # independent dense sweep.
    cp = derive_control_points(BASE_GAIT, SHORT)
    points = [tuple(p) for p in cp]
    oracle_max = max(
        _hermite_oracle(points, s)[1] for s in np.linspace(1.0, 5.0, 20000)
    )
    spline = _spline()
    T = BASE_GAIT.period
    impl_max = max(
        foot_target(t, 0.0, BASE_GAIT, spline).y
        for t in np.linspace(0.0, T, 20000, endpoint=False)
    )
    assert impl_max >= 142.5 - 1e-9
    assert impl_max == pytest.approx(oracle_max, abs=1e-3)


def test_wag_goldens():
    T = BASE_GAIT.period
    w = wag_offset(0.0, BASE_GAIT)
    assert w.wx == pytest.approx(0.0, abs=1e-12)
    expected_wy = 5.0 * math.tanh(3.0 * math.sin(2.0 * math.pi * 0.43))
    assert w.wy == pytest.approx(expected_wy, abs=1e-12)
    assert w.wy == pytest.approx(4.28, abs=0.01)
    w = wag_offset(T / 4.0, BASE_GAIT)
    assert w.wx == pytest.approx(7.5 * math.tanh(3.0), abs=1e-9)
    assert w.wx == pytest.approx(7.46, abs=0.01)


def test_wag_bounds_and_frequency_ratio():
    T = BASE_GAIT.period
    ts = np.linspace(0.0, T, 5000, endpoint=False)
    wxs = [wag_offset(float(t), BASE_GAIT).wx for t in ts]
    wys = [wag_offset(float(t), BASE_GAIT).wy for t in ts]
    assert max(abs(v) for v in wxs) <= 7.5 + 1e-9
    assert max(abs(v) for v in wys) <= 5.0 + 1e-9

    def crossings(vals):
        signs = [v > 0 for v in vals]
        return sum(1 for a, b in zip(signs, signs[1:] + signs[:1]) if a != b)

    # the forward sway runs two cycles per gait period, the lateral one
    assert crossings(wys) == 2 * crossings(wxs)
    assert crossings(wxs) == 2


def test_foot_target_periodicity():
    spline = _spline()
    T = BASE_GAIT.period
    rng = np.random.default_rng(5)
    for t in rng.uniform(0.0, 10.0 * T, 100):
        a = foot_target(float(t), 0.25, BASE_GAIT, spline)
        b = foot_target(float(t) + T, 0.25, BASE_GAIT, spline)
        assert math.dist(tuple(a), tuple(b)) < 1e-9


def test_stance_constant_rate_and_flatness():
    spline = _spline()
    T = BASE_GAIT.period
    rate = BASE_GAIT.ideal_speed
    ts = np.linspace(0.01, 0.79, 40) * T
    ys = [foot_target(float(t), 0.0, BASE_GAIT, spline).y for t in ts]
    for t, y in zip(ts, ys):
        p = foot_target(float(t), 0.0, BASE_GAIT, spline)
        assert p.x == 0.0
        assert p.z == -782.0
    slopes = np.diff(ys) / np.diff(ts)
    assert np.allclose(slopes, -rate, rtol=1e-9)


def test_step_length_scaling():
    doubled = replace(BASE_GAIT, step_length=2 * BASE_GAIT.step_length)
    assert doubled.ideal_speed == pytest.approx(2 * BASE_GAIT.ideal_speed, rel=1e-12)
    cp1 = derive_control_points(BASE_GAIT, SHORT)
    cp2 = derive_control_points(doubled, SHORT)
    assert cp2.p1.y == pytest.approx(2 * cp1.p1.y, rel=1e-12)
    assert cp2.p2.y == pytest.approx(2 * cp1.p2.y, rel=1e-12)


def test_leg_schedule_default_offsets():
    sched = leg_schedule()
    offsets = dict(sched.offsets)
    assert offsets == {
        "front_left": 0.0,
        "rear_right": 0.25,
        "front_right": 0.5,
        "rear_left": 0.75,
    }
    assert len(set(offsets.values())) == 4


def _max_simultaneous_swings(lift_duration, offsets):
    worst = 0
    for t in np.linspace(0.0, 1.0, 4001, endpoint=False):
        in_swing = sum(
            1 for _, off in offsets if (t + off) % 1.0 >= 1.0 - lift_duration
        )
        worst = max(worst, in_swing)
    return worst


def test_schedule_single_leg_lift():
    sched = leg_schedule(lift_duration=0.20)
    assert _max_simultaneous_swings(0.20, sched.offsets) == 1


def test_schedule_overlap_warns():
    with pytest.warns(UserWarning):
        leg_schedule(lift_duration=0.30)
    with pytest.warns(UserWarning):
        GaitParams(185.0, 75.0, 50.0, 0.275, 0.30, 0.0, 15.0, 10.0)


def test_body_targets_speed_and_wag_shift():
    targets, v = body_targets(0.0, BASE_GAIT, SHORT)
    assert v == pytest.approx(185.0 / (BASE_GAIT.period * 0.8), rel=1e-12)
    assert v * 0.06 == pytest.approx(3.8156, abs=5e-4)
    _, v_ext = body_targets(0.0, EXTENDED_GAIT, TALL)
    assert v_ext * 0.06 == pytest.approx(5.6438, abs=5e-4)
    # wag shifts all four feet identically
    w = wag_offset(0.0, BASE_GAIT)
    spline = _spline()
    sched = leg_schedule()
    for leg, off in sched:
        bare = foot_target(0.0, off, BASE_GAIT, spline)
        assert targets[leg].x == pytest.approx(bare.x + w.wx, abs=1e-12)
        assert targets[leg].y == pytest.approx(bare.y + w.wy, abs=1e-12)
        assert targets[leg].z == bare.z


def test_body_targets_zero_step_speed():
    flat = GaitParams(0.0, 75.0, 50.0, 0.275, 0.2, 0.0, 15.0, 10.0)
    _, v = body_targets(0.0, flat, SHORT)
    assert v == 0.0


def test_body_targets_reverse_mirrors_forward_axis():
    fwd, _ = body_targets(1.234, BASE_GAIT, SHORT)
    rev, _ = body_targets(1.234, BASE_GAIT, SHORT, reverse=True)
    w = wag_offset(1.234, BASE_GAIT)
    for leg in fwd:
        assert rev[leg].y - w.wy == pytest.approx(-(fwd[leg].y - w.wy), abs=1e-9)
        assert rev[leg].z == fwd[leg].z
