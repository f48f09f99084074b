"""Crawl-gait trajectory generation from eight hand-tunable parameters.

A foot cycle has two parts.  During stance the foot sweeps a straight chord
along the ground at constant rate, which keeps the body moving at constant
forward speed.  During the lift the foot returns to the front along a closed
interpolating cubic Hermite spline through five control points derived from
step length, step height, smoothing and ground height.  A periodic "wag"
offset sways the body away from whichever leg is lifted so the crawl stays
statically stable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .kinematics import FootPoint, MorphologyConfig, ground_height

#: Canonical leg order used throughout the package.
LEGS = ("front_left", "front_right", "rear_left", "rear_right")


@dataclass(frozen=True)
class GaitParams:
    """The eight gait parameters (lengths mm, frequency Hz, fractions 0..1)."""

    step_length: float
    step_height: float
    smoothing: float
    frequency: float
    lift_duration: float
    wag_phase: float
    wag_amplitude_x: float
    wag_amplitude_y: float

    def __post_init__(self):
        for name in ("step_length", "step_height", "smoothing",
                     "wag_amplitude_x", "wag_amplitude_y"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if not 0.0 < self.lift_duration < 0.5:
            raise ValueError("lift_duration must lie in (0, 0.5)")
        if self.lift_duration > 0.25:
            warnings.warn(
                f"lift_duration {self.lift_duration} > 0.25: single-leg lift "
                "windows overlap in a four-beat crawl",
                stacklevel=2,
            )

    @property
    def period(self) -> float:
        """Gait period T = 1/f (s)."""
        return 1.0 / self.frequency

    @property
    def ideal_speed(self) -> float:
        """No-slip body speed (mm/s): stance chord over stance time."""
        return self.step_length / (self.period * (1.0 - self.lift_duration))


#: Conservative hand-designed gait.
BASE_GAIT = GaitParams(185.0, 75.0, 50.0, 0.275, 0.20, 0.0, 15.0, 10.0)
#: Faster gait: longer step and higher frequency, same shape otherwise.
EXTENDED_GAIT = GaitParams(215.0, 75.0, 50.0, 0.35, 0.20, 0.0, 15.0, 10.0)


@dataclass(frozen=True)
class ControlPoints:
    """The five loop control points, in trajectory-frame coordinates."""

    points: tuple[FootPoint, FootPoint, FootPoint, FootPoint, FootPoint]

    def __iter__(self):
        return iter(self.points)

    @property
    def p1(self) -> FootPoint:
        return self.points[0]

    @property
    def p2(self) -> FootPoint:
        return self.points[1]

    @property
    def p3(self) -> FootPoint:
        return self.points[2]

    @property
    def p4(self) -> FootPoint:
        return self.points[3]

    @property
    def p5(self) -> FootPoint:
        return self.points[4]


def derive_control_points(
    params: GaitParams,
    morph: MorphologyConfig,
    ground: float | None = None,
) -> ControlPoints:
    """Place the five loop points for a gait/morphology pairing.

    p1/p2 bound the stance chord on the ground, p3 and p4 shape the lift,
    and p5 overshoots the landing by the smoothing distance.  ``ground``
    overrides the morphology-derived ground height (testing hook).
    """
    h = ground_height(morph) if ground is None else ground
    ls, hs, s = params.step_length, params.step_height, params.smoothing
    return ControlPoints((
        FootPoint(0.0, ls / 2.0, h),
        FootPoint(0.0, -ls / 2.0, h),
        FootPoint(0.0, -ls / 2.0, h + hs / 1.5),
        FootPoint(0.0, 0.0, h + hs),
        FootPoint(0.0, ls / 2.0 + s, h + hs / 4.0),
    ))


class DegenerateSpline(ValueError):
    """All control points coincide; the loop has no extent."""


class LoopSpline:
    """Closed interpolating cubic Hermite spline on uniform knots.

    Tangents follow the cyclic Catmull-Rom rule ``m[i] = (p[i+1] - p[i-1])/2``
    so position and first derivative are continuous across the wrap point.
    The curve parameter is measured in knot units and wraps modulo the point
    count.
    """

    def __init__(self, points):
        pts = [tuple(float(v) for v in p) for p in points]
        if len(pts) < 3:
            raise ValueError("a closed loop needs at least 3 points")
        spread = max(
            max(abs(a - b) for a, b in zip(p, pts[0])) for p in pts
        )
        if spread < 1e-12:
            raise DegenerateSpline("all control points coincide")
        n = len(pts)
        self.points = tuple(pts)
        self.tangents = tuple(
            tuple((pts[(i + 1) % n][k] - pts[(i - 1) % n][k]) / 2.0 for k in range(3))
            for i in range(n)
        )

    @property
    def n(self) -> int:
        return len(self.points)

    def position(self, s: float) -> tuple[float, float, float]:
        """Point on the loop at knot parameter ``s`` (wraps modulo n)."""
        n = self.n
        s = s % n
        i = int(s)
        r = s - i
        j = (i + 1) % n
        p0, p1 = self.points[i], self.points[j]
        m0, m1 = self.tangents[i], self.tangents[j]
        r2 = r * r
        r3 = r2 * r
        h00 = 2.0 * r3 - 3.0 * r2 + 1.0
        h10 = r3 - 2.0 * r2 + r
        h01 = -2.0 * r3 + 3.0 * r2
        h11 = r3 - r2
        return (
            h00 * p0[0] + h10 * m0[0] + h01 * p1[0] + h11 * m1[0],
            h00 * p0[1] + h10 * m0[1] + h01 * p1[1] + h11 * m1[1],
            h00 * p0[2] + h10 * m0[2] + h01 * p1[2] + h11 * m1[2],
        )

    def velocity(self, s: float) -> tuple[float, float, float]:
        """Derivative with respect to the knot parameter at ``s``."""
        n = self.n
        s = s % n
        i = int(s)
        r = s - i
        j = (i + 1) % n
        p0, p1 = self.points[i], self.points[j]
        m0, m1 = self.tangents[i], self.tangents[j]
        d00 = 6.0 * r * r - 6.0 * r
        d10 = 3.0 * r * r - 4.0 * r + 1.0
        d01 = -6.0 * r * r + 6.0 * r
        d11 = 3.0 * r * r - 2.0 * r
        return (
            d00 * p0[0] + d10 * m0[0] + d01 * p1[0] + d11 * m1[0],
            d00 * p0[1] + d10 * m0[1] + d01 * p1[1] + d11 * m1[1],
            d00 * p0[2] + d10 * m0[2] + d01 * p1[2] + d11 * m1[2],
        )


def build_loop_spline(points: ControlPoints) -> LoopSpline:
    """Build the closed loop through the five control points, in order."""
    return LoopSpline(list(points))


@dataclass(frozen=True)
class WagOffset:
    """Body sway offsets (mm): wx lateral, wy forward."""

    wx: float
    wy: float


def wag_offset(t: float, params: GaitParams) -> WagOffset:
    """Balancing sway at time ``t``.

    The lateral component runs at the gait period, the forward component at
    half the period (one sway per lifted leg pair), with a 0.43 fraction
    offset that phases the forward sway against the lift sequence.  The tanh
    squashing flattens the sway into a plateau near each extreme.
    """
    T = params.period
    half = T / 2.0
    wx = (params.wag_amplitude_x / 2.0) * math.tanh(
        3.0 * math.sin(2.0 * math.pi * (t + params.wag_phase * T) / T)
    )
    wy = (params.wag_amplitude_y / 2.0) * math.tanh(
        3.0 * math.sin(2.0 * math.pi * (t + (params.wag_phase + 0.43) * half) / half)
    )
    return WagOffset(wx, wy)


@dataclass(frozen=True)
class LegSchedule:
    """Per-leg phase offsets (fractions of the period)."""

    offsets: tuple[tuple[str, float], ...]

    def __iter__(self):
        return iter(self.offsets)

    def offset(self, leg: str) -> float:
        for name, off in self.offsets:
            if name == leg:
                return off
        raise KeyError(leg)


#: Creep sequence: one leg lifted at a time, quarter period apart.
DEFAULT_OFFSETS = (
    ("front_left", 0.0),
    ("rear_right", 0.25),
    ("front_right", 0.5),
    ("rear_left", 0.75),
)


def leg_schedule(offsets=None, lift_duration: float | None = None) -> LegSchedule:
    """Build the leg phasing, checking that lift windows stay disjoint.

    With the default quarter-period spacing a ``lift_duration`` above 0.25
    forces two legs into the air at once; that is reported as a warning, not
    an error, since the simulator can still run the gait.
    """
    offsets = tuple(offsets) if offsets is not None else DEFAULT_OFFSETS
    values = [off for _, off in offsets]
    if len(set(values)) != len(values):
        raise ValueError("leg phase offsets must be pairwise distinct")
    if lift_duration is not None:
        gaps = sorted(v % 1.0 for v in values)
        spacing = min(
            (gaps[(i + 1) % len(gaps)] - gaps[i]) % 1.0 for i in range(len(gaps))
        )
        if lift_duration > spacing:
            warnings.warn(
                f"lift_duration {lift_duration} exceeds the {spacing} phase "
                "spacing: swing windows overlap",
                stacklevel=2,
            )
    return LegSchedule(offsets)


def foot_target(
    t: float, leg_phase: float, params: GaitParams, spline: LoopSpline
) -> FootPoint:
    """Commanded foot position at time ``t`` for a leg at ``leg_phase``.

    Phase 0..(1 - lift_duration) walks the stance chord p1 -> p2 linearly;
    the remaining lift fraction traverses the four loop segments
    p2 -> p3 -> p4 -> p5 -> p1 with equal time per segment.
    """
    phi = (t / params.period + leg_phase) % 1.0
    stance = 1.0 - params.lift_duration
    p1, p2 = spline.points[0], spline.points[1]
    if phi < stance:
        f = phi / stance
        return FootPoint(
            p1[0] + (p2[0] - p1[0]) * f,
            p1[1] + (p2[1] - p1[1]) * f,
            p1[2] + (p2[2] - p1[2]) * f,
        )
    s = (phi - stance) / params.lift_duration
    x, y, z = spline.position(1.0 + 4.0 * s)
    return FootPoint(x, y, z)


def body_targets(
    t: float,
    params: GaitParams,
    morph: MorphologyConfig,
    spline: LoopSpline | None = None,
    schedule: LegSchedule | None = None,
    reverse: bool = False,
) -> tuple[dict[str, FootPoint], float]:
    """Body-frame foot targets for all four legs, plus the ideal body speed.

    The wag offset shifts every target identically, leaning the body as a
    rigid unit.  ``reverse`` mirrors the stride fore-aft so the same loop
    walks the robot backwards.
    """
    if spline is None:
        spline = build_loop_spline(derive_control_points(params, morph))
    if schedule is None:
        schedule = leg_schedule(lift_duration=params.lift_duration)
    w = wag_offset(t, params)
    targets = {}
    for leg, off in schedule:
        p = foot_target(t, off, params, spline)
        y = -p.y if reverse else p.y
        targets[leg] = FootPoint(p.x + w.wx, y + w.wy, p.z)
    return targets, params.ideal_speed
