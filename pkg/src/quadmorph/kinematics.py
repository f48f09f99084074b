"""Leg geometry for a quadruped with length-adjustable lower links.

Each leg is a three-revolute chain: the coxa rolls the leg plane about the
forward (y) axis, the femur and tibia pitch about the lateral (x) axis.  The
femur and tibia links additionally carry slow prismatic adjusters, so link
lengths are part of the robot's configuration rather than constants.

Frames
------
Hip frame: origin at the femur pivot, x lateral (outward-right for a
right-side leg), y forward, z up.  A hanging straight leg ends at
``(0, 0, -(femur + tibia))``.

Trajectory frame: the gait generator measures heights from a datum
``TRAJECTORY_DATUM_DROP`` millimetres above the hip plane (a convention
inherited from the walking controller).  Use :func:`gait_to_hip_frame`
before solving leg kinematics on trajectory points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Prismatic adjustment ranges of the two lower links (mm).  The strokes are
# 25 mm (femur) and 95 mm (tibia) on top of the shortest lengths.
FEMUR_MIN, FEMUR_MAX = 185.0, 210.0
TIBIA_MIN, TIBIA_MAX = 255.0, 350.0

# Height of the trajectory generator's z datum above the hip plane (mm).
TRAJECTORY_DATUM_DROP = 430.0

# Advisory software limit on joint excursion from the standing pose (rad).
# Not enforced by the solver: the nominal stance already folds the tibia by
# roughly 1.3 rad from straight.
JOINT_SOFT_LIMIT = math.pi / 2


class Unreachable(ValueError):
    """Foot target outside the leg's reachable annulus."""

    def __init__(self, target, distance, limits):
        self.target = tuple(target)
        self.distance = float(distance)
        self.limits = (float(limits[0]), float(limits[1]))
        super().__init__(
            "target (%.3f, %.3f, %.3f) at %.3f mm outside reach [%.3f, %.3f] mm"
            % (*self.target, self.distance, *self.limits)
        )


@dataclass(frozen=True)
class MorphologyConfig:
    """Current lengths of the adjustable lower links (mm)."""

    femur_length: float
    tibia_length: float

    def __post_init__(self):
        if not FEMUR_MIN <= self.femur_length <= FEMUR_MAX:
            raise ValueError(
                f"femur_length {self.femur_length} outside [{FEMUR_MIN}, {FEMUR_MAX}] mm"
            )
        if not TIBIA_MIN <= self.tibia_length <= TIBIA_MAX:
            raise ValueError(
                f"tibia_length {self.tibia_length} outside [{TIBIA_MIN}, {TIBIA_MAX}] mm"
            )

    @property
    def reach(self) -> float:
        """Maximum hip-to-foot distance (mm)."""
        return self.femur_length + self.tibia_length

    @property
    def min_reach(self) -> float:
        """Minimum hip-to-foot distance with the knee fully folded (mm)."""
        return abs(self.femur_length - self.tibia_length)

    @property
    def femur_stroke(self) -> float:
        """Femur adjuster extension from its end stop (mm)."""
        return self.femur_length - FEMUR_MIN

    @property
    def tibia_stroke(self) -> float:
        """Tibia adjuster extension from its end stop (mm)."""
        return self.tibia_length - TIBIA_MIN


#: Shortest available legs.
SHORT = MorphologyConfig(FEMUR_MIN, TIBIA_MIN)
#: 80 % of the available extension on both links.
TALL = MorphologyConfig(205.0, 331.0)


@dataclass(frozen=True)
class BodyGeometry:
    """Rigid body dimensions; mass is carried as metadata only."""

    body_length: float = 470.0
    body_width: float = 270.0
    mass: float = 5.5

    @property
    def hip_offsets(self) -> dict[str, tuple[float, float, float]]:
        """Hip positions in the body frame, one per leg."""
        hw, hl = self.body_width / 2.0, self.body_length / 2.0
        return {
            "front_left": (-hw, hl, 0.0),
            "front_right": (hw, hl, 0.0),
            "rear_left": (-hw, -hl, 0.0),
            "rear_right": (hw, -hl, 0.0),
        }


@dataclass(frozen=True)
class JointAngles:
    """Revolute joint angles (rad): coxa roll, femur pitch, tibia pitch."""

    coxa: float
    femur: float
    tibia: float

    def __iter__(self):
        yield self.coxa
        yield self.femur
        yield self.tibia


@dataclass(frozen=True)
class FootPoint:
    """Foot position (mm): x lateral, y forward, z vertical (down negative)."""

    x: float
    y: float
    z: float

    def __iter__(self):
        yield self.x
        yield self.y
        yield self.z


def ground_height(morph: MorphologyConfig) -> float:
    """Trajectory-frame ground level (mm) for the given leg lengths.

    The stance depth scales with total leg length so that the legs work at
    80 % extension regardless of configuration.
    """
    return -430.0 - (morph.femur_length + morph.tibia_length) * 0.8


def gait_to_hip_frame(point: FootPoint) -> FootPoint:
    """Rebase a trajectory-frame point onto the hip frame."""
    return FootPoint(point.x, point.y, point.z + TRAJECTORY_DATUM_DROP)


def forward_kinematics(angles: JointAngles, morph: MorphologyConfig) -> FootPoint:
    """Foot position in the hip frame for the given joint angles."""
    l1, l2 = morph.femur_length, morph.tibia_length
    # Planar chain in the leg plane: u down the plane, v forward.
    u = l1 * math.cos(angles.femur) + l2 * math.cos(angles.femur + angles.tibia)
    v = l1 * math.sin(angles.femur) + l2 * math.sin(angles.femur + angles.tibia)
    return FootPoint(-u * math.sin(angles.coxa), v, -u * math.cos(angles.coxa))


def inverse_kinematics(
    target: FootPoint, morph: MorphologyConfig, margin: float = 1.0
) -> JointAngles:
    """Joint angles placing the foot at a hip-frame target.

    Uses the knee-backward branch (tibia folded toward -y) so the solution
    is single-valued over the gait workspace.  Raises :class:`Unreachable`
    when the target is outside the reachable annulus shrunk by ``margin``.
    """
    x, y, z = target.x, target.y, target.z
    l1, l2 = morph.femur_length, morph.tibia_length
    d = math.sqrt(x * x + y * y + z * z)
    lo, hi = morph.min_reach + margin, morph.reach - margin
    if not lo <= d <= hi:
        raise Unreachable(target, d, (lo, hi))

    coxa = math.atan2(-x, -z)
    u = math.hypot(x, z)
    c = (d * d - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    tibia = -math.acos(max(-1.0, min(1.0, c)))
    femur = math.atan2(y, u) - math.atan2(
        l2 * math.sin(tibia), l1 + l2 * math.cos(tibia)
    )
    return JointAngles(coxa, femur, tibia)


def leg_workspace_contains(points, morph: MorphologyConfig, margin: float = 1.0) -> bool:
    """True when every trajectory-frame point is solvable for this leg."""
    for p in points:
        try:
            inverse_kinematics(gait_to_hip_frame(p), morph, margin)
        except Unreachable:
            return False
    return True
