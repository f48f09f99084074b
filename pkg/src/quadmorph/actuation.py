"""Actuator models: rate-limited gait servos and slow prismatic adjusters.

The gait servos are treated as ideal position trackers behind a speed
ceiling.  The ceiling is the lesser of a policy cap and a no-load speed
proportional to supply voltage, so dropping the voltage directly shrinks how
fast a joint can move.  The leg-length adjusters are lead screws under a
proportional controller: slow, accurate and only used while standing still.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .gait import GaitParams, build_loop_spline, derive_control_points, foot_target
from .kinematics import (
    FEMUR_MAX,
    FEMUR_MIN,
    MorphologyConfig,
    TIBIA_MAX,
    TIBIA_MIN,
    gait_to_hip_frame,
    inverse_kinematics,
)

RPM_TO_RAD_S = 2.0 * math.pi / 60.0

# Mechanical stroke lengths (mm) implied by the link length ranges.
FEMUR_STROKE = FEMUR_MAX - FEMUR_MIN
TIBIA_STROKE = TIBIA_MAX - TIBIA_MIN


@dataclass(frozen=True)
class ServoModel:
    """Speed envelope of one gait servo."""

    rated_speed: float = 25.0      # RPM reachable at the nominal voltage
    nominal_voltage: float = 15.0  # V
    policy_cap: float = 25.0       # RPM, never exceeded regardless of supply
    update_rate: float = 60.0      # Hz, command stream rate

    @property
    def speed_per_volt(self) -> float:
        """No-load speed slope (RPM per volt)."""
        return self.rated_speed / self.nominal_voltage

    def available_speed(self, voltage: float) -> float:
        """Usable joint speed (RPM) at the given supply voltage."""
        return max(0.0, min(self.policy_cap, self.speed_per_volt * voltage))

    def available_rate(self, voltage: float) -> float:
        """Usable joint speed (rad/s) at the given supply voltage."""
        return self.available_speed(voltage) * RPM_TO_RAD_S


DEFAULT_SERVO = ServoModel()


@dataclass
class ServoState:
    """One joint's tracking state."""

    angle: float = 0.0
    commanded: float = 0.0
    steps: int = 0
    saturated_steps: int = 0

    @property
    def saturated_fraction(self) -> float:
        return self.saturated_steps / self.steps if self.steps else 0.0


def servo_step(
    state: ServoState,
    command: float,
    dt: float,
    voltage: float,
    model: ServoModel = DEFAULT_SERVO,
) -> ServoState:
    """Advance one joint toward ``command`` over ``dt`` seconds.

    The angle moves at most ``available_speed(voltage) * dt`` and lands
    exactly on the command when it is within one step's travel.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if voltage < 0:
        raise ValueError("voltage must be non-negative")
    max_step = model.available_rate(voltage) * dt
    err = command - state.angle
    state.commanded = command
    state.steps += 1
    if abs(err) <= max_step:
        state.angle = command
    else:
        state.angle += math.copysign(max_step, err)
        state.saturated_steps += 1
    return state


@dataclass(frozen=True)
class JointSpeedPeaks:
    """Per-joint peak speeds (RPM) over one gait period."""

    coxa: float
    femur: float
    tibia: float

    @property
    def max(self) -> float:
        return max(self.coxa, self.femur, self.tibia)


def required_joint_speeds(
    gait: GaitParams,
    morph: MorphologyConfig,
    samples: int = 720,
) -> JointSpeedPeaks:
    """Peak joint speeds a gait demands on a morphology.

    Differentiates the joint trajectory obtained by solving the foot path
    over one period at ``samples`` points (central differences, cyclic).
    Longer legs reach the same foot path with smaller angle excursions, so
    peaks fall as the legs extend.
    """
    spline = build_loop_spline(derive_control_points(gait, morph))
    T = gait.period
    dt = T / samples
    angles = []
    for i in range(samples):
        p = foot_target(i * dt, 0.0, gait, spline)
        angles.append(inverse_kinematics(gait_to_hip_frame(p), morph))
    peaks = [0.0, 0.0, 0.0]
    for i in range(samples):
        before = angles[(i - 1) % samples]
        after = angles[(i + 1) % samples]
        for k, (a, b) in enumerate(zip(before, after)):
            rate = abs(b - a) / (2.0 * dt)
            if rate > peaks[k]:
                peaks[k] = rate
    return JointSpeedPeaks(*(v / RPM_TO_RAD_S for v in peaks))


def lift_overrun(
    gait: GaitParams,
    morph: MorphologyConfig,
    servo: ServoModel | None = None,
    voltage: float | None = None,
    samples: int = 4000,
) -> float:
    """Extra seconds a rate-limited leg needs to finish its lift.

    Integrates the commanded rotation that the speed ceiling clips away
    during the lift window and converts the worst joint's backlog into
    catch-up time.  A statically stable crawl needs the lift (including
    this overrun) to clear before the next leg lifts, so the overrun is
    compared against the schedule's spare window ``(spacing - D_lift) * T``.
    """
    servo = servo or DEFAULT_SERVO
    cap = servo.available_rate(
        servo.nominal_voltage if voltage is None else voltage
    )
    if cap <= 0.0:
        return math.inf
    spline = build_loop_spline(derive_control_points(gait, morph))
    T = gait.period
    dt = T / samples
    start = int((1.0 - gait.lift_duration) * samples)
    backlog = [0.0, 0.0, 0.0]
    prev = None
    for i in range(start, samples + 1):
        t = (i % samples) * dt + (T if i == samples else 0.0)
        p = foot_target(t, 0.0, gait, spline)
        angles = inverse_kinematics(gait_to_hip_frame(p), morph)
        if prev is not None:
            for k, (a, b) in enumerate(zip(prev, angles)):
                backlog[k] += max(0.0, abs(b - a) - cap * dt)
        prev = angles
    return max(backlog) / cap


class OutOfStroke(ValueError):
    """Prismatic target beyond the adjuster's mechanical stroke."""


@dataclass(frozen=True)
class LinearActuatorModel:
    """Lead-screw adjuster under proportional control."""

    max_speed: float = 1.0    # mm/s
    tolerance: float = 0.5    # mm, positioning accuracy
    gain: float = 2.0         # 1/s proportional gain
    update_rate: float = 10.0  # Hz


DEFAULT_ACTUATOR = LinearActuatorModel()


@dataclass
class LinearActuatorState:
    """Stroke coordinate of one adjuster (mm from the end stop)."""

    length: float = 0.0

    def settled(self, target: float, model: LinearActuatorModel = DEFAULT_ACTUATOR) -> bool:
        return abs(target - self.length) <= model.tolerance


def actuator_step(
    state: LinearActuatorState,
    target: float,
    dt: float,
    stroke: float,
    model: LinearActuatorModel = DEFAULT_ACTUATOR,
) -> LinearActuatorState:
    """Advance one adjuster toward ``target`` over ``dt`` seconds.

    Commanded speed is the proportional term clamped to the screw's maximum;
    with ``gain * dt < 1`` the approach is monotone, so the joint settles
    inside the tolerance band and stays there.
    """
    if not 0.0 <= target <= stroke:
        raise OutOfStroke(f"target {target} mm outside stroke [0, {stroke}] mm")
    err = target - state.length
    speed = max(-model.max_speed, min(model.max_speed, model.gain * err))
    state.length += speed * dt
    return state


def reconfigure(
    src: MorphologyConfig,
    dst: MorphologyConfig,
    model: LinearActuatorModel = DEFAULT_ACTUATOR,
    max_duration: float = 600.0,
):
    """Drive all eight adjusters from one morphology to another.

    All four legs move identically and the femur/tibia screws run
    concurrently, so the slowest travel dominates.  The robot stands still
    throughout.  Returns ``(duration_s, trajectory)`` where each trajectory
    row is ``(t, femur_stroke, tibia_stroke)``.
    """
    dt = 1.0 / model.update_rate
    femur = LinearActuatorState(src.femur_stroke)
    tibia = LinearActuatorState(src.tibia_stroke)
    femur_target = dst.femur_stroke
    tibia_target = dst.tibia_stroke
    trajectory = [(0.0, femur.length, tibia.length)]
    t = 0.0
    while not (femur.settled(femur_target, model) and tibia.settled(tibia_target, model)):
        actuator_step(femur, femur_target, dt, FEMUR_STROKE, model)
        actuator_step(tibia, tibia_target, dt, TIBIA_STROKE, model)
        t += dt
        trajectory.append((t, femur.length, tibia.length))
        if t > max_duration:
            raise RuntimeError("reconfiguration did not settle")
    return t, trajectory


def calibrate_zero(
    state: LinearActuatorState,
    model: LinearActuatorModel = DEFAULT_ACTUATOR,
) -> tuple[LinearActuatorState, float]:
    """Home one adjuster onto its end stop and zero the stroke coordinate.

    The screw runs at full speed toward the stop; hitting the limit switch
    defines stroke zero.  Returns the zeroed state and the homing time.
    """
    dt = 1.0 / model.update_rate
    t = 0.0
    while state.length > 0.0:
        state.length -= model.max_speed * dt
        t += dt
    state.length = 0.0
    return state, t
