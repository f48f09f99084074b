"""Fixed-timestep kinematic walking simulation and evaluation protocols.

Each step runs the full command chain: gait targets -> inverse kinematics ->
rate-limited servos -> forward kinematics -> ground contact -> body advance.
The body moves by the traction-scaled mean backward sweep of the feet in
contact (a one-dimensional rigid fit along the heading), with each foot's
push capped at its own commanded sweep so a lagging foot catching up cannot
push the body faster than the gait commands.

Two degradation channels sit on top of the pure kinematics:

* the servo speed ceiling (falls with supply voltage), which delays the leg
  lift and distorts tracking, and
* a demand-graded grip model that shrinks the effective traction as supply
  voltage sags below the servo brown-out region and as the surface gets
  harder to grip, scaled by how much mechanical work the gait asks of the
  legs (lever length times foot speed).  Losses from this channel are
  recorded as slip.  Its constants are calibration, fitted once against
  bench measurements and frozen in the default config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actuation import DEFAULT_SERVO, ServoModel, ServoState
from .gait import (
    GaitParams,
    LegSchedule,
    LoopSpline,
    build_loop_spline,
    derive_control_points,
    foot_target,
    leg_schedule,
    wag_offset,
)
from .kinematics import (
    TRAJECTORY_DATUM_DROP,
    FootPoint,
    JointAngles,
    MorphologyConfig,
    forward_kinematics,
    inverse_kinematics,
)

LEGS = ("front_left", "front_right", "rear_left", "rear_right")
LEFT_LEGS = frozenset({"front_left", "rear_left"})

DEFAULT_DT = 1.0 / 60.0


@dataclass(frozen=True)
class Environment:
    """Walking surface abstraction.

    ``traction`` scales body advance directly (1 = high-grip lab carpet).
    ``demand_sensitivity`` grades additional grip loss by how demanding the
    morphology/gait pairing is relative to the reference pairing; harsh
    surfaces punish long levers and fast strides disproportionately.
    """

    name: str
    traction: float
    speed_noise_sd: float
    contact_z_tolerance: float = 10.0
    demand_sensitivity: float = 0.0


#: High-grip carpet, controlled conditions.
LAB = Environment("lab", 1.0, 0.015, 10.0, 0.0)
#: Smooth sealed concrete, much lower grip.
GARAGE = Environment("garage", 0.47646, 0.015, 10.0, 0.12343)
#: Compacted snow, ice and gravel.
FOOTPATH = Environment("footpath", 0.34306, 0.05, 12.0, 1.06738)


@dataclass(frozen=True)
class SlipModel:
    """Calibrated grip degradation from supply sag and surface hardship.

    The demand index of a pairing is total leg length times ideal foot
    speed, normalised by ``demand_ref`` (the reference pairing).  Grip decays
    exponentially in severity; severity has a supply term, active only below
    ``brownout_voltage``, and a surface term from the environment.
    """

    brownout_voltage: float = 11.0
    brownout_base: float = -0.15743
    brownout_per_demand: float = 0.59930
    demand_ref: float = 27981.25  # mm^2/s

    def demand_index(self, gait: GaitParams, morph: MorphologyConfig) -> float:
        lever = morph.femur_length + morph.tibia_length
        return lever * gait.ideal_speed / self.demand_ref

    def severity(
        self, gait: GaitParams, morph: MorphologyConfig, env: Environment, voltage: float
    ) -> float:
        p = self.demand_index(gait, morph)
        sag = max(0.0, self.brownout_voltage - voltage)
        supply = max(0.0, self.brownout_base + self.brownout_per_demand * p) * sag
        surface = max(0.0, env.demand_sensitivity * (p - 1.0))
        return supply + surface

    def grip(
        self, gait: GaitParams, morph: MorphologyConfig, env: Environment, voltage: float
    ) -> float:
        return env.traction * math.exp(-self.severity(gait, morph, env, voltage))


DEFAULT_SLIP = SlipModel()


@dataclass
class RobotState:
    """Mutable walking state owned by one evaluation."""

    clock: float = 0.0
    body_y: float = 0.0  # world frame, mm along the heading
    reverse: bool = False
    joints: dict[str, list[ServoState]] = field(default_factory=dict)
    lengths: dict[str, tuple[float, float]] = field(default_factory=dict)
    feet: dict[str, FootPoint] = field(default_factory=dict)
    commanded_y: dict[str, float] = field(default_factory=dict)
    contacts: dict[str, bool] = field(default_factory=dict)
    steps: int = 0
    joint_steps: int = 0
    saturated_joint_steps: int = 0
    slip_mm: float = 0.0

    @property
    def saturation(self) -> float:
        """Fraction of joint updates that hit the rate limit."""
        return self.saturated_joint_steps / self.joint_steps if self.joint_steps else 0.0


@dataclass
class EvaluationResult:
    """Outcome of one protocol run."""

    achieved_speed: float  # m/min
    distance_m: float
    elapsed_s: float
    timeout: bool
    saturation: float
    slip_mm: float
    seed: int | None = None
    trace: list | None = None


class Simulation:
    """Immutable stepping context for one gait/morphology/environment triple."""

    def __init__(
        self,
        gait: GaitParams,
        morph: MorphologyConfig,
        env: Environment,
        voltage: float,
        *,
        servo: ServoModel | None = None,
        slip: SlipModel | None = None,
        schedule: LegSchedule | None = None,
        dt: float = DEFAULT_DT,
        grip_noise: float = 1.0,
        ground_override: float | None = None,
        validate: bool = True,
    ):
        self.gait = gait
        self.morph = morph
        self.env = env
        self.voltage = voltage
        self.servo = servo or DEFAULT_SERVO
        self.slip = slip or DEFAULT_SLIP
        self.schedule = schedule or leg_schedule(lift_duration=gait.lift_duration)
        self.dt = dt
        self.control_points = derive_control_points(gait, morph, ground=ground_override)
        self.spline = build_loop_spline(self.control_points)
        self.max_joint_step = self.servo.available_rate(voltage) * dt
        self.grip = self.slip.grip(gait, morph, env, voltage) * grip_noise
        # Trajectory-frame ground level and its hip-frame equivalent.
        self.stance_z = self.control_points.p1.z
        self.ground_z = self.stance_z + TRAJECTORY_DATUM_DROP
        self.chord_step = gait.ideal_speed * dt
        if validate:
            self._validate_workspace()

    def _validate_workspace(self, samples: int = 200):
        """Reject pairings whose commanded path leaves the leg workspace."""
        wx = self.gait.wag_amplitude_x / 2.0
        wy = self.gait.wag_amplitude_y / 2.0
        for i in range(samples):
            t = i * self.gait.period / samples
            p = foot_target(t, 0.0, self.gait, self.spline)
            for sx in (-wx, wx):
                for sy in (-wy, wy):
                    target = FootPoint(
                        p.x + sx, p.y + sy, p.z + TRAJECTORY_DATUM_DROP
                    )
                    inverse_kinematics(target, self.morph)

    def _commanded(self, t: float, reverse: bool) -> dict[str, FootPoint]:
        """Body-frame foot commands at time ``t`` (wag applied to all legs)."""
        w = wag_offset(t, self.gait)
        out = {}
        for leg, off in self.schedule:
            p = foot_target(t, off, self.gait, self.spline)
            y = -p.y if reverse else p.y
            out[leg] = FootPoint(p.x + w.wx, y + w.wy, p.z)
        return out

    def initial_state(self) -> RobotState:
        state = RobotState()
        commands = self._commanded(0.0, reverse=False)
        for leg in LEGS:
            target = commands[leg]
            angles = inverse_kinematics(self._to_leg_frame(leg, target), self.morph)
            state.joints[leg] = [
                ServoState(angle=a, commanded=a) for a in angles
            ]
            state.lengths[leg] = (self.morph.femur_length, self.morph.tibia_length)
            foot = self._to_body_frame(leg, forward_kinematics(angles, self.morph))
            state.feet[leg] = foot
            state.commanded_y[leg] = target.y
            state.contacts[leg] = abs(foot.z - self.ground_z) <= self.env.contact_z_tolerance
        return state

    def _to_leg_frame(self, leg: str, p: FootPoint) -> FootPoint:
        """Body-frame target -> this leg's hip frame (left legs mirror x)."""
        x = -p.x if leg in LEFT_LEGS else p.x
        return FootPoint(x, p.y, p.z + TRAJECTORY_DATUM_DROP)

    def _to_body_frame(self, leg: str, p: FootPoint) -> FootPoint:
        x = -p.x if leg in LEFT_LEGS else p.x
        return FootPoint(x, p.y, p.z)

    def step(self, state: RobotState) -> RobotState:
        """Advance one control period."""
        t_next = state.clock + self.dt
        commands = self._commanded(t_next, state.reverse)
        wy_prev = wag_offset(state.clock, self.gait).wy
        entry_y = self.control_points.p1.y
        pushes = []
        slip = 0.0
        for leg in LEGS:
            target = commands[leg]
            angles = inverse_kinematics(self._to_leg_frame(leg, target), self.morph)
            servos = state.joints[leg]
            for servo, cmd in zip(servos, angles):
                err = cmd - servo.angle
                servo.commanded = cmd
                servo.steps += 1
                if abs(err) <= self.max_joint_step:
                    servo.angle = cmd
                else:
                    servo.angle += math.copysign(self.max_joint_step, err)
                    servo.saturated_steps += 1
                    state.saturated_joint_steps += 1
                state.joint_steps += 1
            actual = forward_kinematics(
                JointAngles(servos[0].angle, servos[1].angle, servos[2].angle),
                self.morph,
            )
            foot = self._to_body_frame(leg, actual)
            contact = abs(foot.z - self.ground_z) <= self.env.contact_z_tolerance
            # A foot transmits push only while commanded onto the ground: a
            # foot sliding during its commanded lift (late lander, dragged
            # toe) is slipping, not propelling.
            commanded_down = target.z <= self.stance_z + 1e-9
            if contact and commanded_down:
                swept = state.feet[leg].y - foot.y
                # Commanded stance sweep; on the landing step, clamp the
                # previous command to the stance entry point so the airborne
                # approach does not count as propulsion.
                if state.reverse:
                    prev_cmd = max(state.commanded_y[leg], -entry_y + wy_prev)
                    commanded_sweep = prev_cmd - target.y
                    push = max(swept, min(commanded_sweep, 0.0))
                else:
                    prev_cmd = min(state.commanded_y[leg], entry_y + wy_prev)
                    commanded_sweep = prev_cmd - target.y
                    push = min(swept, max(commanded_sweep, 0.0))
                pushes.append((swept, push))
            state.feet[leg] = foot
            state.commanded_y[leg] = target.y
            state.contacts[leg] = contact
        if pushes:
            advance = self.grip * sum(p for _, p in pushes) / len(pushes)
            for swept, _ in pushes:
                slip += abs(advance - swept)
        else:
            advance = 0.0
        state.body_y += advance
        state.slip_mm += slip
        state.steps += 1
        state.clock = t_next
        return state


_CONTEXT_CACHE: dict = {}


def simulate_step(
    state: RobotState,
    gait: GaitParams,
    morph: MorphologyConfig,
    env: Environment,
    voltage: float,
    dt: float = DEFAULT_DT,
    **kwargs,
) -> RobotState:
    """Single-step entry point; contexts are cached across calls."""
    key = (gait, morph, env, voltage, dt, tuple(sorted(kwargs.items())))
    sim = _CONTEXT_CACHE.get(key)
    if sim is None:
        sim = Simulation(gait, morph, env, voltage, dt=dt, **kwargs)
        _CONTEXT_CACHE[key] = sim
    return sim.step(state)


def new_state(
    gait: GaitParams,
    morph: MorphologyConfig,
    env: Environment,
    voltage: float,
    dt: float = DEFAULT_DT,
    **kwargs,
) -> RobotState:
    """Fresh standing state with all feet at their commanded poses."""
    return Simulation(gait, morph, env, voltage, dt=dt, **kwargs).initial_state()


def _noise_factor(env: Environment, seed: int | None, noise: bool) -> float:
    if not noise or seed is None:
        return 1.0
    rng = np.random.default_rng(seed)
    return float(math.exp(rng.normal(0.0, env.speed_noise_sd)))


def _trace_row(state: RobotState) -> tuple:
    return (
        state.clock,
        state.body_y,
        *(1 if state.contacts[leg] else 0 for leg in LEGS),
        state.saturation,
        state.slip_mm,
    )


TRACE_HEADER = (
    "t,body_y,contact_front_left,contact_front_right,contact_rear_left,"
    "contact_rear_right,saturation,slip_mm"
)


def run_lab_protocol(
    gait: GaitParams,
    morph: MorphologyConfig,
    env: Environment,
    voltage: float,
    seed: int | None = None,
    *,
    noise: bool = True,
    timeout: float = 120.0,
    leg_distance: float = 1500.0,
    dt: float = DEFAULT_DT,
    trace: bool = False,
    servo: ServoModel | None = None,
    slip: SlipModel | None = None,
) -> EvaluationResult:
    """Out-and-back run: walk ``leg_distance`` forward, mirror, walk back.

    The gait flips to its mirrored stride the moment the outbound distance
    is covered; no dwell is inserted, so the turn-around transient counts
    against the clock.  Hitting ``timeout`` reports the partial distance
    with the timeout flag set.
    """
    factor = _noise_factor(env, seed, noise)
    sim = Simulation(
        gait, morph, env, voltage,
        servo=servo, slip=slip, dt=dt, grip_noise=factor,
    )
    state = sim.initial_state()
    rows = [_trace_row(state)] if trace else None
    y_turn = None
    timed_out = False
    while True:
        if state.clock >= timeout:
            timed_out = True
            break
        sim.step(state)
        if trace:
            rows.append(_trace_row(state))
        if y_turn is None:
            if state.body_y >= leg_distance:
                y_turn = state.body_y
                state.reverse = True
        elif state.body_y <= 0.0:
            break
    if y_turn is None:
        distance = max(state.body_y, 0.0)
    else:
        distance = y_turn + (y_turn - state.body_y)
    elapsed = state.clock
    speed = (distance / elapsed) * 0.06 if elapsed > 0 else 0.0
    return EvaluationResult(
        achieved_speed=speed,
        distance_m=distance / 1000.0,
        elapsed_s=elapsed,
        timeout=timed_out,
        saturation=state.saturation,
        slip_mm=state.slip_mm,
        seed=seed,
        trace=rows,
    )


def run_field_protocol(
    gait: GaitParams,
    morph: MorphologyConfig,
    env: Environment,
    voltage: float,
    seed: int | None = None,
    *,
    noise: bool = True,
    duration: float = 30.0,
    dt: float = DEFAULT_DT,
    trace: bool = False,
    servo: ServoModel | None = None,
    slip: SlipModel | None = None,
) -> EvaluationResult:
    """Timed forward run: net displacement over ``duration`` seconds."""
    factor = _noise_factor(env, seed, noise)
    sim = Simulation(
        gait, morph, env, voltage,
        servo=servo, slip=slip, dt=dt, grip_noise=factor,
    )
    state = sim.initial_state()
    rows = [_trace_row(state)] if trace else None
    steps = round(duration / dt)
    for _ in range(steps):
        sim.step(state)
        if trace:
            rows.append(_trace_row(state))
    distance = max(state.body_y, 0.0)
    speed = (distance / state.clock) * 0.06 if state.clock > 0 else 0.0
    return EvaluationResult(
        achieved_speed=speed,
        distance_m=distance / 1000.0,
        elapsed_s=state.clock,
        timeout=False,
        saturation=state.saturation,
        slip_mm=state.slip_mm,
        seed=seed,
        trace=rows,
    )
