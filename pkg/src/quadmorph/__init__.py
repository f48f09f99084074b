"""Kinematic gait simulation for a quadruped with self-reconfigurable legs.

The package models a four-legged robot whose femur and tibia links carry
slow prismatic length adjusters.  It generates crawl gaits from eight
parameters, solves the leg kinematics, tracks rate-limited servos through a
fixed-timestep walking simulation, and runs seeded experiment grids with
nonparametric statistics over the results.
"""

from .actuation import (
    LinearActuatorModel,
    LinearActuatorState,
    OutOfStroke,
    ServoModel,
    ServoState,
    calibrate_zero,
    actuator_step,
    reconfigure,
    required_joint_speeds,
    servo_step,
)
from .config import Config, ConfigError, default_config, load_config
from .experiments import (
    Cell,
    CellResult,
    DegenerateSamples,
    ExperimentSpec,
    StatsReport,
    holm_correction,
    mann_whitney_u,
    run_matrix,
    summarize,
)
from .gait import (
    BASE_GAIT,
    EXTENDED_GAIT,
    ControlPoints,
    DegenerateSpline,
    GaitParams,
    LegSchedule,
    LoopSpline,
    WagOffset,
    body_targets,
    build_loop_spline,
    derive_control_points,
    foot_target,
    leg_schedule,
    wag_offset,
)
from .kinematics import (
    BodyGeometry,
    FootPoint,
    JointAngles,
    MorphologyConfig,
    SHORT,
    TALL,
    Unreachable,
    forward_kinematics,
    gait_to_hip_frame,
    ground_height,
    inverse_kinematics,
    leg_workspace_contains,
)
from .simulator import (
    Environment,
    EvaluationResult,
    FOOTPATH,
    GARAGE,
    LAB,
    RobotState,
    Simulation,
    SlipModel,
    new_state,
    run_field_protocol,
    run_lab_protocol,
    simulate_step,
)

__version__ = "0.1.0"
