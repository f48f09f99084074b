"""Config loading: presets for morphologies, gaits, environments and runs.

The config is a single YAML file.  Every preset section maps names to the
corresponding dataclass fields; unknown keys are rejected with the dotted
path of the offending entry so typos surface immediately.  The packaged
``data/default.yaml`` ships the calibrated defaults, so every command works
with no config argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .actuation import LinearActuatorModel, ServoModel
from .experiments import Cell, ExperimentSpec
from .gait import GaitParams
from .kinematics import MorphologyConfig
from .simulator import Environment, SlipModel


class ConfigError(ValueError):
    """Malformed config; the message carries the dotted key path."""


@dataclass
class Config:
    morphologies: dict[str, MorphologyConfig] = field(default_factory=dict)
    gaits: dict[str, GaitParams] = field(default_factory=dict)
    environments: dict[str, Environment] = field(default_factory=dict)
    servo: ServoModel = field(default_factory=ServoModel)
    actuator: LinearActuatorModel = field(default_factory=LinearActuatorModel)
    slip_model: SlipModel = field(default_factory=SlipModel)
    experiments: dict[str, ExperimentSpec] = field(default_factory=dict)
    source: str = "<builtin>"


_MORPH_KEYS = {"femur_length": float, "tibia_length": float}
_GAIT_KEYS = {
    "step_length": float,
    "step_height": float,
    "smoothing": float,
    "frequency": float,
    "lift_duration": float,
    "wag_phase": float,
    "wag_amplitude_x": float,
    "wag_amplitude_y": float,
}
_ENV_KEYS = {
    "traction": float,
    "speed_noise_sd": float,
    "contact_z_tolerance": float,
    "demand_sensitivity": float,
}
_SERVO_KEYS = {
    "rated_speed": float,
    "nominal_voltage": float,
    "policy_cap": float,
    "update_rate": float,
}
_ACTUATOR_KEYS = {
    "max_speed": float,
    "tolerance": float,
    "gain": float,
    "update_rate": float,
}
_SLIP_KEYS = {
    "brownout_voltage": float,
    "brownout_base": float,
    "brownout_per_demand": float,
    "demand_ref": float,
}
_EXPERIMENT_KEYS = {
    "protocol": str,
    "environment": str,
    "voltage": float,
    "replicates": int,
    "pairs": list,
    "base_seed": int,
}
_TOP_KEYS = (
    "morphologies", "gaits", "environments", "servo", "actuator",
    "slip_model", "experiments",
)


def _check_mapping(data, allowed: dict, path: str, source: str) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: {path} must be a mapping")
    out = {}
    for key, value in data.items():
        if key not in allowed:
            raise ConfigError(f"{source}: unknown key '{path}.{key}'")
        want = allowed[key]
        try:
            if want is float:
                out[key] = float(value)
            elif want is int:
                out[key] = int(value)
            elif want is str:
                out[key] = str(value)
            else:
                out[key] = value
        except (TypeError, ValueError):
            raise ConfigError(
                f"{source}: {path}.{key} has invalid value {value!r}"
            ) from None
    return out


def _build(cls, data, allowed, path, source):
    kwargs = _check_mapping(data, allowed, path, source)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {path}: {exc}") from None


def _build_experiment(name, data, config: Config, source: str) -> ExperimentSpec:
    kwargs = _check_mapping(data, _EXPERIMENT_KEYS, f"experiments.{name}", source)
    for required in ("protocol", "environment", "voltage", "replicates", "pairs"):
        if required not in kwargs:
            raise ConfigError(
                f"{source}: experiments.{name} missing key '{required}'"
            )
    env_name = kwargs["environment"]
    if env_name not in config.environments:
        raise ConfigError(
            f"{source}: experiments.{name}.environment '{env_name}' is not a preset"
        )
    cells = []
    for i, pair in enumerate(kwargs["pairs"]):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(
                f"{source}: experiments.{name}.pairs[{i}] must be [morphology, gait]"
            )
        morph_name, gait_name = pair
        if morph_name not in config.morphologies:
            raise ConfigError(
                f"{source}: experiments.{name}.pairs[{i}]: unknown morphology "
                f"'{morph_name}'"
            )
        if gait_name not in config.gaits:
            raise ConfigError(
                f"{source}: experiments.{name}.pairs[{i}]: unknown gait "
                f"'{gait_name}'"
            )
        cells.append(Cell(morph_name, gait_name, env_name, kwargs["voltage"]))
    try:
        return ExperimentSpec(
            name=name,
            protocol=kwargs["protocol"],
            cells=tuple(cells),
            replicates=kwargs["replicates"],
            base_seed=kwargs.get("base_seed", 42),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: experiments.{name}: {exc}") from None


def parse_config(data: dict, source: str = "<config>") -> Config:
    """Validate a parsed YAML mapping into a :class:`Config`."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(f"{source}: unknown key '{key}'")
    config = Config(source=source)
    for name, entry in (data.get("morphologies") or {}).items():
        config.morphologies[name] = _build(
            MorphologyConfig, entry, _MORPH_KEYS, f"morphologies.{name}", source
        )
    for name, entry in (data.get("gaits") or {}).items():
        config.gaits[name] = _build(
            GaitParams, entry, _GAIT_KEYS, f"gaits.{name}", source
        )
    for name, entry in (data.get("environments") or {}).items():
        fields = _check_mapping(entry, _ENV_KEYS, f"environments.{name}", source)
        try:
            config.environments[name] = Environment(name=name, **fields)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: environments.{name}: {exc}") from None
    if "servo" in data:
        config.servo = _build(ServoModel, data["servo"], _SERVO_KEYS, "servo", source)
    if "actuator" in data:
        config.actuator = _build(
            LinearActuatorModel, data["actuator"], _ACTUATOR_KEYS, "actuator", source
        )
    if "slip_model" in data:
        config.slip_model = _build(
            SlipModel, data["slip_model"], _SLIP_KEYS, "slip_model", source
        )
    for name, entry in (data.get("experiments") or {}).items():
        config.experiments[name] = _build_experiment(name, entry, config, source)
    return config


def load_config(path: str | Path) -> Config:
    """Load and validate a YAML config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(data or {}, source=str(path))


def default_config() -> Config:
    """The packaged, calibrated default configuration."""
    text = resources.files("quadmorph").joinpath("data/default.yaml").read_text()
    return parse_config(yaml.safe_load(text), source="<default>")
