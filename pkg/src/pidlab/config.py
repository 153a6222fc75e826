"""Flat key=value experiment configuration.

One dotted key per line, '#' starts a comment, values are parsed by a
per-key converter from a fixed registry. Unknown keys are a hard error:
a misspelled knob must never silently fall back to its default. The
canonical sorted key=value rendering doubles as the hash input, so two
runs agree on config_hash exactly when every knob agrees.
"""

import hashlib
from dataclasses import dataclass, field

from .dqn import RewardParams, TrainConfig
from .errors import ConfigError
from .fuzzy import FuzzyScale
from .pid import GainBounds
from .plant import PlantParams


@dataclass(frozen=True)
class EvalConfig:
    """Shape of the benchmark: trials x setpoints, both drawn per trial."""

    trials: int = 10
    setpoints: int = 100
    setpoint_mean: float = 0.1
    setpoint_std: float = 0.05

    def __post_init__(self):
        if self.trials < 1 or self.setpoints < 1:
            raise ConfigError("eval.trials and eval.setpoints must be at least 1")


@dataclass(frozen=True)
class ExperimentConfig:
    plant: PlantParams = field(default_factory=PlantParams)
    bounds: GainBounds = field(default_factory=GainBounds)
    train: TrainConfig = field(default_factory=TrainConfig)
    rewards: RewardParams = field(default_factory=RewardParams)
    fuzzy_scale: FuzzyScale = field(default_factory=FuzzyScale)
    eval: EvalConfig = field(default_factory=EvalConfig)
    fuzzy_rules_path: str = ""
    relay_amplitude: float = 1.0
    relay_max_steps: int = 200_000
    seed: int = 0


def _parse_int(text: str) -> int:
    return int(text, 10)


def _parse_float(text: str) -> float:
    value = float(text)
    return value


def _parse_str(text: str) -> str:
    return text


def _parse_int_tuple(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty list")
    return tuple(int(p, 10) for p in parts)


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# key -> (config group, dataclass field, converter); "" group marks a
# top-level ExperimentConfig field.
_REGISTRY = {
    "plant.mass": ("plant", "mass", _parse_float),
    "plant.damping": ("plant", "damping", _parse_float),
    "plant.stiffness": ("plant", "stiffness", _parse_float),
    "plant.actuation_delay": ("plant", "actuation_delay", _parse_float),
    "plant.dt": ("plant", "dt", _parse_float),
    "plant.noise_std": ("plant", "noise_std", _parse_float),
    "pid.kp_min": ("bounds", "kp_min", _parse_float),
    "pid.kp_max": ("bounds", "kp_max", _parse_float),
    "pid.ki_min": ("bounds", "ki_min", _parse_float),
    "pid.ki_max": ("bounds", "ki_max", _parse_float),
    "pid.kd_min": ("bounds", "kd_min", _parse_float),
    "pid.kd_max": ("bounds", "kd_max", _parse_float),
    "pid.base_kp": ("train", "base_kp", _parse_float),
    "pid.base_ki": ("train", "base_ki", _parse_float),
    "pid.base_kd": ("train", "base_kd", _parse_float),
    "pid.d_scale": ("train", "d_scale", _parse_float),
    "pid.integral_limit": ("train", "integral_limit", _parse_float),
    "agent.episodes": ("train", "episodes", _parse_int),
    "agent.steps_per_episode": ("train", "steps_per_episode", _parse_int),
    "agent.batch_size": ("train", "batch_size", _parse_int),
    "agent.gamma": ("train", "gamma", _parse_float),
    "agent.sync_interval": ("train", "sync_interval", _parse_int),
    "agent.learning_rate": ("train", "learning_rate", _parse_float),
    "agent.epsilon_start": ("train", "epsilon_start", _parse_float),
    "agent.epsilon_end": ("train", "epsilon_end", _parse_float),
    "agent.exploration_steps": ("train", "exploration_steps", _parse_int),
    "agent.buffer_capacity": ("train", "buffer_capacity", _parse_int),
    "agent.warmup_steps": ("train", "warmup_steps", _parse_int),
    "agent.rollout_ticks": ("train", "rollout_ticks", _parse_int),
    "agent.setpoint_mean": ("train", "setpoint_mean", _parse_float),
    "agent.setpoint_std": ("train", "setpoint_std", _parse_float),
    "agent.hidden_sizes": ("train", "hidden_sizes", _parse_int_tuple),
    "agent.kp_step": ("train", "kp_step", _parse_float),
    "agent.ki_step": ("train", "ki_step", _parse_float),
    "agent.kd_step": ("train", "kd_step", _parse_float),
    "reward.sigma_sq": ("rewards", "sigma_sq", _parse_float),
    "reward.target_error": ("rewards", "target_error", _parse_float),
    "reward.fastconv_fraction": ("rewards", "fastconv_fraction", _parse_float),
    "reward.fast_bonus": ("rewards", "fast_bonus", _parse_float),
    "reward.reach_bonus": ("rewards", "reach_bonus", _parse_float),
    "reward.far_penalty": ("rewards", "far_penalty", _parse_float),
    "reward.miss_penalty": ("rewards", "miss_penalty", _parse_float),
    "reward.lag_penalty": ("rewards", "lag_penalty", _parse_float),
    "fuzzy.error_range": ("fuzzy_scale", "error_range", _parse_float),
    "fuzzy.derror_range": ("fuzzy_scale", "derror_range", _parse_float),
    "fuzzy.kp_step": ("fuzzy_scale", "kp_step", _parse_float),
    "fuzzy.ki_step": ("fuzzy_scale", "ki_step", _parse_float),
    "fuzzy.kd_step": ("fuzzy_scale", "kd_step", _parse_float),
    "fuzzy.rules_path": ("", "fuzzy_rules_path", _parse_str),
    "relay.amplitude": ("", "relay_amplitude", _parse_float),
    "relay.max_steps": ("", "relay_max_steps", _parse_int),
    "eval.trials": ("eval", "trials", _parse_int),
    "eval.setpoints": ("eval", "setpoints", _parse_int),
    "eval.setpoint_mean": ("eval", "setpoint_mean", _parse_float),
    "eval.setpoint_std": ("eval", "setpoint_std", _parse_float),
    "seed": ("", "seed", _parse_int),
}

_GROUP_TYPES = {
    "plant": PlantParams,
    "bounds": GainBounds,
    "train": TrainConfig,
    "rewards": RewardParams,
    "fuzzy_scale": FuzzyScale,
    "eval": EvalConfig,
}


def parse_overrides(text: str) -> dict:
    """Parse key=value lines into {registry key: typed value}."""
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _REGISTRY:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        _, _, convert = _REGISTRY[key]
        try:
            overrides[key] = convert(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r} ({exc})") from None
    return overrides


def build_config(overrides: dict) -> ExperimentConfig:
    """Assemble an ExperimentConfig from typed overrides on the defaults."""
    by_group = {name: {} for name in _GROUP_TYPES}
    top = {}
    for key, value in overrides.items():
        group, attr, _ = _REGISTRY[key]
        if group:
            by_group[group][attr] = value
        else:
            top[attr] = value
    try:
        parts = {name: cls(**by_group[name]) for name, cls in _GROUP_TYPES.items()}
        return ExperimentConfig(**parts, **top)
    except (ValueError, ConfigError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path=None, seed=None) -> ExperimentConfig:
    """Read a config file (optional) and apply a seed override (optional)."""
    overrides = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            overrides = parse_overrides(fh.read())
    if seed is not None:
        overrides["seed"] = int(seed)
    return build_config(overrides)


def config_lines(config: ExperimentConfig) -> list:
    """Canonical sorted key=value rendering of every knob."""
    lines = []
    for key in sorted(_REGISTRY):
        group, attr, _ = _REGISTRY[key]
        holder = getattr(config, group) if group else config
        lines.append(f"{key}={_fmt(getattr(holder, attr))}")
    return lines


def config_hash(config: ExperimentConfig) -> str:
    """12 hex chars identifying the full knob set."""
    blob = "\n".join(config_lines(config)).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]
