"""Simulated-stage PID tuning lab: plant, controllers, DQN tuner, benchmarks."""

from .bench import (
    CompareResult,
    ControllerStats,
    EvalRow,
    TrialResult,
    compare_controllers,
    controller_stats,
    evaluate_tuner,
    read_eval_csv,
    rows_to_mm,
    trial_results,
)
from .config import EvalConfig, ExperimentConfig, config_hash, config_lines, load_config
from .control import ControlSession, RolloutResult
from .dqn import (
    ActionCodec,
    EpisodeLog,
    Observation,
    ReplayBuffer,
    RewardParams,
    TrainConfig,
    TrainingReport,
    gaussian_reward,
    observe,
    schedule_reward,
    train_agent,
)
from .errors import (
    CheckpointError,
    ConfigError,
    InsufficientExperienceError,
    NoOscillationError,
    NotConvergedError,
    NumericDomainError,
)
from .fuzzy import FuzzyScale, RuleTable, default_rule_table, fuzzy_adjustment, fuzzy_step, load_rule_table
from .nn import (
    DenseNet,
    adam_update,
    backward,
    forward,
    init_adam,
    init_net,
    load_net,
    load_net_file,
    save_net,
    save_net_file,
)
from .pid import BASE_GAINS, GainBounds, PidGains, PidState, clamp_gains, compute_error, pid_output
from .plant import PlantParams, PlantState, measure, plant_step, reset_plant, stage_energy
from .relay import RelayResult, relay_autotune, ziegler_nichols_table, zn_gains
from .tuners import BasePidTuner, DqnPidTuner, FuzzyPidTuner, ZieglerNicholsTuner

__version__ = "0.1.0"

__all__ = [
    "ActionCodec",
    "BASE_GAINS",
    "BasePidTuner",
    "CheckpointError",
    "CompareResult",
    "ConfigError",
    "ControlSession",
    "ControllerStats",
    "DenseNet",
    "DqnPidTuner",
    "EpisodeLog",
    "EvalConfig",
    "EvalRow",
    "ExperimentConfig",
    "FuzzyPidTuner",
    "FuzzyScale",
    "GainBounds",
    "InsufficientExperienceError",
    "NoOscillationError",
    "NotConvergedError",
    "NumericDomainError",
    "Observation",
    "PidGains",
    "PidState",
    "PlantParams",
    "PlantState",
    "RelayResult",
    "ReplayBuffer",
    "RewardParams",
    "RolloutResult",
    "RuleTable",
    "TrainConfig",
    "TrainingReport",
    "TrialResult",
    "ZieglerNicholsTuner",
    "adam_update",
    "backward",
    "clamp_gains",
    "compare_controllers",
    "compute_error",
    "config_hash",
    "config_lines",
    "controller_stats",
    "default_rule_table",
    "evaluate_tuner",
    "forward",
    "fuzzy_adjustment",
    "fuzzy_step",
    "gaussian_reward",
    "init_adam",
    "init_net",
    "load_config",
    "load_net",
    "load_net_file",
    "load_rule_table",
    "measure",
    "observe",
    "pid_output",
    "plant_step",
    "read_eval_csv",
    "relay_autotune",
    "reset_plant",
    "rows_to_mm",
    "save_net",
    "save_net_file",
    "schedule_reward",
    "stage_energy",
    "train_agent",
    "trial_results",
    "ziegler_nichols_table",
    "zn_gains",
]
