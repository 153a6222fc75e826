"""Exception types shared across the package."""


class NumericDomainError(ValueError):
    """An input left the numeric domain (non-finite, or out of range)."""


class ConfigError(ValueError):
    """A config file or config value failed validation."""


class NoOscillationError(RuntimeError):
    """The relay experiment produced no usable limit cycle."""


class NotConvergedError(RuntimeError):
    """The relay limit cycle never stabilised within the step budget."""


class InsufficientExperienceError(RuntimeError):
    """The replay buffer holds fewer transitions than one mini-batch."""


class CheckpointError(ValueError):
    """A serialized network stream is malformed, truncated, or corrupt."""
