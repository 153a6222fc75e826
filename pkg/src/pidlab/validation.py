"""Small input-validation helpers used at public API boundaries."""

import math

import numpy as np

from .errors import NumericDomainError


def check_finite(name, value):
    """Return float(value), rejecting NaN/inf."""
    value = float(value)
    if not math.isfinite(value):
        raise NumericDomainError(f"{name} must be finite, got {value!r}")
    return value


def check_positive(name, value):
    value = check_finite(name, value)
    if value <= 0.0:
        raise NumericDomainError(f"{name} must be > 0, got {value!r}")
    return value


def check_non_negative(name, value):
    value = check_finite(name, value)
    if value < 0.0:
        raise NumericDomainError(f"{name} must be >= 0, got {value!r}")
    return value


def check_setpoints(X):
    """Coerce a setpoint sequence to a 1-D float array of finite values."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    if X.ndim != 1:
        raise NumericDomainError(f"setpoints must be 1-D, got shape {X.shape}")
    if X.size == 0:
        raise NumericDomainError("setpoints must be non-empty")
    if not np.all(np.isfinite(X)):
        raise NumericDomainError("setpoints must be finite")
    return X


def as_generator(random_state):
    """Accept None, an int seed, or a numpy Generator; return a Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)
