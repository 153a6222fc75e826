"""Discrete PID with clamped integral and bounded, clampable gains.

The derivative term is computed on the error and scaled by d_scale, so the
effective derivative gain is d_scale * kd. The integral accumulator is
clamped symmetrically (anti-windup) before it contributes to the output.
"""

import math
from dataclasses import dataclass, replace

from .errors import NumericDomainError
from .validation import check_finite, check_positive


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float

    def __post_init__(self):
        check_finite("kp", self.kp)
        check_finite("ki", self.ki)
        check_finite("kd", self.kd)

    def as_tuple(self):
        return (self.kp, self.ki, self.kd)


# Default base gains for every tuner before adaptation.
BASE_GAINS = PidGains(1.2, 1.0, 0.01)


@dataclass(frozen=True)
class GainBounds:
    """Per-gain closed intervals; defaults span [0.01, 2x base] per gain."""

    kp_min: float = 0.01
    kp_max: float = 2.4
    ki_min: float = 0.01
    ki_max: float = 2.0
    kd_min: float = 0.001
    kd_max: float = 0.02

    def __post_init__(self):
        for lo_name, hi_name in (("kp_min", "kp_max"), ("ki_min", "ki_max"), ("kd_min", "kd_max")):
            lo = check_positive(lo_name, getattr(self, lo_name))
            hi = check_finite(hi_name, getattr(self, hi_name))
            if hi <= lo:
                raise NumericDomainError(f"{hi_name}={hi} must exceed {lo_name}={lo}")

    def normalize(self, gains: PidGains):
        """Map gains onto [0, 1]^3 by their bound intervals."""
        return (
            (gains.kp - self.kp_min) / (self.kp_max - self.kp_min),
            (gains.ki - self.ki_min) / (self.ki_max - self.ki_min),
            (gains.kd - self.kd_min) / (self.kd_max - self.kd_min),
        )


@dataclass(frozen=True)
class PidState:
    """Controller memory: integral accumulator and previous error."""

    integral: float = 0.0
    prev_error: float = 0.0
    d_scale: float = 0.1
    integral_limit: float = 10.0

    def __post_init__(self):
        check_finite("integral", self.integral)
        check_finite("prev_error", self.prev_error)
        check_finite("d_scale", self.d_scale)
        check_positive("integral_limit", self.integral_limit)


def compute_error(setpoint: float, measured: float) -> float:
    setpoint = check_finite("setpoint", setpoint)
    measured = check_finite("measured", measured)
    return setpoint - measured


def clamp_gains(raw: PidGains, bounds: GainBounds) -> PidGains:
    return PidGains(
        min(max(raw.kp, bounds.kp_min), bounds.kp_max),
        min(max(raw.ki, bounds.ki_min), bounds.ki_max),
        min(max(raw.kd, bounds.kd_min), bounds.kd_max),
    )


def pid_output(gains: PidGains, state: PidState, error: float, dt: float):
    """One controller update; returns (force, next state).

    The integral is accumulated and clamped first, so the clamped value is
    both what the output uses and what the next state carries.
    """
    error = check_finite("error", error)
    if not math.isfinite(dt) or dt <= 0.0:
        raise NumericDomainError(f"dt must be > 0, got {dt!r}")
    integral = state.integral + error * dt
    limit = state.integral_limit
    integral = min(max(integral, -limit), limit)
    derivative = (error - state.prev_error) / dt
    out = gains.kp * error + gains.ki * integral + state.d_scale * gains.kd * derivative
    return out, replace(state, integral=integral, prev_error=error)


def reset_pid(state: PidState) -> PidState:
    """Zero the controller memory, keeping d_scale and the windup limit."""
    return replace(state, integral=0.0, prev_error=0.0)
