"""Relay autotuning experiment and the classic Ziegler-Nichols PID table.

A symmetric relay of amplitude h replaces the controller: the commanded
force is +h when the tracking error is non-negative and -h otherwise. Once
the induced limit cycle settles, the ultimate gain and period follow from

    Ku = 4h / (pi * a),    Tu = limit-cycle period,

with a the oscillation amplitude around the setpoint. Zero crossings are
refined by linear interpolation so period estimates are not quantised to
the control period.
"""

from dataclasses import dataclass

from .errors import NoOscillationError, NotConvergedError
from .pid import GainBounds, PidGains, clamp_gains
from .plant import PlantParams, measure, plant_step, reset_plant
from .validation import check_finite, check_positive

_PI = 3.141592653589793

# A "limit cycle" at a handful of samples per period is sampling chatter
# (sliding mode), not an oscillation the estimate can use.
_CHATTER_PERIOD_SAMPLES = 5


@dataclass(frozen=True)
class RelayResult:
    ultimate_gain: float
    ultimate_period: float
    amplitude: float
    relay_amplitude: float


def relay_autotune(
    params: PlantParams,
    amplitude: float = 1.0,
    setpoint: float = 0.0,
    max_steps: int = 200_000,
    period_tol: float = 0.02,
    rng=None,
) -> RelayResult:
    """Run the relay experiment until the limit cycle stabilises.

    Convergence requires the last three full-period estimates to agree
    within period_tol. Raises NoOscillationError when no usable cycle
    appears (too few crossings, vanishing amplitude, or chatter at the
    sampling rate) and NotConvergedError when the period estimates never
    settle inside the step budget.
    """
    h = check_positive("amplitude", amplitude)
    setpoint = check_finite("setpoint", setpoint)

    state = reset_plant(params)
    dt = params.dt
    prev_err = None
    prev_sign = None
    crossings = []  # (time, direction) with direction = sign after the crossing
    half_peaks = []  # max |deviation| seen between consecutive crossings
    current_peak = 0.0
    periods = []

    for _ in range(max_steps):
        measured = measure(state, params, rng)
        err = setpoint - measured
        sign = 1.0 if err >= 0.0 else -1.0
        current_peak = max(current_peak, abs(measured - setpoint))

        if prev_sign is not None and sign != prev_sign and prev_err is not None:
            # interpolate the error zero crossing inside the last interval
            frac = abs(prev_err) / (abs(prev_err) + abs(err)) if (abs(prev_err) + abs(err)) > 0 else 0.5
            t_cross = state.time - dt + frac * dt
            crossings.append((t_cross, sign))
            half_peaks.append(current_peak)
            current_peak = 0.0
            if len(crossings) >= 3:
                periods.append(crossings[-1][0] - crossings[-3][0])
            if len(periods) >= 5:
                window = periods[-3:]
                lo, hi = min(window), max(window)
                if lo > 0.0 and (hi - lo) / lo <= period_tol:
                    tu = sum(window) / len(window)
                    if tu < _CHATTER_PERIOD_SAMPLES * dt:
                        raise NoOscillationError(
                            f"limit cycle period {tu:.6g} s is sampling chatter at dt={dt}"
                        )
                    a = sum(half_peaks[-6:]) / len(half_peaks[-6:])
                    if a <= max(10.0 * params.noise_std, 1e-12):
                        raise NoOscillationError(
                            f"oscillation amplitude {a:.6g} m is indistinguishable from noise"
                        )
                    return RelayResult(4.0 * h / (_PI * a), tu, a, h)

        state = plant_step(state, h * sign, params)
        prev_err = err
        prev_sign = sign

    if len(periods) < 3:
        raise NoOscillationError(
            f"no sustained oscillation within {max_steps} steps ({len(crossings)} crossings)"
        )
    raise NotConvergedError(
        f"period estimates did not settle within {period_tol:.0%} over {max_steps} steps"
    )


def ziegler_nichols_table(ultimate_gain: float, ultimate_period: float) -> PidGains:
    """Classic ZN PID row: kp = 0.6 Ku, Ti = Tu/2, Td = Tu/8 (unclamped)."""
    ku = check_positive("ultimate_gain", ultimate_gain)
    tu = check_positive("ultimate_period", ultimate_period)
    kp = 0.6 * ku
    return PidGains(kp, kp / (tu / 2.0), kp * (tu / 8.0))


def zn_gains(result: RelayResult, bounds: GainBounds = GainBounds()) -> PidGains:
    """ZN table gains from a relay result, clamped into the working bounds."""
    return clamp_gains(ziegler_nichols_table(result.ultimate_gain, result.ultimate_period), bounds)
