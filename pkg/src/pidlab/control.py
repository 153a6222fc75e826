"""A stateful control-loop session shared by training and evaluation.

The session owns the plant state, the PID memory, and the current gains,
and advances them through fixed-horizon rollouts toward a commanded
setpoint. Gains set through the session are always clamped to the bounds.
"""

from dataclasses import dataclass

from .pid import GainBounds, PidGains, PidState, clamp_gains, compute_error, pid_output, reset_pid
from .plant import PlantParams, measure, plant_step, reset_plant


@dataclass(frozen=True)
class RolloutResult:
    measured: float
    error: float


class ControlSession:
    def __init__(
        self,
        plant_params: PlantParams,
        gains: PidGains,
        bounds: GainBounds,
        d_scale: float = 0.1,
        integral_limit: float = 10.0,
        rng=None,
    ):
        self.params = plant_params
        self.bounds = bounds
        self.initial_gains = clamp_gains(gains, bounds)
        self._pid_template = PidState(d_scale=d_scale, integral_limit=integral_limit)
        self.rng = rng
        self.reset()

    def reset(self):
        """Plant at rest, controller memory zeroed, gains back to initial."""
        self.plant = reset_plant(self.params)
        self.pid = reset_pid(self._pid_template)
        self.gains = self.initial_gains
        self.last_measured = measure(self.plant, self.params, self.rng)

    def set_gains(self, gains: PidGains):
        self.gains = clamp_gains(gains, self.bounds)

    def rollout(self, setpoint: float, ticks: int) -> RolloutResult:
        """Run the closed loop for `ticks` control periods at a setpoint."""
        plant, pid = self.plant, self.pid
        params, gains = self.params, self.gains
        for _ in range(ticks):
            measured = measure(plant, params, self.rng)
            err = compute_error(setpoint, measured)
            force, pid = pid_output(gains, pid, err, params.dt)
            plant = plant_step(plant, force, params)
        self.plant, self.pid = plant, pid
        self.last_measured = measure(plant, params, self.rng)
        return RolloutResult(self.last_measured, compute_error(setpoint, self.last_measured))
