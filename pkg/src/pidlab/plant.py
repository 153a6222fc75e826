"""Second-order axial stage with actuation delay and measurement noise.

The stage is a mass-damper-spring driven by a force input:

    u = m*x'' + c*x' + k*x

integrated with semi-implicit Euler, which keeps the discrete energy of the
damped free system non-increasing. Actuation passes through a pure transport
delay implemented as a FIFO of pending inputs. All quantities are SI
(meters, seconds, newtons); position measurements optionally carry additive
Gaussian noise.
"""

import math
from dataclasses import dataclass, field

from .errors import NumericDomainError
from .validation import check_finite, check_non_negative, check_positive

_DELAY_ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class PlantParams:
    """Physical constants of the simulated stage.

    Defaults describe a well-damped bench-top stage: 0.5 kg carriage,
    5 N*s/m damping, 10 N/m return stiffness, 100 Hz control rate, and
    0.1 s of actuation latency.
    """

    mass: float = 0.5
    damping: float = 5.0
    stiffness: float = 10.0
    actuation_delay: float = 0.1
    dt: float = 0.01
    noise_std: float = 0.0

    def __post_init__(self):
        check_positive("mass", self.mass)
        check_non_negative("damping", self.damping)
        check_non_negative("stiffness", self.stiffness)
        check_positive("dt", self.dt)
        check_non_negative("actuation_delay", self.actuation_delay)
        check_non_negative("noise_std", self.noise_std)
        steps = self.actuation_delay / self.dt
        if abs(steps - round(steps)) > _DELAY_ALIGN_TOL * max(1.0, steps):
            raise NumericDomainError(
                f"actuation_delay={self.actuation_delay} is not a whole number "
                f"of dt={self.dt} steps"
            )

    @property
    def delay_steps(self) -> int:
        return int(round(self.actuation_delay / self.dt))


@dataclass(frozen=True)
class PlantState:
    """Instantaneous stage state plus the queue of in-flight inputs."""

    position: float = 0.0
    velocity: float = 0.0
    time: float = 0.0
    delay_line: tuple = ()


def reset_plant(params: PlantParams) -> PlantState:
    """Stage at rest at the origin with an empty (all-zero) delay queue."""
    return PlantState(0.0, 0.0, 0.0, (0.0,) * params.delay_steps)


def plant_step(state: PlantState, u: float, params: PlantParams) -> PlantState:
    """Advance one control period under commanded force u.

    The commanded force enters the back of the delay queue; the force that
    actually reaches the stage this period is the front entry (u itself when
    the delay is zero).
    """
    u = check_finite("u", u)
    if not (math.isfinite(state.position) and math.isfinite(state.velocity)):
        raise NumericDomainError("plant state is non-finite")
    if state.delay_line:
        u_eff = state.delay_line[0]
        line = state.delay_line[1:] + (u,)
    else:
        u_eff = u
        line = state.delay_line
    acc = (u_eff - params.damping * state.velocity - params.stiffness * state.position) / params.mass
    vel = state.velocity + acc * params.dt
    pos = state.position + vel * params.dt
    return PlantState(pos, vel, state.time + params.dt, line)


def measure(state: PlantState, params: PlantParams, rng=None) -> float:
    """Position measurement; exact when noise_std is zero."""
    if params.noise_std == 0.0:
        return state.position
    if rng is None:
        raise NumericDomainError("a Generator is required when noise_std > 0")
    return state.position + rng.normal(0.0, params.noise_std)


def stage_energy(state: PlantState, params: PlantParams) -> float:
    """Kinetic plus spring potential energy of the stage."""
    return 0.5 * params.mass * state.velocity**2 + 0.5 * params.stiffness * state.position**2
