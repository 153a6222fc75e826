"""Scikit-learn style estimators wrapping the three gain tuners.

`fit` tunes the controller against the configured plant (relay experiment,
rule-table load, or DQN training). `predict(X)` treats X as a sequence of
setpoint commands issued to one continuously running control session and
returns the settled position after a fixed rollout per command; `score`
is the negative mean absolute tracking error, so larger is better.
Constructor arguments are stored verbatim, which keeps get_params,
set_params, and clone working.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .control import ControlSession
from .dqn import RewardParams, TrainConfig, observe, select_action, apply_action, train_agent
from .fuzzy import FuzzyScale, default_rule_table, fuzzy_step, load_rule_table
from .pid import BASE_GAINS, GainBounds, PidGains, clamp_gains
from .plant import PlantParams
from .relay import relay_autotune, zn_gains
from .validation import as_generator, check_setpoints


@dataclass(frozen=True)
class TrialRow:
    """One setpoint command and its settled outcome (SI units)."""

    step: int
    setpoint: float
    measured: float
    error: float
    kp: float
    ki: float
    kd: float


class BasePidTuner(BaseEstimator):
    """Shared plant/session plumbing for the concrete tuners.

    Parameters
    ----------
    plant : PlantParams or None
        Simulated stage; defaults to PlantParams().
    bounds : GainBounds or None
        Working gain box; defaults to GainBounds().
    base_kp, base_ki, base_kd : float
        Gains every tuner starts from before adaptation.
    d_scale : float
        Scale on the derivative term (effective kd is d_scale * kd).
    integral_limit : float
        Symmetric anti-windup clamp on the error integral.
    rollout_ticks : int
        Control periods each setpoint command is given to settle.
    random_state : None, int, or numpy Generator
        Seeds measurement noise and any stochastic tuning.
    """

    def __init__(
        self,
        plant=None,
        bounds=None,
        base_kp=BASE_GAINS.kp,
        base_ki=BASE_GAINS.ki,
        base_kd=BASE_GAINS.kd,
        d_scale=0.1,
        integral_limit=10.0,
        rollout_ticks=100,
        random_state=None,
    ):
        self.plant = plant
        self.bounds = bounds
        self.base_kp = base_kp
        self.base_ki = base_ki
        self.base_kd = base_kd
        self.d_scale = d_scale
        self.integral_limit = integral_limit
        self.rollout_ticks = rollout_ticks
        self.random_state = random_state

    def _plant(self) -> PlantParams:
        return self.plant if self.plant is not None else PlantParams()

    def _bounds(self) -> GainBounds:
        return self.bounds if self.bounds is not None else GainBounds()

    def _base_gains(self) -> PidGains:
        return PidGains(self.base_kp, self.base_ki, self.base_kd)

    def _check_fitted(self):
        if not hasattr(self, "gains_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted; call fit() first")

    def _start_gains(self) -> PidGains:
        return self.gains_

    def _ticks(self) -> int:
        return self.rollout_ticks

    def _adapt(self, session: ControlSession, setpoint: float, rng):
        """Per-command gain adaptation hook; fixed-gain tuners do nothing."""

    def run_trial(self, setpoints, rng=None):
        """Command each setpoint in turn on a fresh session; return rows."""
        self._check_fitted()
        setpoints = check_setpoints(setpoints)
        rng = as_generator(rng if rng is not None else self.random_state)
        session = ControlSession(
            self._plant(), self._start_gains(), self._bounds(), self.d_scale, self.integral_limit, rng
        )
        rows = []
        for step, sp in enumerate(setpoints):
            sp = float(sp)
            self._adapt(session, sp, rng)
            result = session.rollout(sp, self._ticks())
            g = session.gains
            rows.append(TrialRow(step, sp, result.measured, result.error, g.kp, g.ki, g.kd))
        return rows

    def fit(self, X=None, y=None):
        raise NotImplementedError

    def predict(self, X):
        """Settled measured position for each commanded setpoint in X."""
        return np.array([row.measured for row in self.run_trial(X)])

    def score(self, X, y=None):
        """Negative mean absolute settled error over the command sequence."""
        rows = self.run_trial(X)
        return -float(np.mean([abs(row.error) for row in rows]))


class ZieglerNicholsTuner(BasePidTuner):
    """Relay experiment + classic Ziegler-Nichols table, gains then fixed.

    Attributes after fit: relay_result_ (RelayResult), gains_ (PidGains).
    """

    def __init__(
        self,
        plant=None,
        bounds=None,
        base_kp=BASE_GAINS.kp,
        base_ki=BASE_GAINS.ki,
        base_kd=BASE_GAINS.kd,
        d_scale=0.1,
        integral_limit=10.0,
        rollout_ticks=100,
        random_state=None,
        relay_amplitude=1.0,
        relay_max_steps=200_000,
    ):
        super().__init__(
            plant, bounds, base_kp, base_ki, base_kd, d_scale, integral_limit, rollout_ticks, random_state
        )
        self.relay_amplitude = relay_amplitude
        self.relay_max_steps = relay_max_steps

    def fit(self, X=None, y=None):
        rng = as_generator(self.random_state)
        self.relay_result_ = relay_autotune(
            self._plant(), amplitude=self.relay_amplitude, max_steps=self.relay_max_steps, rng=rng
        )
        self.gains_ = zn_gains(self.relay_result_, self._bounds())
        return self


class FuzzyPidTuner(BasePidTuner):
    """Rule-table gain scheduling from the error and error rate.

    One inference step runs before each setpoint command. Attributes after
    fit: table_ (RuleTable), scale_ (FuzzyScale), gains_ (PidGains).
    """

    def __init__(
        self,
        plant=None,
        bounds=None,
        base_kp=BASE_GAINS.kp,
        base_ki=BASE_GAINS.ki,
        base_kd=BASE_GAINS.kd,
        d_scale=0.1,
        integral_limit=10.0,
        rollout_ticks=100,
        random_state=None,
        rules_path=None,
        error_range=0.2,
        derror_range=2.0,
        kp_step=0.05,
        ki_step=0.05,
        kd_step=0.001,
    ):
        super().__init__(
            plant, bounds, base_kp, base_ki, base_kd, d_scale, integral_limit, rollout_ticks, random_state
        )
        self.rules_path = rules_path
        self.error_range = error_range
        self.derror_range = derror_range
        self.kp_step = kp_step
        self.ki_step = ki_step
        self.kd_step = kd_step

    def fit(self, X=None, y=None):
        self.table_ = (
            load_rule_table(self.rules_path) if self.rules_path is not None else default_rule_table()
        )
        self.scale_ = FuzzyScale(
            self.error_range, self.derror_range, self.kp_step, self.ki_step, self.kd_step
        )
        self.gains_ = clamp_gains(self._base_gains(), self._bounds())
        return self

    def _adapt(self, session: ControlSession, setpoint: float, rng):
        err = setpoint - session.last_measured
        derr = (err - session.pid.prev_error) / session.params.dt
        session.set_gains(
            fuzzy_step(err, derr, session.gains, session.bounds, self.table_, self.scale_)
        )


class DqnPidTuner(BasePidTuner):
    """DQN-trained adaptive tuner.

    fit() runs the full training loop on the configured plant. At predict
    time the greedy policy takes one gain move per setpoint command,
    starting from the trained final gains. Attributes after fit:
    network_, target_network_, report_ (TrainingReport), gains_, config_.
    """

    def __init__(
        self,
        plant=None,
        bounds=None,
        d_scale=0.1,
        integral_limit=10.0,
        rollout_ticks=100,
        random_state=None,
        train_config=None,
        reward_params=None,
    ):
        super().__init__(
            plant,
            bounds,
            d_scale=d_scale,
            integral_limit=integral_limit,
            rollout_ticks=rollout_ticks,
            random_state=random_state,
        )
        self.train_config = train_config
        self.reward_params = reward_params

    def _resolved_config(self) -> TrainConfig:
        if self.train_config is not None:
            return self.train_config
        return TrainConfig(
            d_scale=self.d_scale, integral_limit=self.integral_limit, rollout_ticks=self.rollout_ticks
        )

    def _base_gains(self) -> PidGains:
        return self._resolved_config().base_gains

    def _ticks(self) -> int:
        return self.config_.rollout_ticks if hasattr(self, "config_") else self.rollout_ticks

    def fit(self, X=None, y=None):
        rng = as_generator(self.random_state)
        config = self._resolved_config()
        rewards = self.reward_params if self.reward_params is not None else RewardParams()
        agent, report = train_agent(self._plant(), self._bounds(), config, rewards, rng)
        self.network_ = agent.source
        self.target_network_ = agent.target
        self.report_ = report
        self.config_ = config
        self.reward_params_ = rewards
        self.gains_ = clamp_gains(report.final_gains, self._bounds())
        return self

    def restore(self, network, gains=None):
        """Adopt a trained network (and optionally gains) without training."""
        config = self._resolved_config()
        self.network_ = network
        self.config_ = config
        start = gains if gains is not None else config.base_gains
        self.gains_ = clamp_gains(start, self._bounds())
        return self

    def _adapt(self, session: ControlSession, setpoint: float, rng):
        obs = observe(
            setpoint, session.last_measured, session.pid, session.gains, session.bounds, session.params.dt
        )
        action = select_action(self.network_, obs, 0.0, rng)
        session.set_gains(apply_action(session.gains, action, self.config_.codec, session.bounds))
