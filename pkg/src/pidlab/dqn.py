"""DQN gain tuner: observation/action coding, rewards, replay, training.

The agent observes (error, error rate, error integral, normalised gains),
picks one of 27 discrete gain moves ({-step, 0, +step} per gain), and is
scored after a fixed closed-loop rollout by a dense Gaussian tracking term
plus a sparse convergence schedule. Episodes command one setpoint each;
the replay buffer, target network, and optimizer persist across episodes.
"""

import math
from dataclasses import dataclass

import numpy as np

from .control import ControlSession
from .errors import InsufficientExperienceError, NumericDomainError
from .nn import clone_net, forward, init_adam, init_net, save_net, adam_update, backward
from .pid import BASE_GAINS, GainBounds, PidGains, clamp_gains
from .plant import PlantParams
from .validation import as_generator, check_finite

OBSERVATION_DIM = 6
N_ACTIONS = 27

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RewardParams:
    """Gaussian shaping plus the five-branch convergence schedule.

    The schedule brackets the absolute settled error against the target:
    below target with fast convergence, below target, beyond 10x target,
    beyond 1.5x target, and everything between.
    """

    # sigma is matched to the commanded-displacement scale (~0.1 m) so the
    # dense term still has a usable gradient across the whole error range
    sigma_sq: float = 0.005
    target_error: float = 1e-5
    fastconv_fraction: float = 0.8
    fast_bonus: float = 5.0
    reach_bonus: float = 1.0
    far_penalty: float = -5.0
    miss_penalty: float = -1.5
    lag_penalty: float = -1.0

    def __post_init__(self):
        if self.sigma_sq <= 0.0:
            raise NumericDomainError(f"sigma_sq must be > 0, got {self.sigma_sq}")
        if self.target_error <= 0.0:
            raise NumericDomainError(f"target_error must be > 0, got {self.target_error}")
        if not 0.0 < self.fastconv_fraction <= 1.0:
            raise NumericDomainError("fastconv_fraction must be in (0, 1]")


def gaussian_reward(x_t: float, x_req: float, sigma_sq: float = 1.0) -> float:
    """Dense tracking reward, peaking at 1/(2*pi*sigma^2) for zero error."""
    x_t = check_finite("x_t", x_t)
    x_req = check_finite("x_req", x_req)
    if sigma_sq <= 0.0:
        raise NumericDomainError(f"sigma_sq must be > 0, got {sigma_sq}")
    return math.exp(-((x_t - x_req) ** 2) / (2.0 * sigma_sq)) / (_TWO_PI * sigma_sq)


def schedule_reward(
    x_t: float,
    x_req: float,
    step: int,
    step_budget: int,
    converged_step: int,
    params: RewardParams,
) -> float:
    """Sparse convergence schedule; branch priority is fixed."""
    err = abs(check_finite("x_req", x_req) - check_finite("x_t", x_t))
    target = params.target_error
    fast = converged_step <= params.fastconv_fraction * step_budget
    if err < target and fast:
        return params.fast_bonus
    if err < target:
        return params.reach_bonus
    if err > 10.0 * target:
        return params.far_penalty
    if err > 1.5 * target:
        return params.miss_penalty
    return params.lag_penalty


@dataclass(frozen=True)
class Observation:
    """Agent input: tracking features plus bound-normalised gains."""

    error: float
    derror: float
    ierror: float
    kp_norm: float
    ki_norm: float
    kd_norm: float

    def to_vector(self) -> np.ndarray:
        return np.array(
            [self.error, self.derror, self.ierror, self.kp_norm, self.ki_norm, self.kd_norm]
        )


def observe(setpoint, measured, pid_state, gains: PidGains, bounds: GainBounds, dt) -> Observation:
    err = check_finite("setpoint", setpoint) - check_finite("measured", measured)
    kp_n, ki_n, kd_n = bounds.normalize(gains)
    return Observation(err, (err - pid_state.prev_error) / dt, pid_state.integral, kp_n, ki_n, kd_n)


@dataclass(frozen=True)
class ActionCodec:
    """Index <-> per-gain delta for the 3x3x3 discrete action set."""

    kp_step: float = 0.05
    ki_step: float = 0.05
    kd_step: float = 0.001

    def decode(self, index: int):
        if not 0 <= index < N_ACTIONS:
            raise NumericDomainError(f"action index {index} outside [0, {N_ACTIONS})")
        lp, rem = divmod(index, 9)
        li, ld = divmod(rem, 3)
        return ((lp - 1) * self.kp_step, (li - 1) * self.ki_step, (ld - 1) * self.kd_step)

    def encode(self, lp: int, li: int, ld: int) -> int:
        for level in (lp, li, ld):
            if level not in (-1, 0, 1):
                raise NumericDomainError(f"action level {level} not in {{-1, 0, 1}}")
        return (lp + 1) * 9 + (li + 1) * 3 + (ld + 1)


def apply_action(gains: PidGains, index: int, codec: ActionCodec, bounds: GainBounds) -> PidGains:
    dkp, dki, dkd = codec.decode(index)
    return clamp_gains(PidGains(gains.kp + dkp, gains.ki + dki, gains.kd + dkd), bounds)


def select_action(net, observation: Observation, epsilon: float, rng) -> int:
    """Epsilon-greedy over the Q-row; ties resolve to the lowest index."""
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(N_ACTIONS))
    q, _ = forward(net, observation.to_vector())
    return int(np.argmax(q))


@dataclass(frozen=True)
class Experience:
    state: Observation
    action: int
    reward: float
    next_state: Observation
    terminal: bool


class ReplayBuffer:
    """Fixed-capacity ring; eviction is strictly oldest-first."""

    def __init__(self, capacity: int = 10_000):
        if capacity < 1:
            raise NumericDomainError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._items = []
        self._next = 0

    def __len__(self):
        return len(self._items)

    def push(self, experience: Experience):
        if len(self._items) < self.capacity:
            self._items.append(experience)
        else:
            self._items[self._next] = experience
        self._next = (self._next + 1) % self.capacity

    def snapshot(self):
        """Contents oldest to newest."""
        if len(self._items) < self.capacity:
            return list(self._items)
        return self._items[self._next :] + self._items[: self._next]

    def sample(self, batch_size: int, rng):
        """Uniform sample with replacement."""
        if len(self._items) < batch_size:
            raise InsufficientExperienceError(
                f"buffer holds {len(self._items)} < batch size {batch_size}"
            )
        idx = rng.integers(0, len(self._items), size=batch_size)
        return [self._items[i] for i in idx]


def dqn_target(reward: float, next_state: Observation, target_net, gamma: float, terminal: bool) -> float:
    """Bellman regression target; bootstrap is cut at terminal transitions."""
    if terminal:
        return reward
    q, _ = forward(target_net, next_state.to_vector())
    return reward + gamma * float(np.max(q))


def sync_target(source, target, step: int, interval: int):
    """Copy the source net into the target every `interval` global steps."""
    if interval < 1:
        raise NumericDomainError(f"sync interval must be >= 1, got {interval}")
    return clone_net(source) if step % interval == 0 else target


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 20
    steps_per_episode: int = 100
    batch_size: int = 32
    gamma: float = 0.85
    sync_interval: int = 50
    learning_rate: float = 0.005
    epsilon_start: float = 1.0
    epsilon_end: float = 0.01
    exploration_steps: int = 800
    buffer_capacity: int = 10_000
    warmup_steps: int = 10
    rollout_ticks: int = 100
    setpoint_mean: float = 0.1
    setpoint_std: float = 0.05
    hidden_sizes: tuple = (64, 64, 32)
    kp_step: float = 0.05
    ki_step: float = 0.05
    kd_step: float = 0.001
    base_kp: float = BASE_GAINS.kp
    base_ki: float = BASE_GAINS.ki
    base_kd: float = BASE_GAINS.kd
    d_scale: float = 0.1
    integral_limit: float = 10.0

    def __post_init__(self):
        if self.episodes < 1 or self.steps_per_episode < 1 or self.rollout_ticks < 1:
            raise NumericDomainError("episodes, steps_per_episode, rollout_ticks must be >= 1")
        if not 0.0 <= self.gamma < 1.0:
            raise NumericDomainError(f"gamma must be in [0, 1), got {self.gamma}")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise NumericDomainError("need batch_size >= 1 and buffer_capacity >= batch_size")
        if self.sync_interval < 1 or self.exploration_steps < 1:
            raise NumericDomainError("sync_interval and exploration_steps must be >= 1")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise NumericDomainError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if not 0 <= self.warmup_steps < self.steps_per_episode:
            raise NumericDomainError("warmup_steps must be < steps_per_episode")
        if self.setpoint_std < 0.0:
            raise NumericDomainError("setpoint_std must be >= 0")

    @property
    def base_gains(self) -> PidGains:
        return PidGains(self.base_kp, self.base_ki, self.base_kd)

    @property
    def codec(self) -> ActionCodec:
        return ActionCodec(self.kp_step, self.ki_step, self.kd_step)


def epsilon_at(step: int, config: TrainConfig) -> float:
    """Linear exploration decay in the global step."""
    frac = min(max(step, 0) / config.exploration_steps, 1.0)
    return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac


@dataclass
class AgentState:
    """Everything that persists across episodes."""

    source: object
    target: object
    opt: object
    buffer: ReplayBuffer
    global_step: int = 0


def init_agent(config: TrainConfig, rng=None) -> AgentState:
    rng = as_generator(rng)
    net = init_net([OBSERVATION_DIM, *config.hidden_sizes, N_ACTIONS], rng)
    return AgentState(
        source=net,
        target=clone_net(net),
        opt=init_adam(net, learning_rate=config.learning_rate),
        buffer=ReplayBuffer(config.buffer_capacity),
    )


def train_step(source, target, buffer: ReplayBuffer, opt, config: TrainConfig, rng):
    """One mini-batch update; gradient flows only through taken actions."""
    batch = buffer.sample(config.batch_size, rng)
    states = np.stack([e.state.to_vector() for e in batch])
    next_states = np.stack([e.next_state.to_vector() for e in batch])
    q, cache = forward(source, states)
    q_next, _ = forward(target, next_states)
    rewards = np.array([e.reward for e in batch])
    not_terminal = np.array([not e.terminal for e in batch], dtype=float)
    targets = rewards + config.gamma * q_next.max(axis=1) * not_terminal
    rows = np.arange(len(batch))
    actions = np.array([e.action for e in batch])
    residual = q[rows, actions] - targets
    grad = np.zeros_like(q)
    grad[rows, actions] = 2.0 * residual / len(batch)
    new_net, new_opt = adam_update(source, backward(source, cache, grad), opt)
    return new_net, new_opt, float(np.mean(residual**2))


@dataclass(frozen=True)
class EpisodeLog:
    episode: int
    setpoint: float
    steps: int
    total_reward: float
    discounted_reward: float
    final_error: float
    errors: tuple
    rewards: tuple
    success: bool
    final_gains: tuple

    @property
    def mean_last10_error(self) -> float:
        tail = self.errors[-10:]
        return sum(tail) / len(tail)


def _session_observation(session: ControlSession, setpoint: float) -> Observation:
    return observe(
        setpoint, session.last_measured, session.pid, session.gains, session.bounds, session.params.dt
    )


def run_episode(
    agent: AgentState,
    session: ControlSession,
    setpoint: float,
    config: TrainConfig,
    reward_params: RewardParams,
    episode_index: int,
    rng,
) -> EpisodeLog:
    """One training episode toward a single setpoint.

    The first warmup_steps tuning turns regulate at setpoint 0.0. Each turn
    applies a gain move, runs the fixed rollout, scores it, stores the
    transition, trains once the buffer can fill a batch, and refreshes the
    target net on its interval. The episode ends early once the settled
    error drops below target after warmup.
    """
    session.reset()
    codec = config.codec

    def sp_at(step):
        return 0.0 if step < config.warmup_steps else setpoint

    obs = _session_observation(session, sp_at(0))
    errors = []
    rewards = []
    total = 0.0
    discounted = 0.0
    success = False
    steps_done = 0
    for step in range(config.steps_per_episode):
        sp = sp_at(step)
        action = select_action(agent.source, obs, epsilon_at(agent.global_step, config), rng)
        session.set_gains(apply_action(session.gains, action, codec, session.bounds))
        result = session.rollout(sp, config.rollout_ticks)
        reward = gaussian_reward(result.measured, sp, reward_params.sigma_sq) + schedule_reward(
            result.measured, sp, step, config.steps_per_episode, step, reward_params
        )
        err = abs(result.error)
        # success only counts against the commanded setpoint, not warmup
        terminal = step >= config.warmup_steps and err < reward_params.target_error
        next_obs = _session_observation(session, sp_at(step + 1))
        agent.buffer.push(Experience(obs, action, reward, next_obs, terminal))
        if len(agent.buffer) >= config.batch_size:
            agent.source, agent.opt, _ = train_step(
                agent.source, agent.target, agent.buffer, agent.opt, config, rng
            )
        agent.global_step += 1
        agent.target = sync_target(agent.source, agent.target, agent.global_step, config.sync_interval)
        errors.append(err)
        rewards.append(reward)
        total += reward
        discounted += (config.gamma**step) * reward
        obs = next_obs
        steps_done = step + 1
        if terminal:
            success = True
            break
    return EpisodeLog(
        episode=episode_index,
        setpoint=setpoint,
        steps=steps_done,
        total_reward=total,
        discounted_reward=discounted,
        final_error=errors[-1],
        errors=tuple(errors),
        rewards=tuple(rewards),
        success=success,
        final_gains=session.gains.as_tuple(),
    )


@dataclass(frozen=True)
class TrainingReport:
    logs: tuple
    final_gains: PidGains
    best_episode: int
    final_checkpoint: bytes
    best_checkpoint: bytes


def train_agent(
    plant_params: PlantParams,
    bounds: GainBounds,
    config: TrainConfig = TrainConfig(),
    reward_params: RewardParams = RewardParams(),
    rng=None,
):
    """Full training run; returns the persistent agent and its report."""
    rng = as_generator(rng)
    agent = init_agent(config, rng)
    session = ControlSession(
        plant_params, config.base_gains, bounds, config.d_scale, config.integral_limit, rng
    )
    logs = []
    best_index = 0
    best_reward = -math.inf
    best_blob = save_net(agent.source)
    for episode in range(config.episodes):
        setpoint = rng.normal(config.setpoint_mean, config.setpoint_std)
        log = run_episode(agent, session, setpoint, config, reward_params, episode, rng)
        logs.append(log)
        if log.total_reward > best_reward:
            best_reward = log.total_reward
            best_index = episode
            best_blob = save_net(agent.source)
    report = TrainingReport(
        logs=tuple(logs),
        final_gains=PidGains(*logs[-1].final_gains),
        best_episode=best_index,
        final_checkpoint=save_net(agent.source),
        best_checkpoint=best_blob,
    )
    return agent, report
