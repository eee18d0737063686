import csv
import numpy as np
import logManager
from dataclasses import dataclass
from typing import Optional
from environment.dynamics import (AysParams, ActionKind, RewardScheme, EpisodeOutcome, integrate_step, markov_step,
                                  check_termination, reward)
from functions.errors import UsageError, ConfigError

logging = logManager.logger.get_logger(__name__)

VARIANTS = ["standard", "noisy", "markov"]
START_STATE = (0.5, 0.5, 0.5)
START_SPREAD = 0.05
TRAJECTORY_HEADER = ["t", "a", "y", "s", "action", "reward", "outcome"]


@dataclass(frozen=True)
class NoiseSchedule:
    start: float = 1e-5
    multiplier: float = 10.0
    period: int = 500
    cap: float = 1.0

    def variance_at(self, episode_index):
        return min(self.cap, self.start * self.multiplier ** (episode_index // self.period))


@dataclass(frozen=True)
class NoiseSpec:
    variance: float = 0.0
    clip_low: float = 0.5
    clip_high: float = 1.5
    schedule: Optional[NoiseSchedule] = None

    def __post_init__(self):
        if self.variance < 0:
            raise ConfigError("noise variance must be nonnegative")
        if not 0 < self.clip_low <= 1.0 <= self.clip_high:
            raise ConfigError("noise clip range must contain 1")

    def variance_at(self, episode_index):
        if self.schedule is not None:
            return self.schedule.variance_at(episode_index)
        return self.variance


def sample_params(base, variance, rng, clip_low=0.5, clip_high=1.5):
    """One independent clipped N(1, variance) multiplier per parameter."""
    if variance <= 0:
        return base
    multipliers = np.clip(rng.normal(1.0, np.sqrt(variance), size=8), clip_low, clip_high)
    return base.scaled(multipliers)


def reset_state(rng, noise, episode_index, base=AysParams(), markov=False, start=None):
    if start is None:
        offsets = rng.uniform(-START_SPREAD, START_SPREAD, size=2)
        # S is never perturbed
        position = np.array([START_STATE[0] + offsets[0], START_STATE[1] + offsets[1], START_STATE[2]])
    else:
        position = np.array(start, dtype=np.float64)[:3]
    params = base
    if noise is not None:
        params = sample_params(base, noise.variance_at(episode_index), rng, noise.clip_low, noise.clip_high)
    if markov:
        return np.concatenate([position, np.zeros(3)]), params
    return position, params


class AysEnv():
    def __init__(self, rng, reward_scheme="pb", variant="standard", noise=None, params=None, gamma=0.99,
                 max_steps=600, tolerance=0.01, squared_reward=False):
        if variant not in VARIANTS:
            raise ConfigError("unknown environment variant " + str(variant))
        self.rng = rng
        self.reward_scheme = RewardScheme(reward_scheme)
        self.variant = variant
        self.noise = noise if variant == "noisy" else None
        self.base_params = params if params is not None else AysParams()
        self.gamma = gamma
        self.max_steps = max_steps
        self.tolerance = tolerance
        self.squared_reward = squared_reward
        self.params = self.base_params
        self.state = None
        self.steps = 0
        self.done = True
        self.outcome = None
        self.trajectory = []

    @property
    def markov(self):
        return self.variant == "markov"

    @property
    def observation_width(self):
        return 6 if self.markov else 3

    def reset(self, episode_index=0, start=None):
        self.state, self.params = reset_state(self.rng, self.noise, episode_index, self.base_params, self.markov, start)
        self.steps = 0
        self.done = False
        self.outcome = None
        self.trajectory = [(0, self.state[0], self.state[1], self.state[2], "", "", "")]
        return self.state.copy()

    def step(self, action):
        if self.done:
            raise UsageError("episode is over, reset the environment first")
        action = ActionKind(action)
        previous = self.state
        if self.markov:
            self.state = markov_step(previous, action, self.params)
        else:
            self.state = integrate_step(previous, action, self.params)
        self.steps += 1
        outcome = check_termination(self.state, self.tolerance, self.params)
        if outcome is None and self.steps >= self.max_steps:
            outcome = EpisodeOutcome.FrameLimit
        value = reward(previous, action, self.state, self.reward_scheme, outcome, self.gamma, self.squared_reward)
        self.done = outcome is not None
        self.outcome = outcome
        self.trajectory.append((self.steps, self.state[0], self.state[1], self.state[2], action.name, value,
                                outcome.value if outcome is not None else ""))
        return self.state.copy(), value, self.done, {"outcome": outcome, "steps": self.steps}

    def export_trajectory(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fp:
            writer = csv.writer(fp)
            writer.writerow(TRAJECTORY_HEADER)
            for t, a, y, s, action, value, outcome in self.trajectory:
                writer.writerow([t, "%.12g" % a, "%.12g" % y, "%.12g" % s, action,
                                 "%.12g" % value if value != "" else "", outcome])
        logging.debug("Trajectory written to " + str(path))
