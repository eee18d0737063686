import os
from dataclasses import dataclass, field, fields, asdict
from typing import Optional
from environment.AysEnv import NoiseSpec, NoiseSchedule, VARIANTS
from environment.dynamics import RewardScheme
from agents.hyperparameters import DOUBLE_Q_CONVENTIONS, known_keys
from functions.errors import ConfigError

REWARD_SCHEMES = [scheme.value for scheme in RewardScheme]


@dataclass
class RunConfig:
    preset: str = "pb"
    agent: str = "dqn"
    reward_scheme: str = "pb"
    variant: str = "standard"
    frames: int = 500000
    max_steps: int = 600
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    gamma: float = 0.99
    noise_variance: float = 0.0
    noise_start: Optional[float] = None
    noise_multiplier: float = 10.0
    noise_period: int = 500
    noise_cap: float = 1.0
    noise_clip_low: float = 0.5
    noise_clip_high: float = 1.5
    squared_reward: bool = False
    fixed_point_tolerance: float = 0.01
    double_q: str = "target_select"
    log_interval: int = 50
    checkpoint_interval: int = 100
    output_dir: str = "runs"
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        known_keys(self.agent)
        if self.reward_scheme not in REWARD_SCHEMES:
            raise ConfigError("unknown reward scheme " + str(self.reward_scheme))
        if self.variant not in VARIANTS:
            raise ConfigError("unknown environment variant " + str(self.variant))
        if self.double_q not in DOUBLE_Q_CONVENTIONS:
            raise ConfigError("double_q must be one of " + ", ".join(DOUBLE_Q_CONVENTIONS))
        for name in ("frames", "max_steps", "log_interval", "checkpoint_interval", "noise_period"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ConfigError(name + " must be a nonnegative integer")
        if self.max_steps < 1 or self.log_interval < 1 or self.checkpoint_interval < 1 or self.noise_period < 1:
            raise ConfigError("max_steps, intervals and noise_period must be at least 1")
        if isinstance(self.seeds, int):
            self.seeds = [self.seeds]
        if not self.seeds or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in self.seeds):
            raise ConfigError("seeds must be a nonempty list of nonnegative integers")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("gamma must lie in [0, 1)")
        if self.fixed_point_tolerance <= 0:
            raise ConfigError("fixed_point_tolerance must be positive")
        # fails early on bad noise settings
        self.noise_spec()

    def noise_spec(self):
        schedule = None
        if self.noise_start is not None:
            schedule = NoiseSchedule(self.noise_start, self.noise_multiplier, self.noise_period, self.noise_cap)
        return NoiseSpec(self.noise_variance, self.noise_clip_low, self.noise_clip_high, schedule)

    def agent_overrides(self):
        overrides = dict(self.overrides)
        overrides["gamma"] = self.gamma
        if self.agent == "duelddqn":
            overrides["double_q"] = self.double_q
        return overrides

    def run_dir(self, seed):
        return os.path.join(self.output_dir, "%s_%s_seed%d" % (self.preset, self.agent, seed))

    def to_dict(self):
        return asdict(self)


RUN_FIELDS = [item.name for item in fields(RunConfig)]
