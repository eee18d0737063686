import numpy as np
import logManager
from network.Adam import LrSchedule, scheduled_rate
from functions.errors import ShapeError, NumericError

logging = logManager.logger.get_logger(__name__)

ACTION_COUNT = 4


class BaseAgent():
    """Common surface of every agent: act, observe, maybe_update.

    Subclasses own their networks and optimizer states and report them through
    networks() and optimizers() so checkpoints can be written generically.
    """

    kind = None
    greedy_by_default = False

    def __init__(self, observation_width, hyperparameters, total_frames, rng):
        self.observation_width = int(observation_width)
        self.hyperparameters = dict(hyperparameters)
        self.total_frames = int(total_frames)
        self.rng = rng
        self.gamma = self.hyperparameters.get("gamma", 0.99)
        self.frames = 0
        self.updates = 0

    def _check_observation(self, observation):
        observation = np.asarray(observation, dtype=np.float64)
        if observation.shape[-1] != self.observation_width:
            raise ShapeError("agent expects observations of width %d, got %s" % (self.observation_width, str(observation.shape)))
        return observation

    def _schedule(self, initial_rate):
        return LrSchedule(initial_rate, self.hyperparameters.get("decay_number", 0), max(1, self.total_frames))

    def _rate(self, initial_rate):
        return scheduled_rate(self._schedule(initial_rate), min(self.frames, self.total_frames))

    @staticmethod
    def _check_loss(name, value):
        if not np.isfinite(value):
            raise NumericError("non-finite " + name + " loss " + str(value))
        return float(value)

    def act(self, observation, training=True, greedy=None):
        raise NotImplementedError

    def observe(self, transition):
        self.frames += 1

    def maybe_update(self):
        return None

    def value_estimate(self, observation):
        return 0.0

    def preferred_action(self, observation):
        return 0

    def networks(self):
        return {}

    def optimizers(self):
        """Optimizer name -> (AdamState, network it steps)."""
        return {}

    def buffers(self):
        """Buffer name -> replay or rollout buffer, stored with checkpoints."""
        return {}

    def counters(self):
        return {"frames": self.frames, "updates": self.updates}

    def restore_counters(self, counters):
        self.frames = int(counters.get("frames", 0))
        self.updates = int(counters.get("updates", 0))

    def stats(self):
        return {}
