import numpy as np
import logManager
from agents import hyperparameters
from agents.DqnAgent import DqnAgent
from agents.DuelDdqnAgent import DuelDdqnAgent
from agents.A2cAgent import A2cAgent
from agents.PpoAgent import PpoAgent
from agents.RandomAgent import RandomAgent
from functions.errors import ConfigError

logging = logManager.logger.get_logger(__name__)

agents = {"dqn": DqnAgent, "duelddqn": DuelDdqnAgent, "a2c": A2cAgent, "ppo": PpoAgent, "random": RandomAgent}


def agent_factory(kind, overrides=None, observation_width=3, total_frames=500000, rng=None):
    if kind not in agents:
        raise ConfigError("unknown agent kind " + str(kind) + ", expected one of " + ", ".join(agents))
    values = hyperparameters.resolve(kind, overrides)
    if rng is None:
        rng = np.random.default_rng()
    logging.debug("Building " + kind + " agent with " + str(values))
    return agents[kind](observation_width, values, total_frames, rng)
