from agents.BaseAgent import BaseAgent, ACTION_COUNT


class RandomAgent(BaseAgent):
    kind = "random"

    def act(self, observation, training=True, greedy=None):
        self._check_observation(observation)
        return int(self.rng.integers(ACTION_COUNT))
