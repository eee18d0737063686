import numpy as np
from dataclasses import dataclass
from functions.errors import UsageError, ShapeError


@dataclass(frozen=True)
class RolloutStep:
    state: np.ndarray
    action: int
    log_prob: float
    value: float
    reward: float
    next_state: np.ndarray
    done: bool


class RolloutBuffer():
    """Ordered on-policy steps, consumed in full by one update and then cleared.

    Every step is tagged with the policy generation that produced it; the
    owning agent bumps its generation after each update so a rollout can never
    be replayed against parameters it was not collected with.
    """

    def __init__(self, capacity, gamma=0.99, lam=1.0):
        if capacity <= 0:
            raise UsageError("rollout capacity must be positive")
        self.capacity = int(capacity)
        self.gamma = gamma
        self.lam = lam
        self.steps = []
        self.generation = None

    def __len__(self):
        return len(self.steps)

    @property
    def full(self):
        return len(self.steps) >= self.capacity

    def push(self, step, generation):
        if self.full:
            raise UsageError("rollout buffer is full, consume it before pushing")
        if self.steps and generation != self.generation:
            raise UsageError("rollout mixes steps from policy generations %r and %r" % (self.generation, generation))
        if self.steps and len(step.state) != len(self.steps[0].state):
            raise ShapeError("rollout step width does not match earlier steps")
        self.generation = generation
        self.steps.append(step)

    def arrays(self):
        return {
            "states": np.array([s.state for s in self.steps], dtype=np.float64),
            "actions": np.array([s.action for s in self.steps], dtype=np.int64),
            "log_probs": np.array([s.log_prob for s in self.steps], dtype=np.float64),
            "values": np.array([s.value for s in self.steps], dtype=np.float64),
            "rewards": np.array([s.reward for s in self.steps], dtype=np.float64),
            "next_states": np.array([s.next_state for s in self.steps], dtype=np.float64),
            "dones": np.array([s.done for s in self.steps], dtype=np.float64),
        }

    def state_dict(self):
        width = len(self.steps[0].state) if self.steps else 0
        arrays = self.arrays()
        for name in ("states", "next_states"):
            arrays[name] = arrays[name].reshape(len(self.steps), width)
        arrays["actions"] = arrays["actions"].astype(np.float64)
        return {"size": len(self.steps), "generation": self.generation}, arrays

    def load_state(self, meta, arrays):
        size = int(meta["size"])
        if size > self.capacity:
            raise UsageError("stored rollout holds %d steps, capacity is %d" % (size, self.capacity))
        self.steps = [RolloutStep(arrays["states"][i].copy(), int(arrays["actions"][i]), float(arrays["log_probs"][i]),
                                  float(arrays["values"][i]), float(arrays["rewards"][i]),
                                  arrays["next_states"][i].copy(), bool(arrays["dones"][i])) for i in range(size)]
        self.generation = meta["generation"]

    def clear(self):
        self.steps = []
        self.generation = None


def td_errors(rewards, values, next_values, dones, gamma):
    return np.asarray(rewards) + (1.0 - np.asarray(dones)) * gamma * np.asarray(next_values) - np.asarray(values)


def compute_gae(rollout, bootstrap_value):
    """Advantages and lambda-returns of a rollout by backward recursion.

    The value of step t+1 stands in for v(s_{t+1}) unless step t ended an
    episode; the last step bootstraps from `bootstrap_value`.
    """
    if len(rollout) == 0:
        raise UsageError("cannot compute advantages of an empty rollout")
    data = rollout.arrays()
    values, rewards, dones = data["values"], data["rewards"], data["dones"]
    next_values = np.append(values[1:], bootstrap_value)
    deltas = td_errors(rewards, values, next_values, dones, rollout.gamma)
    advantages = np.zeros_like(deltas)
    running = 0.0
    for t in range(len(deltas) - 1, -1, -1):
        # an episode boundary cuts the recursion
        running = deltas[t] + rollout.gamma * rollout.lam * (1.0 - dones[t]) * running
        advantages[t] = running
    return advantages, advantages + values
