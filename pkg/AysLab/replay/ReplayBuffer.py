import numpy as np
from dataclasses import dataclass
from functions.errors import UsageError, ShapeError


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


def stack(transitions):
    """Column arrays (states, actions, rewards, next_states, dones) of a batch."""
    return (np.array([t.state for t in transitions], dtype=np.float64),
            np.array([t.action for t in transitions], dtype=np.int64),
            np.array([t.reward for t in transitions], dtype=np.float64),
            np.array([t.next_state for t in transitions], dtype=np.float64),
            np.array([t.done for t in transitions], dtype=np.float64))


class ReplayBuffer():
    def __init__(self, capacity):
        if capacity <= 0:
            raise UsageError("buffer capacity must be positive")
        self.capacity = int(capacity)
        self.storage = [None] * self.capacity
        self.cursor = 0
        self.size = 0
        self.state_width = None

    def __len__(self):
        return self.size

    def _check_width(self, transition):
        width = len(transition.state)
        if self.state_width is None:
            self.state_width = width
        elif width != self.state_width or len(transition.next_state) != width:
            raise ShapeError("transition width %d does not match buffer width %d" % (width, self.state_width))

    def push(self, transition):
        self._check_width(transition)
        self.storage[self.cursor] = transition
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch, rng):
        if self.size == 0:
            raise UsageError("cannot sample from an empty replay buffer")
        indices = rng.integers(0, self.size, size=batch)
        return [self.storage[i] for i in indices]

    def contents(self):
        if self.size < self.capacity:
            return self.storage[:self.size]
        return self.storage[self.cursor:] + self.storage[:self.cursor]

    def state_dict(self):
        """(meta, arrays) of every occupied slot in slot order, for checkpoints."""
        rows = self.storage[:self.size]
        width = self.state_width or 0
        states, actions, rewards, next_states, dones = stack(rows)
        arrays = {
            "states": states.reshape(self.size, width),
            "actions": actions.astype(np.float64),
            "rewards": rewards,
            "next_states": next_states.reshape(self.size, width),
            "dones": dones,
        }
        return {"cursor": self.cursor, "size": self.size, "state_width": self.state_width}, arrays

    def load_state(self, meta, arrays):
        size = int(meta["size"])
        if size > self.capacity:
            raise UsageError("stored buffer holds %d transitions, capacity is %d" % (size, self.capacity))
        self.storage = [None] * self.capacity
        for i in range(size):
            self.storage[i] = Transition(arrays["states"][i].copy(), int(arrays["actions"][i]),
                                         float(arrays["rewards"][i]), arrays["next_states"][i].copy(),
                                         bool(arrays["dones"][i]))
        self.cursor = int(meta["cursor"])
        self.size = size
        self.state_width = meta["state_width"]
