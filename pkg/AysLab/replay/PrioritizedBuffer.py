import numpy as np
from replay.ReplayBuffer import ReplayBuffer
from replay.trees import SumTree, MinTree
from functions.errors import UsageError

PRIORITY_FLOOR = 1e-6


class PrioritizedBuffer(ReplayBuffer):
    """Proportional prioritized replay.

    The sum tree holds p^alpha for every occupied slot and drives sampling, the
    min tree gives the smallest stored p^alpha which normalizes the importance
    weights to at most 1.
    """

    def __init__(self, capacity, alpha, beta, priority_floor=PRIORITY_FLOOR):
        super().__init__(capacity)
        if not 0.0 <= alpha <= 1.0 or not 0.0 <= beta <= 1.0:
            raise UsageError("alpha and beta must lie in [0, 1]")
        self.alpha = alpha
        self.beta_start = beta
        self.beta = beta
        self.priority_floor = priority_floor
        self.max_priority = 1.0
        self.sum_tree = SumTree(self.capacity)
        self.min_tree = MinTree(self.capacity)

    def _set_priority(self, leaf, priority):
        value = priority ** self.alpha
        self.sum_tree.update(leaf, value)
        self.min_tree.update(leaf, value)

    def push(self, transition):
        leaf = self.cursor
        super().push(transition)
        self._set_priority(leaf, self.max_priority)

    def anneal_beta(self, frame, total_frames):
        fraction = 1.0 if total_frames <= 0 else min(1.0, frame / total_frames)
        self.beta = max(self.beta, self.beta_start + (1.0 - self.beta_start) * fraction)
        return self.beta

    def sample(self, batch, rng):
        if self.size == 0:
            raise UsageError("cannot sample from an empty replay buffer")
        total = self.sum_tree.root
        segment = total / batch
        leaves = np.empty(batch, dtype=np.int64)
        for i in range(batch):
            # one draw per stratum of the total mass
            mass = min(rng.uniform(i * segment, (i + 1) * segment), np.nextafter(total, 0.0))
            leaves[i] = min(self.sum_tree.prefix_find(mass), self.size - 1)
        values = np.array([self.sum_tree[leaf] for leaf in leaves])
        # (N P_i)^-beta / max_j (N P_j)^-beta reduces to (p_min / p_i)^beta
        weights = (self.min_tree.root / values) ** self.beta
        return [self.storage[leaf] for leaf in leaves], leaves, weights

    def update_priorities(self, leaves, td_errors):
        for leaf, error in zip(leaves, td_errors):
            priority = abs(float(error)) + self.priority_floor
            self._set_priority(int(leaf), priority)
            self.max_priority = max(self.max_priority, priority)

    def stored_priorities(self):
        return np.array([self.sum_tree[leaf] for leaf in range(self.size)])

    def state_dict(self):
        meta, arrays = super().state_dict()
        meta.update({"beta": self.beta, "max_priority": self.max_priority})
        arrays["sum_tree"] = self.sum_tree.nodes.copy()
        arrays["min_tree"] = self.min_tree.nodes.copy()
        return meta, arrays

    def load_state(self, meta, arrays):
        super().load_state(meta, arrays)
        for tree, name in ((self.sum_tree, "sum_tree"), (self.min_tree, "min_tree")):
            if arrays[name].shape != tree.nodes.shape:
                raise UsageError("stored %s has %d nodes, expected %d" % (name, arrays[name].size, tree.nodes.size))
            tree.nodes = np.array(arrays[name], dtype=np.float64)
        self.beta = float(meta["beta"])
        self.max_priority = float(meta["max_priority"])
