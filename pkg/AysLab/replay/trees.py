import numpy as np
from functions.errors import UsageError


def next_power_of_two(n):
    capacity = 1
    while capacity < n:
        capacity *= 2
    return capacity


class SegmentTree():
    """Complete binary tree over a power-of-two number of leaves.

    Node 1 is the root, node i has children 2i and 2i+1, leaf j lives at node
    capacity + j. Every internal node holds `combine` of its children.
    """

    neutral = 0.0

    def __init__(self, capacity):
        self.capacity = next_power_of_two(max(1, capacity))
        self.nodes = np.full(2 * self.capacity, self.neutral, dtype=np.float64)

    def combine(self, left, right):
        raise NotImplementedError

    @property
    def root(self):
        return float(self.nodes[1])

    def __getitem__(self, leaf):
        return float(self.nodes[self.capacity + leaf])

    def update(self, leaf, value):
        if not 0 <= leaf < self.capacity:
            raise UsageError("leaf %d outside tree of capacity %d" % (leaf, self.capacity))
        node = self.capacity + leaf
        self.nodes[node] = value
        node //= 2
        while node >= 1:
            self.nodes[node] = self.combine(self.nodes[2 * node], self.nodes[2 * node + 1])
            node //= 2


class SumTree(SegmentTree):
    neutral = 0.0

    def combine(self, left, right):
        return left + right

    def prefix_find(self, mass):
        """Leaf at which the running prefix sum first exceeds `mass`."""
        if self.root <= 0:
            raise UsageError("cannot search a tree with no mass")
        if not 0 <= mass < self.root:
            raise UsageError("mass %r outside [0, %r)" % (mass, self.root))
        node = 1
        while node < self.capacity:
            left = 2 * node
            if mass < self.nodes[left]:
                node = left
            else:
                mass -= self.nodes[left]
                node = left + 1
        return node - self.capacity


class MinTree(SegmentTree):
    # unoccupied leaves never win the minimum
    neutral = np.inf

    def combine(self, left, right):
        return min(left, right)
