import numpy as np

STREAMS = ["environment", "agent"]


def spawn_generators(seed):
    """Independent environment and agent generators derived from one run seed."""
    children = np.random.SeedSequence(int(seed)).spawn(len(STREAMS))
    return {name: np.random.default_rng(child) for name, child in zip(STREAMS, children)}
