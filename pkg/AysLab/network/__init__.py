import numpy as np
from functions.errors import ShapeError

# floor applied before every log of a probability
PROBABILITY_FLOOR = 1e-12


def softmax_policy(preferences):
    preferences = np.asarray(preferences, dtype=np.float64)
    shifted = preferences - np.max(preferences, axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / np.sum(exps, axis=-1, keepdims=True)


def categorical_entropy(probs):
    probs = np.asarray(probs, dtype=np.float64)
    return -np.sum(probs * np.log(np.maximum(probs, PROBABILITY_FLOOR)), axis=-1)


def log_probability(probs, actions):
    probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    actions = np.atleast_1d(np.asarray(actions, dtype=np.int64))
    picked = probs[np.arange(len(actions)), actions]
    return np.log(np.maximum(picked, PROBABILITY_FLOOR))


def sample_categorical(probs, rng):
    cumulative = np.cumsum(np.asarray(probs, dtype=np.float64))
    # scaling by the total keeps a rounding deficit from landing on a trailing zero
    mass = rng.random() * cumulative[-1]
    index = int(np.searchsorted(cumulative, mass, side="right"))
    return min(index, len(cumulative) - 1)


def dueling_combine(value, advantages):
    advantages = np.asarray(advantages, dtype=np.float64)
    if advantages.ndim == 0 or advantages.shape[-1] == 0:
        raise ShapeError("dueling head needs at least one advantage")
    value = np.asarray(value, dtype=np.float64)
    return value[..., None] + advantages - np.mean(advantages, axis=-1, keepdims=True)


def greedy_action(values):
    # np.argmax returns the first maximum, i.e. the lowest action index on ties
    return int(np.argmax(np.asarray(values, dtype=np.float64)))
