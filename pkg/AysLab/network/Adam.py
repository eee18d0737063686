import numpy as np
from dataclasses import dataclass, field
from functions.errors import ShapeError, UsageError, NumericError


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_num: float = 1e-8
    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)
    step_count: int = 0

    @classmethod
    def for_parameters(cls, params, learning_rate, **kwargs):
        state = cls(learning_rate, **kwargs)
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]
        return state


def adam_step(params, grads, state):
    """In-place Adam update with bias correction; returns (params, state)."""
    if state.learning_rate <= 0:
        raise UsageError("Adam learning rate must be positive, got " + str(state.learning_rate))
    grads = list(grads)
    if len(grads) != len(params):
        raise ShapeError("got %d gradients for %d parameters" % (len(grads), len(params)))
    if not state.first_moment:
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]
    for p, g, m in zip(params, grads, state.first_moment):
        if p.shape != g.shape or p.shape != m.shape:
            raise ShapeError("gradient shape %s does not match parameter %s" % (str(g.shape), str(p.shape)))
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient rejected by Adam")

    state.step_count += 1
    t = state.step_count
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon_num)
    return params, state


def clip_gradients(grads, max_norm):
    if max_norm <= 0:
        raise UsageError("max_norm must be positive")
    norm = grads.global_norm()
    if norm > max_norm:
        return grads.scaled(max_norm / norm)
    return grads


@dataclass(frozen=True)
class LrSchedule:
    initial_rate: float
    decay_number: int
    total_frames: int
    decay_factor: float = 0.5


def scheduled_rate(schedule, frame):
    if schedule.decay_number <= 0 or schedule.total_frames <= 0:
        return schedule.initial_rate
    # decay epochs are evenly spaced; integer arithmetic keeps the boundaries exact
    completed = min(schedule.decay_number, max(0, int(frame)) * schedule.decay_number // schedule.total_frames)
    return schedule.initial_rate * schedule.decay_factor ** completed
