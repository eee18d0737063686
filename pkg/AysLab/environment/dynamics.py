import math
import numpy as np
import logManager
from enum import Enum, IntEnum
from dataclasses import dataclass, fields, replace, asdict
from environment.integrators import integrate
from functions.errors import DomainError, IntegrationError

logging = logManager.logger.get_logger(__name__)


class ActionKind(IntEnum):
    Default = 0
    DG = 1
    ET = 2
    DG_ET = 3


class RewardScheme(str, Enum):
    PB = "pb"
    PolicyCost = "policy_cost"
    Simple = "simple"


class EpisodeOutcome(str, Enum):
    GreenFixedPoint = "GreenFixedPoint"
    BlackFixedPoint = "BlackFixedPoint"
    CarbonBoundary = "CarbonBoundary"
    EconomicBoundary = "EconomicBoundary"
    FrameLimit = "FrameLimit"


POLICY_COST_MULTIPLIERS = {ActionKind.Default: 1.0, ActionKind.DG: 0.5, ActionKind.ET: 0.5, ActionKind.DG_ET: 0.25}

# (240 GtC, 7e13 $/yr, 5e11 GJ), the present-day state; also the normalization reference
REFERENCE_STATE = np.array([240.0, 7e13, 5e11])
A_PB = 345.0
Y_SF = 4e13
A_PB_NORM = A_PB / (A_PB + REFERENCE_STATE[0])
Y_SF_NORM = Y_SF / (Y_SF + REFERENCE_STATE[1])
PB_STATE_NORM = np.array([0.59, 0.37, 0.0])
GREEN_FIXED_POINT_NORM = np.array([0.0, 1.0, 1.0])
STEP_YEARS = 1.0
SUBSTEPS = 10


@dataclass(frozen=True)
class AysParams:
    tau_A: float = 50.0
    tau_S: float = 50.0
    beta: float = 0.03
    sigma: float = 4e12
    phi: float = 4.7e10
    eps_energy: float = 147.0
    theta: float = 8.57e-5
    rho_learn: float = 2.0

    def __post_init__(self):
        for item in fields(self):
            value = getattr(self, item.name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError("AYS parameter %s must be strictly positive, got %r" % (item.name, value))

    def scaled(self, multipliers):
        return AysParams(*[getattr(self, item.name) * m for item, m in zip(fields(self), multipliers)])

    def to_dict(self):
        return asdict(self)


def normalize(raw):
    raw = np.asarray(raw, dtype=np.float64)
    if np.any(raw < 0):
        raise DomainError("raw AYS state must be nonnegative, got " + str(raw))
    return raw / (raw + REFERENCE_STATE)


def denormalize(norm):
    norm = np.asarray(norm, dtype=np.float64)
    if np.any(norm >= 1.0) or np.any(norm < 0.0):
        raise DomainError("normalized AYS state must lie in [0, 1), got " + str(norm))
    return norm * REFERENCE_STATE / (1.0 - norm)


def effective_params(base, action):
    action = ActionKind(action)
    params = base
    if action in (ActionKind.DG, ActionKind.DG_ET):
        params = replace(params, beta=params.beta / 2.0)
    if action in (ActionKind.ET, ActionKind.DG_ET):
        params = replace(params, sigma=params.sigma / math.sqrt(2.0))
    return params


def fossil_share(S, params):
    # S = 0 gives exactly 1
    return 1.0 / (1.0 + (max(S, 0.0) / params.sigma) ** params.rho_learn)


def derivatives(raw, params):
    A, Y, S = float(raw[0]), float(raw[1]), float(raw[2])
    gamma = fossil_share(S, params)
    U = Y / params.eps_energy
    E = gamma * U / params.phi
    R = (1.0 - gamma) * U
    return np.array([E - A / params.tau_A, params.beta * Y - params.theta * A * Y, R - S / params.tau_S])


def normalized_derivatives(raw, params):
    """Time derivative of the normalized state, by the chain rule through s/(s+s0)."""
    raw = np.asarray(raw, dtype=np.float64)
    return REFERENCE_STATE / (raw + REFERENCE_STATE) ** 2 * derivatives(raw, params)


def black_fixed_point(params=AysParams()):
    return np.array([params.beta / params.theta,
                     params.phi * params.beta * params.eps_energy / (params.theta * params.tau_A),
                     0.0])


def integrate_step(norm, action, params, substeps=SUBSTEPS):
    action = ActionKind(action)
    active = effective_params(params, action)
    raw = denormalize(np.asarray(norm, dtype=np.float64)[:3])

    def check(state, substep):
        if not np.all(np.isfinite(state)) or np.any(state < 0):
            raise IntegrationError("AYS integration left the state space",
                                   {"start": [float(v) for v in norm[:3]], "state": [float(v) for v in state],
                                    "action": action.name, "params": active.to_dict(), "substep": substep})

    raw = integrate(lambda state: derivatives(state, active), raw, STEP_YEARS, substeps, check)
    return normalize(raw)


def accumulate_velocity(previous_velocity, derivative):
    return np.asarray(derivative, dtype=np.float64) + np.asarray(previous_velocity, dtype=np.float64)


def markov_step(state, action, params, substeps=SUBSTEPS):
    state = np.asarray(state, dtype=np.float64)
    position = integrate_step(state[:3], action, params, substeps)
    derivative = normalized_derivatives(denormalize(position), effective_params(params, action))
    return np.concatenate([position, accumulate_velocity(state[3:6], derivative)])


def check_termination(norm, tolerance=0.01, params=AysParams()):
    """Classify a normalized state; fixed-point vicinities take precedence over boundaries."""
    position = np.asarray(norm, dtype=np.float64)[:3]
    if np.max(np.abs(position - GREEN_FIXED_POINT_NORM)) < tolerance:
        return EpisodeOutcome.GreenFixedPoint
    if np.max(np.abs(position - normalize(black_fixed_point(params)))) < tolerance:
        return EpisodeOutcome.BlackFixedPoint
    if position[0] > A_PB_NORM:
        return EpisodeOutcome.CarbonBoundary
    if position[1] < Y_SF_NORM:
        return EpisodeOutcome.EconomicBoundary
    return None


def reward(prev_norm, action, next_norm, scheme, terminal=None, gamma=0.99, squared=False):
    scheme = RewardScheme(scheme)
    if scheme == RewardScheme.Simple:
        if terminal == EpisodeOutcome.GreenFixedPoint:
            value = 1.0
        elif terminal in (EpisodeOutcome.CarbonBoundary, EpisodeOutcome.EconomicBoundary):
            value = -1.0
        else:
            value = 0.0
    else:
        distance = float(np.linalg.norm(np.asarray(next_norm, dtype=np.float64)[:3] - PB_STATE_NORM))
        value = distance ** 2 if squared else distance
        if scheme == RewardScheme.PolicyCost:
            value *= POLICY_COST_MULTIPLIERS[ActionKind(action)]
    if terminal in (EpisodeOutcome.GreenFixedPoint, EpisodeOutcome.BlackFixedPoint):
        # geometric-series estimate of the rewards the episode would still have collected
        value += value * gamma / (1.0 - gamma)
    return float(value)
