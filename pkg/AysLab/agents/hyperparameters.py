import copy
from functions.errors import ConfigError

SHARED = {
    "gamma": 0.99,
    "hidden_widths": [256, 256, 256],
}

DEFAULTS = {
    "dqn": {
        "learning_rate": 0.002357,
        "epsilon_decay": 0.7052,
        "batch_size": 256,
        "buffer_size": 32768,
        "target_update": 12,
        "decay_number": 6,
    },
    "duelddqn": {
        "learning_rate": 0.004133,
        "epsilon_decay": 0.5307,
        "batch_size": 128,
        "buffer_size": 32768,
        "target_update": 54,
        "decay_number": 10,
        "alpha": 0.213,
        "beta": 0.7389,
        "double_q": "target_select",
    },
    "a2c": {
        "actor_learning_rate": 2.052e-4,
        "critic_learning_rate": 2.627e-3,
        "entropy_coefficient": 0.001672,
        "rollout_length": 32,
        "decay_number": 4,
        "max_grad_norm": 1.0,
    },
    "ppo": {
        "actor_learning_rate": 3.633e-4,
        "critic_learning_rate": 4.864e-3,
        "entropy_coefficient": 1.411e-4,
        "batch_size": 256,
        "rollout_length": 2048,
        "decay_number": 200,
        "gae_lambda": 0.8845,
        "clip_range": 0.2762,
        "epochs": 50,
        "max_grad_norm": 1.0,
    },
    "random": {},
}

UNIT_INTERVAL = ["epsilon_decay", "alpha", "beta", "gae_lambda"]
DOUBLE_Q_CONVENTIONS = ["target_select", "standard"]


def known_keys(kind):
    if kind not in DEFAULTS:
        raise ConfigError("unknown agent kind " + str(kind))
    return set(SHARED) | set(DEFAULTS[kind])


def _coerce(key, value, default):
    if isinstance(default, bool) or isinstance(value, bool):
        raise ConfigError("hyperparameter " + key + " does not take a boolean")
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError("hyperparameter " + key + " must be a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, (list, tuple)) or not all(isinstance(w, int) and not isinstance(w, bool) and w > 0 for w in value):
            raise ConfigError("hyperparameter " + key + " must be a list of positive integers")
        return list(value)
    if isinstance(default, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError("hyperparameter " + key + " must be an integer")
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError("hyperparameter " + key + " must be a number")
    return float(value)


def _validate(kind, values):
    for key, value in values.items():
        if key in ("hidden_widths", "double_q"):
            continue
        if key == "decay_number":
            if value < 0:
                raise ConfigError("decay_number must be nonnegative")
        elif key in UNIT_INTERVAL:
            if not 0.0 <= value <= 1.0:
                raise ConfigError(key + " must lie in [0, 1]")
        elif key == "gamma":
            if not 0.0 <= value < 1.0:
                raise ConfigError("gamma must lie in [0, 1)")
        elif key == "entropy_coefficient":
            if value < 0:
                raise ConfigError("entropy_coefficient must be nonnegative")
        elif value <= 0:
            raise ConfigError(key + " must be positive")
    if values.get("double_q", "target_select") not in DOUBLE_Q_CONVENTIONS:
        raise ConfigError("double_q must be one of " + ", ".join(DOUBLE_Q_CONVENTIONS))
    if kind == "ppo" and values["batch_size"] > values["rollout_length"]:
        raise ConfigError("ppo batch_size cannot exceed rollout_length")


def resolve(kind, overrides=None):
    """Table defaults for `kind` with `overrides` applied and checked."""
    keys = known_keys(kind)
    values = copy.deepcopy(SHARED)
    values.update(copy.deepcopy(DEFAULTS[kind]))
    for key, value in (overrides or {}).items():
        if key not in keys:
            raise ConfigError("unknown hyperparameter " + str(key) + " for agent " + kind)
        values[key] = _coerce(key, value, values[key])
    _validate(kind, values)
    return values
