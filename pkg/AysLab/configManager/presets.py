from configManager.runtimeConfigHandler import RunConfig
from functions.errors import ConfigError

PRESETS = {
    "pb": {"reward_scheme": "pb", "variant": "standard"},
    "policy_cost": {"reward_scheme": "policy_cost", "variant": "standard"},
    "simple": {"reward_scheme": "simple", "variant": "standard"},
    "noisy": {"reward_scheme": "pb", "variant": "noisy", "noise_start": 1e-5, "noise_multiplier": 10.0,
              "noise_period": 500, "noise_cap": 1.0},
    "noisy_fixed": {"reward_scheme": "pb", "variant": "noisy", "noise_variance": 1e-3},
    "markov": {"reward_scheme": "pb", "variant": "markov"},
}


def preset_values(name):
    if name not in PRESETS:
        raise ConfigError("unknown preset " + str(name) + ", expected one of " + ", ".join(PRESETS))
    values = dict(PRESETS[name])
    values["preset"] = name
    return values


def experiment_preset(name, agent="dqn"):
    return RunConfig(agent=agent, **preset_values(name))
