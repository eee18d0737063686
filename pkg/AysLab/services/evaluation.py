import os
import numpy as np
import logManager
from agents.checkpoint import load_checkpoint
from configManager.runtimeConfigHandler import RunConfig
from environment.AysEnv import AysEnv, START_STATE, sample_params
from environment.dynamics import ActionKind, AysParams
from functions.errors import ConfigError
from functions.metrics import GREEN
from functions.outputs import ensure_dir, write_json, write_grid_csv

logging = logManager.logger.get_logger(__name__)

GRID_LOW = 0.45
GRID_HIGH = 0.55
GRID_S = 0.5


def parse_start(text):
    if text is None:
        return None
    if text == "s0":
        return START_STATE
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError("start must be s0 or a comma separated a,y,s triple, got " + str(text))
    if len(values) != 3:
        raise ConfigError("start must have three components, got " + str(text))
    return values


def _frozen_environment(config, rng, params=None):
    """An environment with the run's reward settings but no per-episode noise."""
    variant = "markov" if config.variant == "markov" else "standard"
    return AysEnv(rng, config.reward_scheme, variant, None, params, config.gamma, config.max_steps,
                  config.fixed_point_tolerance, config.squared_reward)


def _check_widths(agent, env):
    if agent.observation_width != env.observation_width:
        raise ConfigError("checkpoint expects observations of width %d, environment gives %d"
                          % (agent.observation_width, env.observation_width))


def evaluate_agent(agent, config, episodes, greedy=False, start=None, noise_variance=None, seed=0, out_dir=None):
    """Frozen-policy episodes; DQN agents always act greedily, actor-critics only when `greedy`."""
    if episodes <= 0:
        return {"episodes": 0, "returns": [], "mean_return": 0.0, "success_rate": 0.0, "outcomes": {},
                "action_counts": {}, "default_share_successful": None, "trajectories": []}
    rng = np.random.default_rng(seed)
    if noise_variance is not None:
        # one parameter set for every episode
        params = sample_params(AysParams(), noise_variance, rng, config.noise_clip_low, config.noise_clip_high)
        env = _frozen_environment(config, rng, params)
    else:
        env = AysEnv(rng, config.reward_scheme, config.variant, config.noise_spec(), None, config.gamma,
                     config.max_steps, config.fixed_point_tolerance, config.squared_reward)
    _check_widths(agent, env)
    actGreedy = agent.greedy_by_default or greedy
    if out_dir:
        ensure_dir(out_dir)

    returns, outcomes, trajectories = [], [], []
    actionCounts = {kind.name: 0 for kind in ActionKind}
    successfulSteps, successfulDefault = 0, 0
    for episode in range(episodes):
        observation = env.reset(episode, start)
        episodeReturn = 0.0
        counts = {kind.name: 0 for kind in ActionKind}
        done = False
        while not done:
            action = agent.act(observation, training=False, greedy=actGreedy)
            observation, reward, done, info = env.step(action)
            episodeReturn += reward
            counts[ActionKind(action).name] += 1
        outcome = info["outcome"].value
        returns.append(episodeReturn)
        outcomes.append(outcome)
        for name, count in counts.items():
            actionCounts[name] += count
        if outcome == GREEN:
            successfulSteps += sum(counts.values())
            successfulDefault += counts[ActionKind.Default.name]
        if out_dir:
            path = os.path.join(out_dir, "trajectory_%03d.csv" % episode)
            env.export_trajectory(path)
            trajectories.append(path)

    outcomeCounts = {}
    for outcome in outcomes:
        outcomeCounts[outcome] = outcomeCounts.get(outcome, 0) + 1
    summary = {
        "episodes": episodes,
        "returns": returns,
        "mean_return": float(np.mean(returns)),
        "success_rate": outcomeCounts.get(GREEN, 0) / episodes,
        "outcomes": dict(sorted(outcomeCounts.items())),
        "action_counts": actionCounts,
        "default_share_successful": successfulDefault / successfulSteps if successfulSteps else None,
        "trajectories": trajectories,
    }
    if out_dir:
        write_json(os.path.join(out_dir, "evaluation.json"), summary)
    logging.info("Evaluated " + str(episodes) + " episodes: mean return " + "%.3f" % summary["mean_return"]
                 + ", success rate " + "%.3f" % summary["success_rate"])
    return summary


def evaluate(checkpoint, episodes, greedy=False, start=None, noise_variance=None, seed=0, out_dir=None):
    agent, configDict = load_checkpoint(checkpoint)
    config = RunConfig(**configDict) if configDict else RunConfig(agent=agent.kind)
    return evaluate_agent(agent, config, episodes, greedy, start, noise_variance, seed, out_dir)


def grid_axis(resolution):
    if resolution < 1:
        raise ConfigError("grid resolution must be at least 1")
    if resolution == 1:
        return np.array([0.5 * (GRID_LOW + GRID_HIGH)])
    return np.linspace(GRID_LOW, GRID_HIGH, resolution)


def greedy_outcome(agent, env, start):
    observation = env.reset(0, start)
    done = False
    while not done:
        observation, _, done, info = env.step(agent.preferred_action(observation))
    return info["outcome"]


def grid_sweep(agent, config, resolution, mode="value", out_dir=None):
    """Matrix over the initial-state square, rows by y and columns by a.

    value: max Q or critic value; first-action: the greedy action name;
    end-state: outcome of a full greedy episode from the cell.
    """
    if mode not in ("value", "first-action", "end-state"):
        raise ConfigError("unknown grid mode " + str(mode))
    axis = grid_axis(resolution)
    env = _frozen_environment(config, np.random.default_rng(0))
    _check_widths(agent, env)
    matrix = []
    for y in axis:
        row = []
        for a in axis:
            start = (float(a), float(y), GRID_S)
            observation = np.array(start if env.observation_width == 3 else start + (0.0, 0.0, 0.0))
            if mode == "value":
                row.append(float(agent.value_estimate(observation)))
            elif mode == "first-action":
                row.append(ActionKind(agent.preferred_action(observation)).name)
            else:
                row.append(greedy_outcome(agent, env, start).value)
        matrix.append(row)
    path = None
    if out_dir:
        ensure_dir(out_dir)
        path = os.path.join(out_dir, "grid_%s.csv" % mode.replace("-", "_"))
        write_grid_csv(path, axis, axis, matrix)
    return axis, axis, matrix, path


def grid_from_checkpoint(checkpoint, resolution, mode="value", out_dir=None):
    agent, configDict = load_checkpoint(checkpoint)
    config = RunConfig(**configDict) if configDict else RunConfig(agent=agent.kind)
    return grid_sweep(agent, config, resolution, mode, out_dir)
