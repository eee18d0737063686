import os
import time
import logManager
from concurrent.futures import ProcessPoolExecutor, as_completed
from agents import agent_factory
from agents.checkpoint import dumps, load_training_state
from configManager.configHandler import write_run_config
from configManager.runtimeConfigHandler import RunConfig
from environment.AysEnv import AysEnv
from environment.dynamics import EpisodeOutcome
from functions.errors import ConfigError, NumericError, IntegrationError
from functions.metrics import RunRecord, moving_average, success_rate, summarize, aggregate_seeds
from functions.outputs import JsonLines, ensure_dir, write_json, read_jsonl
from functions.seeding import spawn_generators
from replay.ReplayBuffer import Transition

logging = logManager.logger.get_logger(__name__)

CHECKPOINT_FILE = "checkpoint.bin"
SEEDS_SUMMARY_FILE = "summary_seeds.json"


def build_environment(config, rng):
    return AysEnv(rng, config.reward_scheme, config.variant, config.noise_spec(), gamma=config.gamma,
                  max_steps=config.max_steps, tolerance=config.fixed_point_tolerance,
                  squared_reward=config.squared_reward)


def build_agent(config, observation_width, rng):
    return agent_factory(config.agent, config.agent_overrides(), observation_width, config.frames, rng)


def _progress_line(record, returns, outcomes, agent):
    line = ("Episode " + str(record.episode + 1) + " frames " + str(record.frames)
            + " moving average " + "%.3f" % moving_average(returns)[-1]
            + " success rate " + "%.3f" % success_rate(outcomes))
    for key, value in agent.stats().items():
        line += " " + key + " " + ("%.4g" % value if isinstance(value, float) else str(value))
    return line


def _write_checkpoint(run_dir, data):
    with open(os.path.join(run_dir, CHECKPOINT_FILE), "wb") as fp:
        fp.write(data)


def _write_abort(run_dir, config, seed, record_count, frames, error, stable):
    _write_checkpoint(run_dir, stable)
    diagnostics = error.diagnostics if isinstance(error, IntegrationError) else {}
    write_json(os.path.join(run_dir, "abort.json"), {"seed": seed, "agent": config.agent, "episodes": record_count,
                                                      "frames": frames, "error": str(error),
                                                      "error_type": type(error).__name__,
                                                      "diagnostics": diagnostics})


def _position(seed, records, frames, env):
    return {"seed": seed, "episodes": len(records), "frames": frames,
            "environment_rng": env.rng.bit_generator.state}


def _restore_streams(run_dir, training):
    """Earlier episode records, cut back to the checkpoint's episode count."""
    episodes = int(training["episodes"])
    metricsPath = os.path.join(run_dir, "metrics.jsonl")
    try:
        stored = read_jsonl(metricsPath)
    except OSError as error:
        raise ConfigError("cannot resume without " + metricsPath + ": " + str(error))
    if len(stored) < episodes:
        raise ConfigError("metrics.jsonl holds " + str(len(stored)) + " episodes, the checkpoint expects "
                          + str(episodes))
    records = [RunRecord(**item) for item in stored[:episodes]]
    if records and records[-1].frames != int(training["frames"]):
        raise ConfigError("metrics.jsonl does not match the checkpoint frame count")
    timingsPath = os.path.join(run_dir, "timings.jsonl")
    timings = read_jsonl(timingsPath)[:episodes] if os.path.exists(timingsPath) else []
    return records, timings


def train(config, seed, restored=None):
    """Train one agent for config.frames environment steps.

    Writes metrics.jsonl (one record per episode), timings.jsonl, summary.json
    and checkpoint.bin into the run directory and returns (records, summary).
    checkpoint.bin is refreshed every checkpoint_interval episodes with the
    training position, so `restored` = (agent, training, run_dir) from resume()
    continues the run exactly where that checkpoint was taken.
    """
    generators = spawn_generators(seed)
    if restored is None:
        run_dir = ensure_dir(config.run_dir(seed))
    else:
        run_dir = restored[2]
    logManager.logger.configure_logger(logManager.logger.get_level_name(), run_dir)
    write_run_config(config, run_dir)
    env = build_environment(config, generators["environment"])
    configDict = config.to_dict()

    records, returns, outcomes, previousTimings = [], [], [], []
    frames = 0
    if restored is None:
        agent = build_agent(config, env.observation_width, generators["agent"])
        logging.info("Training " + config.agent + " on preset " + config.preset + " seed " + str(seed)
                     + " for " + str(config.frames) + " frames")
    else:
        agent, training = restored[0], restored[1]
        if agent.observation_width != env.observation_width:
            raise ConfigError("checkpoint agent expects observations of width " + str(agent.observation_width))
        records, previousTimings = _restore_streams(run_dir, training)
        returns = [r.episode_return for r in records]
        outcomes = [r.outcome for r in records]
        frames = int(training["frames"])
        if frames > config.frames:
            raise ConfigError("checkpoint is at frame " + str(frames) + ", past the frame limit "
                              + str(config.frames))
        env.rng.bit_generator.state = training["environment_rng"]
        agent.total_frames = config.frames
        logging.info("Resuming " + config.agent + " seed " + str(seed) + " at episode " + str(len(records))
                     + ", frame " + str(frames) + " of " + str(config.frames))

    stable = dumps(agent, configDict, _position(seed, records, frames, env))
    started = time.perf_counter()
    metrics = JsonLines(os.path.join(run_dir, "metrics.jsonl"))
    timings = JsonLines(os.path.join(run_dir, "timings.jsonl"))
    for record in records:
        metrics.write(record.to_dict())
    for item in previousTimings:
        timings.write(item)
    try:
        while frames < config.frames:
            episode = len(records)
            episodeStart = time.perf_counter()
            observation = env.reset(episode)
            episodeReturn = 0.0
            length = 0
            outcome = None
            while outcome is None:
                action = agent.act(observation)
                nextObservation, reward, done, info = env.step(action)
                agent.observe(Transition(observation, action, reward, nextObservation, done))
                agent.maybe_update()
                frames += 1
                length += 1
                episodeReturn += reward
                observation = nextObservation
                if done:
                    outcome = info["outcome"]
                elif frames >= config.frames:
                    # the run ends mid-episode
                    outcome = EpisodeOutcome.FrameLimit
            record = RunRecord(episode, episodeReturn, length, outcome.value, frames)
            records.append(record)
            returns.append(episodeReturn)
            outcomes.append(outcome.value)
            metrics.write(record.to_dict())
            timings.write({"episode": episode, "wall_time": time.perf_counter() - episodeStart})
            logging.debug("Episode " + str(episode) + " return " + "%.4f" % episodeReturn + " length "
                          + str(length) + " outcome " + outcome.value)
            if (episode + 1) % config.checkpoint_interval == 0 and frames < config.frames:
                metrics.flush()
                timings.flush()
                stable = dumps(agent, configDict, _position(seed, records, frames, env))
                _write_checkpoint(run_dir, stable)
            if (episode + 1) % config.log_interval == 0:
                logging.info(_progress_line(record, returns, outcomes, agent))
    except NumericError as error:
        logging.exception("CRITICAL! Numeric failure after " + str(frames) + " frames, writing last stable checkpoint")
        _write_abort(run_dir, config, seed, len(records), frames, error, stable)
        raise
    finally:
        metrics.close()
        timings.close()

    _write_checkpoint(run_dir, dumps(agent, configDict, _position(seed, records, frames, env)))
    summary = summarize(records)
    summary.update({"seed": seed, "agent": config.agent, "preset": config.preset,
                    "wall_time": time.perf_counter() - started})
    write_json(os.path.join(run_dir, "summary.json"), summary)
    logging.info("Finished seed " + str(seed) + ": " + str(summary["episodes"]) + " episodes, mean return "
                 + "%.3f" % summary["mean_return"] + ", success rate " + "%.3f" % summary["success_rate"])
    return records, summary


def resume(checkpoint, frames=None):
    """Continue the run a trainer checkpoint belongs to, in that checkpoint's directory.

    `frames` raises (or keeps) the frame limit; the learning-rate and beta
    schedules follow the new limit.
    """
    agent, runConfig, training = load_training_state(checkpoint)
    values = dict(runConfig)
    if frames is not None:
        values["frames"] = frames
    try:
        config = RunConfig(**values)
    except TypeError as error:
        raise ConfigError("checkpoint holds an invalid run config: " + str(error))
    if config.agent != agent.kind:
        raise ConfigError("checkpoint agent " + agent.kind + " does not match its run config " + config.agent)
    if int(training["frames"]) > config.frames:
        raise ConfigError("checkpoint is at frame " + str(training["frames"]) + ", past the frame limit "
                          + str(config.frames))
    run_dir = os.path.dirname(os.path.abspath(str(checkpoint)))
    return train(config, int(training["seed"]), (agent, training, run_dir))


def _train_worker(configDict, seed):
    return train(RunConfig(**configDict), seed)


def train_seeds(config, seeds=None, workers=1):
    """Train every seed, optionally in a process pool; returns summaries in seed order.

    The cross-seed aggregate goes to summary_seeds.json in config.output_dir.
    """
    seeds = list(config.seeds if seeds is None else seeds)
    results = {}
    if workers <= 1 or len(seeds) == 1:
        for seed in seeds:
            results[seed] = train(config, seed)
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as executor:
            futures = {executor.submit(_train_worker, config.to_dict(), seed): seed for seed in seeds}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                logging.info("Seed " + str(futures[future]) + " done")
    aggregate = aggregate_seeds({seed: results[seed][0] for seed in seeds})
    aggregate.update({"agent": config.agent, "preset": config.preset})
    write_json(os.path.join(ensure_dir(config.output_dir), SEEDS_SUMMARY_FILE), aggregate)
    logging.info("Success rate over seeds " + str(seeds) + ": " + "%.3f" % aggregate["success_rate_mean"]
                 + " +- " + "%.3f" % aggregate["success_rate_std"])
    return [results[seed][1] for seed in seeds]
