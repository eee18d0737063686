import os
import numpy as np
import pytest
import yaml

import AysLab
import logManager
from agents import agent_factory
from agents.checkpoint import save_checkpoint, load_checkpoint
from configManager import argumentHandler
from configManager.configHandler import build_run_config
from configManager.presets import PRESETS, experiment_preset, preset_values
from configManager.runtimeConfigHandler import RunConfig
from environment.AysEnv import AysEnv, START_STATE
from environment.dynamics import EpisodeOutcome
from functions.errors import ConfigError, NumericError
from functions.metrics import RunRecord, moving_average, success_rate, summarize, aggregate_seeds, GREEN
from functions.outputs import read_json, read_jsonl, read_grid_csv
from network.Mlp import Mlp, LayerSpec
from services import trainer, evaluation


def run_config(tmp_path, **values):
    values.setdefault("agent", "random")
    values.setdefault("frames", 200)
    values.setdefault("seeds", [0])
    return RunConfig(output_dir=str(tmp_path), **values)


def linear_q_agent(rows):
    """DQN agent whose Q values are an exact linear function of the observation."""
    agent = agent_factory("dqn", {"hidden_widths": [4], "batch_size": 4}, 3, 1000, np.random.default_rng(0))
    rows = np.array(rows, dtype=float)
    agent.policy_net = Mlp([LayerSpec(3, 4, "identity")], "action_values", [rows], [np.zeros(4)])
    return agent


def constant_agent():
    agent = agent_factory("dqn", {"hidden_widths": [4], "batch_size": 4}, 3, 1000, np.random.default_rng(0))
    for net in (agent.policy_net, agent.target_net):
        for w, b in zip(net.weights, net.biases):
            w[...] = 0.0
            b[...] = 0.0
    return agent


def test_moving_average():
    np.testing.assert_array_equal(moving_average([3.0] * 80), [3.0] * 80)
    assert moving_average([0.0] * 49 + [50.0])[-1] == 1.0
    np.testing.assert_allclose(moving_average([1.0, 2.0, 3.0]), [1.0, 1.5, 2.0])
    assert moving_average([]).size == 0


def test_success_rate():
    assert success_rate([GREEN] * 4) == 1.0
    assert success_rate(["CarbonBoundary", "EconomicBoundary"]) == 0.0
    assert success_rate([GREEN] * 3 + ["CarbonBoundary"] * 7) == pytest.approx(0.3)
    assert success_rate([]) == 0.0


def test_summarize():
    records = [RunRecord(0, 1.0, 10, GREEN, 10), RunRecord(1, 3.0, 5, "CarbonBoundary", 15)]
    summary = summarize(records)
    assert summary["episodes"] == 2 and summary["frames"] == 15
    assert summary["mean_return"] == 2.0 and summary["success_rate"] == 0.5
    assert summary["outcomes"] == {"CarbonBoundary": 1, GREEN: 1}
    assert summarize([])["episodes"] == 0


def test_aggregate_seeds():
    runs = {
        0: [RunRecord(0, 2.0, 5, GREEN, 5), RunRecord(1, 4.0, 5, "CarbonBoundary", 10)],
        1: [RunRecord(0, 6.0, 5, GREEN, 5), RunRecord(1, 6.0, 5, GREEN, 10), RunRecord(2, 0.0, 5, GREEN, 15)],
    }
    aggregate = aggregate_seeds(runs, window=2)
    assert aggregate["seeds"] == [0, 1] and aggregate["episodes"] == 2
    assert aggregate["success_rate_mean"] == pytest.approx(0.75)
    assert aggregate["success_rate_std"] == pytest.approx(0.25)
    assert aggregate["mean_return_mean"] == pytest.approx(3.5)
    assert aggregate["mean_return_std"] == pytest.approx(0.5)
    np.testing.assert_allclose(aggregate["moving_average_mean"], [4.0, 4.5])
    np.testing.assert_allclose(aggregate["moving_average_std"], [2.0, 1.5])
    assert aggregate["per_seed"]["1"]["episodes"] == 3
    with pytest.raises(ValueError):
        aggregate_seeds({})


def test_presets():
    for name in PRESETS:
        config = experiment_preset(name, "ppo")
        assert config.preset == name and config.agent == "ppo"
    assert experiment_preset("policy_cost").reward_scheme == "policy_cost"
    assert experiment_preset("simple").reward_scheme == "simple"
    assert experiment_preset("markov").variant == "markov"
    noisy = experiment_preset("noisy").noise_spec()
    assert noisy.variance_at(0) == pytest.approx(1e-5) and noisy.variance_at(2500) == 1.0
    assert experiment_preset("noisy_fixed").noise_spec().variance_at(9999) == pytest.approx(1e-3)
    with pytest.raises(ConfigError):
        preset_values("stormy")


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(agent="sarsa")
    with pytest.raises(ConfigError):
        RunConfig(frames=-1)
    with pytest.raises(ConfigError):
        RunConfig(reward_scheme="dense")
    with pytest.raises(ConfigError):
        RunConfig(seeds=[])
    assert RunConfig(seeds=4).seeds == [4]
    assert RunConfig(agent="duelddqn", double_q="standard").agent_overrides()["double_q"] == "standard"


def test_config_precedence(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({"preset": "noisy", "frames": 100, "max_steps": 300, "batch_size": 64}))
    config = build_run_config(path=str(path), cli={"frames": 50, "agent": None})
    assert config.preset == "noisy" and config.variant == "noisy"
    assert config.frames == 50 and config.max_steps == 300
    assert config.overrides == {"batch_size": 64}
    assert build_run_config("simple", str(path)).reward_scheme == "simple"


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({"agent": "a2c", "clip_range": 0.1}))
    with pytest.raises(ConfigError):
        build_run_config(path=str(path))
    path.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        build_run_config(path=str(path))
    path.write_text("frames: [unclosed\n")
    with pytest.raises(ConfigError):
        build_run_config(path=str(path))
    with pytest.raises(ConfigError):
        build_run_config(path=str(tmp_path / "missing.yaml"))


def test_zero_frames(tmp_path):
    records, summary = trainer.train(run_config(tmp_path, frames=0), 0)
    assert records == [] and summary["episodes"] == 0
    run_dir = tmp_path / "pb_random_seed0"
    assert read_jsonl(run_dir / "metrics.jsonl") == []
    assert (run_dir / "checkpoint.bin").exists() and (run_dir / "config.yaml").exists()


def test_frame_accounting(tmp_path):
    records, summary = trainer.train(run_config(tmp_path, frames=300, max_steps=40), 1)
    assert sum(r.length for r in records) == 300 == summary["frames"]
    assert records[-1].frames == 300
    assert all(r.length <= 40 for r in records)
    stored = read_jsonl(tmp_path / "pb_random_seed1" / "metrics.jsonl")
    assert stored == [r.to_dict() for r in records]
    returns = [r["episode_return"] for r in stored]
    assert summary["final_moving_average"] == pytest.approx(moving_average(returns)[-1])
    assert summary["success_rate"] == success_rate(r["outcome"] for r in stored)
    assert set(read_json(tmp_path / "pb_random_seed1" / "summary.json")) >= {"mean_return", "success_rate",
                                                                            "frames", "wall_time"}


def test_truncated_final_episode(tmp_path):
    records, _ = trainer.train(run_config(tmp_path, frames=5), 0)
    assert len(records) == 1
    assert records[0].length == 5 and records[0].outcome == EpisodeOutcome.FrameLimit.value


@pytest.mark.slow
@pytest.mark.parametrize("agent, overrides", [
    ("random", {}),
    ("dqn", {"hidden_widths": [8], "batch_size": 8, "buffer_size": 128}),
    ("ppo", {"hidden_widths": [8], "rollout_length": 32, "batch_size": 16, "epochs": 2}),
])
def test_runs_are_deterministic(tmp_path, agent, overrides):
    config = run_config(tmp_path, agent=agent, frames=300, overrides=overrides)
    run_dir = tmp_path / ("pb_%s_seed3" % agent)
    outputs = []
    for _ in range(2):
        trainer.train(config, 3)
        outputs.append([(run_dir / stream).read_bytes() for stream in ("metrics.jsonl", "checkpoint.bin")])
    assert outputs[0] == outputs[1]


@pytest.mark.slow
def test_seeds_in_worker_processes(tmp_path):
    config = run_config(tmp_path, frames=100, seeds=[0, 1])
    parallel = trainer.train_seeds(config, workers=2)
    serial = trainer.train_seeds(run_config(tmp_path / "serial", frames=100, seeds=[0, 1]))
    for a, b in zip(parallel, serial):
        a.pop("wall_time")
        b.pop("wall_time")
        assert a == b


@pytest.mark.slow
def test_random_baseline():
    means = []
    for seed in range(3):
        rng = np.random.default_rng(seed)
        env = AysEnv(rng)
        agent = agent_factory("random", rng=rng)
        returns = []
        for episode in range(1000):
            observation = env.reset(episode)
            total, done = 0.0, False
            while not done:
                observation, reward, done, _ = env.step(agent.act(observation))
                total += reward
            returns.append(total)
        means.append(np.mean(returns))
    assert 12.0 <= np.mean(means) <= 25.0


def test_abort_keeps_last_stable_checkpoint(tmp_path, monkeypatch):
    def failing_agent(config, width, rng):
        agent = agent_factory("random", None, width, config.frames, rng)

        def maybe_update():
            if agent.frames >= 120:
                raise NumericError("loss exploded")
            return None

        agent.maybe_update = maybe_update
        return agent

    monkeypatch.setattr(trainer, "build_agent", failing_agent)
    with pytest.raises(NumericError):
        trainer.train(run_config(tmp_path, frames=500, checkpoint_interval=1), 0)
    run_dir = tmp_path / "pb_random_seed0"
    abort = read_json(run_dir / "abort.json")
    assert abort["error_type"] == "NumericError" and abort["frames"] == 119
    restored, run = load_checkpoint(run_dir / "checkpoint.bin")
    assert restored.kind == "random" and run["frames"] == 500
    assert restored.frames <= 119
    assert len(read_jsonl(run_dir / "metrics.jsonl")) == abort["episodes"]


def test_train_seeds_writes_aggregate(tmp_path):
    config = run_config(tmp_path, frames=120, max_steps=25, seeds=[0, 1])
    summaries = trainer.train_seeds(config)
    assert [s["seed"] for s in summaries] == [0, 1]
    aggregate = read_json(tmp_path / "summary_seeds.json")
    assert aggregate["seeds"] == [0, 1] and aggregate["agent"] == "random"
    rates = [s["success_rate"] for s in summaries]
    assert aggregate["success_rate_mean"] == pytest.approx(np.mean(rates))
    assert aggregate["success_rate_std"] == pytest.approx(np.std(rates))
    assert aggregate["episodes"] == min(s["episodes"] for s in summaries)
    assert len(aggregate["moving_average_mean"]) == aggregate["episodes"]
    assert set(aggregate["per_seed"]) == {"0", "1"}


class Interrupted(Exception):
    pass


def interrupting_builder(stop_at):
    build = trainer.build_agent

    def builder(config, width, rng):
        agent = build(config, width, rng)
        update = agent.maybe_update

        def maybe_update():
            if agent.frames >= stop_at:
                raise Interrupted()
            return update()

        agent.maybe_update = maybe_update
        return agent

    return builder


@pytest.mark.parametrize("agent, overrides", [
    ("random", {}),
    pytest.param("dqn", {"hidden_widths": [8], "batch_size": 8, "buffer_size": 64}, marks=pytest.mark.slow),
    pytest.param("duelddqn", {"hidden_widths": [8], "batch_size": 8, "buffer_size": 64}, marks=pytest.mark.slow),
    pytest.param("a2c", {"hidden_widths": [8], "rollout_length": 8}, marks=pytest.mark.slow),
    pytest.param("ppo", {"hidden_widths": [8], "rollout_length": 32, "batch_size": 16, "epochs": 2},
                 marks=pytest.mark.slow),
])
def test_resume_matches_uninterrupted_run(tmp_path, monkeypatch, agent, overrides):
    values = {"agent": agent, "frames": 400, "max_steps": 30, "checkpoint_interval": 3, "overrides": overrides}
    records, summary = trainer.train(run_config(tmp_path / "whole", **values), 2)

    monkeypatch.setattr(trainer, "build_agent", interrupting_builder(250))
    with pytest.raises(Interrupted):
        trainer.train(run_config(tmp_path / "split", **values), 2)
    monkeypatch.undo()
    run_dir = tmp_path / "split" / ("pb_%s_seed2" % agent)
    assert len(read_jsonl(run_dir / "metrics.jsonl")) > 0
    restored, _ = load_checkpoint(run_dir / "checkpoint.bin")
    assert 0 < restored.frames < 250

    resumed_records, resumed = trainer.resume(str(run_dir / "checkpoint.bin"))
    assert resumed_records == records
    whole_dir = tmp_path / "whole" / ("pb_%s_seed2" % agent)
    assert (run_dir / "metrics.jsonl").read_bytes() == (whole_dir / "metrics.jsonl").read_bytes()
    assert len(read_jsonl(run_dir / "timings.jsonl")) == len(records)
    summary.pop("wall_time")
    resumed.pop("wall_time")
    assert resumed == summary
    finished, _ = load_checkpoint(run_dir / "checkpoint.bin")
    assert finished.frames == 400


def test_resume_rejects_unusable_checkpoints(tmp_path):
    path = tmp_path / "plain.bin"
    save_checkpoint(constant_agent(), path, RunConfig(agent="dqn").to_dict())
    with pytest.raises(ConfigError):
        trainer.resume(str(path))
    trainer.train(run_config(tmp_path, frames=80), 0)
    run_dir = tmp_path / "pb_random_seed0"
    config_before = (run_dir / "config.yaml").read_bytes()
    with pytest.raises(ConfigError):
        trainer.resume(str(run_dir / "checkpoint.bin"), frames=40)
    assert (run_dir / "config.yaml").read_bytes() == config_before
    (run_dir / "metrics.jsonl").write_text("")
    with pytest.raises(ConfigError):
        trainer.resume(str(run_dir / "checkpoint.bin"), frames=120)


def test_run_log_follows_run_directory(tmp_path):
    trainer.train(run_config(tmp_path, frames=30), 0)
    run_dir = tmp_path / "pb_random_seed0"
    assert logManager.logger.run_log == str(run_dir / "ayslab.log")
    assert "Finished seed 0" in (run_dir / "ayslab.log").read_text()
    trainer.train(run_config(tmp_path, frames=30), 1)
    assert logManager.logger.run_log == str(tmp_path / "pb_random_seed1" / "ayslab.log")
    assert "seed 1" not in (run_dir / "ayslab.log").read_text()


def test_evaluate_zero_episodes(tmp_path):
    summary = evaluation.evaluate_agent(linear_q_agent(np.zeros((4, 3))), RunConfig(), 0, out_dir=str(tmp_path / "ev"))
    assert summary["episodes"] == 0 and summary["returns"] == []
    assert not (tmp_path / "ev").exists()


def test_greedy_evaluation_is_repeatable(tmp_path):
    agent = linear_q_agent([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    summary = evaluation.evaluate_agent(agent, RunConfig(max_steps=80), 3, start=START_STATE, out_dir=str(tmp_path))
    assert len(set(summary["returns"])) == 1
    assert sum(summary["action_counts"].values()) > 0
    assert sorted(os.listdir(tmp_path)) == ["evaluation.json", "trajectory_000.csv", "trajectory_001.csv",
                                            "trajectory_002.csv"]
    noise_free = evaluation.evaluate_agent(agent, RunConfig(max_steps=80), 3, start=START_STATE, noise_variance=0.0)
    assert noise_free["returns"] == summary["returns"]


def test_noisy_evaluation_uses_one_parameter_set():
    agent = linear_q_agent(np.zeros((4, 3)))
    summary = evaluation.evaluate_agent(agent, RunConfig(max_steps=50), 3, start=START_STATE, noise_variance=0.05,
                                        seed=9)
    assert len(set(summary["returns"])) == 1
    again = evaluation.evaluate_agent(agent, RunConfig(max_steps=50), 3, start=START_STATE, noise_variance=0.05,
                                      seed=9)
    assert again["returns"] == summary["returns"]


def test_evaluation_width_mismatch():
    agent = agent_factory("dqn", {"hidden_widths": [4]}, 6, 1000, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        evaluation.evaluate_agent(agent, RunConfig(), 1)
    with pytest.raises(ConfigError):
        evaluation.grid_sweep(agent, RunConfig(), 3)


def test_parse_start():
    assert evaluation.parse_start(None) is None
    assert evaluation.parse_start("s0") == START_STATE
    assert evaluation.parse_start("0.4,0.5,0.6") == (0.4, 0.5, 0.6)
    with pytest.raises(ConfigError):
        evaluation.parse_start("0.4,0.5")
    with pytest.raises(ConfigError):
        evaluation.parse_start("north")


def test_constant_value_grid():
    agent = linear_q_agent(np.zeros((4, 3)))
    agent.policy_net.biases[0][...] = [0.5, 2.0, 1.0, 0.0]
    _, _, matrix, path = evaluation.grid_sweep(agent, RunConfig(), 4)
    assert path is None
    assert matrix == [[2.0] * 4] * 4


def test_linear_value_grid(tmp_path):
    agent = linear_q_agent([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    a_axis, y_axis, matrix, path = evaluation.grid_sweep(agent, RunConfig(), 5, "value", str(tmp_path))
    np.testing.assert_allclose(a_axis, [0.45, 0.475, 0.5, 0.525, 0.55])
    for i, y in enumerate(y_axis):
        for j, a in enumerate(a_axis):
            assert matrix[i][j] == pytest.approx(max(a, y))
    stored_a, stored_y, cells = read_grid_csv(path)
    np.testing.assert_allclose(stored_a, a_axis)
    assert float(cells[0][4]) == pytest.approx(0.55)
    _, _, actions, path = evaluation.grid_sweep(agent, RunConfig(), 5, "first-action", str(tmp_path))
    assert os.path.basename(path) == "grid_first_action.csv"
    for i in range(5):
        for j in range(5):
            assert actions[i][j] == ("Default" if j >= i else "DG")


def test_single_cell_grid_matches_start_evaluation():
    agent = linear_q_agent([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    config = RunConfig(max_steps=60)
    axis, _, matrix, _ = evaluation.grid_sweep(agent, config, 1, "end-state")
    assert list(axis) == [0.5]
    summary = evaluation.evaluate_agent(agent, config, 1, start=START_STATE)
    assert matrix == [[list(summary["outcomes"])[0]]]
    _, _, values, _ = evaluation.grid_sweep(agent, config, 1, "value")
    assert values[0][0] == pytest.approx(agent.value_estimate(np.array(START_STATE)))
    with pytest.raises(ConfigError):
        evaluation.grid_sweep(agent, config, 0)
    with pytest.raises(ConfigError):
        evaluation.grid_sweep(agent, config, 3, "heatmap")


def test_checkpoint_evaluation(tmp_path):
    agent = constant_agent()
    path = tmp_path / "checkpoint.bin"
    save_checkpoint(agent, path, RunConfig(max_steps=30).to_dict())
    summary = evaluation.evaluate(str(path), 2, start=START_STATE)
    assert summary["episodes"] == 2
    _, _, matrix, _ = evaluation.grid_from_checkpoint(str(path), 2, "value")
    assert matrix == [[0.0, 0.0], [0.0, 0.0]]


def test_cli_environment_fallbacks(monkeypatch):
    monkeypatch.setenv("AYSLAB_OUTPUT", "/tmp/ayslab-out")
    monkeypatch.setenv("AYSLAB_SEED", "7")
    monkeypatch.setenv("DEBUG", "true")
    args = argumentHandler.parse_arguments(["train", "--agent", "ppo"])
    assert args["OUTPUT"] == "/tmp/ayslab-out" and args["SEED"] == 7 and args["DEBUG"]
    assert args["AGENT"] == "ppo" and args["WORKERS"] == 1
    args = argumentHandler.parse_arguments(["grid", "--checkpoint", "c.bin", "--out", "elsewhere"])
    assert args["SEED"] == 7 and args["OUTPUT"] == "elsewhere" and args["MODE"] == "value"


def test_cli_round_trip(tmp_path):
    out = str(tmp_path)
    AysLab.main(["train", "--agent", "random", "--frames", "60", "--seed", "0", "--out", out])
    checkpoint = os.path.join(out, "pb_random_seed0", "checkpoint.bin")
    assert read_json(os.path.join(out, "pb_random_seed0", "summary.json"))["frames"] == 60
    AysLab.main(["evaluate", "--checkpoint", checkpoint, "--episodes", "2", "--start", "s0", "--out", out])
    assert read_json(os.path.join(out, "evaluation", "evaluation.json"))["episodes"] == 2
    AysLab.main(["grid", "--checkpoint", checkpoint, "--resolution", "2", "--out", out])
    assert os.path.exists(os.path.join(out, "grid_value.csv"))


def test_cli_exit_codes(tmp_path, monkeypatch):
    with pytest.raises(SystemExit) as info:
        AysLab.main(["train", "--preset", "stormy", "--out", str(tmp_path)])
    assert info.value.code == 2

    def explode(config, seeds, workers):
        raise NumericError("diverged")

    monkeypatch.setattr(trainer, "train_seeds", explode)
    with pytest.raises(SystemExit) as info:
        AysLab.main(["train", "--agent", "random", "--out", str(tmp_path)])
    assert info.value.code == 3
    with pytest.raises(SystemExit) as info:
        AysLab.main(["evaluate", "--checkpoint", str(tmp_path / "missing.bin")])
    assert info.value.code == 2
    checkpoint = str(tmp_path / "cli" / "pb_random_seed0" / "checkpoint.bin")
    AysLab.main(["train", "--agent", "random", "--frames", "40", "--seed", "0", "--out", str(tmp_path / "cli")])
    with pytest.raises(SystemExit) as info:
        AysLab.main(["evaluate", "--checkpoint", checkpoint, "--episodes", "1", "--start", "0.5,1.0,0.5",
                     "--out", str(tmp_path / "cli")])
    assert info.value.code == 2


def test_cli_resume_extends_run(tmp_path):
    out = str(tmp_path)
    AysLab.main(["train", "--agent", "random", "--frames", "60", "--seed", "4", "--out", out])
    run_dir = os.path.join(out, "pb_random_seed4")
    first = read_jsonl(os.path.join(run_dir, "metrics.jsonl"))
    AysLab.main(["train", "--resume", os.path.join(run_dir, "checkpoint.bin"), "--frames", "150"])
    extended = read_jsonl(os.path.join(run_dir, "metrics.jsonl"))
    assert extended[:len(first)] == first and extended[-1]["frames"] == 150
    assert read_json(os.path.join(run_dir, "summary.json"))["frames"] == 150
    with open(os.path.join(run_dir, "config.yaml")) as fp:
        assert yaml.safe_load(fp)["frames"] == 150
