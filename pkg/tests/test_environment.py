import csv
import math
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from environment.dynamics import (ActionKind, AysParams, EpisodeOutcome, RewardScheme, REFERENCE_STATE, A_PB_NORM,
                                  normalize, denormalize, effective_params, fossil_share, derivatives,
                                  normalized_derivatives, black_fixed_point, integrate_step, accumulate_velocity,
                                  markov_step, check_termination, reward)
from environment.AysEnv import AysEnv, NoiseSchedule, NoiseSpec, sample_params, reset_state, TRAJECTORY_HEADER
from functions.errors import DomainError, IntegrationError, UsageError, ConfigError

S0 = np.array([0.5, 0.5, 0.5])


def test_normalize_examples():
    np.testing.assert_allclose(normalize(REFERENCE_STATE), S0)
    np.testing.assert_array_equal(normalize([0.0, 0.0, 0.0]), np.zeros(3))
    assert normalize([345.0, 0.0, 0.0])[0] == pytest.approx(345.0 / 585.0)
    assert A_PB_NORM == pytest.approx(0.5897, abs=1e-4)


def test_normalize_rejects_bad_states():
    with pytest.raises(DomainError):
        normalize([-1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        denormalize([1.0, 0.5, 0.5])


@given(st.lists(st.floats(min_value=1e-6, max_value=1e3), min_size=3, max_size=3))
def test_normalize_round_trip(multipliers):
    raw = REFERENCE_STATE * np.array(multipliers)
    np.testing.assert_allclose(denormalize(normalize(raw)), raw, rtol=1e-12)
    norm = normalize(raw)
    assert np.all((norm >= 0) & (norm < 1))


def test_effective_params():
    base = AysParams()
    assert effective_params(base, ActionKind.Default) == base
    assert effective_params(base, ActionKind.DG).beta == pytest.approx(0.015)
    assert effective_params(base, ActionKind.ET).sigma == pytest.approx(4e12 / math.sqrt(2.0))
    both = effective_params(base, ActionKind.DG_ET)
    assert both.beta == pytest.approx(0.015) and both.sigma == pytest.approx(4e12 / math.sqrt(2.0))
    assert both.tau_A == base.tau_A


def test_params_must_be_positive():
    with pytest.raises(DomainError):
        AysParams(beta=0.0)
    with pytest.raises(DomainError):
        AysParams(sigma=float("nan"))


def test_black_fixed_point_is_stationary():
    params = AysParams()
    point = black_fixed_point(params)
    assert point[0] == pytest.approx(350.06, abs=0.01)
    assert point[1] == pytest.approx(4.836e13, rel=1e-3)
    rates = derivatives(point, params)
    scales = np.array([point[0] / params.tau_A, params.beta * point[1], 1.0])
    assert np.all(np.abs(rates) <= 1e-9 * scales)


def test_black_fixed_point_step_is_unchanged():
    position = normalize(black_fixed_point())
    np.testing.assert_allclose(integrate_step(position, ActionKind.Default, AysParams()), position, atol=1e-9)


def test_fossil_share():
    params = AysParams()
    assert fossil_share(0.0, params) == 1.0
    assert fossil_share(params.sigma, params) == 0.5
    assert fossil_share(1e20, params) < 1e-10


@given(st.floats(min_value=0.0, max_value=1e15), st.floats(min_value=1e6, max_value=1e15))
def test_fossil_share_is_decreasing(S, step):
    params = AysParams()
    assert fossil_share(S + step, params) < fossil_share(S, params) or fossil_share(S, params) < 1e-15


def test_no_economy():
    rates = derivatives([100.0, 0.0, 2e11], AysParams())
    assert rates[1] == 0.0
    assert rates[2] == pytest.approx(-2e11 / 50.0)


def test_integration_error_carries_diagnostics():
    params = AysParams(tau_A=1e-4)
    with pytest.raises(IntegrationError) as info:
        integrate_step(S0, ActionKind.Default, params)
    assert {"start", "state", "action", "params", "substep"} <= set(info.value.diagnostics)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-0.05, max_value=0.05), st.floats(min_value=-0.05, max_value=0.05),
       st.floats(min_value=0.2, max_value=0.8),
       st.lists(st.floats(min_value=0.5, max_value=1.5), min_size=8, max_size=8),
       st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=60))
def test_states_stay_in_unit_cube(a_offset, y_offset, s, multipliers, actions):
    env = AysEnv(np.random.default_rng(0), params=AysParams().scaled(multipliers), max_steps=len(actions))
    state = env.reset(0, (0.5 + a_offset, 0.5 + y_offset, s))
    for action in actions:
        state, _, done, _ = env.step(action)
        assert np.all((state >= 0) & (state < 1))
        if done:
            break


def test_markov_first_velocity_is_normalized_derivative():
    params = AysParams()
    for action in ActionKind:
        state = markov_step(np.concatenate([S0, np.zeros(3)]), action, params)
        expected = normalized_derivatives(denormalize(state[:3]), effective_params(params, action))
        np.testing.assert_array_equal(state[3:], expected)
        assert np.any(state[3:] != 0.0)


def test_termination_examples():
    assert check_termination([0.60, 0.5, 0.5]) == EpisodeOutcome.CarbonBoundary
    assert check_termination([0.01, 0.995, 0.995]) == EpisodeOutcome.GreenFixedPoint
    assert check_termination(S0) is None
    assert check_termination([0.5, 0.3, 0.5]) == EpisodeOutcome.EconomicBoundary
    assert check_termination(normalize(black_fixed_point())) == EpisodeOutcome.BlackFixedPoint


def test_pb_reward():
    value = reward(S0, ActionKind.Default, S0, RewardScheme.PB)
    assert value == pytest.approx(math.sqrt(0.09 ** 2 + 0.13 ** 2 + 0.5 ** 2))
    squared = reward(S0, ActionKind.Default, S0, RewardScheme.PB, squared=True)
    assert squared == pytest.approx(value ** 2)


def test_policy_cost_reward():
    base = reward(S0, ActionKind.Default, S0, RewardScheme.PB)
    assert reward(S0, ActionKind.DG_ET, S0, RewardScheme.PolicyCost) == pytest.approx(0.25 * base)
    assert reward(S0, ActionKind.DG, S0, RewardScheme.PolicyCost) == pytest.approx(0.5 * base)
    assert reward(S0, ActionKind.Default, S0, RewardScheme.PolicyCost) == pytest.approx(base)


def test_simple_reward():
    assert reward(S0, ActionKind.Default, S0, RewardScheme.Simple) == 0.0
    assert reward(S0, 0, S0, "simple", EpisodeOutcome.CarbonBoundary) == -1.0
    assert reward(S0, 0, S0, "simple", EpisodeOutcome.EconomicBoundary) == -1.0
    assert reward(S0, 0, S0, "simple", EpisodeOutcome.GreenFixedPoint, gamma=0.99) == pytest.approx(100.0)


def test_fixed_point_bonus():
    green = np.array([0.005, 0.995, 0.995])
    plain = reward(S0, 0, green, "pb")
    assert reward(S0, 0, green, "pb", EpisodeOutcome.GreenFixedPoint, 0.99) == pytest.approx(100 * plain)
    assert reward(S0, 0, green, "pb", EpisodeOutcome.CarbonBoundary, 0.99) == pytest.approx(plain)


def test_noise_free_params_are_base(rng):
    base = AysParams()
    assert sample_params(base, 0.0, rng) is base
    _, params = reset_state(rng, NoiseSpec(0.0), 0, base)
    assert params == base


@given(st.floats(min_value=1e-6, max_value=4.0), st.integers(min_value=0, max_value=2 ** 32 - 1))
@settings(max_examples=50)
def test_noise_multipliers_are_clipped(variance, seed):
    base = AysParams()
    params = sample_params(base, variance, np.random.default_rng(seed))
    ratios = np.array(list(params.to_dict().values())) / np.array(list(base.to_dict().values()))
    assert np.all((ratios >= 0.5 - 1e-12) & (ratios <= 1.5 + 1e-12))


def test_noise_schedule():
    schedule = NoiseSchedule()
    assert schedule.variance_at(0) == pytest.approx(1e-5)
    assert schedule.variance_at(499) == pytest.approx(1e-5)
    assert schedule.variance_at(500) == pytest.approx(1e-4)
    assert schedule.variance_at(2500) == 1.0
    assert schedule.variance_at(10000) == 1.0


def test_noise_spec_validation():
    with pytest.raises(ConfigError):
        NoiseSpec(-1.0)
    with pytest.raises(ConfigError):
        NoiseSpec(0.1, clip_low=1.2)


def test_reset_perturbs_only_a_and_y(rng):
    env = AysEnv(rng)
    for _ in range(100):
        state = env.reset()
        assert 0.45 <= state[0] <= 0.55 and 0.45 <= state[1] <= 0.55 and state[2] == 0.5


def test_reset_with_start(rng):
    env = AysEnv(rng, variant="markov")
    state = env.reset(start=S0)
    np.testing.assert_array_equal(state, [0.5, 0.5, 0.5, 0.0, 0.0, 0.0])
    assert env.observation_width == 6


def test_velocity_accumulation():
    np.testing.assert_array_equal(accumulate_velocity(np.zeros(3), np.zeros(3)), np.zeros(3))
    d = np.array([0.1, -0.2, 0.3])
    np.testing.assert_allclose(accumulate_velocity(accumulate_velocity(np.zeros(3), d), d), 2 * d)


def test_markov_step_at_fixed_point():
    position = normalize(black_fixed_point())
    state = markov_step(np.concatenate([position, np.zeros(3)]), ActionKind.Default, AysParams())
    np.testing.assert_allclose(state[:3], position, atol=1e-9)
    np.testing.assert_allclose(state[3:], 0.0, atol=1e-9)


def test_markov_position_matches_standard(rng):
    standard = integrate_step(S0, ActionKind.ET, AysParams())
    markov = markov_step(np.concatenate([S0, np.zeros(3)]), ActionKind.ET, AysParams())
    np.testing.assert_array_equal(markov[:3], standard)


def test_step_after_done_is_rejected(rng):
    env = AysEnv(rng)
    with pytest.raises(UsageError):
        env.step(0)
    env.reset(start=[0.60, 0.5, 0.5])
    _, _, done, info = env.step(0)
    assert done and info["outcome"] == EpisodeOutcome.CarbonBoundary
    with pytest.raises(UsageError):
        env.step(0)


def test_frame_limit(rng):
    env = AysEnv(rng, max_steps=3)
    env.reset(start=S0)
    outcomes = [env.step(1)[3]["outcome"] for _ in range(3)]
    assert outcomes == [None, None, EpisodeOutcome.FrameLimit]
    assert env.done


def test_unknown_variant(rng):
    with pytest.raises(ConfigError):
        AysEnv(rng, variant="stochastic")


def test_episodes_are_deterministic():
    def run(seed):
        env = AysEnv(np.random.default_rng(seed), variant="noisy", noise=NoiseSpec(0.01))
        actions = np.random.default_rng(seed + 1)
        rewards = []
        env.reset()
        done = False
        while not done:
            _, value, done, _ = env.step(int(actions.integers(4)))
            rewards.append(value)
        return rewards

    assert run(5) == run(5)


def test_trajectory_export(rng, tmp_path):
    env = AysEnv(rng, max_steps=4)
    env.reset(start=S0)
    done = False
    while not done:
        done = env.step(2)[2]
    path = tmp_path / "trajectory.csv"
    env.export_trajectory(path)
    with open(path, newline="") as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == TRAJECTORY_HEADER
    assert len(rows) == 1 + 1 + env.steps
    assert rows[-1][4] == "ET"
    assert rows[-1][6] == env.outcome.value
