"""Tests for the toy environments, experts and score normalization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rebrac.envs import (
    MazeConfig,
    MazeEnv,
    ReachConfig,
    ReachEnv,
    RefScores,
    compute_ref_scores,
    config_from_json,
    config_to_json,
    expert_policy,
    load_ref_scores,
    make_env,
    maze_expert,
    normalized_score,
    random_policy,
    reach_expert,
    rollout,
)

# ---------------------------------------------------------------------------
# reset
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["reach", "maze"])
def test_reset_is_deterministic_per_seed(name):
    env = make_env(name)
    assert np.array_equal(env.reset(7), env.reset(7))
    assert not np.array_equal(env.reset(7), env.reset(8))


def test_reach_start_within_sampling_box():
    env = ReachEnv()
    for seed in range(50):
        obs = env.reset(seed)
        assert np.all(np.abs(obs[:2]) <= env.config.start_halfwidth)
        assert np.all(obs[2:] == 0.0)


def test_maze_start_never_inside_wall():
    env = MazeEnv()
    for seed in range(100):
        obs = env.reset(seed)
        x, y = obs[:2]
        for x_lo, x_hi, y_lo, y_hi in env.config.walls:
            assert not (x_lo <= x <= x_hi and y_lo <= y <= y_hi)


# ---------------------------------------------------------------------------
# step
# ---------------------------------------------------------------------------


def test_reach_reward_is_zero_at_goal_at_rest():
    env = ReachEnv()
    env.reset(start=env.config.goal)
    _, reward, _ = env.step((0.0, 0.0))
    assert reward == 0.0


def test_reach_single_step_hand_computation():
    # From rest with a = (1, 0): v = dt*a = (0.05, 0), p += dt*v = (0.0025, 0).
    env = ReachEnv()
    env.reset(start=(0.0, 0.0))
    obs, _, _ = env.step((1.0, 0.0))
    assert obs[0] == pytest.approx(0.0025, abs=1e-8)
    assert obs[1] == 0.0
    assert obs[2] == pytest.approx(0.05, abs=1e-8)
    assert obs[3] == 0.0


def test_reach_reward_is_negative_distance():
    env = ReachEnv()
    env.reset(start=(0.0, 0.0))
    obs, reward, _ = env.step((0.0, 0.0))
    assert reward == pytest.approx(-float(np.linalg.norm(obs[:2] - np.array([1.0, 1.0]))))
    assert reward <= 0.0


def test_maze_push_into_wall_leaves_position_unchanged():
    env = MazeEnv()
    start = (1.0, 1.749)
    env.reset(start=start)
    obs, _, _ = env.step((0.0, 1.0))
    assert obs[0] == pytest.approx(start[0])
    assert obs[1] == pytest.approx(start[1])
    assert obs[3] == 0.0  # blocked axis velocity zeroed


def test_maze_slides_along_wall_face():
    env = MazeEnv()
    env.reset(start=(1.0, 1.749))
    obs, _, _ = env.step((1.0, 1.0))
    assert obs[1] == pytest.approx(1.749)  # vertical move rejected
    assert obs[0] > 1.0  # horizontal move still happens


def test_step_after_done_raises():
    env = ReachEnv(ReachConfig(horizon=2))
    env.reset(0)
    env.step((0.0, 0.0))
    _, _, done = env.step((0.0, 0.0))
    assert done
    with pytest.raises(RuntimeError):
        env.step((0.0, 0.0))


def test_non_finite_action_rejected():
    env = ReachEnv()
    env.reset(0)
    with pytest.raises(ValueError):
        env.step((np.nan, 0.0))


def test_actions_are_clipped():
    env = ReachEnv()
    env.reset(start=(0.0, 0.0))
    big, _, _ = env.step((100.0, 0.0))
    env.reset(start=(0.0, 0.0))
    unit, _, _ = env.step((1.0, 0.0))
    assert np.array_equal(big, unit)


def test_maze_terminates_on_goal_with_scaled_reward():
    env = MazeEnv()
    env.reset(start=(0.6, 3.1))
    done = False
    total = 0.0
    while not done:
        _, reward, done = env.step((0.0, 1.0))
        total += reward
    assert env.terminated
    assert total == env.config.reward_scale


# ---------------------------------------------------------------------------
# rollout
# ---------------------------------------------------------------------------


def test_rollout_zero_policy_reproducible_bit_exact():
    env = ReachEnv()
    zero = lambda obs: np.zeros(2)  # noqa: E731
    first = rollout(env, zero, 3, 4)
    second = rollout(env, zero, 3, 4)
    assert first == second
    assert all(r < 0.0 for r in first)


def test_rollout_expert_beats_random_in_reach():
    env = ReachEnv()
    expert_rets = rollout(env, reach_expert(env.config), 0, 10)
    random_rets = rollout(env, random_policy(2, 0), 0, 10)
    assert np.mean(expert_rets) > np.mean(random_rets)


def test_rollout_zero_episodes_is_empty():
    assert rollout(ReachEnv(), lambda obs: np.zeros(2), 0, 0) == []


@pytest.mark.parametrize("name", ["reach", "maze"])
def test_trajectories_deterministic_per_seed_and_actions(name):
    def run():
        env = make_env(name)
        obs = env.reset(11)
        rng = np.random.default_rng(12)
        trace = [obs]
        for _ in range(50):
            obs, reward, done = env.step(rng.uniform(-1, 1, size=2))
            trace.append(obs)
            if done:
                break
        return np.concatenate(trace)

    assert np.array_equal(run(), run())


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_reach_energy_bound_and_position_box(seed):
    env = ReachEnv()
    obs = env.reset(seed)
    rng = np.random.default_rng(seed)
    for _ in range(200):
        obs, _, done = env.step(rng.uniform(-1, 1, size=2))
        assert np.abs(obs[2:]).max() <= 1.0 / env.config.friction
        assert np.abs(obs[:2]).max() <= env.config.position_bound
        if done:
            break


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_maze_return_is_zero_or_reward_scale(seed):
    env = MazeEnv()
    (ret,) = rollout(env, random_policy(2, seed), seed, 1)
    assert ret in (0.0, env.config.reward_scale)


def test_maze_expert_reaches_goal_from_everywhere():
    env = MazeEnv()
    expert = maze_expert(env.config)
    starts = [None] * 30
    box = env.config.start_box
    corners = [(box[0], box[0]), (box[0], box[1]), (box[1], box[0]), (box[1], box[1])]
    for i, corner in enumerate(corners):
        starts.append(corner)
    for i, start in enumerate(starts):
        if start is None:
            obs = env.reset(np.random.SeedSequence((900, i)))
        else:
            obs = env.reset(start=start)
        done = False
        while not done:
            obs, _, done = env.step(expert(obs))
        assert env.terminated, f"expert failed from start {start}"
        assert env.steps_taken < env.config.horizon


# ---------------------------------------------------------------------------
# normalized scores
# ---------------------------------------------------------------------------


def test_normalized_score_endpoints_and_midpoint():
    refs = RefScores(random_return=-300.0, expert_return=-30.0)
    assert normalized_score(-300.0, refs) == 0.0
    assert normalized_score(-30.0, refs) == 100.0
    assert normalized_score(-165.0, refs) == 50.0


def test_normalized_score_is_not_clipped():
    refs = RefScores(random_return=0.0, expert_return=10.0)
    assert normalized_score(20.0, refs) == 200.0
    assert normalized_score(-10.0, refs) == -100.0


def test_ref_scores_require_expert_above_random():
    with pytest.raises(ValueError):
        RefScores(random_return=5.0, expert_return=5.0)
    with pytest.raises(ValueError):
        RefScores(random_return=5.0, expert_return=1.0)


def test_pinned_refs_match_recomputation():
    pinned = load_ref_scores()
    assert set(pinned) == {"reach", "maze"}
    for name, refs in pinned.items():
        fresh = compute_ref_scores(name)
        assert fresh.random_return == pytest.approx(refs.random_return, abs=1e-9)
        assert fresh.expert_return == pytest.approx(refs.expert_return, abs=1e-9)


# ---------------------------------------------------------------------------
# configs and registry
# ---------------------------------------------------------------------------


def test_env_config_json_round_trip():
    for cfg in (ReachConfig(), MazeConfig(), MazeConfig(reward_scale=1.0, horizon=150)):
        assert config_from_json(config_to_json(cfg)) == cfg


def test_make_env_and_expert_registry():
    assert isinstance(make_env("reach"), ReachEnv)
    assert isinstance(make_env("maze"), MazeEnv)
    assert callable(expert_policy("reach"))
    assert callable(expert_policy("maze"))
    with pytest.raises(KeyError):
        make_env("cartpole")
    with pytest.raises(KeyError):
        expert_policy("cartpole")
