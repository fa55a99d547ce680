"""Tests for offline dataset generation, storage and sampling."""

import numpy as np
import pytest
from scipy import stats as scipy_stats

from rebrac.datasets import (
    STD_FLOOR,
    BehaviorPolicy,
    OfflineDataset,
    TIERS,
    generate,
    load,
    meta_path,
    normalize_dataset,
    sample_batch,
    save,
    state_stats,
)
from rebrac.envs import MazeEnv, ReachEnv
from rebrac.errors import DatasetFormatError


def tiny_dataset(states, meta=None):
    states = np.asarray(states, dtype=np.float32)
    n = states.shape[0]
    return OfflineDataset(
        states=states,
        actions=np.zeros((n, 2), dtype=np.float32),
        rewards=np.zeros(n, dtype=np.float32),
        next_states=states.copy(),
        next_actions=np.zeros((n, 2), dtype=np.float32),
        dones=np.zeros(n, dtype=np.uint8),
        meta=meta or {},
    )


def episode_ends(ds):
    """Rows closing an episode, detected by state-continuity breaks.

    Within an episode the stored next_state of row i is bit-identical to the
    state of row i+1 (the same float32 observation is handed through), so any
    mismatch marks a reset.  Action equality is not usable here: a saturated
    controller emits identical clipped actions on consecutive steps.
    """
    ends = np.zeros(ds.n, dtype=bool)
    ends[-1] = True
    for i in range(ds.n - 1):
        if not np.array_equal(ds.states[i + 1], ds.next_states[i]):
            ends[i] = True
    return ends


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def test_uniform_random_reach_dataset():
    ds = generate(ReachEnv(), TIERS["random"], 1000, seed=0)
    assert ds.n == 1000
    assert np.all(np.abs(ds.actions) <= 1.0)
    assert np.abs(ds.actions.mean(axis=0)).max() < 0.1
    assert ds.meta["env"] == "reach"
    assert ds.meta["behavior"] == "uniform_random"
    assert ds.meta["n"] == 1000 and ds.meta["seed"] == 0


def test_expert_maze_dataset_mostly_reaches_goal():
    ds = generate(MazeEnv(), TIERS["expert"], 2000, seed=1)
    n_episodes = int(episode_ends(ds).sum())
    n_success = int(ds.dones.sum())
    assert n_episodes == ds.meta["n_episodes"]
    assert n_episodes >= 5
    assert n_success / n_episodes >= 0.8


def test_single_transition_dataset_self_anchors():
    ds = generate(ReachEnv(), TIERS["random"], 1, seed=2)
    assert ds.n == 1
    assert np.array_equal(ds.next_actions[0], ds.actions[0])


def test_generation_is_deterministic():
    a = generate(ReachEnv(), TIERS["replay"], 500, seed=3)
    b = generate(ReachEnv(), TIERS["replay"], 500, seed=3)
    for field in ("states", "actions", "rewards", "next_states", "next_actions", "dones"):
        assert np.array_equal(getattr(a, field), getattr(b, field))
    assert a.meta == b.meta


def test_next_action_chain_consistency():
    ds = generate(MazeEnv(), TIERS["medium"], 1200, seed=4)
    ends = episode_ends(ds)
    for i in range(ds.n - 1):
        if ends[i]:
            assert np.array_equal(ds.next_actions[i], ds.actions[i])
        else:
            assert np.array_equal(ds.next_actions[i], ds.actions[i + 1])
    assert ends[ds.n - 1]  # budget cut closes the final episode


def test_maze_rewards_only_zero_or_scale():
    ds = generate(MazeEnv(), TIERS["expert"], 1500, seed=5)
    assert set(np.unique(ds.rewards)) <= {0.0, 100.0}
    assert (ds.rewards == 100.0).sum() == ds.dones.sum()


def test_done_marks_true_terminals_only():
    # Reaching has no terminal states, so a reach dataset has all-zero dones
    # even though episodes end at the horizon.
    ds = generate(ReachEnv(), TIERS["random"], 450, seed=6)
    assert ds.dones.sum() == 0
    assert int(episode_ends(ds).sum()) >= 2


def test_generate_rejects_empty_budget():
    with pytest.raises(ValueError):
        generate(ReachEnv(), TIERS["random"], 0, seed=0)


def test_behavior_policy_validation():
    with pytest.raises(ValueError):
        BehaviorPolicy("teleport")
    with pytest.raises(ValueError):
        BehaviorPolicy("p_controller", skill=1.5)
    with pytest.raises(ValueError):
        BehaviorPolicy(
            "mixture",
            components=(BehaviorPolicy("uniform_random"),),
            weights=(0.5,),
        )


# ---------------------------------------------------------------------------
# save / load
# ---------------------------------------------------------------------------


def test_round_trip_is_bit_exact(tmp_path):
    ds = generate(ReachEnv(), TIERS["medium"], 300, seed=7)
    path = tmp_path / "reach.rbd"
    save(ds, path)
    back = load(path)
    for field in ("states", "actions", "rewards", "next_states", "next_actions", "dones"):
        assert np.array_equal(getattr(ds, field), getattr(back, field))
        assert getattr(ds, field).dtype == getattr(back, field).dtype
    assert back.meta == ds.meta


def test_identical_datasets_produce_identical_bytes(tmp_path):
    ds = generate(ReachEnv(), TIERS["random"], 120, seed=8)
    p1, p2 = tmp_path / "a.rbd", tmp_path / "b.rbd"
    save(ds, p1)
    save(ds, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert (tmp_path / "a.rbd.meta.json").read_text() == (
        tmp_path / "b.rbd.meta.json"
    ).read_text()


def test_load_rejects_bad_magic(tmp_path):
    ds = tiny_dataset([[0.0, 0.0]])
    path = tmp_path / "ds.rbd"
    save(ds, path)
    blob = bytearray(path.read_bytes())
    blob[0] = ord("X")
    path.write_bytes(bytes(blob))
    with pytest.raises(DatasetFormatError, match="bad magic"):
        load(path)


def test_load_rejects_unsupported_version(tmp_path):
    ds = tiny_dataset([[0.0, 0.0]])
    path = tmp_path / "ds.rbd"
    save(ds, path)
    blob = bytearray(path.read_bytes())
    blob[4:8] = (999).to_bytes(4, "little")
    path.write_bytes(bytes(blob))
    with pytest.raises(DatasetFormatError, match="unsupported version"):
        load(path)


def test_load_rejects_truncated_file(tmp_path):
    ds = tiny_dataset([[0.0, 0.0], [1.0, 1.0]])
    path = tmp_path / "ds.rbd"
    save(ds, path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) - 5])
    with pytest.raises(DatasetFormatError, match="truncated"):
        load(path)


def test_load_rejects_corrupted_payload(tmp_path):
    ds = tiny_dataset([[0.5, -0.5], [1.0, 2.0]])
    path = tmp_path / "ds.rbd"
    save(ds, path)
    blob = bytearray(path.read_bytes())
    blob[30] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(DatasetFormatError, match="checksum"):
        load(path)


def test_meta_path_convention(tmp_path):
    assert meta_path(tmp_path / "x.rbd").endswith("x.rbd.meta.json")


# ---------------------------------------------------------------------------
# sample_batch
# ---------------------------------------------------------------------------


def test_sampling_single_row_dataset_repeats_row():
    ds = tiny_dataset([[3.0, 4.0]])
    batch = sample_batch(ds, 5, np.random.default_rng(0))
    assert batch.size == 5
    assert np.all(batch.states == np.array([3.0, 4.0], dtype=np.float32))


def test_sampling_is_deterministic_per_rng_seed():
    ds = generate(ReachEnv(), TIERS["random"], 200, seed=9)
    b1 = sample_batch(ds, 64, np.random.default_rng(42))
    b2 = sample_batch(ds, 64, np.random.default_rng(42))
    assert np.array_equal(b1.states, b2.states)
    assert np.array_equal(b1.actions, b2.actions)


def test_sampling_uniformity_chi_square():
    ds = tiny_dataset(np.arange(10, dtype=np.float32).reshape(10, 1))
    rng = np.random.default_rng(123)
    draws = 100_000
    batch = sample_batch(ds, draws, rng)
    counts = np.bincount(batch.states[:, 0].astype(int), minlength=10)
    result = scipy_stats.chisquare(counts)
    assert result.pvalue > 0.001


def test_batch_shapes_and_column_vectors():
    ds = generate(ReachEnv(), TIERS["random"], 100, seed=10)
    batch = sample_batch(ds, 32, np.random.default_rng(0))
    assert batch.states.shape == (32, 4)
    assert batch.actions.shape == (32, 2)
    assert batch.rewards.shape == (32, 1)
    assert batch.dones.shape == (32, 1)


def test_sample_batch_normalization_uses_stored_stats():
    ds = generate(ReachEnv(), TIERS["random"], 500, seed=11)
    rng = np.random.default_rng(1)
    batch = sample_batch(ds, 400, rng, normalize=True)
    mean = np.asarray(ds.meta["state_mean"])
    std = np.asarray(ds.meta["state_std"])
    raw = sample_batch(ds, 400, np.random.default_rng(1), normalize=False)
    expected = ((raw.states - mean) / std).astype(np.float32)
    assert np.allclose(batch.states, expected, atol=1e-6)


def test_sample_batch_rejects_bad_size():
    ds = tiny_dataset([[0.0, 0.0]])
    with pytest.raises(ValueError):
        sample_batch(ds, 0, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# state_stats
# ---------------------------------------------------------------------------


def test_constant_states_hit_std_floor():
    ds = tiny_dataset([[2.0, -1.0]] * 8)
    _, std = state_stats(ds)
    assert np.all(std == STD_FLOOR)


def test_two_state_hand_computation():
    ds = tiny_dataset([[0.0], [2.0]])
    mean, std = state_stats(ds)
    assert mean[0] == pytest.approx(1.0)
    assert std[0] == pytest.approx(1.0)


def test_normalize_then_stats_standardizes():
    ds = generate(ReachEnv(), TIERS["random"], 600, seed=12)
    normalized = normalize_dataset(ds)
    mean, std = state_stats(normalized)
    assert np.abs(mean).max() < 1e-4
    assert np.abs(std - 1.0).max() < 1e-3


def test_dataset_shape_validation():
    with pytest.raises(ValueError):
        OfflineDataset(
            states=np.zeros((3, 2), dtype=np.float32),
            actions=np.zeros((2, 2), dtype=np.float32),
            rewards=np.zeros(3, dtype=np.float32),
            next_states=np.zeros((3, 2), dtype=np.float32),
            next_actions=np.zeros((3, 2), dtype=np.float32),
            dones=np.zeros(3, dtype=np.uint8),
        )
