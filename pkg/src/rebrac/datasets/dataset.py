"""Columnar offline dataset, batch sampling and state statistics."""

from dataclasses import dataclass, field, replace

import numpy as np

STD_FLOOR = 1e-3


@dataclass(frozen=True)
class OfflineDataset:
    """Immutable transition store.

    next_actions[i] is the dataset action taken from next_states[i]: within an
    episode it equals actions[i+1]; on the last transition of an episode it
    anchors to actions[i] itself so action-difference penalties stay defined.
    dones marks true terminal transitions only, not horizon cuts.
    """

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    next_actions: np.ndarray
    dones: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.states.shape[0]
        if n < 1:
            raise ValueError("dataset must contain at least one transition")
        if not (
            self.actions.shape[0] == n
            and self.rewards.shape == (n,)
            and self.next_states.shape == self.states.shape
            and self.next_actions.shape == self.actions.shape
            and self.dones.shape == (n,)
        ):
            raise ValueError("dataset columns have inconsistent shapes")

    @property
    def n(self):
        return self.states.shape[0]

    @property
    def state_dim(self):
        return self.states.shape[1]

    @property
    def action_dim(self):
        return self.actions.shape[1]


@dataclass(frozen=True)
class Batch:
    """One sampled minibatch; rewards and dones are column vectors so they
    broadcast against per-row critic outputs."""

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    next_actions: np.ndarray
    dones: np.ndarray

    @property
    def size(self):
        return self.states.shape[0]


def state_stats(ds: OfflineDataset):
    """Per-dimension mean and population std of all states, std floored at
    1e-3 so constant dimensions stay usable as divisors."""
    mean = ds.states.mean(axis=0, dtype=np.float64)
    std = ds.states.std(axis=0, dtype=np.float64)
    return mean, np.maximum(std, STD_FLOOR)


def normalize_dataset(ds: OfflineDataset) -> OfflineDataset:
    """New dataset with states and next_states standardized by state_stats;
    meta records the applied mean/std of the result."""
    mean, std = state_stats(ds)
    states = ((ds.states - mean) / std).astype(np.float32)
    next_states = ((ds.next_states - mean) / std).astype(np.float32)
    out = replace(ds, states=states, next_states=next_states, meta=dict(ds.meta))
    m2, s2 = state_stats(out)
    out.meta["state_mean"] = [float(v) for v in m2]
    out.meta["state_std"] = [float(v) for v in s2]
    return out


def sample_batch(ds: OfflineDataset, batch_size, rng, normalize=False) -> Batch:
    """Uniform-with-replacement minibatch.

    With normalize=True, states and next_states are standardized using the
    mean/std stored in ds.meta (falling back to freshly computed stats).
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    idx = rng.integers(0, ds.n, size=int(batch_size))
    states = ds.states[idx]
    next_states = ds.next_states[idx]
    if normalize:
        if "state_mean" in ds.meta and "state_std" in ds.meta:
            mean = np.asarray(ds.meta["state_mean"], dtype=np.float64)
            std = np.asarray(ds.meta["state_std"], dtype=np.float64)
        else:
            mean, std = state_stats(ds)
        states = ((states - mean) / std).astype(np.float32)
        next_states = ((next_states - mean) / std).astype(np.float32)
    return Batch(
        states=states,
        actions=ds.actions[idx],
        rewards=ds.rewards[idx].reshape(-1, 1),
        next_states=next_states,
        next_actions=ds.next_actions[idx],
        dones=ds.dones[idx].astype(np.float32).reshape(-1, 1),
    )
