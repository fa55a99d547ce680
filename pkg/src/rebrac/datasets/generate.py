"""Offline dataset collection from an environment and a behavior policy."""

import numpy as np

from .behavior import BehaviorPolicy, realize
from .dataset import OfflineDataset, state_stats


def _env_name(env):
    return type(env).__name__.replace("Env", "").lower()


def generate(env, policy: BehaviorPolicy, n_transitions, seed) -> OfflineDataset:
    """Roll seeded episodes until n_transitions are collected.

    Episodes end on terminal, horizon, or when the budget fills mid-episode;
    in every case the final row of an episode self-anchors next_action to its
    own action.  dones records true terminals only.
    """
    n_transitions = int(n_transitions)
    if n_transitions < 1:
        raise ValueError("n_transitions must be >= 1")

    rng = np.random.default_rng(seed)
    states, actions, rewards, next_states, dones = [], [], [], [], []
    next_actions = []
    episode = 0
    while len(states) < n_transitions:
        obs = env.reset(np.random.SeedSequence((seed, episode)))
        act = realize(policy, env, rng)
        episode += 1
        ep_actions = []
        done = False
        while not done and len(states) < n_transitions:
            a = np.clip(np.asarray(act(obs), dtype=np.float64), -1.0, 1.0)
            next_obs, reward, done = env.step(a)
            states.append(obs)
            ep_actions.append(a.astype(np.float32))
            rewards.append(reward)
            next_states.append(next_obs)
            dones.append(1 if env.terminated else 0)
            obs = next_obs
        actions.extend(ep_actions)
        # Chain next_actions within the episode; the last row anchors to itself.
        next_actions.extend(ep_actions[1:])
        next_actions.append(ep_actions[-1])

    ds = OfflineDataset(
        states=np.asarray(states, dtype=np.float32),
        actions=np.asarray(actions, dtype=np.float32),
        rewards=np.asarray(rewards, dtype=np.float32),
        next_states=np.asarray(next_states, dtype=np.float32),
        next_actions=np.asarray(next_actions, dtype=np.float32),
        dones=np.asarray(dones, dtype=np.uint8),
        meta={},
    )
    mean, std = state_stats(ds)
    ds.meta.update(
        {
            "env": _env_name(env),
            "env_config": env.config.to_dict(),
            "behavior": policy.describe(),
            "n": ds.n,
            "n_episodes": episode,
            "seed": int(seed),
            "state_mean": [float(v) for v in mean],
            "state_std": [float(v) for v in std],
        }
    )
    return ds
