"""Policy evaluation: undiscounted per-episode returns."""

import numpy as np


def random_policy(action_dim, seed):
    """Uniform actions in [-1, 1]^action_dim from a private seeded stream."""
    rng = np.random.default_rng(seed)

    def policy(_obs):
        return rng.uniform(-1.0, 1.0, size=action_dim)

    return policy


def rollout(env, policy, seed, n_episodes):
    """Run `n_episodes` episodes and return their undiscounted returns.

    Episode i resets the environment with a child seed derived from (seed, i),
    so results are deterministic per (env config, policy, seed).
    """
    returns = []
    for i in range(int(n_episodes)):
        obs = env.reset(np.random.SeedSequence((seed, i)))
        total = 0.0
        done = False
        while not done:
            obs, reward, done = env.step(policy(obs))
            total += reward
        returns.append(total)
    return returns
