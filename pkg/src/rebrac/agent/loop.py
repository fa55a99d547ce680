"""Offline training driver shared by the command-line tools and the tests."""

from dataclasses import replace as _ds_replace

import numpy as np

from ..datasets import sample_batch, state_stats
from ..envs import rollout
from .config import AgentConfig
from .core import init_agent, select_action, train_step
from .metrics import MetricsWriter


def evaluate(state, env, n_episodes=10, seed=0):
    """Mean undiscounted return of the deterministic policy."""

    def policy(obs):
        return select_action(state, obs, deterministic=True)

    returns = rollout(env, policy, seed=seed, n_episodes=n_episodes)
    return float(np.mean(returns))


def final_score(history, window=3):
    """Run-level score: mean return over the last `window` evaluations.

    Deterministic goal-reaching policies score episodes all-or-nothing, so a
    single final snapshot is noisy; averaging the tail of the evaluation
    history is the convention shared by the train/ablate commands and the
    acceptance suite.  With a single recorded evaluation this is just that
    value.
    """
    if not history:
        raise ValueError("empty evaluation history")
    return float(np.mean([ret for _, ret in history[-window:]]))


def standardized_view(ds):
    """(standardized dataset, mean, std): states and next_states shifted and
    scaled by the raw dataset's per-dimension statistics."""
    mean, std = state_stats(ds)
    states = ((ds.states - mean) / std).astype(np.float32)
    next_states = ((ds.next_states - mean) / std).astype(np.float32)
    return _ds_replace(ds, states=states, next_states=next_states), mean, std


def train_agent(
    ds,
    cfg: AgentConfig,
    seed,
    n_steps,
    env=None,
    eval_every=0,
    eval_episodes=10,
    metrics_path=None,
    metrics_every=1,
):
    """Run offline training for n_steps; returns (state, eval_history).

    With state_normalization on, the dataset is standardized once up front and
    the same constants are stored in the agent for raw-state evaluation.
    eval_history is a list of (step, mean_return) pairs (requires env and
    eval_every > 0); the final step is always evaluated when env is given.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if cfg.state_normalization:
        train_ds, mean, std = standardized_view(ds)
        state = init_agent(cfg, seed, state_mean=mean, state_std=std)
    else:
        train_ds = ds
        state = init_agent(cfg, seed)

    def sampler(batch_size, rng):
        return sample_batch(train_ds, batch_size, rng, normalize=False)

    history = []
    writer = MetricsWriter(metrics_path) if metrics_path else None
    try:
        for step in range(1, n_steps + 1):
            state, metrics = train_step(sampler, state, cfg)
            do_eval = env is not None and (
                (eval_every and step % eval_every == 0) or step == n_steps
            )
            if do_eval:
                score = evaluate(
                    state, env, n_episodes=eval_episodes, seed=seed * 100003 + step
                )
                history.append((step, score))
                metrics["eval_return"] = score
            if writer is not None and (step % metrics_every == 0 or do_eval):
                writer.append(metrics)
    finally:
        if writer is not None:
            writer.close()
    return state, history
