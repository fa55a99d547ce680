"""Actor-critic training ops.

Layout of one training step (delayed-policy TD3 style):

  1. sample a minibatch (consumes the agent's rng stream);
  2. critic update: both critics regress onto a shared bootstrap target built
     from the target actor with clipped smoothing noise, a twin-minimum, and
     a squared-distance penalty between the smoothed next action and the
     dataset's next action (weight beta2_critic);
  3. every policy_delay-th step, an actor update: maximize the first critic's
     value of pi(s), normalized by the stop-gradient mean |Q|, plus an anchor
     beta1_actor * mean squared distance between pi(s) and the dataset action;
     then Polyak-average all three target networks.

All ops are functional: they return a new AgentState and never mutate network
parameters in place.  The rng Generator object is the one mutable part; draws
happen in a fixed, documented order so an external reference implementation
can reproduce a step bit-for-bit from a deep copy of the stream.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from ..errors import DivergenceError
from ..numcore import adam_init, adam_step, init_params, mlp_backward, mlp_forward
from .config import AgentConfig

# Abort threshold for the divergence guard on either loss.
DIVERGENCE_LIMIT = 1e8


@dataclass
class AgentState:
    """All learned state: six networks, three optimizers, counters, rng.

    Target networks start as exact copies of their online twins.  state_mean
    and state_std (float64, or None) are the observation-standardization
    constants applied to raw environment states at action-selection time; the
    training loop standardizes the dataset with the same constants.
    """

    cfg: AgentConfig
    actor: object
    actor_target: object
    critic_a: object
    critic_b: object
    critic_a_target: object
    critic_b_target: object
    actor_opt: object
    critic_a_opt: object
    critic_b_opt: object
    rng: np.random.Generator
    train_steps: int = 0
    actor_updates: int = 0
    state_mean: np.ndarray = None
    state_std: np.ndarray = None


def init_agent(cfg: AgentConfig, seed, state_mean=None, state_std=None) -> AgentState:
    """Deterministic construction from (config, seed).

    The seed is split into four independent child streams, in order: actor
    init, critic A init, critic B init, and the agent's ongoing draw stream
    (minibatch indices and target-smoothing noise).
    """
    children = np.random.SeedSequence(seed).spawn(4)
    dtype = cfg.np_dtype
    actor = init_params(cfg.actor_cfg, children[0], dtype=dtype)
    critic_a = init_params(cfg.critic_cfg, children[1], dtype=dtype)
    critic_b = init_params(cfg.critic_cfg, children[2], dtype=dtype)
    if state_mean is not None:
        state_mean = np.asarray(state_mean, dtype=np.float64).reshape(-1)
        state_std = np.asarray(state_std, dtype=np.float64).reshape(-1)
        if state_mean.shape != (cfg.state_dim,) or state_std.shape != (cfg.state_dim,):
            raise ValueError("state_mean/state_std must have state_dim entries")
        if np.any(state_std <= 0):
            raise ValueError("state_std entries must be positive")
    return AgentState(
        cfg=cfg,
        actor=actor,
        actor_target=actor.copy(),
        critic_a=critic_a,
        critic_b=critic_b,
        critic_a_target=critic_a.copy(),
        critic_b_target=critic_b.copy(),
        actor_opt=adam_init(actor, lr=cfg.actor_lr),
        critic_a_opt=adam_init(critic_a, lr=cfg.critic_lr),
        critic_b_opt=adam_init(critic_b, lr=cfg.critic_lr),
        rng=np.random.default_rng(children[3]),
        train_steps=0,
        actor_updates=0,
        state_mean=state_mean,
        state_std=state_std,
    )


def _check_batch(batch, cfg: AgentConfig):
    b = batch.size
    if batch.states.shape != (b, cfg.state_dim):
        raise ValueError(f"batch states shape {batch.states.shape}")
    if batch.actions.shape != (b, cfg.action_dim):
        raise ValueError(f"batch actions shape {batch.actions.shape}")
    if batch.rewards.shape != (b, 1) or batch.dones.shape != (b, 1):
        raise ValueError("rewards and dones must be (batch, 1) columns")
    if np.max(np.abs(batch.actions)) > cfg.max_action + 1e-5:
        raise ValueError("batch actions exceed the action bound")


def td_target(rewards, dones, min_q, sq_dist, gamma, beta2):
    """Bootstrap target y = r + gamma * (1 - done) * (min_q - beta2 * sq_dist).

    sq_dist is the per-row mean over action dimensions of the squared
    difference between the smoothed next action and the dataset next action.
    Inputs broadcast as (batch, 1) columns; computed in float64.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    min_q = np.asarray(min_q, dtype=np.float64)
    sq_dist = np.asarray(sq_dist, dtype=np.float64)
    return rewards + gamma * (1.0 - dones) * (min_q - beta2 * sq_dist)


def smoothed_target_actions(batch, state: AgentState, cfg: AgentConfig):
    """Target-actor next actions with clipped Gaussian smoothing noise.

    Consumes one standard-normal draw of shape (batch, action_dim) from the
    agent's rng stream, scaled by policy_noise * max_action and clipped to
    +/- noise_clip * max_action; the result is clipped to the action bound.
    """
    mu, _ = mlp_forward(state.actor_target, cfg.actor_cfg, batch.next_states)
    sigma = cfg.policy_noise * cfg.max_action
    clip = cfg.noise_clip * cfg.max_action
    eps = state.rng.normal(0.0, 1.0, size=mu.shape) * sigma
    eps = np.clip(eps, -clip, clip)
    return np.clip(mu.astype(np.float64) + eps, -cfg.max_action, cfg.max_action)


def critic_target(batch, state: AgentState, cfg: AgentConfig):
    """Penalized twin-minimum bootstrap target, shape (batch, 1), float64."""
    _check_batch(batch, cfg)
    a_next = smoothed_target_actions(batch, state, cfg)
    x_next = np.concatenate(
        [batch.next_states, a_next.astype(cfg.np_dtype)], axis=1
    )
    qa, _ = mlp_forward(state.critic_a_target, cfg.critic_cfg, x_next)
    qb, _ = mlp_forward(state.critic_b_target, cfg.critic_cfg, x_next)
    min_q = np.minimum(qa, qb)
    diff = a_next - np.asarray(batch.next_actions, dtype=np.float64)
    sq_dist = np.mean(diff * diff, axis=1, keepdims=True)
    y = td_target(batch.rewards, batch.dones, min_q, sq_dist, cfg.gamma, cfg.beta2_critic)
    if not np.isfinite(y).all():
        raise DivergenceError("non-finite critic target")
    return y


def _one_critic_update(params, opt, x, y, cfg):
    """Adam step on mean squared TD error for one critic; returns
    (new_params, new_opt, mse, q_mean)."""
    q, cache = mlp_forward(params, cfg.critic_cfg, x)
    diff = q.astype(np.float64) - y
    mse = float(np.mean(diff * diff))
    upstream = (2.0 / diff.shape[0]) * diff
    grads, _ = mlp_backward(cache, upstream.astype(params.dtype))
    new_params, new_opt = adam_step(params, grads, opt)
    return new_params, new_opt, mse, float(np.mean(q, dtype=np.float64))


def _critic_update_impl(batch, state: AgentState, cfg: AgentConfig):
    y = critic_target(batch, state, cfg)
    x = np.concatenate([batch.states, batch.actions], axis=1)
    ca, ca_opt, mse_a, q_mean = _one_critic_update(
        state.critic_a, state.critic_a_opt, x, y, cfg
    )
    cb, cb_opt, mse_b, _ = _one_critic_update(
        state.critic_b, state.critic_b_opt, x, y, cfg
    )
    loss = mse_a + mse_b
    if not np.isfinite(loss) or abs(loss) > DIVERGENCE_LIMIT:
        raise DivergenceError(f"critic loss diverged ({loss})")
    new_state = replace(
        state, critic_a=ca, critic_b=cb, critic_a_opt=ca_opt, critic_b_opt=cb_opt
    )
    return new_state, loss, q_mean


def critic_update(batch, state: AgentState, cfg: AgentConfig):
    """One gradient step on both critics against a shared target.

    The loss is the sum of the two mean-squared TD errors.  Returns
    (new_state, critic_loss).
    """
    new_state, loss, _ = _critic_update_impl(batch, state, cfg)
    return new_state, loss


def actor_update(batch, state: AgentState, cfg: AgentConfig):
    """One gradient step on the actor.

    loss = -mean(Q_a(s, pi(s)) / lambda) + beta1 * mean_sq_dist(pi(s), a)
    where lambda = stop-gradient mean |Q_a| when q_normalization is on
    (substituted by 1 with a warning if it vanishes), Q_a is the first critic
    only, and mean_sq_dist averages over both batch and action dimensions.
    Critic parameters are read, not written.  Returns
    (new_state, actor_loss, bc_term).
    """
    _check_batch(batch, cfg)
    b = batch.size
    pi, actor_cache = mlp_forward(state.actor, cfg.actor_cfg, batch.states)
    x = np.concatenate([batch.states, pi], axis=1)
    q, critic_cache = mlp_forward(state.critic_a, cfg.critic_cfg, x)
    q64 = q.astype(np.float64)

    if cfg.q_normalization:
        lam = float(np.mean(np.abs(q64)))
        if lam == 0.0:
            warnings.warn(
                "Q-value normalizer is zero; substituting 1", RuntimeWarning
            )
            lam = 1.0
    else:
        lam = 1.0

    diff = pi.astype(np.float64) - np.asarray(batch.actions, dtype=np.float64)
    bc_term = float(np.mean(diff * diff))
    loss = -float(np.mean(q64)) / lam + cfg.beta1_actor * bc_term
    if not np.isfinite(loss) or abs(loss) > DIVERGENCE_LIMIT:
        raise DivergenceError(f"actor loss diverged ({loss})")

    # d(loss)/d(pi): the value path flows through the first critic's input
    # gradient (its action block); the anchor path is the direct quadratic.
    q_upstream = np.full((b, 1), -1.0 / (b * lam), dtype=state.critic_a.dtype)
    _, x_grad = mlp_backward(critic_cache, q_upstream)
    d_pi = x_grad[:, cfg.state_dim :].astype(np.float64)
    d_pi += (2.0 * cfg.beta1_actor / (b * cfg.action_dim)) * diff

    grads, _ = mlp_backward(actor_cache, d_pi.astype(state.actor.dtype))
    new_actor, new_opt = adam_step(state.actor, grads, state.actor_opt)
    new_state = replace(
        state,
        actor=new_actor,
        actor_opt=new_opt,
        actor_updates=state.actor_updates + 1,
    )
    return new_state, loss, bc_term


def _polyak(online, target, tau):
    mixed = [
        tau * o + (1.0 - tau) * t
        for o, t in zip(online.param_list(), target.param_list())
    ]
    return type(online).from_param_list(online, [m.astype(online.dtype) for m in mixed])


def polyak_update(state: AgentState, cfg: AgentConfig, tau=None) -> AgentState:
    """target <- tau * online + (1 - tau) * target for all three targets.

    tau defaults to cfg.tau; passing it explicitly admits the boundary values
    (0: targets unchanged, 1: targets become exact copies).
    """
    tau = cfg.tau if tau is None else float(tau)
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    return replace(
        state,
        actor_target=_polyak(state.actor, state.actor_target, tau),
        critic_a_target=_polyak(state.critic_a, state.critic_a_target, tau),
        critic_b_target=_polyak(state.critic_b, state.critic_b_target, tau),
    )


def train_step(sampler, state: AgentState, cfg: AgentConfig):
    """One full training step; returns (new_state, metrics).

    sampler(batch_size, rng) -> Batch; it draws indices from the agent's rng
    first, then critic_target draws smoothing noise from the same stream.
    The actor and the target networks move only on every policy_delay-th step.
    metrics always carries step/critic_loss/q_mean; actor_loss and bc_mse are
    None on the steps where the actor is held fixed.
    """
    batch = sampler(cfg.batch_size, state.rng)
    new_state, critic_loss, q_mean = _critic_update_impl(batch, state, cfg)
    step = state.train_steps + 1
    new_state = replace(new_state, train_steps=step)
    metrics = {
        "step": step,
        "critic_loss": critic_loss,
        "actor_loss": None,
        "q_mean": q_mean,
        "bc_mse": None,
    }
    if step % cfg.policy_delay == 0:
        new_state, actor_loss, bc_term = actor_update(batch, new_state, cfg)
        new_state = polyak_update(new_state, cfg)
        metrics["actor_loss"] = actor_loss
        metrics["bc_mse"] = bc_term
    return new_state, metrics


def normalize_state(state: AgentState, s):
    """Apply the stored observation standardization (identity if none)."""
    if state.state_mean is None:
        return np.asarray(s, dtype=np.float64)
    return (np.asarray(s, dtype=np.float64) - state.state_mean) / state.state_std


def select_action(state: AgentState, s, deterministic=True):
    """Policy action for one raw state (1-D) or a batch of states (2-D).

    States are standardized with the agent's stored constants before the
    actor runs.  With deterministic=False, exploration noise
    N(0, (0.1 * max_action)^2) from the agent's rng stream is added and the
    result re-clipped to the action bound.
    """
    cfg = state.cfg
    s = np.asarray(s, dtype=np.float64)
    single = s.ndim == 1
    if single:
        s = s.reshape(1, -1)
    x = normalize_state(state, s).astype(cfg.np_dtype)
    a, _ = mlp_forward(state.actor, cfg.actor_cfg, x)
    a = a.astype(np.float64)
    if not deterministic:
        a = a + state.rng.normal(0.0, 0.1 * cfg.max_action, size=a.shape)
        a = np.clip(a, -cfg.max_action, cfg.max_action)
    return a[0] if single else a
