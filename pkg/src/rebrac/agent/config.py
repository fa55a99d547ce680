"""Agent hyperparameters and environment profiles.

The algorithm is TD3-style actor-critic with decoupled squared-action-distance
penalties: beta1_actor weights the actor's anchor to dataset actions,
beta2_critic weights the penalty subtracted inside the critic's bootstrap
target.  Profiles bundle the per-environment settings; `desk` profiles shrink
widths/batches so acceptance runs fit a single CPU core, `paper_protocol`
restores the full-scale reference values.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from ..numcore import MlpConfig

# Sweep presets for the penalty coefficients, per environment family.
BETA1_GRID_DENSE = (0.001, 0.01, 0.05, 0.1)
BETA2_GRID_DENSE = (0.0, 0.001, 0.01, 0.1, 0.5)
BETA1_GRID_SPARSE = (0.0005, 0.001, 0.002, 0.003)
BETA2_GRID_SPARSE = (0.0, 0.0001, 0.0005, 0.001)


@dataclass(frozen=True)
class AgentConfig:
    actor_cfg: MlpConfig
    critic_cfg: MlpConfig
    gamma: float = 0.99
    tau: float = 5e-3
    beta1_actor: float = 0.01
    beta2_critic: float = 0.01
    batch_size: int = 256
    actor_lr: float = 1e-3
    critic_lr: float = 1e-3
    policy_noise: float = 0.2
    noise_clip: float = 0.5
    policy_delay: int = 2
    q_normalization: bool = True
    max_action: float = 1.0
    state_normalization: bool = True
    dtype: str = "float32"

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.beta1_actor < 0.0 or self.beta2_critic < 0.0:
            raise ValueError("penalty coefficients must be >= 0")
        if self.policy_delay < 1:
            raise ValueError("policy_delay must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")
        if self.actor_cfg.output_activation != "tanh":
            raise ValueError("actor must use tanh-scaled output")
        if self.actor_cfg.max_action != self.max_action:
            raise ValueError("actor max_action must match the agent's")
        if self.critic_cfg.output_dim != 1:
            raise ValueError("critics must be scalar-valued")
        expected = self.actor_cfg.input_dim + self.actor_cfg.output_dim
        if self.critic_cfg.input_dim != expected:
            raise ValueError(
                f"critic input_dim {self.critic_cfg.input_dim} != "
                f"state_dim + action_dim = {expected}"
            )

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64

    @property
    def state_dim(self):
        return self.actor_cfg.input_dim

    @property
    def action_dim(self):
        return self.actor_cfg.output_dim

    def to_dict(self):
        return {
            "actor_cfg": self.actor_cfg.to_dict(),
            "critic_cfg": self.critic_cfg.to_dict(),
            "gamma": self.gamma,
            "tau": self.tau,
            "beta1_actor": self.beta1_actor,
            "beta2_critic": self.beta2_critic,
            "batch_size": self.batch_size,
            "actor_lr": self.actor_lr,
            "critic_lr": self.critic_lr,
            "policy_noise": self.policy_noise,
            "noise_clip": self.noise_clip,
            "policy_delay": self.policy_delay,
            "q_normalization": self.q_normalization,
            "max_action": self.max_action,
            "state_normalization": self.state_normalization,
            "dtype": self.dtype,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["actor_cfg"] = MlpConfig.from_dict(d["actor_cfg"])
        d["critic_cfg"] = MlpConfig.from_dict(d["critic_cfg"])
        return cls(**d)


def make_config(
    state_dim,
    action_dim,
    hidden=256,
    depth=3,
    critic_layer_norm=True,
    max_action=1.0,
    **overrides,
):
    """AgentConfig with the standard network shapes.

    Actor: state -> action with tanh scaling, no LayerNorm.  Critics:
    (state, action) -> scalar with LayerNorm on each hidden layer.
    """
    hidden_dims = (hidden,) * depth
    actor_cfg = MlpConfig(
        input_dim=state_dim,
        hidden_dims=hidden_dims,
        output_dim=action_dim,
        layer_norm=False,
        output_activation="tanh",
        max_action=max_action,
    )
    critic_cfg = MlpConfig(
        input_dim=state_dim + action_dim,
        hidden_dims=hidden_dims,
        output_dim=1,
        layer_norm=critic_layer_norm,
        output_activation="none",
    )
    return AgentConfig(
        actor_cfg=actor_cfg, critic_cfg=critic_cfg, max_action=max_action, **overrides
    )


def dense_profile(state_dim, action_dim, paper_protocol=False):
    """Dense-reward locomotion-style settings (discount 0.99)."""
    if paper_protocol:
        return make_config(
            state_dim,
            action_dim,
            hidden=256,
            depth=3,
            gamma=0.99,
            batch_size=1024,
            actor_lr=1e-3,
            critic_lr=1e-3,
            beta1_actor=0.1,
            beta2_critic=0.01,
        )
    return make_config(
        state_dim,
        action_dim,
        hidden=48,
        depth=3,
        gamma=0.99,
        batch_size=128,
        actor_lr=1e-3,
        critic_lr=1e-3,
        beta1_actor=0.4,
        beta2_critic=0.01,
    )


def sparse_profile(state_dim, action_dim, paper_protocol=False):
    """Sparse-reward long-horizon settings: discount 0.999 and smaller
    learning rate; pairs with reward scaling at dataset level."""
    if paper_protocol:
        return make_config(
            state_dim,
            action_dim,
            hidden=256,
            depth=3,
            gamma=0.999,
            batch_size=256,
            actor_lr=1e-4,
            critic_lr=1e-4,
            beta1_actor=0.001,
            beta2_critic=0.0005,
        )
    return make_config(
        state_dim,
        action_dim,
        hidden=48,
        depth=3,
        gamma=0.999,
        batch_size=128,
        actor_lr=1e-4,
        critic_lr=1e-3,
        beta1_actor=0.5,
        beta2_critic=0.1,
    )


PROFILES = {"dense": dense_profile, "sparse": sparse_profile}


def profile_for_env(env_name, state_dim, action_dim, paper_protocol=False):
    name = {"reach": "dense", "maze": "sparse"}.get(env_name)
    if name is None:
        raise KeyError(f"no profile for environment {env_name!r}")
    return PROFILES[name](state_dim, action_dim, paper_protocol=paper_protocol)


def with_overrides(cfg: AgentConfig, **kw) -> AgentConfig:
    """Functional update helper (dataclasses.replace with validation rerun)."""
    return replace(cfg, **kw)
