"""Behavior-anchored actor-critic agent: config, ops, training, storage."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import (
    BETA1_GRID_DENSE,
    BETA1_GRID_SPARSE,
    BETA2_GRID_DENSE,
    BETA2_GRID_SPARSE,
    AgentConfig,
    dense_profile,
    make_config,
    profile_for_env,
    sparse_profile,
    with_overrides,
)
from .core import (
    DIVERGENCE_LIMIT,
    AgentState,
    actor_update,
    critic_target,
    critic_update,
    init_agent,
    normalize_state,
    polyak_update,
    select_action,
    smoothed_target_actions,
    td_target,
    train_step,
)
from .loop import evaluate, final_score, standardized_view, train_agent
from .metrics import COLUMNS, MetricsWriter, read_metrics

__all__ = [
    "AgentConfig",
    "AgentState",
    "BETA1_GRID_DENSE",
    "BETA1_GRID_SPARSE",
    "BETA2_GRID_DENSE",
    "BETA2_GRID_SPARSE",
    "COLUMNS",
    "DIVERGENCE_LIMIT",
    "MetricsWriter",
    "actor_update",
    "critic_target",
    "critic_update",
    "dense_profile",
    "evaluate",
    "final_score",
    "init_agent",
    "load_checkpoint",
    "make_config",
    "normalize_state",
    "polyak_update",
    "profile_for_env",
    "read_metrics",
    "save_checkpoint",
    "select_action",
    "smoothed_target_actions",
    "sparse_profile",
    "standardized_view",
    "td_target",
    "train_agent",
    "train_step",
    "with_overrides",
]
