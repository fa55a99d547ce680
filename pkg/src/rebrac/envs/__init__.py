"""Toy continuous-control environments and score normalization.

Two tasks cover the structural contrast that matters for offline RL here:
a dense-reward reacher and a sparse-reward long-horizon U-maze.
"""

import json

from .maze import MazeConfig, MazeEnv, maze_expert
from .reach import ReachConfig, ReachEnv, reach_expert
from .rollout import random_policy, rollout
from .scoring import RefScores, compute_ref_scores, load_ref_scores, normalized_score

ENV_NAMES = ("reach", "maze")

_REGISTRY = {
    "reach": (ReachEnv, ReachConfig),
    "maze": (MazeEnv, MazeConfig),
}


def make_env(name, config=None):
    """Instantiate an environment by name, optionally with a custom config."""
    try:
        env_cls, cfg_cls = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown environment {name!r}; known: {ENV_NAMES}") from None
    return env_cls(config if config is not None else cfg_cls())


def expert_policy(name, config=None):
    """The scripted expert for an environment by name."""
    if name == "reach":
        return reach_expert(config if config is not None else ReachConfig())
    if name == "maze":
        return maze_expert(config if config is not None else MazeConfig())
    raise KeyError(f"unknown environment {name!r}; known: {ENV_NAMES}")


def config_to_json(config):
    """Serialize an environment config (with its kind tag) to JSON text."""
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)


def config_from_json(text):
    """Rebuild a ReachConfig or MazeConfig from config_to_json output."""
    d = json.loads(text)
    kind = d.get("kind")
    if kind == "reach":
        return ReachConfig.from_dict(d)
    if kind == "maze":
        return MazeConfig.from_dict(d)
    raise ValueError(f"unknown environment kind {kind!r}")


__all__ = [
    "ENV_NAMES",
    "MazeConfig",
    "MazeEnv",
    "ReachConfig",
    "ReachEnv",
    "RefScores",
    "compute_ref_scores",
    "config_from_json",
    "config_to_json",
    "expert_policy",
    "load_ref_scores",
    "make_env",
    "maze_expert",
    "normalized_score",
    "rollout",
    "random_policy",
    "reach_expert",
]
