"""Reference returns and normalized scores.

Scores are reported on the usual 0-100 scale: 0 is the mean return of a
uniform-random policy, 100 is the scripted expert's mean return.  The
reference values are computed once by compute_ref_scores and pinned in
refs.json next to this module so results stay stable across runs.
"""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .maze import MazeConfig, MazeEnv, maze_expert
from .reach import ReachConfig, ReachEnv, reach_expert
from .rollout import random_policy, rollout

REF_EPISODES = 100
_REF_SEED = 20240901


@dataclass(frozen=True)
class RefScores:
    random_return: float
    expert_return: float

    def __post_init__(self):
        if not self.expert_return > self.random_return:
            raise ValueError(
                f"expert return {self.expert_return} must exceed "
                f"random return {self.random_return}"
            )


def normalized_score(raw, refs: RefScores):
    """Affine map sending random -> 0 and expert -> 100; not clipped."""
    span = refs.expert_return - refs.random_return
    return 100.0 * (float(raw) - refs.random_return) / span


def compute_ref_scores(name, n_episodes=REF_EPISODES, seed=_REF_SEED):
    """Monte-Carlo reference returns over seeded episodes for one environment."""
    if name == "reach":
        env = ReachEnv()
        expert = reach_expert(env.config)
    elif name == "maze":
        env = MazeEnv()
        expert = maze_expert(env.config)
    else:
        raise KeyError(f"unknown environment {name!r}")
    rand_returns = rollout(env, random_policy(env.action_dim, seed), seed, n_episodes)
    expert_returns = rollout(env, expert, seed + 1, n_episodes)
    return RefScores(
        random_return=float(np.mean(rand_returns)),
        expert_return=float(np.mean(expert_returns)),
    )


def load_ref_scores():
    """Pinned reference returns for every environment, keyed by name."""
    text = resources.files("rebrac.envs").joinpath("refs.json").read_text()
    data = json.loads(text)
    return {
        name: RefScores(entry["random_return"], entry["expert_return"])
        for name, entry in data.items()
    }
