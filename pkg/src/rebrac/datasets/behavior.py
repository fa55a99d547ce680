"""Behavior policies for dataset collection.

Three kinds: uniform random actions, a skill-scaled controller with Gaussian
action noise, and a per-episode mixture.  skill linearly interpolates the
controller gains from 0 (useless) to the tuned expert gains, mirroring the
usual random/medium/expert dataset-quality tiers.
"""

from dataclasses import dataclass

import numpy as np

from ..envs import MazeEnv, ReachEnv, maze_expert, reach_expert

KINDS = ("uniform_random", "p_controller", "mixture")

# Tuned expert gains per environment: (kp, kd) at skill = 1.
_EXPERT_GAINS = {
    ReachEnv: (4.0, 2.0),
    MazeEnv: (4.0, 1.6),
}


@dataclass(frozen=True)
class BehaviorPolicy:
    kind: str
    skill: float = 1.0
    noise_sigma: float = 0.0
    components: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown behavior kind {self.kind!r}; known: {KINDS}")
        if self.kind == "p_controller" and not 0.0 <= self.skill <= 1.0:
            raise ValueError("skill must lie in [0, 1]")
        if self.kind == "mixture":
            if len(self.components) != len(self.weights) or not self.components:
                raise ValueError("mixture needs matching non-empty components/weights")
            if abs(sum(self.weights) - 1.0) > 1e-9:
                raise ValueError("mixture weights must sum to 1")

    def describe(self):
        if self.kind == "uniform_random":
            return "uniform_random"
        if self.kind == "p_controller":
            return f"p_controller(skill={self.skill:g},noise={self.noise_sigma:g})"
        inner = ",".join(c.describe() for c in self.components)
        weights = ",".join(f"{w:g}" for w in self.weights)
        return f"mixture([{inner}],weights=[{weights}])"


def _controller(env, skill):
    for env_cls, (kp, kd) in _EXPERT_GAINS.items():
        if isinstance(env, env_cls):
            if isinstance(env, ReachEnv):
                return reach_expert(env.config, kp=skill * kp, kd=skill * kd)
            return maze_expert(env.config, kp=skill * kp, kd=skill * kd)
    raise TypeError(f"no tuned controller for environment {type(env).__name__}")


def realize(policy: BehaviorPolicy, env, rng):
    """Pick this episode's concrete action function.

    Mixture policies draw one component per episode; controller noise and
    random actions consume the caller's rng stream so generation stays
    deterministic per seed.
    """
    if policy.kind == "mixture":
        i = rng.choice(len(policy.components), p=np.asarray(policy.weights))
        return realize(policy.components[int(i)], env, rng)
    if policy.kind == "uniform_random":

        def act(_obs):
            return rng.uniform(-1.0, 1.0, size=env.action_dim)

        return act
    base = _controller(env, policy.skill)
    sigma = policy.noise_sigma

    def act(obs):
        a = base(obs)
        if sigma > 0.0:
            a = a + rng.normal(0.0, sigma, size=env.action_dim)
        return np.clip(a, -1.0, 1.0)

    return act


TIERS = {
    "random": BehaviorPolicy("uniform_random"),
    "medium": BehaviorPolicy("p_controller", skill=0.5, noise_sigma=0.1),
    "expert": BehaviorPolicy("p_controller", skill=1.0, noise_sigma=0.05),
    "replay": BehaviorPolicy(
        "mixture",
        components=(
            BehaviorPolicy("uniform_random"),
            BehaviorPolicy("p_controller", skill=0.5, noise_sigma=0.1),
            BehaviorPolicy("p_controller", skill=1.0, noise_sigma=0.05),
        ),
        weights=(0.3, 0.4, 0.3),
    ),
}
