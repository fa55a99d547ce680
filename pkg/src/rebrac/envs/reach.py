"""Dense-reward point-mass reaching task.

A 2-D point mass with velocity damping must reach a fixed goal; the reward is
the negative Euclidean distance to the goal after each step, so returns are
nonpositive and every step carries signal.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReachConfig:
    dt: float = 0.05
    friction: float = 0.1
    horizon: int = 200
    goal: tuple = (1.0, 1.0)
    start_halfwidth: float = 0.2
    position_bound: float = 2.0

    def to_dict(self):
        return {
            "kind": "reach",
            "dt": self.dt,
            "friction": self.friction,
            "horizon": self.horizon,
            "goal": list(self.goal),
            "start_halfwidth": self.start_halfwidth,
            "position_bound": self.position_bound,
        }

    @classmethod
    def from_dict(cls, d):
        d = {k: v for k, v in d.items() if k != "kind"}
        d["goal"] = tuple(d["goal"])
        return cls(**d)


class ReachEnv:
    """State is [x, y, vx, vy]; actions are accelerations in [-1, 1]^2."""

    state_dim = 4
    action_dim = 2
    max_action = 1.0

    def __init__(self, config: ReachConfig = ReachConfig()):
        self.config = config
        self._p = np.zeros(2)
        self._v = np.zeros(2)
        self._t = 0
        self._done = True

    @property
    def horizon(self):
        return self.config.horizon

    @property
    def steps_taken(self):
        return self._t

    @property
    def terminated(self):
        """True when the last step ended the episode by a terminal condition
        rather than the horizon; reaching has no terminal states."""
        return False

    def _obs(self):
        return np.concatenate([self._p, self._v]).astype(np.float32)

    def reset(self, seed=None, *, start=None):
        if start is not None:
            self._p = np.asarray(start, dtype=np.float64).copy()
        else:
            rng = np.random.default_rng(seed)
            hw = self.config.start_halfwidth
            self._p = rng.uniform(-hw, hw, size=2)
        self._v = np.zeros(2)
        self._t = 0
        self._done = False
        return self._obs()

    def step(self, action):
        if self._done:
            raise RuntimeError("step() after episode end; call reset()")
        action = np.asarray(action, dtype=np.float64).reshape(2)
        if not np.isfinite(action).all():
            raise ValueError("action must be finite")
        a = np.clip(action, -1.0, 1.0)
        cfg = self.config
        self._v = (1.0 - cfg.friction * cfg.dt) * self._v + cfg.dt * a
        self._p = np.clip(self._p + cfg.dt * self._v, -cfg.position_bound, cfg.position_bound)
        self._t += 1
        reward = -float(np.linalg.norm(self._p - np.asarray(cfg.goal)))
        self._done = self._t >= cfg.horizon
        return self._obs(), reward, self._done


def reach_expert(config: ReachConfig = ReachConfig(), kp=4.0, kd=2.0):
    """Proportional controller with velocity damping, aimed at the goal."""
    goal = np.asarray(config.goal)

    def policy(obs):
        p = obs[:2]
        v = obs[2:]
        return np.clip(kp * (goal - p) - kd * v, -1.0, 1.0)

    return policy
