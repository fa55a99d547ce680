"""Sparse-reward U-maze: long horizon, one payoff at the end.

The point mass starts in the bottom-left pocket and must round a horizontal
wall to reach a goal disc in the top-left.  Reward is zero everywhere except
on first goal entry (scaled by reward_scale) and the episode terminates there,
so per-episode returns are exactly 0 or reward_scale.
"""

from dataclasses import dataclass

import numpy as np

# One fixed U-layout: a horizontal wall across most of the arena with a gap on
# the right.  Rectangles are (x_lo, x_hi, y_lo, y_hi).
U_MAZE_WALLS = ((0.0, 3.25, 1.75, 2.25),)


@dataclass(frozen=True)
class MazeConfig:
    dt: float = 0.035
    friction: float = 0.1
    horizon: int = 300
    reward_scale: float = 100.0
    bounds: tuple = (0.0, 4.0)
    walls: tuple = U_MAZE_WALLS
    start_box: tuple = (0.35, 0.85)
    goal: tuple = (0.6, 3.4)
    goal_radius: float = 0.25
    layout_version: str = "u1"

    def to_dict(self):
        return {
            "kind": "maze",
            "dt": self.dt,
            "friction": self.friction,
            "horizon": self.horizon,
            "reward_scale": self.reward_scale,
            "bounds": list(self.bounds),
            "walls": [list(w) for w in self.walls],
            "start_box": list(self.start_box),
            "goal": list(self.goal),
            "goal_radius": self.goal_radius,
            "layout_version": self.layout_version,
        }

    @classmethod
    def from_dict(cls, d):
        d = {k: v for k, v in d.items() if k != "kind"}
        d["bounds"] = tuple(d["bounds"])
        d["walls"] = tuple(tuple(w) for w in d["walls"])
        d["start_box"] = tuple(d["start_box"])
        d["goal"] = tuple(d["goal"])
        return cls(**d)


def _in_any_wall(p, walls):
    x, y = p
    for x_lo, x_hi, y_lo, y_hi in walls:
        if x_lo <= x <= x_hi and y_lo <= y <= y_hi:
            return True
    return False


class MazeEnv:
    """State is [x, y, vx, vy]; actions are accelerations in [-1, 1]^2."""

    state_dim = 4
    action_dim = 2
    max_action = 1.0

    def __init__(self, config: MazeConfig = MazeConfig()):
        self.config = config
        self._p = np.zeros(2)
        self._v = np.zeros(2)
        self._t = 0
        self._done = True
        self._at_goal = False

    @property
    def horizon(self):
        return self.config.horizon

    @property
    def steps_taken(self):
        return self._t

    @property
    def terminated(self):
        """True when the last step ended the episode by goal entry."""
        return self._at_goal

    def _obs(self):
        return np.concatenate([self._p, self._v]).astype(np.float32)

    def reset(self, seed=None, *, start=None):
        if start is not None:
            self._p = np.asarray(start, dtype=np.float64).copy()
        else:
            rng = np.random.default_rng(seed)
            lo, hi = self.config.start_box
            self._p = rng.uniform(lo, hi, size=2)
        if _in_any_wall(self._p, self.config.walls):
            raise ValueError(f"start position {tuple(self._p)} is inside a wall")
        self._v = np.zeros(2)
        self._t = 0
        self._done = False
        self._at_goal = False
        return self._obs()

    def step(self, action):
        if self._done:
            raise RuntimeError("step() after episode end; call reset()")
        action = np.asarray(action, dtype=np.float64).reshape(2)
        if not np.isfinite(action).all():
            raise ValueError("action must be finite")
        a = np.clip(action, -1.0, 1.0)
        cfg = self.config
        lo, hi = cfg.bounds
        self._v = (1.0 - cfg.friction * cfg.dt) * self._v + cfg.dt * a
        # Axis-separable collision: a move whose target lands in a wall is
        # rejected on that axis and the velocity component is zeroed, so the
        # mass slides along wall faces instead of sticking.
        for axis in range(2):
            trial = self._p.copy()
            trial[axis] = np.clip(trial[axis] + cfg.dt * self._v[axis], lo, hi)
            if _in_any_wall(trial, cfg.walls):
                self._v[axis] = 0.0
            else:
                self._p = trial
        self._t += 1
        self._at_goal = (
            float(np.linalg.norm(self._p - np.asarray(cfg.goal))) <= cfg.goal_radius
        )
        reward = cfg.reward_scale if self._at_goal else 0.0
        self._done = self._at_goal or self._t >= cfg.horizon
        return self._obs(), reward, self._done


def maze_expert(config: MazeConfig = MazeConfig(), kp=4.0, kd=1.6):
    """Waypoint follower: bottom-right pocket, up through the gap, then the goal.

    The active waypoint is chosen from position alone (below the wall: head
    right; in the right corridor: climb; above the wall: straight to the
    goal), so the policy is a stateless state -> action map and recovers from
    any position.
    """
    goal = np.asarray(config.goal, dtype=np.float64)
    right_pocket = np.array([3.6, 0.9])
    corridor_top = np.array([3.6, 3.2])

    def policy(obs):
        p = obs[:2]
        v = obs[2:]
        x, y = float(p[0]), float(p[1])
        if y >= 2.25 and x < 3.0:
            target = goal
        elif x >= 3.0 and y < 3.0:
            target = corridor_top
        elif x >= 3.0:
            target = goal
        else:
            target = right_pocket
        return np.clip(kp * (target - p) - kd * v, -1.0, 1.0)

    return policy
