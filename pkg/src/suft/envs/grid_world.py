"""
5x5 GridWorld with a sparse goal reward.

The agent starts at (row 0, col 0) and must reach the goal at (4, 4). Actions are
0 = up, 1 = right, 2 = down, 3 = left; moves into a wall leave the agent in place.
Every step costs -0.01 except the one reaching the goal, which pays 1.0 and terminates.
The observation is the one-hot encoding of row * size + col.
"""

import numpy as np

from suft.envs.base_env import BaseEnv, EnvSpec

UP, RIGHT, DOWN, LEFT = 0, 1, 2, 3
_MOVES = {UP: (-1, 0), RIGHT: (0, 1), DOWN: (1, 0), LEFT: (0, -1)}

STEP_REWARD = -0.01
GOAL_REWARD = 1.0


class GridWorld(BaseEnv):
    def __init__(self, size=5, max_episode_steps=100):
        super().__init__()
        self.size = size
        self.spec = EnvSpec('gridworld', size * size, 4, max_episode_steps)
        self.goal = (size - 1, size - 1)
        self.position = (0, 0)

    def _observation(self):
        obs = np.zeros(self.spec.obs_dim)
        obs[self.position[0] * self.size + self.position[1]] = 1.0
        return obs

    def _reset(self):
        self.position = (0, 0)
        return self._observation()

    def _step(self, action):
        d_row, d_col = _MOVES[action]
        row = min(max(self.position[0] + d_row, 0), self.size - 1)
        col = min(max(self.position[1] + d_col, 0), self.size - 1)
        self.position = (row, col)
        if self.position == self.goal:
            return self._observation(), GOAL_REWARD, True
        return self._observation(), STEP_REWARD, False
