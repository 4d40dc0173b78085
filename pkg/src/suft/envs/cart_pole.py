"""
Cart-pole balancing task with the classic control dynamics.

State (x, x_dot, theta, theta_dot); the initial state is uniform on [-0.05, 0.05]^4.
Two actions push the cart left (0) or right (1) with a force of 10 N. The equations of
motion are integrated with one explicit Euler step of tau = 0.02 s. The episode terminates
when |theta| exceeds 12 degrees or |x| exceeds 2.4; every step, including the last one,
pays a reward of 1.
"""

import math

import numpy as np

from suft.envs.base_env import BaseEnv, EnvSpec

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
TOTAL_MASS = MASS_CART + MASS_POLE
HALF_POLE_LENGTH = 0.5
POLE_MASS_LENGTH = MASS_POLE * HALF_POLE_LENGTH
FORCE_MAG = 10.0
TAU = 0.02
THETA_THRESHOLD_RAD = 12 * 2 * math.pi / 360
X_THRESHOLD = 2.4
INITIAL_STATE_BOUND = 0.05


class CartPole(BaseEnv):
    def __init__(self, max_episode_steps=500):
        super().__init__()
        self.spec = EnvSpec('cartpole', 4, 2, max_episode_steps)
        self.state = np.zeros(4)

    def _reset(self):
        self.state = self.rng.uniform(-INITIAL_STATE_BOUND, INITIAL_STATE_BOUND, size=4)
        return self.state.copy()

    def _step(self, action):
        x, x_dot, theta, theta_dot = self.state
        force = FORCE_MAG if action == 1 else -FORCE_MAG
        cos_theta, sin_theta = math.cos(theta), math.sin(theta)
        temp = (force + POLE_MASS_LENGTH * theta_dot ** 2 * sin_theta) / TOTAL_MASS
        theta_acc = (GRAVITY * sin_theta - cos_theta * temp) / (
            HALF_POLE_LENGTH * (4.0 / 3.0 - MASS_POLE * cos_theta ** 2 / TOTAL_MASS))
        x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_theta / TOTAL_MASS
        x = x + TAU * x_dot
        x_dot = x_dot + TAU * x_acc
        theta = theta + TAU * theta_dot
        theta_dot = theta_dot + TAU * theta_acc
        self.state = np.array([x, x_dot, theta, theta_dot])
        terminated = abs(x) > X_THRESHOLD or abs(theta) > THETA_THRESHOLD_RAD
        return self.state.copy(), 1.0, terminated
