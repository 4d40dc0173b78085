"""
Common interface of the desk-scale environments.

Subclasses implement the dynamics in ``_reset`` and ``_step``; this base class validates
actions, enforces the episode lifecycle and applies the max_episode_steps truncation.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from suft.common.errors import DomainError, UsageError


@dataclass(frozen=True)
class EnvSpec:
    name: str
    obs_dim: int
    n_actions: int
    max_episode_steps: int

    def __post_init__(self):
        if self.obs_dim < 1 or self.n_actions < 1 or self.max_episode_steps < 1:
            raise DomainError(f'EnvSpec: dimensions must be positive ({self})')


@dataclass(frozen=True)
class StepResult:
    obs: np.ndarray
    reward: float
    terminated: bool
    truncated: bool

    @property
    def done(self):
        return self.terminated or self.truncated


class BaseEnv(ABC):
    """
    Seedable discrete-action environment.

    Attributes:
        spec (EnvSpec): Dimensions and episode limit.
        episode_steps (int): Steps taken in the current episode.
    """

    spec: EnvSpec

    def __init__(self):
        self.episode_steps = 0
        self._active = False
        self.rng = np.random.default_rng(0)

    @property
    def name(self):
        return self.spec.name

    def reset(self, seed):
        """
        Starts a new episode; the initial state depends only on ``seed``.

        Returns:
            np.ndarray: First observation.
        """
        self.rng = np.random.default_rng(seed)
        self.episode_steps = 0
        self._active = True
        return self._reset()

    def step(self, action):
        """
        Advances the environment by one step.

        Raises:
            DomainError: If ``action`` is not in [0, n_actions).
            UsageError: If no episode is active (not reset yet, or already finished).
        """
        if isinstance(action, bool) or not isinstance(action, (int, np.integer)) or not 0 <= action < self.spec.n_actions:
            raise DomainError(f'{self.name}: invalid action {action!r} (expected 0..{self.spec.n_actions - 1})')
        if not self._active:
            raise UsageError(f'{self.name}: step called without an active episode, call reset first')
        obs, reward, terminated = self._step(int(action))
        self.episode_steps += 1
        truncated = not terminated and self.episode_steps >= self.spec.max_episode_steps
        if terminated or truncated:
            self._active = False
        return StepResult(obs=obs, reward=float(reward), terminated=bool(terminated), truncated=bool(truncated))

    @abstractmethod
    def _reset(self):
        pass

    @abstractmethod
    def _step(self, action):
        """Returns (obs, reward, terminated)."""
