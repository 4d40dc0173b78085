"""
Bounded FIFO replay buffer whose transitions carry the behavior network's value output.

Description:
    A transition is (obs, action, reward, next_obs, terminated, v_behavior, policy_id).
    v_behavior is the value the acting network produced when the action was selected
    (Q(s, a) for Q-agents, V(s) for actor-critic). It is written once at push time and never
    touched again, however much the network trains afterwards. policy_id numbers the network
    snapshot (target-sync epoch or optimization phase) that generated the transition.

    Storage is a set of preallocated numpy ring arrays; logical index 0 is the oldest
    retained transition. The record layout used by ``dump`` is fixed-width, little-endian,
    in field declaration order, and v_behavior occupies exactly one float64.

Notes for Future Development:
    - Sampling is uniform with replacement.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from suft.common.errors import BufferNotReadyError, DomainError, TransitionRejectedError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    terminated: bool
    v_behavior: float
    policy_id: int = 0


@dataclass(frozen=True)
class TransitionBatch:
    """Column-wise view of a sampled batch, one array per Transition field."""
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    terminated: np.ndarray
    v_behavior: np.ndarray
    policy_ids: np.ndarray

    def __len__(self):
        return self.actions.shape[0]

    @classmethod
    def from_transitions(cls, transitions):
        return cls(
            obs=np.array([t.obs for t in transitions], dtype=np.float64),
            actions=np.array([t.action for t in transitions], dtype=np.int64),
            rewards=np.array([t.reward for t in transitions], dtype=np.float64),
            next_obs=np.array([t.next_obs for t in transitions], dtype=np.float64),
            terminated=np.array([t.terminated for t in transitions], dtype=bool),
            v_behavior=np.array([t.v_behavior for t in transitions], dtype=np.float64),
            policy_ids=np.array([t.policy_id for t in transitions], dtype=np.int64),
        )


def record_dtype(obs_dim, with_value=True):
    """Fixed-width little-endian record layout of one stored transition."""
    fields = [('obs', '<f8', (obs_dim,)), ('action', '<i8'), ('reward', '<f8'),
              ('next_obs', '<f8', (obs_dim,)), ('terminated', 'u1')]
    if with_value:
        fields.append(('v_behavior', '<f8'))
    fields.append(('policy_id', '<u8'))
    return np.dtype(fields)


def record_nbytes(obs_dim, with_value=True):
    return record_dtype(obs_dim, with_value).itemsize


def load_dump(path, obs_dim):
    """Reads a file written by ReplayBuffer.dump as a numpy structured array."""
    return np.fromfile(path, dtype=record_dtype(obs_dim))


class ReplayBuffer:
    """
    FIFO experience store with recycled value outputs.

    Attributes:
        capacity (int): Maximum number of retained transitions.
        obs_dim (int or None): Observation length, fixed by the constructor or the first push.
    """

    def __init__(self, capacity, obs_dim=None):
        if isinstance(capacity, bool) or not isinstance(capacity, (int, np.integer)) or capacity < 1:
            raise DomainError(f'ReplayBuffer: capacity must be a positive integer ({capacity!r})')
        self.capacity = int(capacity)
        self.obs_dim = None
        self._write_index = 0
        self._len = 0
        if obs_dim is not None:
            self._allocate(int(obs_dim))

    def _allocate(self, obs_dim):
        self.obs_dim = obs_dim
        self._obs = np.zeros((self.capacity, obs_dim))
        self._actions = np.zeros(self.capacity, dtype=np.int64)
        self._rewards = np.zeros(self.capacity)
        self._next_obs = np.zeros((self.capacity, obs_dim))
        self._terminated = np.zeros(self.capacity, dtype=bool)
        self._v_behavior = np.zeros(self.capacity)
        self._policy_ids = np.zeros(self.capacity, dtype=np.int64)

    def __len__(self):
        return self._len

    @property
    def write_index(self):
        return self._write_index

    def _physical(self, logical):
        start = (self._write_index - self._len) % self.capacity
        return (start + np.asarray(logical)) % self.capacity

    def _validate(self, t):
        obs = np.asarray(t.obs, dtype=np.float64)
        next_obs = np.asarray(t.next_obs, dtype=np.float64)
        if obs.ndim != 1 or next_obs.shape != obs.shape:
            raise TransitionRejectedError(f'ReplayBuffer: obs and next_obs must be vectors of equal length ({obs.shape}, {next_obs.shape})')
        if self.obs_dim is not None and obs.size != self.obs_dim:
            raise TransitionRejectedError(f'ReplayBuffer: obs length {obs.size} does not match obs_dim {self.obs_dim}')
        if not (np.all(np.isfinite(obs)) and np.all(np.isfinite(next_obs))):
            raise TransitionRejectedError('ReplayBuffer: non-finite observation')
        if not math.isfinite(t.reward):
            raise TransitionRejectedError(f'ReplayBuffer: non-finite reward ({t.reward})')
        if not math.isfinite(t.v_behavior):
            raise TransitionRejectedError(f'ReplayBuffer: non-finite v_behavior ({t.v_behavior})')
        if int(t.action) < 0 or int(t.policy_id) < 0:
            raise TransitionRejectedError(f'ReplayBuffer: action and policy_id must be >= 0 ({t.action}, {t.policy_id})')
        return obs, next_obs

    def push(self, t):
        """
        Stores a transition, evicting the oldest one when full.

        Raises:
            TransitionRejectedError: If any field is non-finite or malformed.
        """
        obs, next_obs = self._validate(t)
        if self.obs_dim is None:
            self._allocate(obs.size)
        i = self._write_index
        self._obs[i] = obs
        self._actions[i] = int(t.action)
        self._rewards[i] = float(t.reward)
        self._next_obs[i] = next_obs
        self._terminated[i] = bool(t.terminated)
        self._v_behavior[i] = float(t.v_behavior)
        self._policy_ids[i] = int(t.policy_id)
        self._write_index = (i + 1) % self.capacity
        self._len = min(self._len + 1, self.capacity)

    def _transition_at(self, physical):
        return Transition(obs=self._obs[physical].copy(), action=int(self._actions[physical]),
                          reward=float(self._rewards[physical]), next_obs=self._next_obs[physical].copy(),
                          terminated=bool(self._terminated[physical]), v_behavior=float(self._v_behavior[physical]),
                          policy_id=int(self._policy_ids[physical]))

    def __iter__(self):
        for physical in self._physical(np.arange(self._len)):
            yield self._transition_at(int(physical))

    def _sample_indices(self, batch_size, rng):
        if isinstance(batch_size, bool) or not isinstance(batch_size, (int, np.integer)) or batch_size < 1:
            raise DomainError(f'ReplayBuffer: batch_size must be a positive integer ({batch_size!r})')
        if self._len < batch_size:
            raise BufferNotReadyError(f'ReplayBuffer: {self._len} transitions stored, {batch_size} needed')
        return self._physical(rng.integers(0, self._len, size=batch_size))

    def sample(self, batch_size, rng):
        """
        Draws ``batch_size`` transitions uniformly with replacement.

        Args:
            batch_size (int): At least 1 and at most len(buffer).
            rng (np.random.Generator): Sampling stream; the batch is a function of its state.

        Returns:
            list of Transition

        Raises:
            BufferNotReadyError: If fewer than ``batch_size`` transitions are stored.
        """
        return [self._transition_at(int(i)) for i in self._sample_indices(batch_size, rng)]

    def sample_batch(self, batch_size, rng):
        """Same draw as ``sample`` (same rng consumption) returned as a TransitionBatch of copies."""
        idx = self._sample_indices(batch_size, rng)
        return TransitionBatch(obs=self._obs[idx], actions=self._actions[idx], rewards=self._rewards[idx],
                               next_obs=self._next_obs[idx], terminated=self._terminated[idx],
                               v_behavior=self._v_behavior[idx], policy_ids=self._policy_ids[idx])

    def stored_v_behavior(self):
        """v_behavior of all retained transitions, oldest first."""
        if self._len == 0:
            return np.zeros(0)
        return self._v_behavior[self._physical(np.arange(self._len))].copy()

    def distinct_policies(self):
        """Number of distinct policy_id values currently stored."""
        if self._len == 0:
            return 0
        return int(np.unique(self._policy_ids[self._physical(np.arange(self._len))]).size)

    def policy_mixture(self):
        """
        Empirical proportions of the behavior policies in the buffer, {policy_id: share}.

        This is the buffer's analogue of the treatment probabilities q_t.
        """
        if self._len == 0:
            return {}
        ids, counts = np.unique(self._policy_ids[self._physical(np.arange(self._len))], return_counts=True)
        return {int(i): float(c) / self._len for i, c in zip(ids, counts)}

    def to_records(self):
        records = np.zeros(self._len, dtype=record_dtype(self.obs_dim or 0))
        if self._len == 0:
            return records
        idx = self._physical(np.arange(self._len))
        records['obs'] = self._obs[idx]
        records['action'] = self._actions[idx]
        records['reward'] = self._rewards[idx]
        records['next_obs'] = self._next_obs[idx]
        records['terminated'] = self._terminated[idx]
        records['v_behavior'] = self._v_behavior[idx]
        records['policy_id'] = self._policy_ids[idx]
        return records

    def dump(self, path):
        """Writes the retained transitions, oldest first, as fixed-width binary records."""
        records = self.to_records()
        records.tofile(path)
        logger.debug(f'ReplayBuffer: dumped {records.size} records of {records.dtype.itemsize} bytes to {path}')
        return records.size
