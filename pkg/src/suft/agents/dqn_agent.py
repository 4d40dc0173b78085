"""
DQN-family agents: vanilla DQN (online network only), DQN with a target network and Double DQN.

The three variants differ only in how the bootstrap value of s' is computed
(``_bootstrap_values``); acting, the SUFT term and the update step are shared.
"""

import logging

import numpy as np

from suft.agents.base_agent import BaseAgent, UpdateMetrics
from suft.network.mlp import clone_weights, copy_into_target

logger = logging.getLogger(__name__)


class DqnAgent(BaseAgent):
    """
    DQN with a periodically synced target network: y = r + gamma * max_a' Q(s', a'; target).

    Attributes:
        online (Mlp): Q-network being trained, obs_dim -> n_actions.
        target (Mlp): Frozen copy of ``online``, refreshed every target_sync_interval updates.
    """

    def _build_networks(self, rng):
        self.online = self._new_network(self.n_actions, rng)
        self.target = clone_weights(self.online)

    def networks(self):
        return {'online': self.online, 'target': self.target}

    def trainable_networks(self):
        return {'online': self.online}

    def epsilon(self):
        return self.config.epsilon.value(self.act_count)

    def act(self, obs, rng, epsilon=None):
        """
        Epsilon-greedy action and the online Q-value of the action actually taken.

        One uniform draw decides between exploring and exploiting; exploring draws the action
        from a second call, so a fixed rng always yields the same pair.

        Args:
            obs (np.ndarray): Observation.
            rng (np.random.Generator): Exploration randomness.
            epsilon (float, optional): Overrides the schedule.

        Returns:
            tuple: (int action, float v_behavior).
        """
        q_values = self.online.forward(obs)
        eps = self.epsilon() if epsilon is None else epsilon
        self.act_count += 1
        if rng.random() < eps:
            action = int(rng.integers(self.n_actions))
        else:
            action = int(np.argmax(q_values))
        return action, float(q_values[action])

    def _bootstrap_values(self, next_obs):
        return self.target.forward(next_obs).max(axis=1)

    def td_targets(self, batch):
        not_done = 1.0 - batch.terminated.astype(np.float64)
        return batch.rewards + self.config.gamma * self._bootstrap_values(batch.next_obs) * not_done

    def value_predictions(self, batch):
        q_values = self.online.forward(batch.obs)
        return q_values[np.arange(len(batch)), batch.actions]

    def learn(self, batch):
        targets = self.td_targets(batch)
        predictions = self.value_predictions(batch)
        td_loss, suft, total, grad_norm = self._critic_step('online', self.online, batch, targets,
                                                            predictions, columns=batch.actions)
        self._finish_update()
        return UpdateMetrics(td_loss=td_loss, suft_term=suft, total_loss=total, grad_norm=grad_norm,
                             policy_id=self.policy_id)

    def _sync(self):
        copy_into_target(self.online, self.target)


class VanillaDqnAgent(DqnAgent):
    """
    DQN bootstrapping from the online network itself: y = r + gamma * max_a' Q(s', a'; online).

    There is no target network; a sync only closes the behavior-policy phase.
    """

    def _build_networks(self, rng):
        self.online = self._new_network(self.n_actions, rng)

    def networks(self):
        return {'online': self.online}

    def _sync(self):
        pass

    def _bootstrap_values(self, next_obs):
        return self.online.forward(next_obs).max(axis=1)


class DoubleDqnAgent(DqnAgent):
    """
    Double DQN: the online network picks a' and the target network evaluates it.

    y = r + gamma * Q(s', argmax_a' Q(s', a'; online); target)
    """

    def _bootstrap_values(self, next_obs):
        greedy = self.online.forward(next_obs).argmax(axis=1)
        target_q = self.target.forward(next_obs)
        return target_q[np.arange(target_q.shape[0]), greedy]
