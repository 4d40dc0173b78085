"""
One-step advantage actor-critic with the SUFT term on the critic.

The critic V(s) is trained on mean L(y, V(s)) + lambda_tf * mean L(v_behavior, V(s)) with
y = r + gamma * V(s') * (1 - terminated). The actor takes a policy-gradient step with the
constant advantage y - V(s); the SUFT term never reaches the actor.
"""

import logging

import numpy as np

from suft.agents.base_agent import BaseAgent, UpdateMetrics
from suft.network.adam import adam_step
from suft.network.objectives import PolicyGradientObjective

logger = logging.getLogger(__name__)


def softmax(logits):
    shifted = np.asarray(logits, dtype=np.float64) - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class ActorCriticAgent(BaseAgent):
    """
    Attributes:
        actor (Mlp): Policy logits, obs_dim -> n_actions.
        critic (Mlp): State value, obs_dim -> 1.
    """

    def _build_networks(self, rng):
        self.actor = self._new_network(self.n_actions, rng)
        self.critic = self._new_network(1, rng)

    def networks(self):
        return {'actor': self.actor, 'critic': self.critic}

    def trainable_networks(self):
        return self.networks()

    def policy(self, obs):
        return softmax(self.actor.forward(obs))

    def act(self, obs, rng, epsilon=None):
        """
        Samples an action from the softmax policy by inverse CDF on one uniform draw.

        ``epsilon`` is accepted for interface compatibility and ignored.

        Returns:
            tuple: (int action, float V(obs) of the critic).
        """
        probs = self.policy(obs)
        self.act_count += 1
        action = int(np.searchsorted(np.cumsum(probs), rng.random(), side='right'))
        action = min(action, self.n_actions - 1)
        return action, float(self.critic.forward(obs)[0])

    def td_targets(self, batch):
        not_done = 1.0 - batch.terminated.astype(np.float64)
        return batch.rewards + self.config.gamma * self.critic.forward(batch.next_obs)[:, 0] * not_done

    def value_predictions(self, batch):
        return self.critic.forward(batch.obs)[:, 0]

    def learn(self, batch):
        targets = self.td_targets(batch)
        values = self.value_predictions(batch)
        advantages = targets - values
        td_loss, suft, total, grad_norm = self._critic_step('critic', self.critic, batch, targets, values)
        policy_objective = PolicyGradientObjective(batch.actions, advantages)
        policy_loss, policy_grads = self.actor.loss_and_gradient(batch.obs, policy_objective)
        adam_step(self.actor, policy_grads, self._optimizer_states['actor'], self.config.lr)
        self._finish_update()
        return UpdateMetrics(td_loss=td_loss, suft_term=suft, total_loss=total, grad_norm=grad_norm,
                             policy_loss=policy_loss, policy_id=self.policy_id)
