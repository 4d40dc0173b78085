"""
Common interface of the SUFT learners.

Description:
    An agent owns its networks and their Adam states. ``act`` selects an action and returns
    the value output it computed on the way (the recycled v_behavior stored with the
    transition). ``update`` samples a batch from the replay buffer and takes one step on

        mean L(y, f(s)) + lambda_tf * mean L(v_behavior, f(s))

    where y are constant TD targets and f is the online Q-network (at the stored action) or
    the critic. The hypothesis-free part of the causal bound never enters training: nothing
    in this package compares two outcomes with each other.

    Every ``target_sync_interval`` updates the agent closes one behavior-policy phase: Q-agents
    copy the online weights into the target network, and ``policy_id`` is bumped so that the
    replay buffer can report the mixture of behavior policies it holds.

Notes for Future Development:
    - Agent classes are registered in ``supported_agents``; add new variants there.
"""

import logging
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, asdict

import numpy as np

from suft.common.errors import BufferNotReadyError, DomainError
from suft.common.losses import loss_from_name
from suft.common.utilities import write_json
from suft.network.adam import AdamState, adam_step, save_adam_state, load_adam_state
from suft.network.checkpoint import save_weights, load_weights
from suft.network.mlp import Mlp
from suft.network.objectives import SuftObjective

logger = logging.getLogger(__name__)

AGENT_CONFIG_FILE = 'agent_config.json'
CHECKPOINT_SUFFIX = '.suftnn'
OPTIMIZER_SUFFIX = '.adam.npz'


@dataclass(frozen=True)
class UpdateMetrics:
    """
    Losses of one update, evaluated on the sampled batch before the optimizer step.

    Attributes:
        td_loss (float): Batch-mean TD loss.
        suft_term (float): Batch-mean SUFT term; 0 when lambda_tf is 0.
        total_loss (float): td_loss + lambda_tf * suft_term.
        grad_norm (float): Euclidean norm of the critic / Q-network gradient.
        policy_loss (float): Policy-gradient surrogate (ActorCritic only).
        policy_id (int): Behavior-policy phase after the update.
    """
    td_loss: float
    suft_term: float
    total_loss: float
    grad_norm: float
    policy_loss: float = 0.0
    policy_id: int = 0

    def as_dict(self):
        return asdict(self)


class BaseAgent(ABC):
    """
    Base class of all agents.

    Attributes:
        config (AgentConfig): Hyperparameters.
        env_spec (EnvSpec): Observation and action dimensions the networks are built for.
        loss (LossFn): Pointwise loss shared by the TD loss and the SUFT term.
        update_count (int): Updates taken so far.
        act_count (int): act calls so far (drives the epsilon schedule).
        policy_id (int): Current behavior-policy phase.
    """

    def __init__(self, config, env_spec, rng):
        self.config = config
        self.env_spec = env_spec
        self.loss = loss_from_name(config.loss_kind)
        self.update_count = 0
        self.act_count = 0
        self.policy_id = 0
        self._build_networks(rng)
        self._optimizer_states = {name: AdamState.zeros(net.n_params) for name, net in self.trainable_networks().items()}
        logger.debug(f'{self.name}: built with lambda_tf={config.lambda_tf}, loss={self.loss.name}')

    @property
    def name(self):
        return self.config.variant.value

    @property
    def n_actions(self):
        return self.env_spec.n_actions

    def _layer_sizes(self, n_outputs):
        return (self.env_spec.obs_dim, *self.config.hidden_sizes, n_outputs)

    def _new_network(self, n_outputs, rng):
        return Mlp.initialize(self._layer_sizes(n_outputs), rng, self.config.activation)

    @abstractmethod
    def _build_networks(self, rng):
        pass

    @abstractmethod
    def networks(self):
        """All networks of the agent by name, including target copies."""

    @abstractmethod
    def trainable_networks(self):
        """Networks that own an optimizer state."""

    @abstractmethod
    def act(self, obs, rng, epsilon=None):
        """
        Selects an action for ``obs``.

        Returns:
            tuple: (int action, float v_behavior).
        """

    @abstractmethod
    def td_targets(self, batch):
        """Constant TD targets r + gamma * bootstrap * (1 - terminated) for ``batch``."""

    @abstractmethod
    def value_predictions(self, batch):
        """Current f(s) values the SUFT term compares with the stored v_behavior."""

    @abstractmethod
    def learn(self, batch):
        """Takes one optimizer step on a given batch and returns UpdateMetrics."""

    def suft_term(self, batch):
        """Batch mean of L(v_behavior, f(s)) under the current weights; always >= 0."""
        return float(np.mean(self.loss(batch.v_behavior, self.value_predictions(batch))))

    def critic_objective(self, batch, targets, columns=None):
        """Objective of the Q-network or critic for a batch with precomputed TD targets."""
        return SuftObjective(targets, batch.v_behavior, self.loss, self.config.lambda_tf, columns=columns)

    def update(self, buffer, rng):
        """
        Samples a batch and takes one learning step.

        Raises:
            BufferNotReadyError: If the buffer holds fewer than batch_size transitions.
        """
        if len(buffer) < self.config.batch_size:
            raise BufferNotReadyError(f'{self.name}: buffer holds {len(buffer)} transitions, '
                                      f'batch_size is {self.config.batch_size}')
        batch = buffer.sample_batch(self.config.batch_size, rng)
        return self.learn(batch)

    def _critic_step(self, name, net, batch, targets, predictions, columns=None):
        """Applies one Adam step to ``net`` and returns (td_loss, suft_term, total_loss, grad_norm)."""
        objective = self.critic_objective(batch, targets, columns)
        td_loss = float(np.mean(self.loss(targets, predictions)))
        suft = float(np.mean(self.loss(batch.v_behavior, predictions))) if self.config.suft_enabled else 0.0
        _, grads = net.loss_and_gradient(batch.obs, objective)
        adam_step(net, grads, self._optimizer_states[name], self.config.lr)
        return td_loss, suft, td_loss + self.config.lambda_tf * suft, float(np.linalg.norm(grads))

    def _finish_update(self):
        self.update_count += 1
        if self.update_count % self.config.target_sync_interval == 0:
            self._sync()
            self.policy_id += 1
            logger.debug(f'{self.name}: sync after {self.update_count} updates, policy_id={self.policy_id}')

    def _sync(self):
        pass

    def save(self, directory):
        """
        Writes every network as a checkpoint file, the Adam state of every trainable network and
        an agent_config.json sidecar with the counters.

        Args:
            directory (str): Target folder, created if needed.
        """
        os.makedirs(directory, exist_ok=True)
        for name, net in self.networks().items():
            save_weights(net, os.path.join(directory, name + CHECKPOINT_SUFFIX))
        for name, state in self._optimizer_states.items():
            save_adam_state(state, os.path.join(directory, name + OPTIMIZER_SUFFIX))
        write_json(os.path.join(directory, AGENT_CONFIG_FILE), {
            'agent': self.config.to_dict(),
            'env': asdict(self.env_spec),
            'update_count': self.update_count,
            'act_count': self.act_count,
            'policy_id': self.policy_id,
        })

    def restore(self, directory):
        """Loads the weights and, where present, the optimizer states written by ``save``."""
        for name, net in self.networks().items():
            loaded = load_weights(os.path.join(directory, name + CHECKPOINT_SUFFIX))
            net.copy_from(loaded)
        for name, net in self.trainable_networks().items():
            path = os.path.join(directory, name + OPTIMIZER_SUFFIX)
            if not os.path.isfile(path):
                logger.warning(f'{self.name}: no optimizer state for {name}, Adam restarts from zero')
                continue
            state = load_adam_state(path)
            if state.m.shape != net.weights.shape:
                raise DomainError(f'{self.name}: optimizer state {path} has {state.m.shape[0]} entries, '
                                  f'{name} has {net.n_params} parameters')
            self._optimizer_states[name] = state
