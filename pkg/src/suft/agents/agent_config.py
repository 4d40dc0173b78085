"""
AgentConfig: hyperparameters of one learner, read from the ``agent`` object of a run config.

Defaults: lambda_tf = 1.0 for the DQN family and 0.6 for ActorCritic, L2 loss, linear
epsilon decay from 1.0 to 0.05 over the first 20% of the run, two hidden layers of 64 units.
Setting lambda_tf to 0 gives the baseline agent, identical in every other respect.
"""

from dataclasses import dataclass, field, asdict, replace
from enum import Enum

from suft.common.config import read_field, reject_unknown_keys, join_path
from suft.common.errors import ConfigError
from suft.common.losses import LossKind
from suft.network.mlp import Activation


class AgentVariant(str, Enum):
    VANILLA_DQN = 'VanillaDQN'
    DQN = 'DQN'
    DOUBLE_DQN = 'DoubleDQN'
    ACTOR_CRITIC = 'ActorCritic'

    @property
    def is_q_agent(self):
        return self is not AgentVariant.ACTOR_CRITIC


DEFAULT_LAMBDA_TF = {
    AgentVariant.VANILLA_DQN: 1.0,
    AgentVariant.DQN: 1.0,
    AgentVariant.DOUBLE_DQN: 1.0,
    AgentVariant.ACTOR_CRITIC: 0.6,
}

EPSILON_DECAY_FRACTION = 0.2


@dataclass(frozen=True)
class EpsilonSchedule:
    """
    Linear exploration schedule from ``start`` to ``end`` over ``decay_steps`` act calls.

    ``decay_steps`` None means "20% of the run" and is resolved by the harness.
    """
    start: float = 1.0
    end: float = 0.05
    decay_steps: int = None

    def value(self, step):
        if not self.decay_steps:
            return self.end
        fraction = min(1.0, step / self.decay_steps)
        return self.start + fraction * (self.end - self.start)

    def resolved(self, total_steps):
        if self.decay_steps is not None:
            return self
        return EpsilonSchedule(self.start, self.end, max(1, int(EPSILON_DECAY_FRACTION * total_steps)))


@dataclass(frozen=True)
class AgentConfig:
    """
    Hyperparameters of a SUFT agent.

    Attributes:
        variant (AgentVariant): VanillaDQN, DQN, DoubleDQN or ActorCritic.
        gamma (float): Discount in (0, 1].
        lambda_tf (float): Weight of the SUFT term, >= 0.
        loss_kind (LossKind): L1 or L2, used by both the TD loss and the SUFT term.
        epsilon (EpsilonSchedule): Exploration schedule (Q-agents only).
        target_sync_interval (int): Updates between target syncs / policy phases.
        lr (float): Adam learning rate.
        batch_size (int): Transitions per update.
        buffer_capacity (int): Replay capacity.
        hidden_sizes (tuple): Hidden layer widths.
        activation (Activation): Hidden activation.
    """
    variant: AgentVariant = AgentVariant.DQN
    gamma: float = 0.99
    lambda_tf: float = 1.0
    loss_kind: LossKind = LossKind.L2
    epsilon: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    target_sync_interval: int = 100
    lr: float = 1e-3
    batch_size: int = 32
    buffer_capacity: int = 500
    hidden_sizes: tuple = (64, 64)
    activation: Activation = Activation.RELU

    def __post_init__(self):
        object.__setattr__(self, 'variant', AgentVariant(self.variant))
        object.__setattr__(self, 'loss_kind', LossKind(self.loss_kind))
        object.__setattr__(self, 'activation', Activation(self.activation))
        object.__setattr__(self, 'hidden_sizes', tuple(int(n) for n in self.hidden_sizes))
        if not 0 < self.gamma <= 1:
            raise ConfigError('agent.gamma', f'must be in (0, 1], got {self.gamma}')
        if self.lambda_tf < 0:
            raise ConfigError('agent.lambda_tf', f'must be >= 0, got {self.lambda_tf}')
        if self.lr <= 0:
            raise ConfigError('agent.lr', f'must be > 0, got {self.lr}')
        for name in ('target_sync_interval', 'batch_size', 'buffer_capacity'):
            if getattr(self, name) < 1:
                raise ConfigError(f'agent.{name}', f'must be a positive integer, got {getattr(self, name)}')
        if any(n < 1 for n in self.hidden_sizes):
            raise ConfigError('agent.hidden_sizes', f'sizes must be positive, got {list(self.hidden_sizes)}')
        if not (0 <= self.epsilon.end <= 1 and 0 <= self.epsilon.start <= 1):
            raise ConfigError('agent.epsilon', f'start and end must lie in [0, 1] ({self.epsilon})')
        if self.epsilon.decay_steps is not None and self.epsilon.decay_steps < 1:
            raise ConfigError('agent.epsilon.decay_steps', f'must be a positive integer, got {self.epsilon.decay_steps}')

    @property
    def suft_enabled(self):
        return self.lambda_tf > 0

    def with_lambda(self, lambda_tf):
        return replace(self, lambda_tf=float(lambda_tf))

    def to_dict(self):
        document = asdict(self)
        document['variant'] = self.variant.value
        document['loss'] = document.pop('loss_kind').value
        document['activation'] = self.activation.value
        document['hidden_sizes'] = list(self.hidden_sizes)
        if self.epsilon.decay_steps is None:
            del document['epsilon']['decay_steps']
        return document

    @classmethod
    def from_dict(cls, document, path='agent'):
        """
        Builds an AgentConfig from its JSON form.

        Raises:
            ConfigError: On unknown keys or invalid values, naming the field path.
        """
        reject_unknown_keys(document, ('variant', 'gamma', 'lambda_tf', 'loss', 'lr', 'batch_size',
                                       'buffer_capacity', 'target_sync_interval', 'epsilon',
                                       'hidden_sizes', 'activation'), path)
        variant_name = read_field(document, 'variant', path, str)
        try:
            variant = AgentVariant(variant_name)
        except ValueError:
            raise ConfigError(join_path(path, 'variant'),
                              f'unknown variant {variant_name!r} (choose from {[v.value for v in AgentVariant]})') from None
        loss_name = read_field(document, 'loss', path, str, default='l2')
        try:
            loss_kind = LossKind(loss_name.lower())
        except ValueError:
            raise ConfigError(join_path(path, 'loss'), f'expected l1 or l2, got {loss_name!r}') from None
        activation_name = read_field(document, 'activation', path, str, default='relu')
        try:
            activation = Activation(activation_name.lower())
        except ValueError:
            raise ConfigError(join_path(path, 'activation'), f'expected relu or tanh, got {activation_name!r}') from None
        epsilon_path = join_path(path, 'epsilon')
        epsilon_doc = document.get('epsilon', {})
        reject_unknown_keys(epsilon_doc, ('start', 'end', 'decay_steps'), epsilon_path)
        epsilon = EpsilonSchedule(
            start=read_field(epsilon_doc, 'start', epsilon_path, float, default=1.0, check=lambda v: 0 <= v <= 1, message='must lie in [0, 1]'),
            end=read_field(epsilon_doc, 'end', epsilon_path, float, default=0.05, check=lambda v: 0 <= v <= 1, message='must lie in [0, 1]'),
            decay_steps=read_field(epsilon_doc, 'decay_steps', epsilon_path, int, default=None, check=lambda v: v >= 1, message='must be >= 1'),
        )
        hidden = read_field(document, 'hidden_sizes', path, list, default=[64, 64])
        if not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in hidden):
            raise ConfigError(join_path(path, 'hidden_sizes'), f'expected a list of positive integers, got {hidden!r}')
        positive = dict(check=lambda v: v > 0, message='must be > 0')
        return cls(
            variant=variant,
            gamma=read_field(document, 'gamma', path, float, default=0.99, check=lambda v: 0 < v <= 1, message='must be in (0, 1]'),
            lambda_tf=read_field(document, 'lambda_tf', path, float, default=DEFAULT_LAMBDA_TF[variant], check=lambda v: v >= 0, message='must be >= 0'),
            loss_kind=loss_kind,
            epsilon=epsilon,
            target_sync_interval=read_field(document, 'target_sync_interval', path, int, default=100, **positive),
            lr=read_field(document, 'lr', path, float, default=1e-3, **positive),
            batch_size=read_field(document, 'batch_size', path, int, default=32, **positive),
            buffer_capacity=read_field(document, 'buffer_capacity', path, int, default=500, **positive),
            hidden_sizes=tuple(hidden),
            activation=activation,
        )

    def get_metadata(self):
        """Flat summary of the configuration, for logs and report headers."""
        return dict(Agent_Variant=self.variant.value, Agent_Gamma=self.gamma, Agent_Lambda_TF=self.lambda_tf,
                    Agent_Loss=self.loss_kind.value, Agent_LR=self.lr, Agent_Batch_Size=self.batch_size,
                    Agent_Buffer_Capacity=self.buffer_capacity, Agent_Target_Sync=self.target_sync_interval)
