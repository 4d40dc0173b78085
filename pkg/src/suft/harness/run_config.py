"""
RunConfig: one training arm as written in a run configuration file.

    {"env": "gridworld", "agent": {...}, "steps": 20000, "seeds": [0, 1, ...], "output_dir": "runs/dqn"}

Optional keys: ``learning_starts`` (transitions collected before the first update, default
agent.batch_size), ``train_interval`` (environment steps per update, default 1) and
``smoothing_window`` (episodes, default 50). Seeds default to 0..9.
"""

from dataclasses import dataclass, replace

from suft.agents.agent_config import AgentConfig
from suft.common.config import load_json_config, read_field, reject_unknown_keys, config_hash
from suft.common.errors import ConfigError
from suft.envs.registry import supported_envs

DEFAULT_SEEDS = tuple(range(10))
RUN_KEYS = ('env', 'agent', 'steps', 'seeds', 'output_dir', 'learning_starts', 'train_interval', 'smoothing_window')


@dataclass(frozen=True)
class RunConfig:
    """
    Attributes:
        env (str): Registered environment name.
        agent (AgentConfig): Agent hyperparameters.
        steps (int): Environment steps per seed.
        seeds (tuple): Seeds of the independent runs.
        output_dir (str): Folder receiving run logs and checkpoints.
        learning_starts (int): Buffer size at which updates start.
        train_interval (int): Environment steps between updates.
        smoothing_window (int): Trailing window of the episode-reward smoothing.
    """
    env: str
    agent: AgentConfig
    steps: int
    seeds: tuple = DEFAULT_SEEDS
    output_dir: str = 'runs'
    learning_starts: int = None
    train_interval: int = 1
    smoothing_window: int = 50

    def __post_init__(self):
        if self.env not in supported_envs:
            raise ConfigError('env', f'unknown environment {self.env!r} (choose from {sorted(supported_envs)})')
        if self.steps < 0:
            raise ConfigError('steps', f'must be >= 0, got {self.steps}')
        object.__setattr__(self, 'seeds', tuple(int(s) for s in self.seeds))
        if not self.seeds:
            raise ConfigError('seeds', 'at least one seed is required')
        if self.learning_starts is None:
            object.__setattr__(self, 'learning_starts', self.agent.batch_size)
        if self.learning_starts < self.agent.batch_size:
            raise ConfigError('learning_starts', f'must be >= agent.batch_size ({self.learning_starts} < {self.agent.batch_size})')
        if self.train_interval < 1 or self.smoothing_window < 1:
            raise ConfigError('train_interval' if self.train_interval < 1 else 'smoothing_window', 'must be a positive integer')

    @classmethod
    def from_dict(cls, document):
        """
        Validates a run configuration document.

        Raises:
            ConfigError: Naming the first offending field, e.g. ``agent.gamma``.
        """
        reject_unknown_keys(document, RUN_KEYS)
        if 'agent' not in document:
            raise ConfigError('agent', 'required field is missing')
        seeds = read_field(document, 'seeds', '', list, default=list(DEFAULT_SEEDS))
        if not seeds or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in seeds):
            raise ConfigError('seeds', f'expected a non-empty list of non-negative integers, got {seeds!r}')
        positive = dict(check=lambda v: v >= 1, message='must be a positive integer')
        return cls(
            env=read_field(document, 'env', '', str, check=lambda v: v in supported_envs,
                           message=f'unknown environment (choose from {sorted(supported_envs)})'),
            agent=AgentConfig.from_dict(document['agent']),
            steps=read_field(document, 'steps', '', int, check=lambda v: v >= 0, message='must be >= 0'),
            seeds=tuple(seeds),
            output_dir=read_field(document, 'output_dir', '', str, default='runs'),
            learning_starts=read_field(document, 'learning_starts', '', int, default=None, **positive),
            train_interval=read_field(document, 'train_interval', '', int, default=1, **positive),
            smoothing_window=read_field(document, 'smoothing_window', '', int, default=50, **positive),
        )

    @classmethod
    def from_file(cls, path):
        return cls.from_dict(load_json_config(path))

    def to_dict(self):
        return dict(env=self.env, agent=self.agent.to_dict(), steps=self.steps, seeds=list(self.seeds),
                    output_dir=self.output_dir, learning_starts=self.learning_starts,
                    train_interval=self.train_interval, smoothing_window=self.smoothing_window)

    def protocol_dict(self):
        """Everything that defines the experiment itself: to_dict without seeds and output_dir."""
        document = self.to_dict()
        del document['seeds'], document['output_dir']
        return document

    @property
    def config_hash(self):
        return config_hash(self.protocol_dict())

    def resolved_agent(self):
        """Agent config with the epsilon decay length resolved against ``steps``."""
        return replace(self.agent, epsilon=self.agent.epsilon.resolved(self.steps))

    def with_lambda(self, lambda_tf, output_dir=None):
        return replace(self, agent=self.agent.with_lambda(lambda_tf),
                       output_dir=self.output_dir if output_dir is None else output_dir)

    def get_metadata(self):
        return dict(Run_Env=self.env, Run_Steps=self.steps, Run_Seeds=len(self.seeds),
                    Run_Config_Hash=self.config_hash, **self.agent.get_metadata())
