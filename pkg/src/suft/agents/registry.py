"""
Agent registry, construction and checkpoint loading.
"""

import os

import numpy as np

from suft.agents.actor_critic_agent import ActorCriticAgent
from suft.agents.agent_config import AgentConfig, AgentVariant
from suft.agents.base_agent import AGENT_CONFIG_FILE
from suft.agents.dqn_agent import DqnAgent, VanillaDqnAgent, DoubleDqnAgent
from suft.common.config import load_json_config
from suft.common.errors import DomainError, ConfigError

supported_agents = {
    AgentVariant.VANILLA_DQN: VanillaDqnAgent,
    AgentVariant.DQN: DqnAgent,
    AgentVariant.DOUBLE_DQN: DoubleDqnAgent,
    AgentVariant.ACTOR_CRITIC: ActorCriticAgent,
}


def make_agent(config, env_spec, rng):
    """
    Builds the agent class registered for ``config.variant``.

    Args:
        config (AgentConfig): Hyperparameters.
        env_spec (EnvSpec): Dimensions of the environment.
        rng (np.random.Generator): Weight initialization randomness.
    """
    return supported_agents[AgentVariant(config.variant)](config, env_spec, rng)


def load_agent(directory, env_spec):
    """
    Rebuilds an agent written by ``BaseAgent.save``.

    Args:
        directory (str): Folder holding agent_config.json and the checkpoint files.
        env_spec (EnvSpec): Environment the agent will act in.

    Returns:
        BaseAgent: Agent with the saved weights, optimizer states and counters.

    Raises:
        DomainError: If the saved agent was built for other dimensions.
        ConfigError: If the sidecar is missing or invalid.
    """
    sidecar = load_json_config(os.path.join(directory, AGENT_CONFIG_FILE))
    if 'agent' not in sidecar:
        raise ConfigError('agent', f'{AGENT_CONFIG_FILE} has no agent section')
    saved_env = sidecar.get('env', {})
    saved_dims = (saved_env.get('obs_dim'), saved_env.get('n_actions'))
    if saved_dims != (env_spec.obs_dim, env_spec.n_actions):
        raise DomainError(f'load_agent: checkpoint was saved for (obs_dim, n_actions)={saved_dims}, '
                          f'{env_spec.name} has ({env_spec.obs_dim}, {env_spec.n_actions})')
    agent = make_agent(AgentConfig.from_dict(sidecar['agent']), env_spec, np.random.default_rng(0))
    agent.restore(directory)
    agent.update_count = int(sidecar.get('update_count', 0))
    agent.act_count = int(sidecar.get('act_count', 0))
    agent.policy_id = int(sidecar.get('policy_id', 0))
    return agent
