from suft.agents.agent_config import AgentConfig, AgentVariant, EpsilonSchedule
from suft.agents.base_agent import BaseAgent, UpdateMetrics
from suft.agents.dqn_agent import DqnAgent, VanillaDqnAgent, DoubleDqnAgent
from suft.agents.actor_critic_agent import ActorCriticAgent
from suft.agents.registry import supported_agents, make_agent, load_agent
