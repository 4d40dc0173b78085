# __init__.py for the envs package

from .base_env import BaseEnv, EnvSpec, StepResult
from .grid_world import GridWorld
from .cart_pole import CartPole
from .registry import supported_envs, make_env, env_spec_from_name
