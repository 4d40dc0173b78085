"""
Environment lookup by the name used in run configurations.
"""

from suft.common.errors import DomainError
from suft.envs.cart_pole import CartPole
from suft.envs.grid_world import GridWorld

supported_envs = {  # 'name': factory
    'gridworld': GridWorld,
    'cartpole': CartPole,
}


def make_env(name):
    """
    Builds a fresh environment instance.

    Raises:
        DomainError: If ``name`` is not in supported_envs.
    """
    if name not in supported_envs:
        raise DomainError(f'envs: environment {name!r} is not supported (choose from {sorted(supported_envs)})')
    return supported_envs[name]()


def env_spec_from_name(name):
    return make_env(name).spec
