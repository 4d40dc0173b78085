# __init__.py for the network package

from .mlp import Activation, Mlp, clone_weights, copy_into_target
from .objectives import RegressionObjective, SuftObjective, PolicyGradientObjective
from .adam import AdamState, adam_step, save_adam_state, load_adam_state
from .grad_check import GradCheckReport, grad_check
from .checkpoint import save_weights, load_weights
