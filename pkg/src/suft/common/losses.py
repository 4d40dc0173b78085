"""
Pointwise loss functions L(a, b) used by both the causal bound and the training objectives.

Only L1 and L2 are offered. L1 satisfies the loss inequality the causal bound relies on;
L2 does not, but it is kept because the agents are trained with it as well.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from suft.common.errors import DomainError


class LossKind(str, Enum):
    L1 = 'l1'
    L2 = 'l2'


@dataclass(frozen=True)
class LossFn:
    """
    Symmetric, nonnegative pointwise loss.

    Works elementwise on scalars or numpy arrays.

    Attributes:
        kind (LossKind): L1 (absolute difference) or L2 (squared difference).
    """
    kind: LossKind

    def eval(self, a, b):
        diff = np.subtract(a, b)
        if self.kind is LossKind.L1:
            return np.abs(diff)
        return diff * diff

    def __call__(self, a, b):
        return self.eval(a, b)

    def derivative(self, target, prediction):
        """
        Derivative of L(target, prediction) with respect to the prediction.

        The L1 subgradient at a tie is 0.

        Args:
            target: Constant side of the loss.
            prediction: Side the gradient flows through.

        Returns:
            Same shape as the broadcast of the inputs.
        """
        diff = np.subtract(prediction, target)
        if self.kind is LossKind.L1:
            return np.sign(diff)
        return 2.0 * diff

    @property
    def name(self):
        return self.kind.value


L1_LOSS = LossFn(LossKind.L1)
L2_LOSS = LossFn(LossKind.L2)


def loss_from_name(name):
    """Returns the LossFn for 'l1'/'L1' or 'l2'/'L2'."""
    if isinstance(name, LossFn):
        return name
    if isinstance(name, LossKind):
        kind = name
    else:
        try:
            kind = LossKind(str(name).lower())
        except ValueError:
            raise DomainError(f'losses: unknown loss kind ({name!r}), expected l1 or l2') from None
    return L1_LOSS if kind is LossKind.L1 else L2_LOSS
