"""
Batch objectives over network outputs.

An objective maps the (B, n_out) output matrix of a batch to a scalar batch-mean loss and
provides the gradient of that scalar with respect to the outputs. Targets and stored
behavior values are constants: no gradient flows into them.
"""

import numpy as np

from suft.common.errors import DomainError
from suft.common.losses import loss_from_name


def _selected(outputs, columns):
    outputs = np.asarray(outputs, dtype=np.float64)
    if columns is None:
        if outputs.shape[1] != 1:
            raise DomainError(f'objectives: column indices are required for {outputs.shape[1]} outputs')
        return outputs[:, 0]
    return outputs[np.arange(outputs.shape[0]), columns]


def _scatter(outputs, columns, values):
    grad = np.zeros_like(outputs, dtype=np.float64)
    if columns is None:
        grad[:, 0] = values
    else:
        grad[np.arange(outputs.shape[0]), columns] = values
    return grad


class RegressionObjective:
    """
    mean_i L(target_i, output[i, column_i]).

    Attributes:
        targets (np.ndarray): Constant regression targets, shape (B,).
        loss (LossFn): Pointwise loss.
        columns (np.ndarray or None): Output column per row; None for single-output networks.
    """

    def __init__(self, targets, loss, columns=None):
        self.targets = np.asarray(targets, dtype=np.float64)
        self.loss = loss_from_name(loss)
        self.columns = None if columns is None else np.asarray(columns, dtype=np.int64)

    def value(self, outputs):
        return float(np.mean(self.loss(self.targets, _selected(outputs, self.columns))))

    def output_grad(self, outputs):
        predictions = _selected(outputs, self.columns)
        batch_size = predictions.shape[0]
        return _scatter(np.asarray(outputs), self.columns, self.loss.derivative(self.targets, predictions) / batch_size)

    def kink_residuals(self, outputs):
        return self.targets - _selected(outputs, self.columns)


class SuftObjective:
    """
    TD loss plus lambda_tf times the SUFT term on the same selected outputs:

        mean_i L(y_i, q_i) + lambda_tf * mean_i L(v_i, q_i)

    where y are the TD targets, v the recycled behavior values and q the current outputs.
    With lambda_tf == 0 the SUFT gradient is never evaluated, leaving the plain TD gradient.

    Attributes:
        td_targets (np.ndarray): Constant TD targets, shape (B,).
        behavior_values (np.ndarray): Constant recycled values, shape (B,).
        loss (LossFn): Pointwise loss shared by both terms.
        lambda_tf (float): Weight of the SUFT term.
        columns (np.ndarray or None): Output column per row (the stored action for Q-networks).
    """

    def __init__(self, td_targets, behavior_values, loss, lambda_tf, columns=None):
        self.td_targets = np.asarray(td_targets, dtype=np.float64)
        self.behavior_values = np.asarray(behavior_values, dtype=np.float64)
        self.loss = loss_from_name(loss)
        self.lambda_tf = float(lambda_tf)
        self.columns = None if columns is None else np.asarray(columns, dtype=np.int64)

    def components(self, outputs):
        """Returns (td_loss, suft_term) for the given outputs."""
        predictions = _selected(outputs, self.columns)
        td = float(np.mean(self.loss(self.td_targets, predictions)))
        suft = float(np.mean(self.loss(self.behavior_values, predictions)))
        return td, suft

    def value(self, outputs):
        td, suft = self.components(outputs)
        return td + self.lambda_tf * suft

    def output_grad(self, outputs):
        predictions = _selected(outputs, self.columns)
        batch_size = predictions.shape[0]
        grad = self.loss.derivative(self.td_targets, predictions) / batch_size
        if self.lambda_tf:
            grad = grad + self.lambda_tf * (self.loss.derivative(self.behavior_values, predictions) / batch_size)
        return _scatter(np.asarray(outputs), self.columns, grad)

    def kink_residuals(self, outputs):
        predictions = _selected(outputs, self.columns)
        return np.concatenate([self.td_targets - predictions, self.behavior_values - predictions])


class PolicyGradientObjective:
    """
    Softmax policy-gradient surrogate -mean_i log pi(a_i | s_i) * A_i with constant advantages.

    Attributes:
        actions (np.ndarray): Taken actions, shape (B,).
        advantages (np.ndarray): Constant advantages, shape (B,).
    """

    def __init__(self, actions, advantages):
        self.actions = np.asarray(actions, dtype=np.int64)
        self.advantages = np.asarray(advantages, dtype=np.float64)

    @staticmethod
    def log_softmax(logits):
        shifted = logits - logits.max(axis=1, keepdims=True)
        return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

    def value(self, outputs):
        log_pi = self.log_softmax(np.asarray(outputs, dtype=np.float64))
        chosen = log_pi[np.arange(log_pi.shape[0]), self.actions]
        return float(-np.mean(chosen * self.advantages))

    def output_grad(self, outputs):
        outputs = np.asarray(outputs, dtype=np.float64)
        pi = np.exp(self.log_softmax(outputs))
        one_hot = np.zeros_like(pi)
        one_hot[np.arange(pi.shape[0]), self.actions] = 1.0
        return (pi - one_hot) * self.advantages[:, None] / pi.shape[0]
