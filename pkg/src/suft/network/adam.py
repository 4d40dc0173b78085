"""
Bias-corrected Adam optimizer operating in place on an Mlp's flat parameter vector.
"""

from dataclasses import dataclass

import numpy as np

from suft.common.errors import DomainError


@dataclass
class AdamState:
    """
    First and second moment estimates.

    Attributes:
        step (int): Number of updates applied so far.
        m (np.ndarray): First moment, same length as the parameters.
        v (np.ndarray): Second moment, elementwise >= 0.
    """
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n_params):
        return cls(m=np.zeros(n_params), v=np.zeros(n_params))

    def copy(self):
        return AdamState(self.m.copy(), self.v.copy(), self.step, self.beta1, self.beta2, self.eps)


def adam_step(net, grads, state, lr):
    """
    Applies one Adam update to ``net.weights``.

    Args:
        net (Mlp): Network updated in place.
        grads (np.ndarray): Gradient with the layout of ``net.weights``.
        state (AdamState): Moment estimates, updated in place.
        lr (float): Learning rate, > 0.

    Returns:
        tuple: (net, state).

    Raises:
        DomainError: On a length mismatch or non-positive learning rate.
    """
    grads = np.asarray(grads, dtype=np.float64)
    if lr <= 0:
        raise DomainError(f'adam_step: lr must be > 0 ({lr})')
    if grads.shape != net.weights.shape or state.m.shape != net.weights.shape or state.v.shape != net.weights.shape:
        raise DomainError(f'adam_step: length mismatch (weights {net.weights.shape}, grads {grads.shape}, state {state.m.shape})')
    state.step += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grads
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grads * grads
    m_hat = state.m / (1.0 - state.beta1 ** state.step)
    v_hat = state.v / (1.0 - state.beta2 ** state.step)
    net.weights -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return net, state


def save_adam_state(state, path):
    """Writes the moments, step count and hyperparameters of ``state`` as an .npz archive."""
    with open(path, 'wb') as f:
        np.savez(f, m=state.m, v=state.v, step=state.step, beta1=state.beta1, beta2=state.beta2, eps=state.eps)


def load_adam_state(path):
    """
    Reads an archive written by ``save_adam_state``.

    Raises:
        DomainError: If the moment vectors disagree in length.
    """
    with np.load(path, allow_pickle=False) as archive:
        state = AdamState(m=archive['m'].astype(np.float64), v=archive['v'].astype(np.float64),
                          step=int(archive['step']), beta1=float(archive['beta1']), beta2=float(archive['beta2']),
                          eps=float(archive['eps']))
    if state.m.shape != state.v.shape:
        raise DomainError(f'load_adam_state: {path} holds moments of shapes {state.m.shape} and {state.v.shape}')
    return state
