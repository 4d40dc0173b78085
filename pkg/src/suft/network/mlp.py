"""
Feed-forward network with an explicit flat parameter vector and analytic gradients.

Description:
    The parameters of every layer are stored back to back in one float64 vector: for each
    layer the weight matrix W of shape (n_in, n_out) in row-major order, then its bias of
    length n_out. Layer views are numpy views into that vector, so optimizers update the
    vector in place and the network sees the change immediately.

    Hidden layers share one activation (ReLU or tanh); the output layer is linear.
"""

from enum import Enum

import numpy as np

from suft.common.errors import DomainError


class Activation(str, Enum):
    RELU = 'relu'
    TANH = 'tanh'

    @property
    def code(self):
        return _ACTIVATION_CODES[self]

    @classmethod
    def from_code(cls, code):
        for activation, value in _ACTIVATION_CODES.items():
            if value == code:
                return activation
        raise DomainError(f'Activation: unknown activation code {code}')


_ACTIVATION_CODES = {Activation.RELU: 0, Activation.TANH: 1}


def parameter_count(layer_sizes):
    return sum(n_in * n_out + n_out for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]))


class Mlp:
    """
    Multilayer perceptron with analytic reverse-mode gradients.

    Attributes:
        layer_sizes (tuple): Units per layer, input first.
        activation (Activation): Hidden-layer activation.
        weights (np.ndarray): Flat float64 parameter vector.
    """

    def __init__(self, layer_sizes, weights=None, activation=Activation.RELU):
        """
        Args:
            layer_sizes (sequence of int): At least two positive sizes.
            weights (array-like, optional): Flat parameter vector. Defaults to all zeros.
            activation (Activation or str, optional): Defaults to ReLU.

        Raises:
            DomainError: If sizes are invalid or the weight vector has the wrong length.
        """
        self.layer_sizes = tuple(int(n) for n in layer_sizes)
        if len(self.layer_sizes) < 2 or any(n < 1 for n in self.layer_sizes):
            raise DomainError(f'Mlp: layer_sizes must hold at least two positive sizes ({layer_sizes})')
        self.activation = Activation(activation)
        n_params = parameter_count(self.layer_sizes)
        if weights is None:
            self.weights = np.zeros(n_params)
        else:
            self.weights = np.array(weights, dtype=np.float64).ravel()
            if self.weights.size != n_params:
                raise DomainError(f'Mlp: expected {n_params} weights for {self.layer_sizes}, got {self.weights.size}')
        self._layers = self._make_views()

    @classmethod
    def initialize(cls, layer_sizes, rng, activation=Activation.RELU):
        """
        He-style uniform initialization: W ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
        """
        net = cls(layer_sizes, activation=activation)
        for W, _ in net._layers:
            limit = np.sqrt(6.0 / W.shape[0])
            W[...] = rng.uniform(-limit, limit, size=W.shape)
        return net

    def _make_views(self):
        layers = []
        offset = 0
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            W = self.weights[offset:offset + n_in * n_out].reshape(n_in, n_out)
            offset += n_in * n_out
            b = self.weights[offset:offset + n_out]
            offset += n_out
            layers.append((W, b))
        return layers

    @property
    def n_params(self):
        return self.weights.size

    @property
    def input_size(self):
        return self.layer_sizes[0]

    @property
    def output_size(self):
        return self.layer_sizes[-1]

    def _activate(self, z):
        if self.activation is Activation.RELU:
            return np.maximum(z, 0.0)
        return np.tanh(z)

    def _activation_grad(self, z, a):
        if self.activation is Activation.RELU:
            return (z > 0).astype(np.float64)
        return 1.0 - a * a

    def _as_batch(self, inputs):
        x = np.asarray(inputs, dtype=np.float64)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.ndim != 2 or batch.shape[1] != self.input_size:
            raise DomainError(f'Mlp: input must have {self.input_size} features, got shape {x.shape}')
        return batch, single

    def forward(self, inputs):
        """
        Evaluates the network.

        Args:
            inputs (array-like): One input vector of length layer_sizes[0], or a batch of shape (B, n_in).

        Returns:
            np.ndarray: Output vector, or (B, n_out) for a batch.

        Raises:
            DomainError: On a dimension mismatch.
        """
        batch, single = self._as_batch(inputs)
        out, _ = self._forward_batch(batch)
        return out[0] if single else out

    def _forward_batch(self, batch):
        a = batch
        cache = [(None, a)]
        last = len(self._layers) - 1
        for i, (W, b) in enumerate(self._layers):
            z = a @ W + b
            a = z if i == last else self._activate(z)
            cache.append((z, a))
        return a, cache

    def loss_and_gradient(self, inputs, objective):
        """
        Objective value and its exact gradient with respect to all weights.

        Args:
            inputs (array-like): Batch of shape (B, n_in).
            objective: Batch objective exposing ``value(outputs)`` and ``output_grad(outputs)``;
                ``output_grad`` already includes the 1/B of the batch mean.

        Returns:
            tuple: (float value, np.ndarray gradient with the layout of ``weights``).
        """
        batch, _ = self._as_batch(inputs)
        outputs, cache = self._forward_batch(batch)
        delta = np.asarray(objective.output_grad(outputs), dtype=np.float64)
        if delta.shape != outputs.shape:
            raise DomainError(f'Mlp: objective gradient has shape {delta.shape}, outputs have {outputs.shape}')
        grads = []
        for i in range(len(self._layers) - 1, -1, -1):
            W, _ = self._layers[i]
            a_prev = cache[i][1]
            grads.append((a_prev.T @ delta, delta.sum(axis=0)))
            if i > 0:
                z_prev, act_prev = cache[i]
                delta = (delta @ W.T) * self._activation_grad(z_prev, act_prev)
        flat = np.concatenate([np.concatenate([dW.ravel(), db]) for dW, db in reversed(grads)])
        return float(objective.value(outputs)), flat

    def backward(self, inputs, objective):
        """Gradient of the batch objective with respect to all weights."""
        return self.loss_and_gradient(inputs, objective)[1]

    def clone(self):
        return Mlp(self.layer_sizes, self.weights.copy(), self.activation)

    def copy_from(self, other):
        if other.layer_sizes != self.layer_sizes:
            raise DomainError(f'Mlp: cannot copy {other.layer_sizes} into {self.layer_sizes}')
        self.weights[...] = other.weights


def clone_weights(net):
    """Deep copy of ``net``; later updates to either network do not affect the other."""
    return net.clone()


def copy_into_target(online, target):
    """Overwrites the target network's weights with the online network's."""
    target.copy_from(online)
    return target
