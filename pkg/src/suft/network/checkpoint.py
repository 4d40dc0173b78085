"""
Binary checkpoint format for Mlp weights.

Layout (little-endian):
    offset 0   magic         7 bytes   b'SUFTNN' followed by the format version digit b'1'
    offset 7   activation    1 byte    0 = ReLU, 1 = tanh
    offset 8   layer count   4 bytes   unsigned
    offset 12  layer sizes   4 bytes each, unsigned
    then       weights       8 bytes each, IEEE-754 float64, in the flat layout of Mlp.weights

The round trip is bit-exact for the weight vector.
"""

import os

import numpy as np

from suft.common.errors import CheckpointParseError, CheckpointVersionError, DomainError
from suft.network.mlp import Activation, Mlp, parameter_count

MAGIC_PREFIX = b'SUFTNN'
FORMAT_VERSION = b'1'
MAGIC = MAGIC_PREFIX + FORMAT_VERSION


def encode_weights(net):
    header = bytearray(MAGIC)
    header += net.activation.code.to_bytes(1, byteorder='little')
    header += len(net.layer_sizes).to_bytes(4, byteorder='little')
    for size in net.layer_sizes:
        header += size.to_bytes(4, byteorder='little')
    return bytes(header) + net.weights.astype('<f8').tobytes()


def decode_weights(data):
    """
    Parses checkpoint bytes.

    Raises:
        CheckpointVersionError: If the magic names another format version.
        CheckpointParseError: If the data is malformed; ``offset`` is where parsing failed.
    """
    def take(offset, n, what):
        if offset + n > len(data):
            raise CheckpointParseError(f'checkpoint: truncated {what}, needed {n} bytes, {len(data) - offset} left', offset)
        return data[offset:offset + n]

    magic = take(0, len(MAGIC), 'magic')
    if magic[:len(MAGIC_PREFIX)] != MAGIC_PREFIX:
        raise CheckpointParseError(f'checkpoint: bad magic {magic!r}', 0)
    if magic[len(MAGIC_PREFIX):] != FORMAT_VERSION:
        raise CheckpointVersionError(
            f'checkpoint: unsupported format version {magic[len(MAGIC_PREFIX):]!r} (expected {FORMAT_VERSION!r})')
    offset = len(MAGIC)
    code = take(offset, 1, 'activation code')[0]
    try:
        activation = Activation.from_code(code)
    except DomainError:
        raise CheckpointParseError(f'checkpoint: unknown activation code {code}', offset) from None
    offset += 1
    n_layers = int.from_bytes(take(offset, 4, 'layer count'), byteorder='little')
    if n_layers < 2:
        raise CheckpointParseError(f'checkpoint: layer count must be >= 2, got {n_layers}', offset)
    offset += 4
    sizes = []
    for _ in range(n_layers):
        size = int.from_bytes(take(offset, 4, 'layer size'), byteorder='little')
        if size < 1:
            raise CheckpointParseError('checkpoint: layer size must be positive', offset)
        sizes.append(size)
        offset += 4
    n_params = parameter_count(sizes)
    raw = take(offset, 8 * n_params, 'weight vector')
    offset += 8 * n_params
    if offset != len(data):
        raise CheckpointParseError(f'checkpoint: {len(data) - offset} trailing bytes', offset)
    weights = np.frombuffer(raw, dtype='<f8').astype(np.float64)
    return Mlp(sizes, weights, activation)


def save_weights(net, path):
    """Writes ``net`` to ``path`` in the checkpoint format."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'wb') as f:
        f.write(encode_weights(net))


def load_weights(path):
    """Reads an Mlp from a checkpoint file."""
    with open(path, 'rb') as f:
        return decode_weights(f.read())
