"""
JSON configuration helpers.

Run configurations are plain JSON documents (see the config folder). The helpers here
read them, reject unknown keys and turn every validation problem into a ConfigError
that names the offending field with a dotted path such as ``agent.epsilon.start``.
"""

import hashlib
import json
import math
import os

from suft.common.errors import ConfigError


def load_json_config(path):
    """
    Reads a JSON configuration file.

    Args:
        path (str): Path to the JSON file.

    Returns:
        dict: The parsed document.

    Raises:
        ConfigError: If the file is missing, is not valid JSON or is not a JSON object.
    """
    if not os.path.isfile(path):
        raise ConfigError('', f'configuration file not found: {path}')
    with open(path, 'r', encoding='utf-8') as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError('', f'{path} is not valid JSON ({exc.msg} at line {exc.lineno})') from None
    if not isinstance(document, dict):
        raise ConfigError('', f'{path} must contain a JSON object')
    return document


def join_path(prefix, key):
    return f'{prefix}.{key}' if prefix else str(key)


def reject_unknown_keys(document, allowed, path=''):
    if not isinstance(document, dict):
        raise ConfigError(path, f'expected a JSON object, got {type(document).__name__}')
    unknown = sorted(set(document) - set(allowed))
    if unknown:
        raise ConfigError(join_path(path, unknown[0]), 'unknown key')


def read_field(document, key, path, kind, default=..., check=None, message=None):
    """
    Reads and validates one field of a configuration object.

    Args:
        document (dict): The enclosing JSON object.
        key (str): Field name.
        path (str): Dotted path of the enclosing object, used in error messages.
        kind (type): float, int, bool or str. Integers are accepted for floats; booleans are
            never accepted as numbers.
        default: Value used when the key is absent. Without a default the key is required.
        check (callable, optional): Predicate the value must satisfy.
        message (str, optional): Error text used when the predicate fails.

    Returns:
        The validated value converted to ``kind``.

    Raises:
        ConfigError: If the field is missing, mistyped or fails ``check``.
    """
    field_path = join_path(path, key)
    if key not in document:
        if default is ...:
            raise ConfigError(field_path, 'required field is missing')
        return default
    value = document[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(field_path, f'expected a number, got {value!r}')
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(field_path, f'expected a finite number, got {value!r}')
    elif kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(field_path, f'expected an integer, got {value!r}')
    elif not isinstance(value, kind):
        raise ConfigError(field_path, f'expected {kind.__name__}, got {value!r}')
    if check is not None and not check(value):
        raise ConfigError(field_path, message or f'invalid value {value!r}')
    return value


def canonical_json(document):
    return json.dumps(document, sort_keys=True, separators=(',', ':'))


def config_hash(document):
    """SHA-256 of the canonical (key-sorted) JSON form; independent of key order."""
    return hashlib.sha256(canonical_json(document).encode('utf-8')).hexdigest()
