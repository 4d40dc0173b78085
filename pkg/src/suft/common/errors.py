"""
Exception hierarchy shared by every suft component.

All errors derive from SuftError so callers (the CLI in particular) can map them to
exit codes in one place. Bound violations are data, not errors: they travel inside
BoundReport and never raise.
"""


class SuftError(Exception):
    pass


class DomainError(SuftError, ValueError):
    """An argument lies outside the domain of the operation (unknown id, wrong length, ...)."""


class UsageError(SuftError, RuntimeError):
    """An object was used in a state that does not allow the call."""


class SamplingError(SuftError):
    pass


class TransitionRejectedError(SuftError, ValueError):
    pass


class BufferNotReadyError(SuftError):
    pass


class CheckpointParseError(SuftError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f'{message} (byte offset {offset})')
        self.offset = offset


class CheckpointVersionError(SuftError):
    pass


class ConfigError(SuftError, ValueError):
    def __init__(self, field_path, message):
        super().__init__(f'{field_path}: {message}' if field_path else message)
        self.field_path = field_path


class ProtocolError(SuftError):
    pass


class UndefinedResultError(SuftError, ArithmeticError):
    pass
