class DivgenError(Exception):
    """Base class for all errors raised by divgen."""


class PreconditionError(DivgenError, ValueError):
    """An operation was called with arguments violating its contract."""


class ConfigError(DivgenError, ValueError):
    """Invalid search configuration, generator parameters or model/config pairing."""


class ModelParseError(ConfigError):
    """A model file is malformed."""

    def __init__(self, field: str, message: str):
        super().__init__(f'{field}: {message}')
        self.field = field


class DomainError(DivgenError, ValueError):
    """A statistic was requested outside of its mathematical domain."""


class InputError(DivgenError):
    """Command-line input that cannot be processed (missing or inconsistent artifacts)."""
