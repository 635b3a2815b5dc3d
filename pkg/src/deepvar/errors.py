"""Exception types. Each carries the process exit code the CLI maps it to."""


class DeepVarError(Exception):
    exit_code = 1


class ConfigError(DeepVarError):
    """Bad or unknown configuration values."""

    exit_code = 1


class DataError(DeepVarError):
    """Unreadable or malformed input data (corpora, vectors, checkpoints)."""

    exit_code = 2


class NumericError(DeepVarError):
    """Non-finite loss or gradient during training; ``report`` holds progress so far."""

    exit_code = 3

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
