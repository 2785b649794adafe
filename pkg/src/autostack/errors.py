"""Exception hierarchy shared by every module.

The CLI maps :class:`DataError` to exit code 2 and :class:`BudgetError`
to exit code 3; anything else derived from :class:`AutoStackError` that
reaches the CLI is reported as a usage error (exit code 1).
"""


class AutoStackError(Exception):
    """Base class for errors raised by this package."""


class DataError(AutoStackError, ValueError):
    """Input data is missing, malformed, or unsuitable for the operation."""


class MissingFileError(DataError, FileNotFoundError):
    pass


class MissingColumnError(DataError):
    pass


class ResponseValueError(DataError):
    pass


class RaggedRowError(DataError):
    pass


class ColumnMismatchError(DataError):
    """A model was asked to predict on columns it was not trained on."""


class SchemaMismatchError(DataError):
    """A case-study file does not have the documented shape."""


class BudgetError(AutoStackError):
    """The search budget allowed no candidate to complete, or is malformed."""


class ConfigError(AutoStackError, ValueError):
    """Invalid configuration or argument value."""


class TrainingError(AutoStackError):
    """A model replica failed to train; carries the offending config."""

    def __init__(self, message, config=None):
        super().__init__(message)
        self.config = config
