"""Exception hierarchy shared by every edm module.

The CLI maps these onto exit codes: ``SchemaMismatch`` and
``ModelFormatError`` exit 3, everything else deriving from ``EDMError``
exits 1.
"""


class EDMError(Exception):
    """Base class for all domain errors raised by edm."""


class ParseError(EDMError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EmptyInput(EDMError):
    pass


class SchemaError(EDMError):
    pass


class SchemaMismatch(SchemaError):
    """Data does not line up with a model's schema."""

    def __init__(self, message, missing=(), unexpected=()):
        self.missing = tuple(missing)
        self.unexpected = tuple(unexpected)
        super().__init__(message)


class AttributeKindError(EDMError, TypeError):
    """An operation needing a nominal attribute got a numeric one (or vice versa)."""


class ArgumentError(EDMError, ValueError):
    pass


class MissingClassError(EDMError):
    pass


class MissingValueError(EDMError):
    pass


class FoldError(EDMError):
    pass


class DegenerateColumn(EDMError):
    pass


class DegenerateError(EDMError):
    pass


class RangeError(EDMError, ValueError):
    pass


class EmptyTrainingSet(EDMError):
    pass


class ModelFormatError(EDMError):
    pass


class SampleSizeError(EDMError):
    pass


class NoRuleError(EDMError, LookupError):
    pass
