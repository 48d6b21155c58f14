"""Exception types shared across the toolkit."""


class TsflowError(Exception):
    """Base class for all toolkit errors."""

    code = "Error"

    def __init__(self, message=""):
        super().__init__(message)
        self.message = message


class UnknownTerm(TsflowError):
    code = "UnknownTerm"


class StructureError(TsflowError):
    """Malformed document structure (bad @-keyword usage, missing @id/@type)."""

    code = "StructureError"

    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class IoError(TsflowError):
    code = "IoError"


class HeaderMismatch(TsflowError):
    code = "HeaderMismatch"

    def __init__(self, expected, found):
        super().__init__(f"expected header {expected}, found {found}")
        self.expected = expected
        self.found = found


class EmptySeries(TsflowError):
    code = "EmptySeries"


class AllMissing(TsflowError):
    code = "AllMissing"


class MissingValues(TsflowError):
    code = "MissingValues"


class DegenerateSeries(TsflowError):
    code = "DegenerateSeries"


class WindowTooLarge(TsflowError):
    code = "WindowTooLarge"


class SeriesTooShort(TsflowError):
    code = "SeriesTooShort"


class NonPositiveValue(TsflowError):
    code = "NonPositiveValue"


class LagTooLarge(TsflowError):
    code = "LagTooLarge"


class SingularRegression(TsflowError):
    code = "SingularRegression"


class SingularSystem(TsflowError):
    code = "SingularSystem"


class UnconvergedModel(TsflowError):
    code = "UnconvergedModel"


class LengthMismatch(TsflowError):
    code = "LengthMismatch"


class ZeroActual(TsflowError):
    code = "ZeroActual"


class MissingTraining(TsflowError):
    code = "MissingTraining"


class ZeroDenominator(TsflowError):
    code = "ZeroDenominator"


class BandTooNarrow(TsflowError):
    code = "BandTooNarrow"


class NonBinaryLabels(TsflowError):
    code = "NonBinaryLabels"


class TypeMismatch(TsflowError):
    code = "TypeMismatch"


class UnsupportedOperation(TsflowError):
    code = "UnsupportedOperation"


class UnsupportedSource(TsflowError):
    code = "UnsupportedSource"


class InputError(TsflowError):
    code = "InputError"


class NoSuchMetric(TsflowError):
    code = "NoSuchMetric"


class NotFound(TsflowError):
    code = "NotFound"


class Conflict(TsflowError):
    code = "Conflict"


class StorageError(TsflowError):
    code = "StorageError"
