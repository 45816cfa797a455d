"""Exception hierarchy.

Validation problems (bad input files, unknown stations, impossible
arguments) map to CLI exit code 1; numerical failures map to exit code 2.
"""


class BrmdsError(Exception):
    exit_code = 1


class ValidationError(BrmdsError, ValueError):
    exit_code = 1


class NumericalError(BrmdsError, ArithmeticError):
    exit_code = 2


class OutOfRange(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


class MissingDimension(ValidationError):
    pass


class InsufficientStations(ValidationError):
    pass


class UnknownStation(ValidationError):
    pass


class ZeroDissimilarity(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class SchemaMismatch(ValidationError):
    def __init__(self, message, missing=(), extra=()):
        self.missing = list(missing)
        self.extra = list(extra)
        super().__init__(message)


class MissingData(ValidationError):
    def __init__(self, message, station=None, year=None):
        self.station = station
        self.year = year
        super().__init__(message)


class NonConvergence(NumericalError):
    pass


class DegenerateSample(NumericalError):
    pass


class DegenerateDependence(NumericalError):
    pass


class NonFiniteGradient(NumericalError):
    pass


class SingularCovariance(NumericalError):
    pass
