"""Exception types shared across the package."""


class BincoError(Exception):
    """Base class for all package errors."""


class NonFiniteInput(BincoError):
    def __init__(self, row, col):
        self.row = row
        self.col = col
        super().__init__(f"non-finite entry at row {row}, column {col}")


class ZeroVarianceColumn(BincoError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"column {index} has zero variance")


class DimensionMismatch(BincoError):
    pass


class InvalidPerturbationFloor(BincoError):
    pass


class IndexOutOfRange(BincoError):
    pass


class QuadratureFailure(BincoError):
    pass


class EmptyFitRange(BincoError):
    pass


class OptimizerFailure(BincoError):
    pass


class EmptyTail(BincoError):
    pass


class InconsistentTables(BincoError):
    pass


class ThresholdTooLow(BincoError):
    pass


class EmptySelection(BincoError):
    pass


class UngraphicalDegreeSequence(BincoError):
    pass


class BadParams(BincoError):
    pass


class CalibrationFailure(BincoError):
    pass


class LostEdge(BincoError):
    pass


class FactorizationFailure(BincoError):
    pass


class DegenerateDensity(BincoError):
    pass


class ConfigError(BincoError):
    """Invalid run configuration (CLI exit code 2)."""
