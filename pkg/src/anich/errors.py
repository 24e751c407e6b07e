"""Exception types raised by the solvers and the run pipeline."""


class AnichError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(AnichError):
    """Bad or inconsistent run configuration (CLI exit code 2)."""


class GridMismatchError(AnichError):
    """Two fields on different grids were combined."""


class NonPositiveRadicand(AnichError):
    """A SAV energy radicand came out non-positive; the constant C is too small."""


class DenominatorDegenerate(AnichError):
    """The rank-one solve denominator left its guaranteed range (>= 1)."""


class NewtonDiverged(AnichError):
    """The scalar Newton solve for the relaxation factor found no root."""


class RatioViolation(AnichError):
    """An adjacent step ratio exceeded the admissible maximum."""


class NumericalBlowup(AnichError):
    """The solution left the finite range (NaN/Inf or sup-norm above threshold)."""

    def __init__(self, message, t=None, step_index=None):
        super().__init__(message)
        self.t = t
        self.step_index = step_index
