"""Exception hierarchy shared by all modules.

Errors fall in two families that the harness maps to exit codes:
hypothesis violations (exit 2) and numerical-stability failures (exit 3).
"""


class SurfFrameError(Exception):
    """Base class for every error raised by this package."""


class HypothesisViolation(SurfFrameError):
    """Input geometry breaks a structural assumption of the frame construction."""


class NumericalError(SurfFrameError):
    """A numerical procedure could not reach a trustworthy answer."""


class InvalidInput(SurfFrameError, ValueError):
    """Malformed or out-of-range input."""


class ConfigInvalid(InvalidInput):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = {"config": errors}
        self.errors = dict(errors)
        msg = "; ".join(f"{k}: {v}" for k, v in self.errors.items())
        super().__init__(msg)


class DegenerateFacet(InvalidInput):
    pass


class EmptyCap(SurfFrameError):
    pass


class ResolutionTooLow(InvalidInput):
    pass


class UnsupportedDimension(InvalidInput):
    pass


class TooCloseToOrigin(InvalidInput):
    pass


class DeltaOutOfRange(InvalidInput):
    pass


class AliasRisk(UserWarning):
    """Quadrature nodes are too coarse for the requested frequencies."""


class IllConditionedTestGram(NumericalError):
    pass


class DirectionSearchFailed(NumericalError):
    pass


class SeparationStall(NumericalError):
    pass


class PhaseDegenerate(NumericalError):
    pass


class QuadratureUnstable(NumericalError):
    pass


class NotIdempotent(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass
