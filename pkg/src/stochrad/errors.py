"""Exception and warning types raised across the package."""


class InvalidParameterError(ValueError):
    """A physical parameter or option is outside its admissible range."""


class PointwiseEvaluationError(TypeError):
    """The correlator has no pointwise value (white noise is a delta)."""


class OutOfRangeError(ValueError):
    """A tabulated quantity was queried outside its grid."""


class OverflowGuardError(OverflowError):
    """An exponential factor would overflow double precision."""


class ResonanceError(ValueError):
    """A closed form was evaluated on its resonance singularity."""


class InvalidContourError(ValueError):
    """A Bromwich contour does not separate the poles as required."""


class ToleranceNotMetError(RuntimeError):
    """An iterative or extrapolated estimate failed to converge.

    The best estimate reached is kept in ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class StatisticalValidityError(ValueError):
    """A Monte-Carlo configuration cannot resolve the requested spectrum."""


class IntegratorError(RuntimeError):
    """Trajectory integration produced non-finite or unbounded output."""


class NearResonanceWarning(RuntimeWarning):
    """An external pole nearly coincides with a root of H(z)."""
