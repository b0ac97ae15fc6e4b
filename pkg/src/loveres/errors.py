"""Exception hierarchy for the resonance engine."""


class LoveResError(Exception):
    """Base class for all engine errors."""


class DomainError(LoveResError):
    """Input violates a mathematical precondition (e.g. non-positive modulus)."""


class InvariantViolationError(LoveResError):
    """A structural invariant of a data object does not hold."""


class OverflowGuardError(LoveResError):
    """Requested evaluation would overflow double precision.

    Carries ``max_safe_im_k``, the largest |Im k| that can be evaluated for
    the given support radius.
    """

    def __init__(self, im_k, x_i, max_safe_im_k):
        self.max_safe_im_k = max_safe_im_k
        super().__init__(
            f"|Im k| = {abs(im_k):g} with x_I = {x_i:g} exceeds the double-precision "
            f"overflow guard; largest safe |Im k| is {max_safe_im_k:g}"
        )


class BoundaryDegeneracyError(LoveResError):
    """A zero sits on (or too close to) a counting-contour boundary and
    perturbation attempts were exhausted."""


class ClassViolationError(LoveResError):
    """Scattering data falls outside the admissible class (real zero of the
    Jost function, non-positive norming constant, broken sign ladder, ...)."""


class CalibrationError(LoveResError):
    """Hadamard-product prefactor calibration failed; carries the residual."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class DegenerateDataError(LoveResError):
    """Marchenko linear system is singular or numerically ill-conditioned."""


class InconsistencyError(LoveResError):
    """Two independent computations of the same quantity disagree beyond
    tolerance, signalling solver failure."""


class CompletenessError(LoveResError):
    """A zero set is not complete in the requested region."""


class SingularRecoveryError(LoveResError):
    """Shear recovery denominator vanished at some grid point."""

    def __init__(self, x, value):
        self.x = x
        self.value = value
        super().__init__(f"shear recovery denominator {value:g} vanishes near x = {x:g}")


class ConfigError(LoveResError):
    """Run configuration failed validation."""


class StageError(LoveResError):
    """Pipeline failure with stage attribution."""

    def __init__(self, stage, original):
        self.stage = stage
        self.original = original
        super().__init__(f"stage '{stage}': {original}")
