"""Exception hierarchy and warning categories.

Validation errors signal bad input (CLI exit code 1); numerical errors
signal a computation that could not be completed reliably (exit code 2).
"""


class ToeplitzSpectraError(Exception):
    pass


class ValidationError(ToeplitzSpectraError):
    """Input fails a structural requirement of the symbol class."""


class RootLocationError(ValidationError):
    """A root of B1 is not strictly inside, or of B2 not strictly outside,
    the unit circle (poles on the circle are rejected)."""


class CommonRootError(ValidationError):
    """A shares a root with B1*B2."""


class DegenerateError(ValidationError):
    """Degree bookkeeping gives p < 1 or q < 1, or malformed coefficients."""


class GcdError(ValidationError):
    """gcd of the nonzero Fourier indices exceeds 1 on the checked window."""


class AdmissibilityError(ValidationError):
    """A measure vector violates support or total-mass requirements."""


class NumericalError(ToeplitzSpectraError):
    pass


class InternalInconsistency(NumericalError):
    """A structural identity the theory guarantees failed numerically."""


class SingularDerivative(NumericalError):
    """Root derivative requested at a multiple root (branch point)."""


class DegenerateResultant(NumericalError):
    """The discriminant resultant vanishes identically."""


class ResolutionError(NumericalError):
    """Curve connectivity is ambiguous at the requested resolution."""


class ExceptionalProximity(NumericalError):
    """Density evaluation too close to an exceptional point."""


class NonPositiveDensity(NumericalError):
    """Computed density is negative beyond tolerance; indicates mislabeled
    root branches or an off-curve evaluation point."""


class CurveProximity(NumericalError):
    """Evaluation point is too close to the curve for a one-sided value."""


class CalibrationError(NumericalError):
    """Closed-form and quadrature log-potentials drifted apart."""


class IllConditionedInterpolation(NumericalError):
    """Determinant interpolation failed its fresh-point validation."""


class MultipleRootError(NumericalError):
    """Operation requires all roots distinct."""


class SpecialLambdaError(NumericalError):
    """Operation is undefined at the special values lambda1/lambda2."""


class NonTriangularFactor(InternalInconsistency):
    """Triangular factor in the banded reduction is not triangular."""


class SampleOnSingularity(NumericalError):
    """A sample point coincides with a potential-theoretic singularity."""


class ConditioningWarning(UserWarning):
    """Two root moduli are nearly tied; the returned ordering between the
    tied entries is arbitrary."""
