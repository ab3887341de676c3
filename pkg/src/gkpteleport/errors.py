"""Exception types shared across the package."""


class GkpTeleportError(Exception):
    """Base class for all package errors."""


class ValidationError(GkpTeleportError, ValueError):
    """Invalid argument or configuration rejected before any computation."""


class NumericalError(GkpTeleportError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class NonconvergentParameters(ValidationError):
    """Lattice parameter outside the upper half plane; the theta series diverges."""


class ToleranceUnreachable(NumericalError):
    """Series truncation would exceed the configured term cap."""


class InvalidWindow(ValidationError):
    """A summation window smaller than one term was requested."""


class SingularRotation(NumericalError):
    """The requested route hits a trigonometric pole for these protocol parameters."""

    def __init__(self, route: str, message: str):
        super().__init__(message)
        self.route = route


class TailNotConverged(NumericalError):
    """The lattice-sum window is too small for the requested tail bound."""


class DegenerateState(NumericalError):
    """Both output coefficients vanish; no Bloch direction is defined."""


class NotCoprime(ValidationError):
    """Integer pair with a common factor where coprimality is required."""


class EvenModulus(ValidationError):
    """Jacobi symbol requested for an even modulus."""


class AllWeightsZero(NumericalError):
    """Every grid weight underflowed; the parameter set is pathological."""


class EmptyInterval(ValidationError):
    """A search interval with no interior."""


class NoPeaksFound(NumericalError):
    """No density peak could be extracted from any scanned sample."""
