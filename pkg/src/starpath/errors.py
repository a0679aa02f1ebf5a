"""Exception and warning types raised across the package."""


class StarpathError(Exception):
    """Base class for numerical errors raised by starpath."""


class DimensionTooSmall(StarpathError, ValueError):
    pass


class TruncationTooCoarse(StarpathError, ValueError):
    """A coherent label carries too much weight beyond the Fock cutoff."""


class DivergentTransform(StarpathError, ValueError):
    """A quasi-probability transform whose integrand does not decay was requested."""


class InadmissibleTestFunction(StarpathError, ValueError):
    """A test function falls outside the polynomial x Gaussian class."""


class NonConvergence(StarpathError, ArithmeticError):
    """A series did not reach its tolerance within the allowed order."""


class NonConvergenceWarning(RuntimeWarning):
    pass
