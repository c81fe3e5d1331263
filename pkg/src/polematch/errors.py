"""Exception hierarchy shared by all modules."""


class PoleMatchError(Exception):
    """Base class for every error raised by :mod:`polematch`."""


class NonSimpleEigenvalue(PoleMatchError):
    pass


class DefectiveMatrix(PoleMatchError):
    pass


class PoleEvaluation(PoleMatchError, ZeroDivisionError):
    pass


class SingularSystem(PoleMatchError):
    pass


class LengthMismatch(PoleMatchError, ValueError):
    pass


class ShapeMismatch(PoleMatchError, ValueError):
    pass


class SizeMismatch(PoleMatchError, ValueError):
    """Two ROMs do not have the same numbers of complex pairs and real poles."""


class TooLarge(PoleMatchError, ValueError):
    pass


class ZeroNorm(PoleMatchError, ValueError):
    pass


class EmptyRepository(PoleMatchError):
    pass


class OutOfDomain(PoleMatchError, ValueError):
    pass


class Underdetermined(PoleMatchError, ValueError):
    pass


class IllConditioned(PoleMatchError):
    pass


class TooManyPoles(PoleMatchError, ValueError):
    pass


class OracleFailure(PoleMatchError):
    pass


class PoleOnGrid(PoleMatchError):
    pass


class RefineDepthExceeded(PoleMatchError):
    """Refinement hit the minimum interval width without meeting the tolerance.

    Attributes
    ----------
    interval : tuple of float
        The ``(p_left, p_right)`` interval that kept failing.
    error : float
        Last midpoint error measured on that interval.
    """

    def __init__(self, interval, error):
        self.interval = (float(interval[0]), float(interval[1]))
        self.error = float(error)
        super().__init__(
            f"refinement depth exceeded on [{self.interval[0]!r}, {self.interval[1]!r}] "
            f"(midpoint error {self.error:.3e})"
        )
