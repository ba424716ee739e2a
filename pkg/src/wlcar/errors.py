"""Exception hierarchy shared by every module."""


class WlcarError(Exception):
    """Base class for all errors raised by this package."""

    module = "wlcar"


class InvalidParameterError(WlcarError, ValueError):
    """Parameter values outside the admissible region."""

    module = "model"


class NonStationaryError(InvalidParameterError):
    """Parameters describe a nonstationary process."""


class SingularCovarianceError(WlcarError, ValueError):
    """A complex-normal covariance is (numerically) rank deficient."""

    module = "complex_normal"


class NumericalError(WlcarError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy answer."""

    module = "numerics"


class DataError(WlcarError, ValueError):
    """Malformed or unusable input data."""

    module = "io"
