"""
Description: Error hierarchy shared by every OrliczLab app.

The CLI maps InputError and its subclasses to exit status 1; everything else
that escapes a command is an internal failure.
"""


class OrliczLabError(Exception):
    """Base class of all errors raised by OrliczLab."""

    pass


class InputError(OrliczLabError, ValueError):
    """Exception raised when an argument is malformed, unknown or non-finite."""

    pass


class DomainError(InputError):
    """Exception raised when an argument lies outside the domain of an operation."""

    pass


class SingularityError(DomainError):
    """Exception raised when a quotient is requested on the diagonal x = y."""

    pass


class ResolutionError(InputError):
    """Exception raised when a length scale is not resolvable on the grid."""

    pass


class StencilError(InputError):
    """Exception raised when a difference stencil would leave the grid."""

    pass


class DegenerateFunctionError(InputError):
    """Exception raised when an Orlicz function vanishes at a positive argument."""

    pass


class NumericError(OrliczLabError, ArithmeticError):
    """
    Exception raised when a numerical procedure fails to converge.

    Args:
        message (str): Explanation of the failure.
        interval (tuple, optional): The bracket that was searched.
        last_iterate (optional): The last iterate of an iterative method.
    """

    def __init__(self, message, interval=None, last_iterate=None):
        super().__init__(message)
        self.interval = interval
        self.last_iterate = last_iterate


class IntegrabilityError(NumericError):
    """Exception raised when the inner integral of the spherical limit diverges."""

    pass


class LineSearchError(NumericError):
    """Exception raised when backtracking cannot satisfy the sufficient-decrease test."""

    pass


class PreconditionError(OrliczLabError):
    """Exception raised when an approximating sequence does not converge to its target."""

    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class ConsistencyError(OrliczLabError):
    """Exception raised when an internal invariant (e.g. energy decrease) is violated."""

    pass
