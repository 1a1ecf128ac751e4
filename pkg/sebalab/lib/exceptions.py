"""Exceptions to cover error cases that may be encountered in this package.

A base class for all of them is ``SebaError``, which means that any
exception ever raised by this package can be caught by catching
``SebaError``.

A ``ParameterError`` is raised when the inputs to an operation are
invalid before any computation starts: a scatterer on the boundary, a
coupling angle at zero, an evaluation energy beyond the spectrum cutoff.
``InputTypeError`` is the special case of passing the wrong type of
object into one of the entry points.

A ``NumericalError`` happens when something goes wrong during the
computation itself: a requested point sits on a pole of a series, a
bisection bracket does not change sign, an equation has no root. These
errors carry the index of the offending level or gap where one exists,
so that a failure deep inside a sweep can be traced back.
"""
import typing


class SebaError(Exception):
    """A simple base class for all exceptions raised by this module."""
    pass


class ParameterError(SebaError, ValueError):
    """The parameters of an operation cannot be used."""
    pass


class InputTypeError(ParameterError, TypeError):
    """You passed the wrong thing into the entry point function."""
    pass


class OutOfRangeError(ParameterError):
    """A requested energy lies outside the range the spectrum covers."""
    pass


class SingularCouplingError(ParameterError):
    """The coupling angle is too close to the unperturbed operator."""
    pass


class CoverageError(ParameterError):
    """A grid or a set of eigenpairs does not cover the requested region."""
    pass


class MismatchError(ParameterError):
    """Two objects that must share an interval or spectrum do not."""
    pass


class ResourceError(ParameterError):
    """A simulation would exceed the configured size budget."""
    pass


class NumericalError(SebaError, ArithmeticError):
    """A computation failed numerically.

    :ivar index: The spectrum level or gap index at which the failure
        was detected, if there is one.
    """

    def __init__(self, msg: str, index: typing.Optional[int] = None):
        super().__init__(msg)
        self.msg = msg
        self.index = index

    def __str__(self):
        if self.index is None:
            return self.msg
        return '{msg} (at index {index})'.format(msg=self.msg, index=self.index)

    def __repr__(self):
        return '{}({!r}, {!r})'.format(type(self).__name__, self.msg, self.index)


class EmptySpectrumError(NumericalError):
    """No level of the requested spectrum falls below the cutoff."""
    pass


class PoleProximityError(NumericalError):
    """The evaluation point is too close to an unperturbed level."""
    pass


class BracketFailureError(NumericalError):
    """A function does not change sign on a gap that must hold a root."""
    pass


class NoRootError(NumericalError):
    """The equation has no solution for the given inputs."""
    pass


class DomainError(NumericalError):
    """A fractional power of a negative number was requested."""
    pass


class QuadrupleNotFoundError(NumericalError):
    """No gap quadruple satisfying the spacing conditions exists."""
    pass


class AssumptionError(NumericalError):
    """A spectrum fails a hypothesis that an experiment relies on."""
    pass
