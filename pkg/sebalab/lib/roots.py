"""Bracketed root finding shared by the secular and quasi-eigenvalue solvers.

Both equations have a simple pole at each end of every bracket and are
strictly increasing in between, so plain bisection always converges.
The bracket ends are pulled in from the poles by a margin proportional
to the gap length, and the search stops once the bracket is narrower
than ``ROOT_TOL`` relative to the size of the root.
"""
import typing

import numpy as np
from scipy import optimize

from .exceptions import BracketFailureError

#: Relative bracket margin at each pole, as a fraction of the gap.
BRACKET_MARGIN = 1e-9
#: Final bracket width relative to max(1, |root|).
ROOT_TOL = 1e-12
# smallest relative tolerance scipy's bisection accepts
_RTOL = 4 * np.finfo(float).eps


class Root(typing.NamedTuple):
    """A located root and the certificate of how well it is known."""
    value: float
    residual: float
    bracket_width: float
    iterations: int


def margin(lo: float, hi: float) -> float:
    """The distance to keep from a pole at either end of ``(lo, hi)``.

    Never less than a few units in the last place of the ends, so a
    narrow gap high in the spectrum does not put a bracket end back on
    its pole, and never more than a quarter of the gap.
    """
    width = hi - lo
    floor = 4 * float(np.spacing(max(abs(lo), abs(hi))))
    return min(max(BRACKET_MARGIN * width, floor), width / 4)


def find_root(func: typing.Callable[[float], float], lo: float, hi: float,
              index: typing.Optional[int] = None, tol: float = ROOT_TOL) -> Root:
    """Bisect an increasing function on ``[lo, hi]``.

    :param func: The function, which must be negative at ``lo`` and
        positive at ``hi``.
    :param lo: Left end of the bracket.
    :param hi: Right end of the bracket.
    :param index: The gap index reported if the bracket is bad.
    :param tol: Target bracket width relative to max(1, |root|).
    :raises BracketFailureError: If ``func`` does not go from negative
        to positive across the bracket.
    :return: The root with its residual and final bracket width.
    """
    f_lo = func(lo)
    f_hi = func(hi)
    if not (f_lo < 0 < f_hi):
        fmt = "No sign change on [{lo:.12g}, {hi:.12g}]: f = ({flo:.3g}, {fhi:.3g})"
        raise BracketFailureError(fmt.format(lo=lo, hi=hi, flo=f_lo, fhi=f_hi), index)
    scale = max(1.0, abs(lo), abs(hi))
    # scipy stops once the half-width is under xtol + rtol*|x|
    xtol = 0.5 * tol * scale - _RTOL * scale
    xtol = max(xtol, 4 * np.finfo(float).tiny)
    value, result = optimize.bisect(func, lo, hi, xtol=xtol, rtol=_RTOL, maxiter=400,
                                    full_output=True, disp=False)
    if not result.converged:
        raise BracketFailureError("Bisection did not converge on [{:.12g}, {:.12g}]"
                                  .format(lo, hi), index)
    width = min(hi - lo, 2 * (xtol + _RTOL * abs(value)))
    return Root(value=float(value), residual=abs(float(func(value))),
                bracket_width=width, iterations=result.iterations)


