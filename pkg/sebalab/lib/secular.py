"""The secular equation of the point scatterer and its roots.

For a coupling angle Θ the perturbed eigenvalues are the roots of

    F(λ) = Σ_j (1/(E_j − λ) − E_j/(1 + E_j²))·w_j − κ·Σ_j w_j/(1 + E_j²) + tail(λ)

with ``κ = sinΘ/(1 − cosΘ)``. The sums run over the levels up to the
cutoff; ``tail`` replaces the levels above it by the Weyl density of
the spectrum. ``F`` is strictly increasing between consecutive levels
and runs from −∞ to +∞ across each gap, so every gap holds exactly one
root, which bisection finds unconditionally.
"""
import concurrent.futures
import math
import typing

import numpy as np

from . import roots
from .exceptions import (BracketFailureError, OutOfRangeError, ParameterError,
                         PoleProximityError, SingularCouplingError)
from .helpers import check_simple_types
from .logs import get_logger
from .spectrum import Spectrum

logger = get_logger(__name__)

#: Evaluation points closer than this (relative) to a level are refused.
POLE_TOL = 1e-12
#: Gaps narrower than this are skipped by the solver.
MIN_GAP = 1e-10
#: The tail correction is valid up to this distance below the cutoff.
CUTOFF_MARGIN = 1.0


@check_simple_types
def kappa_of_theta(theta: float) -> float:
    """The coupling constant ``sinΘ/(1 − cosΘ)``.

    :raises SingularCouplingError: When Θ is too close to 0 or 2π, where
        the scatterer disappears.
    """
    if abs(1 - math.cos(theta)) < 1e-12:
        raise SingularCouplingError("Coupling angle {} is the unperturbed operator".format(theta))
    if theta == math.pi:
        return 0.0
    return math.sin(theta) / (1 - math.cos(theta))


class ScattererConfig:
    """The coupling and the truncation used to evaluate the series.

    :ivar theta: The coupling angle in (0, 2π).
    :ivar kappa: ``sinΘ/(1 − cosΘ)``.
    :ivar e_cutoff: The truncation energy. ``None`` means the cutoff of
        whichever spectrum the configuration is applied to.
    :ivar tail_correction: Whether to add the Weyl-density integral for
        the levels above the cutoff.
    """
    __slots__ = 'theta', 'kappa', 'e_cutoff', 'tail_correction'

    def __init__(self, theta: float = math.pi, e_cutoff: typing.Optional[float] = None,
                 tail_correction: bool = True):
        if not 0 < theta <= 2 * math.pi:
            raise ParameterError("Coupling angle must be in (0, 2pi], got {}".format(theta))
        self.theta = float(theta)
        self.kappa = kappa_of_theta(self.theta)
        self.e_cutoff = None if e_cutoff is None else float(e_cutoff)
        self.tail_correction = bool(tail_correction)

    def __repr__(self):
        return 'ScattererConfig(theta={!r}, e_cutoff={!r}, tail_correction={!r})'.format(
            self.theta, self.e_cutoff, self.tail_correction)

    def cutoff(self, spec: Spectrum) -> float:
        """The truncation energy for ``spec``."""
        if self.e_cutoff is None:
            return spec.e_max
        if self.e_cutoff > spec.e_max:
            raise OutOfRangeError("Cutoff {} is above the spectrum cutoff {}".format(
                self.e_cutoff, spec.e_max))
        return self.e_cutoff

    def limit(self, spec: Spectrum) -> float:
        """The largest energy at which the series may be evaluated."""
        if self.tail_correction:
            return self.cutoff(spec) - CUTOFF_MARGIN
        return math.inf


class SecularFunction:
    """``F(λ)`` for one spectrum and configuration, ready to be called many times.

    Calling the object evaluates without any checks; ``value`` is the
    checked public entry point. Both accept arrays of λ.
    """

    def __init__(self, spec: Spectrum, cfg: ScattererConfig):
        self.spec = spec
        self.cfg = cfg
        self.cutoff = cfg.cutoff(spec)
        count = spec.count_below(self.cutoff)
        self.energies = spec.energies[:count]
        self.weights = spec.weights[:count]
        damping = self.weights / (1 + self.energies ** 2)
        self.constant = float(np.sum(damping * self.energies) + cfg.kappa * np.sum(damping))
        self.density = spec.weyl_density

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        value = np.sum(self.weights / (self.energies - lam[..., None]), axis=-1) - self.constant
        if self.cfg.tail_correction:
            value = value + self.tail(lam)
        if value.ndim == 0:
            return float(value)
        return value

    def tail(self, lam):
        c = self.cutoff
        return self.density * (-np.log((c - lam) / math.sqrt(1 + c * c))
                               - self.cfg.kappa * (math.pi / 2 - math.atan(c)))

    def check(self, lam: float) -> None:
        """Refuse points beyond the cutoff margin or on top of a level."""
        if lam >= self.cfg.limit(self.spec):
            raise OutOfRangeError("Cannot evaluate at {} within {} of the cutoff {}".format(
                lam, CUTOFF_MARGIN, self.cutoff))
        check_pole(self.energies, lam)

    def value(self, lam: float) -> float:
        self.check(lam)
        return self(lam)


def check_pole(energies: np.ndarray, lam: float) -> None:
    """Raise ``PoleProximityError`` if ``lam`` sits on one of ``energies``."""
    if not len(energies):
        return
    distance = np.abs(energies - lam)
    nearest = int(np.argmin(distance))
    if distance[nearest] < POLE_TOL * max(1.0, abs(lam)):
        raise PoleProximityError("Evaluation point {} is on the level {}".format(
            lam, energies[nearest]), nearest + 1)


def secular_value(spec: Spectrum, cfg: ScattererConfig, lam: float) -> float:
    """Evaluate the secular function at one point.

    :raises OutOfRangeError: When ``lam`` is too close to the cutoff for
        the tail correction to hold.
    :raises PoleProximityError: When ``lam`` is on a level.
    """
    return SecularFunction(spec, cfg).value(lam)


class PerturbedEigenpair:
    """An eigenvalue of the perturbed operator and its eigenfunction.

    The eigenfunction is ``Σ_j c_j φ_j`` with ``c_j = conj(Φ_j(p))/(E_j − λ)``
    over the truncated levels.
    """
    __slots__ = ('lam', 'gap_index', 'coefficients', 'norm_sq', 'spectrum',
                 'residual', 'bracket_width')

    def __init__(self, lam: float, gap_index: int, coefficients: np.ndarray, norm_sq: float,
                 spectrum: Spectrum, residual: typing.Optional[float] = None,
                 bracket_width: typing.Optional[float] = None):
        self.lam = lam
        self.gap_index = gap_index
        self.coefficients = coefficients
        self.norm_sq = norm_sq
        self.spectrum = spectrum
        self.residual = residual
        self.bracket_width = bracket_width

    def __repr__(self):
        return 'PerturbedEigenpair(lam={!r}, gap_index={})'.format(self.lam, self.gap_index)


def eigenpair_coefficients(spec: Spectrum, lam: float,
                           cfg: typing.Optional[ScattererConfig] = None) -> PerturbedEigenpair:
    """The coefficient sequence of the eigenfunction at ``lam``.

    The norm includes ``ρ/(e_cutoff − λ)`` for the levels above the
    cutoff unless ``cfg`` turns the tail correction off. Without a
    configuration the whole spectrum is used with the tail estimate.
    """
    cutoff = spec.e_max if cfg is None else cfg.cutoff(spec)
    tail = cfg is None or cfg.tail_correction
    count = spec.count_below(cutoff)
    energies = spec.energies[:count]
    check_pole(energies, lam)
    coefficients = np.conj(spec.amplitudes[:count]) / (energies - lam)
    norm_sq = float(np.sum(np.abs(coefficients) ** 2))
    if tail:
        if lam >= cutoff:
            raise OutOfRangeError("No tail estimate for {} above the cutoff {}".format(lam, cutoff))
        norm_sq += spec.weyl_density / (cutoff - lam)
    gap_index = int(np.searchsorted(energies, lam))
    return PerturbedEigenpair(float(lam), gap_index, coefficients, norm_sq, spec)


class Solution:
    """The eigenpairs found in a window, in ascending order.

    Iterating over it gives the eigenpairs. ``skipped`` lists the gap
    indices that were too narrow to resolve.
    """
    __slots__ = 'pairs', 'skipped'

    def __init__(self, pairs: typing.List[PerturbedEigenpair], skipped: typing.List[int]):
        self.pairs = pairs
        self.skipped = skipped

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, item):
        return self.pairs[item]

    def eigenvalues(self) -> np.ndarray:
        return np.array([pair.lam for pair in self.pairs])


def solve_all_eigenvalues(spec: Spectrum, cfg: ScattererConfig,
                          window: typing.Tuple[float, float], threads: int = 1,
                          tol: float = roots.ROOT_TOL) -> Solution:
    """Find the perturbed eigenvalue in every gap inside ``window``.

    A gap ``(E_j, E_{j+1})`` is solved when both of its levels lie in
    the window. If the window reaches below the ground level, the
    region below it is searched too; a root there is only reported when
    ``F`` changes sign.

    :param window: ``(lo, hi)`` with ``hi`` below the cutoff margin when
        the tail correction is on.
    :param threads: Gaps are solved on this many threads. The result
        does not depend on it.
    :param tol: Final bracket width relative to max(1, |λ|).
    :raises BracketFailureError: When a gap holds no sign change.
    """
    lo, hi = window
    if not lo < hi:
        raise ParameterError("Empty window ({}, {})".format(lo, hi))
    func = SecularFunction(spec, cfg)
    if hi > cfg.limit(spec):
        raise OutOfRangeError("Window top {} is within {} of the cutoff {}".format(
            hi, CUTOFF_MARGIN, func.cutoff))
    energies = func.energies
    first = int(np.searchsorted(energies, lo, side='left'))
    last = int(np.searchsorted(energies, hi, side='right'))
    brackets = []  # type: typing.List[typing.Tuple[int, float, float]]
    skipped = []
    for k in range(first, last - 1):
        left, right = float(energies[k]), float(energies[k + 1])
        if right - left < MIN_GAP:
            logger.warning("Skipping gap %d of width %.3g", k + 1, right - left)
            skipped.append(k + 1)
            continue
        delta = roots.margin(left, right)
        brackets.append((k + 1, left + delta, right - delta))

    def solve(bracket):
        index, left, right = bracket
        return index, roots.find_root(func, left, right, index, tol)

    if threads > 1 and len(brackets) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            found = list(executor.map(solve, brackets))
    else:
        found = [solve(bracket) for bracket in brackets]
    below = _root_below_ground(func, lo, hi, tol)
    if below is not None:
        found.insert(0, (0, below))
    pairs = []
    for index, root in found:
        pair = eigenpair_coefficients(spec, root.value, cfg)
        pair.gap_index = index
        pair.residual = root.residual
        pair.bracket_width = root.bracket_width
        pairs.append(pair)
    pairs.sort(key=lambda pair: pair.lam)
    logger.debug("Solved %d gaps in [%s, %s]", len(pairs), lo, hi)
    return Solution(pairs, skipped)


def _root_below_ground(func: SecularFunction, lo: float, hi: float,
                       tol: float) -> typing.Optional[roots.Root]:
    if not len(func.energies) or lo >= func.energies[0]:
        return None
    ground = float(func.energies[0])
    right = min(hi, ground - roots.margin(lo, ground))
    if right <= lo:
        return None
    if not func(lo) < 0 < func(right):
        return None
    try:
        return roots.find_root(func, lo, right, 0, tol)
    except BracketFailureError:
        return None
