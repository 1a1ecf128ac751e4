"""Quasimodes built from the levels in an interval.

For an interval ``I`` holding at least one level, a weight ``σ ∈ [0, 1]``
and a quasi-eigenvalue ``μ``, the quasimode is

    ψ = Σ_{E_j ∈ I} conj(Φ_j(p))/(E_j − μ)·φ_j
        + σ·Σ_{E_j ∉ I} (E_j − κ)·conj(Φ_j(p))/(1 + E_j²)·φ_j

and ``μ`` has to solve ``ζ_I(1, μ) = σ·Σ_{E_j ∈ I} (E_j − κ)·w_j/(1 + E_j²)``
so that ψ lies in the domain of the perturbed operator. Everything here
works on the coefficient sequence of ψ; it is never evaluated in space.

The discrepancy ``d`` with ``‖(H − μ)ψ‖ = d·‖ψ‖`` has a closed form,
computed by ``build_quasimode``, and ``residual_oracle`` recomputes it
from the residual vector term by term.
"""
import math
import typing

import numpy as np
from scipy import integrate

from . import roots
from .exceptions import (CoverageError, DomainError, MismatchError, NoRootError,
                         OutOfRangeError, ParameterError, PoleProximityError)
from .helpers import wrap_exceptions_with
from .logs import get_logger
from .secular import POLE_TOL, PerturbedEigenpair, ScattererConfig
from .spectrum import Spectrum

logger = get_logger(__name__)


class Interval:
    """A closed interval ``[lo, hi]`` and the levels it holds.

    :ivar member_indices: The 1-based indices of the levels inside,
        which are always consecutive.
    """
    __slots__ = 'lo', 'hi', 'member_indices'

    def __init__(self, lo: float, hi: float, member_indices: typing.Sequence[int]):
        self.lo = float(lo)
        self.hi = float(hi)
        self.member_indices = tuple(member_indices)

    def __repr__(self):
        return 'Interval({!r}, {!r}, {})'.format(self.lo, self.hi, self.member_indices)

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return (self.lo, self.hi, self.member_indices) == (other.lo, other.hi, other.member_indices)

    def __hash__(self):
        return hash((self.lo, self.hi, self.member_indices))

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def members(self) -> slice:
        """Slice of the spectrum arrays covering the members."""
        return slice(self.member_indices[0] - 1, self.member_indices[-1])

    def __contains__(self, energy: float) -> bool:
        return self.lo <= energy <= self.hi


def make_interval(spec: Spectrum, lo: float, hi: float) -> Interval:
    """The interval ``[lo, hi]`` with the levels of ``spec`` inside it.

    :raises ParameterError: If the interval is empty or holds no level.
    """
    if not lo < hi:
        raise ParameterError("Interval [{}, {}] is empty".format(lo, hi))
    first = int(np.searchsorted(spec.energies, lo, side='left'))
    last = int(np.searchsorted(spec.energies, hi, side='right'))
    if last <= first:
        raise ParameterError("Interval [{}, {}] holds no level".format(lo, hi))
    return Interval(lo, hi, range(first + 1, last + 1))


def zeta(spec: Spectrum, interval: Interval, s: float, lam: float) -> float:
    """``ζ_I(s, λ) = Σ_{E_j ∈ I} w_j/(E_j − λ)^s``.

    :raises PoleProximityError: For ``s > 0`` when λ is on a member level.
    :raises DomainError: For a fractional ``s`` when some member is below λ.
    """
    energies = spec.energies[interval.members]
    weights = spec.weights[interval.members]
    if s == 0:
        return float(weights.sum())
    diff = energies - lam
    if s > 0:
        nearest = int(np.argmin(np.abs(diff)))
        if abs(diff[nearest]) < POLE_TOL * max(1.0, abs(lam)):
            raise PoleProximityError("zeta({}, {}) on a pole".format(s, lam),
                                     interval.member_indices[nearest])
    if float(s) != int(s) and np.any(diff < 0):
        raise DomainError("Fractional power {} of a negative number".format(s),
                          interval.member_indices[int(np.argmax(diff < 0))])
    if float(s) == int(s):
        return float(np.sum(weights / diff ** int(s)))
    return float(np.sum(weights / diff ** s))


class TailSums(typing.NamedTuple):
    """The sums over the levels outside the interval.

    ``s_tail`` enters the norm of the quasimode; ``r_tail(μ)`` enters
    the numerator of its discrepancy.
    """
    s_tail: float
    r_tail: typing.Callable[[float], float]


def _outside(spec: Spectrum, interval: Interval,
             cutoff: float) -> typing.Tuple[np.ndarray, np.ndarray]:
    count = spec.count_below(cutoff)
    mask = np.ones(count, dtype=bool)
    members = interval.members
    mask[members.start:min(members.stop, count)] = False
    return spec.energies[:count][mask], spec.weights[:count][mask]


@wrap_exceptions_with(OutOfRangeError, 'Tail integral failed', target=(ValueError, ArithmeticError))
def _weyl_integral(integrand: typing.Callable[[float], float], cutoff: float) -> float:
    value, _ = integrate.quad(integrand, cutoff, np.inf, limit=200)
    return value


def tail_sums(spec: Spectrum, interval: Interval, cfg: ScattererConfig) -> TailSums:
    """Sum the tail terms over the truncated levels outside ``interval``.

    With the tail correction on, the levels above the cutoff are added
    as a Weyl-density integral.

    :raises OutOfRangeError: With the tail correction on, when the
        cutoff is below ``2·hi``.
    """
    cutoff = cfg.cutoff(spec)
    kappa = cfg.kappa
    if cfg.tail_correction and cutoff < 2 * interval.hi:
        raise OutOfRangeError("Cutoff {} is below twice the interval top {}".format(
            cutoff, interval.hi))
    energies, weights = _outside(spec, interval, cutoff)
    damping = weights / (1 + energies ** 2) ** 2
    s_tail = float(np.sum((energies - kappa) ** 2 * damping))
    density = spec.weyl_density
    if cfg.tail_correction:
        s_tail += density * _weyl_integral(lambda t: ((t - kappa) / (1 + t * t)) ** 2, cutoff)

    def r_tail(mu: float) -> float:
        total = float(np.sum((1 + energies * mu + kappa * (energies - mu)) ** 2 * damping))
        if cfg.tail_correction:
            total += density * _weyl_integral(
                lambda t: ((1 + t * mu + kappa * (t - mu)) / (1 + t * t)) ** 2, cutoff)
        return total

    return TailSums(s_tail, r_tail)


def quasi_rhs(spec: Spectrum, interval: Interval, sigma: float, kappa: float) -> float:
    """Right-hand side ``σ·Σ_{E_j ∈ I} (E_j − κ)·w_j/(1 + E_j²)`` of the μ-equation."""
    energies = spec.energies[interval.members]
    weights = spec.weights[interval.members]
    return sigma * float(np.sum((energies - kappa) * weights / (1 + energies ** 2)))


def solve_quasi_eigenvalues(spec: Spectrum, interval: Interval, sigma: float, cfg: ScattererConfig,
                            window: typing.Optional[typing.Tuple[float, float]] = None,
                            tol: float = roots.ROOT_TOL) -> typing.List[float]:
    """All quasi-eigenvalues for ``interval`` and ``sigma``.

    There is one in each gap between consecutive members, and one more
    outside the members when the right-hand side is not zero. With a
    ``window``, only gaps meeting it are solved (the outside root is
    always included).

    :raises NoRootError: When there is nothing to solve, e.g. σ = 0 with
        a single member.
    """
    if not 0 <= sigma <= 1:
        raise ParameterError("sigma must be in [0, 1], got {}".format(sigma))
    energies = spec.energies[interval.members]
    weights = spec.weights[interval.members]
    rhs = quasi_rhs(spec, interval, sigma, cfg.kappa)

    def equation(mu):
        return float(np.sum(weights / (energies - mu))) - rhs

    found = []
    for k in range(len(energies) - 1):
        left, right = float(energies[k]), float(energies[k + 1])
        if window is not None and (right <= window[0] or left >= window[1]):
            continue
        delta = roots.margin(left, right)
        found.append(roots.find_root(equation, left + delta, right - delta,
                                     interval.member_indices[k], tol).value)
    if rhs != 0:
        total = float(weights.sum())
        if rhs > 0:
            edge = float(energies[0])
            delta = roots.BRACKET_MARGIN * max(1.0, abs(edge))
            found.append(roots.find_root(equation, edge - 2 * total / rhs - 1, edge - delta, 0,
                                         tol).value)
        else:
            edge = float(energies[-1])
            delta = roots.BRACKET_MARGIN * max(1.0, abs(edge))
            found.append(roots.find_root(equation, edge + delta, edge - 2 * total / rhs + 1,
                                         interval.member_indices[-1], tol).value)
    if not found and window is None:
        raise NoRootError("No quasi-eigenvalue for {} with sigma={}".format(interval, sigma))
    return sorted(found)


class Quasimode:
    """A quasimode and its discrepancy.

    :ivar sigma: Weight of the tail vector.
    :ivar interval: The interval the quasimode lives on.
    :ivar mu: The quasi-eigenvalue.
    :ivar in_coeffs: ``conj(Φ_j(p))/(E_j − μ)`` for the members.
    :ivar tail_scale: The factor of the fixed tail vector, equal to σ.
    :ivar norm_sq: ``‖ψ‖² = ζ_I(2, μ) + σ²·S_tail``.
    :ivar discrepancy: ``d`` from the closed form.
    :ivar s_tail: The tail sum used in the norm.
    """
    __slots__ = ('sigma', 'interval', 'mu', 'in_coeffs', 'tail_scale', 'norm_sq',
                 'discrepancy', 's_tail', 'kappa', 'cutoff', 'spectrum')

    def __init__(self, sigma, interval, mu, in_coeffs, norm_sq, discrepancy, s_tail, kappa,
                 cutoff, spectrum):
        self.sigma = sigma
        self.interval = interval
        self.mu = mu
        self.in_coeffs = in_coeffs
        self.tail_scale = sigma
        self.norm_sq = norm_sq
        self.discrepancy = discrepancy
        self.s_tail = s_tail
        self.kappa = kappa
        self.cutoff = cutoff
        self.spectrum = spectrum

    def __repr__(self):
        return 'Quasimode(sigma={!r}, mu={!r}, d={!r})'.format(self.sigma, self.mu,
                                                               self.discrepancy)

    def coefficient_vector(self) -> np.ndarray:
        """All coefficients of ψ on the levels up to the cutoff."""
        spec = self.spectrum
        count = spec.count_below(self.cutoff)
        energies = spec.energies[:count]
        vector = self.sigma * (energies - self.kappa) * np.conj(spec.amplitudes[:count]) \
            / (1 + energies ** 2)
        members = self.interval.members
        vector[members] = self.in_coeffs[:max(0, min(members.stop, count) - members.start)]
        return vector


def build_quasimode(spec: Spectrum, interval: Interval, sigma: float, mu: float,
                    cfg: ScattererConfig) -> Quasimode:
    """Assemble the quasimode at ``mu`` and its closed-form discrepancy.

    ``d² = [(1 − σ)²·ζ_I(0, μ) + σ²·R_tail(μ)] / (ζ_I(2, μ) + σ²·S_tail)``.
    """
    zeta2 = zeta(spec, interval, 2, mu)
    energies = spec.energies[interval.members]
    in_coeffs = np.conj(spec.amplitudes[interval.members]) / (energies - mu)
    if sigma > 0:
        tails = tail_sums(spec, interval, cfg)
        s_tail, r_tail = tails.s_tail, tails.r_tail(mu)
    else:
        s_tail = r_tail = 0.0
    norm_sq = zeta2 + sigma ** 2 * s_tail
    numerator = (1 - sigma) ** 2 * zeta(spec, interval, 0, mu) + sigma ** 2 * r_tail
    return Quasimode(sigma, interval, float(mu), in_coeffs, norm_sq, math.sqrt(numerator / norm_sq),
                     s_tail, cfg.kappa, cfg.cutoff(spec), spec)


def residual_oracle(spec: Spectrum, qm: Quasimode, cfg: ScattererConfig) -> float:
    """``‖(H − μ)ψ‖²/‖ψ‖²`` summed term by term from the residual vector.

    Inside the interval the residual coefficients are ``(1 − σ)·conj(Φ_j(p))``
    and outside ``−σ(1 + E_jμ + κ(E_j − μ))·conj(Φ_j(p))/(1 + E_j²)``.
    Only truncated levels enter; no tail integral is added.
    """
    if qm.spectrum is not spec:
        raise MismatchError("The quasimode was built on another spectrum")
    count = spec.count_below(cfg.cutoff(spec))
    energies = spec.energies[:count]
    conj = np.conj(spec.amplitudes[:count])
    mu, sigma, kappa = qm.mu, qm.sigma, cfg.kappa
    residual = -sigma * (1 + energies * mu + kappa * (energies - mu)) * conj / (1 + energies ** 2)
    members = qm.interval.members
    residual[members] = (1 - sigma) * conj[members]
    return float(np.sum(np.abs(residual) ** 2)) / qm.norm_sq


def quasimode_inner_product(qm1: Quasimode, qm2: Quasimode) -> float:
    """``⟨ψ₁, ψ₂⟩ = Σ_{E_j ∈ I} w_j/((E_j − μ₁)(E_j − μ₂)) + σ²·S_tail``.

    :raises MismatchError: Unless both share the spectrum, σ and interval.
    """
    if qm1.spectrum is not qm2.spectrum or qm1.sigma != qm2.sigma or qm1.interval != qm2.interval:
        raise MismatchError("Inner products need quasimodes on the same interval and sigma")
    spec, members = qm1.spectrum, qm1.interval.members
    energies = spec.energies[members]
    value = np.sum(spec.weights[members] / ((energies - qm1.mu) * (energies - qm2.mu)))
    return float(value) + qm1.sigma ** 2 * qm1.s_tail


def overlap(qm: Quasimode, pair: PerturbedEigenpair) -> float:
    """``|⟨φ, ψ⟩|`` over the levels both are expanded on, not normalised."""
    if qm.spectrum is not pair.spectrum:
        raise MismatchError("Quasimode and eigenpair come from different spectra")
    psi = qm.coefficient_vector()
    count = min(len(psi), len(pair.coefficients))
    return float(abs(np.vdot(pair.coefficients[:count], psi[:count])))


def quasimode_window(qm: Quasimode) -> typing.Tuple[float, float]:
    """``[μ − d, μ + d]``, which always holds an eigenvalue."""
    return qm.mu - qm.discrepancy, qm.mu + qm.discrepancy


class ProjectionCheck(typing.NamedTuple):
    """The spectral projection bound and, if it applies, the approximation certificate.

    ``lhs`` is the mass of the normalised quasimode on eigenfunctions
    further than ``M`` from μ, and ``rhs`` is ``d²/M²``. When exactly
    one supplied eigenvalue is within ``M``, ``certificate`` is ``2d/M``,
    which bounds the distance of that eigenfunction to ψ up to a phase.
    """
    lhs: float
    rhs: float
    certificate: typing.Optional[float]
    nearby: typing.Optional[PerturbedEigenpair]

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-9) + 1e-12


def projection_bound_check(qm: Quasimode, pairs: typing.Sequence[PerturbedEigenpair],
                           M: float) -> ProjectionCheck:
    """Check ``Σ_{|λ_j − μ| > M} |⟨ψ, φ_j⟩|² ≤ (d/M)²·‖ψ‖²``, φ_j normalised.

    The eigenpairs must cover every gap meeting ``[μ − M, μ + M]``;
    the mass of eigenfunctions that were not supplied is counted on the
    left-hand side.

    :raises CoverageError: When a required gap has no eigenpair.
    """
    if not M > 0:
        raise ParameterError("M must be positive")
    spec = qm.spectrum
    energies = spec.energies[:spec.count_below(qm.cutoff)]
    supplied = {pair.gap_index for pair in pairs}
    for k in range(1, len(energies)):
        if energies[k - 1] < qm.mu + M and energies[k] > qm.mu - M and k not in supplied:
            raise CoverageError("No eigenpair for gap {} within {} of {}".format(k, M, qm.mu))
    psi_norm = qm.norm_sq
    captured = far = 0.0
    near = []
    for pair in pairs:
        mass = overlap(qm, pair) ** 2 / (pair.norm_sq * psi_norm)
        captured += mass
        if abs(pair.lam - qm.mu) > M:
            far += mass
        else:
            near.append(pair)
    lhs = far + max(0.0, 1.0 - captured)
    rhs = qm.discrepancy ** 2 / M ** 2
    if len(near) == 1:
        return ProjectionCheck(lhs, rhs, 2 * qm.discrepancy / M, near[0])
    return ProjectionCheck(lhs, rhs, None, None)


def phase_distance(qm: Quasimode, pair: PerturbedEigenpair) -> float:
    """``min_χ ‖φ̂ − e^{iχ}ψ̂‖`` for the normalised functions."""
    cosine = overlap(qm, pair) / math.sqrt(qm.norm_sq * pair.norm_sq)
    return math.sqrt(max(0.0, 2 - 2 * min(1.0, cosine)))
