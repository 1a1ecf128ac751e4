"""Gap quadruples and the localisation of eigenfunctions on close pairs.

A gap quadruple is four consecutive levels ``E_a < E_b < E_c < E_d``
where the middle gap is smaller than ε, both outer gaps are larger
than ε^q, and ``E_d`` is below the ceiling ε^{−ρ}. On such a quadruple
the two-level quasimode on ``[E_b, E_c]`` has a small discrepancy
compared with the outer gaps, so some eigenfunction of the perturbed
operator must sit close to it. As ε shrinks the eigenfunction between
``E_b`` and ``E_c`` converges to the quasimode.
"""
import concurrent.futures
import math
import typing

import numpy as np

from .exceptions import (AssumptionError, NumericalError, ParameterError,
                         QuadrupleNotFoundError)
from .logs import get_logger
from .quasimode import Quasimode, build_quasimode, make_interval, overlap, solve_quasi_eigenvalues
from .secular import PerturbedEigenpair, ScattererConfig, solve_all_eigenvalues
from .spectrum import Spectrum

logger = get_logger(__name__)

_CONDITIONS = ('small_middle', 'wide_upper', 'wide_lower', 'below_ceiling')

#: Default lower bound on the amplitude modulus for the weight audit.
DEFAULT_C0 = 0.05


def check_exponents(q: float, rho: float) -> None:
    """Raise ``ParameterError`` unless ``0 < q < ½`` and ``1 < ρ < 2(1 − q)``."""
    if not 0 < q < 0.5:
        raise ParameterError("q must be in (0, 1/2), got {}".format(q))
    if not 1 < rho < 2 * (1 - q):
        raise ParameterError("rho must be in (1, {}), got {}".format(2 * (1 - q), rho))


class GapQuadruple:
    """Four consecutive levels and which spacing conditions they meet.

    :ivar indices: The 1-based indices ``(a, b, c, d)``.
    :ivar energies: ``(E_a, E_b, E_c, E_d)``.
    """
    __slots__ = ('indices', 'energies', 'eps', 'q', 'rho', 'small_middle', 'wide_upper',
                 'wide_lower', 'below_ceiling')

    def __init__(self, indices: typing.Tuple[int, int, int, int],
                 energies: typing.Tuple[float, float, float, float],
                 eps: float, q: float, rho: float):
        self.indices = tuple(indices)
        self.energies = tuple(float(e) for e in energies)
        self.eps, self.q, self.rho = eps, q, rho
        self.small_middle, self.wide_upper, self.wide_lower, self.below_ceiling = self.conditions()

    def __repr__(self):
        return 'GapQuadruple({}, eps={!r}, satisfied={})'.format(self.indices, self.eps,
                                                                 self.satisfied)

    def conditions(self) -> typing.Tuple[bool, bool, bool, bool]:
        """Evaluate the four conditions from the energies."""
        e_a, e_b, e_c, e_d = self.energies
        wide = self.eps ** self.q
        return (e_c - e_b < self.eps, e_d - e_c > wide, e_b - e_a > wide,
                e_d < self.eps ** -self.rho)

    @property
    def satisfied(self) -> bool:
        return self.small_middle and self.wide_upper and self.wide_lower and self.below_ceiling

    def margins(self) -> typing.Tuple[float, float, float, float]:
        """How far each condition is from failing; all positive when satisfied."""
        e_a, e_b, e_c, e_d = self.energies
        wide = self.eps ** self.q
        return (self.eps - (e_c - e_b), (e_d - e_c) - wide, (e_b - e_a) - wide,
                self.eps ** -self.rho - e_d)

    @property
    def middle_gap(self) -> float:
        return self.energies[2] - self.energies[1]

    @property
    def outer_gap(self) -> float:
        return min(self.energies[3] - self.energies[2], self.energies[1] - self.energies[0])


def quadruple_at(spec: Spectrum, a: int, eps: float, q: float, rho: float) -> GapQuadruple:
    """The quadruple whose lowest level has 1-based index ``a``."""
    if not 1 <= a <= len(spec) - 3:
        raise ParameterError("No four levels start at index {}".format(a))
    return GapQuadruple(tuple(range(a, a + 4)), tuple(spec.energies[a - 1:a + 3]), eps, q, rho)


class QuadrupleScan:
    """The satisfied quadruples of a spectrum, lowest first.

    It acts like the list of satisfied quadruples, and also keeps how
    many quadruples were examined and how many met each condition.
    """
    __slots__ = 'quadruples', 'examined', 'counts'

    def __init__(self, quadruples: typing.List[GapQuadruple], examined: int,
                 counts: typing.Dict[str, int]):
        self.quadruples = quadruples
        self.examined = examined
        self.counts = counts

    def __len__(self):
        return len(self.quadruples)

    def __iter__(self):
        return iter(self.quadruples)

    def __getitem__(self, item):
        return self.quadruples[item]

    def __repr__(self):
        return 'QuadrupleScan({} of {} satisfied)'.format(len(self), self.examined)


def scan_quadruples(spec: Spectrum, eps: float, q: float, rho: float) -> QuadrupleScan:
    """Find every satisfied consecutive quadruple of ``spec``."""
    check_exponents(q, rho)
    if not eps > 0:
        raise ParameterError("eps must be positive")
    energies = spec.energies
    if len(energies) < 4:
        return QuadrupleScan([], 0, dict.fromkeys(_CONDITIONS, 0))
    gaps = np.diff(energies)
    wide = eps ** q
    flags = {
        'small_middle': gaps[1:-1] < eps,
        'wide_upper': gaps[2:] > wide,
        'wide_lower': gaps[:-2] > wide,
        'below_ceiling': energies[3:] < eps ** -rho,
    }
    hits = np.logical_and.reduce([flags[name] for name in _CONDITIONS])
    found = [quadruple_at(spec, int(k) + 1, eps, q, rho) for k in np.flatnonzero(hits)]
    counts = {name: int(flag.sum()) for name, flag in flags.items()}
    logger.debug("eps=%s: %d of %d quadruples satisfied", eps, len(found), len(gaps) - 2)
    return QuadrupleScan(found, len(gaps) - 2, counts)


def overlap_bound(quad: GapQuadruple) -> float:
    """``(1/√3)(1 − ℓ²/(4·min outer gap²))^{1/2}``, floored at zero."""
    inner = 1 - quad.middle_gap ** 2 / (4 * quad.outer_gap ** 2)
    return math.sqrt(max(inner, 0.0)) / math.sqrt(3)


class OverlapCheck(typing.NamedTuple):
    """The best normalised overlap of the two-level quasimode with the
    three eigenfunctions of the quadruple, against its lower bound."""
    best_overlap: float
    bound: float
    overlaps: typing.Tuple[float, ...]

    @property
    def holds(self) -> bool:
        return self.best_overlap >= self.bound - 1e-12


def _two_level_setup(spec: Spectrum, cfg: ScattererConfig, quad: GapQuadruple
                     ) -> typing.Tuple[Quasimode, typing.List[PerturbedEigenpair]]:
    e_a, e_b, e_c, e_d = quad.energies
    interval = make_interval(spec, e_b, e_c)
    mu = solve_quasi_eigenvalues(spec, interval, 0.0, cfg)[0]
    qm = build_quasimode(spec, interval, 0.0, mu, cfg)
    pairs = list(solve_all_eigenvalues(spec, cfg, (e_a, e_d)))
    if len(pairs) != 3:
        raise NumericalError("Expected 3 eigenvalues in ({}, {}), found {}".format(
            e_a, e_d, len(pairs)), quad.indices[0])
    return qm, pairs


def overlap_bound_check(spec: Spectrum, cfg: ScattererConfig, quad: GapQuadruple) -> OverlapCheck:
    """Compare the best overlap on a quadruple with its guaranteed lower bound.

    The σ = 0 quasimode on ``[E_b, E_c]`` is compared against the three
    eigenfunctions whose eigenvalues lie in ``(E_a, E_d)``. The bound
    holds for any four consecutive levels, satisfied or not.
    """
    qm, pairs = _two_level_setup(spec, cfg, quad)
    overlaps = tuple(overlap(qm, pair) / math.sqrt(qm.norm_sq * pair.norm_sq) for pair in pairs)
    result = OverlapCheck(max(overlaps), overlap_bound(quad), overlaps)
    if not result.holds:
        logger.warning("Overlap %.6g below its bound %.6g on %s", result.best_overlap,
                       result.bound, quad)
    return result


class Top2(typing.NamedTuple):
    """The pair of consecutive levels carrying most of an eigenfunction.

    ``beta`` is 0 when the two coefficients have the same sign (their
    product has positive real part) and 1 otherwise.
    """
    indices: typing.Tuple[int, int]
    mass_fraction: float
    beta: int


def top2_mass(pair: PerturbedEigenpair) -> Top2:
    """Find the two consecutive levels with the largest combined ``|c_j|²``."""
    coefficients = pair.coefficients
    if len(coefficients) < 2:
        raise ParameterError("Need at least two coefficients")
    masses = np.abs(coefficients) ** 2
    combined = masses[:-1] + masses[1:]
    k = int(np.argmax(combined))
    beta = 0 if (coefficients[k] * np.conj(coefficients[k + 1])).real > 0 else 1
    return Top2((k + 1, k + 2), float(combined[k] / pair.norm_sq), beta)


def audit_weights(spec: Spectrum, c0: float) -> None:
    """Check that every amplitude is at least ``c0`` in modulus.

    :raises AssumptionError: At the first line that is too weak.
    """
    weak = np.flatnonzero(spec.weights < c0 * c0)
    if len(weak):
        index = int(weak[0]) + 1
        raise AssumptionError("Line weight {} is below {}^2".format(spec.weights[index - 1], c0),
                              index)


class ConvergenceRow(typing.NamedTuple):
    """One step of the convergence experiment.

    ``defect`` is ``1 − |⟨φ, ψ⟩|²/(‖φ‖²‖ψ‖²)`` between the eigenfunction
    ``pair`` in the middle gap and the two-level quasimode ``quasimode``.
    ``gap_margin`` is the distance of the flanking eigenvalues to the
    pair of levels, in units of ε^{ρ/2+q}.
    """
    eps: float
    mu: float
    lam: float
    defect: float
    gap_margin: float
    top2_mass: float
    quadruple: GapQuadruple
    pair: PerturbedEigenpair
    quasimode: Quasimode


def localise_quadruple(spec: Spectrum, cfg: ScattererConfig, quad: GapQuadruple) -> ConvergenceRow:
    """Compare the middle eigenfunction of a quadruple with its two-level quasimode."""
    qm, pairs = _two_level_setup(spec, cfg, quad)
    lower, middle, upper = pairs
    e_b, e_c = quad.energies[1:3]
    cosine_sq = overlap(qm, middle) ** 2 / (qm.norm_sq * middle.norm_sq)
    margin = min(upper.lam - e_c, e_b - lower.lam) / quad.eps ** (quad.rho / 2 + quad.q)
    return ConvergenceRow(quad.eps, qm.mu, middle.lam, max(0.0, 1 - cosine_sq), margin,
                          top2_mass(middle).mass_fraction, quad, middle, qm)


def default_eps_sequence(steps: int = 4) -> typing.List[float]:
    """``0.1·2^{−k}`` for ``k < steps``."""
    return [0.1 * 2.0 ** -k for k in range(steps)]


def convergence_experiment(spec: Spectrum, cfg: ScattererConfig,
                           eps_sequence: typing.Optional[typing.Sequence[float]] = None,
                           q: float = 0.25, rho: float = 1.4, c0: float = DEFAULT_C0,
                           threads: int = 1,
                           skip_missing: bool = False) -> typing.List[ConvergenceRow]:
    """Run the convergence experiment along a decreasing ε sequence.

    For each ε every satisfied quadruple that the solver can reach is
    localised, and the one whose eigenfunction sits closest to its
    two-level quasimode is reported. Θ must be π.

    :param c0: The spectrum weights are audited against ``c0²`` first.
    :param skip_missing: Leave out an ε with no usable quadruple instead
        of failing the whole sequence.
    :raises AssumptionError: When some weight is below ``c0²``.
    :raises QuadrupleNotFoundError: When some ε has no usable quadruple
        and ``skip_missing`` is off, or when no ε has one at all.
    """
    check_exponents(q, rho)
    if cfg.kappa != 0:
        raise ParameterError("The convergence experiment runs at theta = pi only")
    if not c0 > 0:
        raise ParameterError("c0 must be positive, got {}".format(c0))
    audit_weights(spec, c0)
    eps_sequence = default_eps_sequence() if eps_sequence is None else list(eps_sequence)
    limit = cfg.limit(spec)

    def step(eps):
        usable = [quad for quad in scan_quadruples(spec, eps, q, rho) if quad.energies[3] < limit]
        if not usable:
            if skip_missing:
                logger.info("No gap quadruple for eps=%s, skipped", eps)
                return None
            raise QuadrupleNotFoundError("No gap quadruple for eps={}".format(eps))
        rows = [localise_quadruple(spec, cfg, quad) for quad in usable]
        logger.debug("eps=%s: best defect %.3g of %d quadruples", eps,
                     min(row.defect for row in rows), len(rows))
        return min(rows, key=lambda row: row.defect)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            rows = list(executor.map(step, eps_sequence))
    else:
        rows = [step(eps) for eps in eps_sequence]
    rows = [row for row in rows if row is not None]
    if not rows:
        raise QuadrupleNotFoundError("No gap quadruple for any eps in {}".format(eps_sequence))
    return rows
