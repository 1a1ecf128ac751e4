"""Monte Carlo checks of how often Poisson spectra contain gap quadruples.

A path of a unit-rate Poisson process started at the origin is a list
of event times; the origin counts as an event, so that the first three
waiting times form the first block. A path succeeds for ``ε`` when some
four consecutive events below ``ε^{−ρ}`` have a middle gap smaller than
ε between two gaps larger than ``ε^q``.

Trials are simulated in fixed-size blocks, each with its own Philox
stream derived from the seed and the block number, so results do not
depend on how many threads run them.
"""
import concurrent.futures
import math
import typing

import numpy as np
from scipy import special

from .exceptions import ParameterError, ResourceError
from .localisation import check_exponents
from .logs import get_logger
from .spectrum import poisson_generator

logger = get_logger(__name__)

#: Trials per random stream.
BLOCK = 1000
#: Largest number of waiting times a single call may draw.
BUDGET = 2 * 10 ** 8


def block_event_probability(eps: float, q: float) -> float:
    """``P(ξ₁ > ε^q, ξ₂ < ε, ξ₃ > ε^q) = (1 − e^{−ε})·e^{−2ε^q}``."""
    if not 0 < eps < 1:
        raise ParameterError("eps must be in (0, 1), got {}".format(eps))
    return -math.expm1(-eps) * math.exp(-2 * eps ** q)


class BlockEventParams:
    """Parameters of the quadruple-existence simulation.

    :ivar rho_prime: The block count exponent, ``(1 + ρ)/2`` by default.
    :ivar blocks: ``M = ceil(ε^{−ρ'}/3)``.
    :ivar gaps: ``N = 3M``.
    """
    __slots__ = 'eps', 'q', 'rho', 'rho_prime', 'trials', 'seed'

    def __init__(self, eps: float, q: float = 0.25, rho: float = 1.4,
                 rho_prime: typing.Optional[float] = None, trials: int = 10000, seed: int = 0):
        check_exponents(q, rho)
        if rho_prime is None:
            rho_prime = (1 + rho) / 2
        if not 1 < rho_prime < rho:
            raise ParameterError("rho_prime must be in (1, {}), got {}".format(rho, rho_prime))
        if not 0 < eps < 1:
            raise ParameterError("eps must be in (0, 1), got {}".format(eps))
        if trials < 1:
            raise ParameterError("Need at least one trial")
        self.eps, self.q, self.rho = float(eps), float(q), float(rho)
        self.rho_prime = float(rho_prime)
        self.trials = int(trials)
        self.seed = int(seed)

    def __repr__(self):
        return 'BlockEventParams(eps={!r}, q={!r}, rho={!r}, rho_prime={!r}, trials={}, seed={})'\
            .format(self.eps, self.q, self.rho, self.rho_prime, self.trials, self.seed)

    @property
    def ceiling(self) -> float:
        return self.eps ** -self.rho

    @property
    def blocks(self) -> int:
        return math.ceil(self.eps ** -self.rho_prime / 3)

    @property
    def gaps(self) -> int:
        return 3 * self.blocks

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {'eps': self.eps, 'q': self.q, 'rho': self.rho, 'rho_prime': self.rho_prime,
                'trials': self.trials, 'seed': self.seed, 'blocks': self.blocks, 'gaps': self.gaps}


def _paths(rng: np.random.Generator, count: int, ceiling: float, minimum: int) -> np.ndarray:
    """Event times from the origin until every path passes ``ceiling``."""
    width = max(minimum, int(ceiling + 10 * math.sqrt(ceiling) + 20))
    times = np.cumsum(rng.exponential(size=(count, width)), axis=1)
    while np.any(times[:, -1] <= ceiling):
        more = times[:, -1:] + np.cumsum(rng.exponential(size=(count, width)), axis=1)
        times = np.hstack((times, more))
    return np.hstack((np.zeros((count, 1)), times))


def _quadruples(times: np.ndarray, eps: float, q: float, ceiling: float) -> np.ndarray:
    """Which consecutive quadruples of each path meet the conditions."""
    gaps = np.diff(times, axis=-1)
    wide = eps ** q
    return ((gaps[..., :-2] > wide) & (gaps[..., 1:-1] < eps) & (gaps[..., 2:] > wide)
            & (times[..., 3:] < ceiling))


class MonteCarloResult(typing.NamedTuple):
    """Outcome of the quadruple-existence simulation.

    ``empirical_p`` scans every quadruple of a path, ``block_p`` only
    the block-aligned ones within the first N gaps, and
    ``analytic_lower`` is the inclusion-exclusion bound on the latter.
    """
    empirical_p: float
    analytic_lower: float
    stderr: float
    block_p: float
    trials: int
    params: BlockEventParams


def analytic_lower_bound(params: BlockEventParams) -> float:
    """``(1 − (1 − P(S₀))^M) + P(E_N < ε^{−ρ}) − 1``."""
    p_block = block_event_probability(params.eps, params.q)
    p1 = -math.expm1(params.blocks * math.log1p(-p_block))
    p2 = float(special.gammainc(params.gaps, params.ceiling))
    return p1 + p2 - 1


def _run_blocks(trials: int, task: typing.Callable[[int, int], typing.Any], threads: int) -> list:
    sizes = [min(BLOCK, trials - start) for start in range(0, trials, BLOCK)]
    jobs = list(enumerate(sizes))
    if threads > 1 and len(jobs) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(lambda job: task(*job), jobs))
    return [task(*job) for job in jobs]


def simulate_quadruple_probability(params: BlockEventParams, threads: int = 1,
                                   budget: int = BUDGET) -> MonteCarloResult:
    """Estimate how often a Poisson path holds a gap quadruple below the ceiling.

    :raises ResourceError: When ``N·trials`` exceeds ``budget``.
    """
    if params.gaps * params.trials > budget:
        raise ResourceError("{} trials of {} gaps exceed the budget of {}".format(
            params.trials, params.gaps, budget))
    eps, q, ceiling, n_blocks = params.eps, params.q, params.ceiling, params.blocks

    def task(block, size):
        times = _paths(poisson_generator(params.seed, block), size, ceiling, params.gaps + 1)
        hits = _quadruples(times, eps, q, ceiling)
        aligned = hits[:, 0:3 * n_blocks:3]
        return int(hits.any(axis=1).sum()), int(aligned.any(axis=1).sum())

    counts = _run_blocks(params.trials, task, threads)
    full = sum(c[0] for c in counts) / params.trials
    aligned = sum(c[1] for c in counts) / params.trials
    lower = analytic_lower_bound(params)
    if lower <= 0:
        logger.warning("The analytic lower bound %.4g is vacuous at eps=%s", lower, eps)
    stderr = math.sqrt(full * (1 - full) / params.trials)
    return MonteCarloResult(full, lower, stderr, aligned, params.trials, params)


def s0_frequency(eps: float, q: float, trials: int, seed: int,
                 threads: int = 1) -> typing.Tuple[float, float]:
    """Empirical frequency of the first block event, and its standard error."""
    wide = eps ** q

    def task(block, size):
        xi = poisson_generator(seed, block).exponential(size=(size, 3))
        return int(np.sum((xi[:, 0] > wide) & (xi[:, 1] < eps) & (xi[:, 2] > wide)))

    p = sum(_run_blocks(trials, task, threads)) / trials
    return p, math.sqrt(p * (1 - p) / trials)


class GammaTail(typing.NamedTuple):
    """``P(E_N ≥ N^{1+α})`` by simulation, its Stirling-form bound and its exact value."""
    empirical: float
    bound_scale: float
    exact: float
    stderr: float

    @property
    def holds(self) -> bool:
        return self.empirical == 0 or self.empirical <= 10 * self.bound_scale


def gamma_tail_check(N: int, alpha: float, trials: int, seed: int, threads: int = 1) -> GammaTail:
    """Simulate the N-th event time of a unit Poisson process against ``N^{1+α}``.

    ``bound_scale = e^{−N^{1+α}+N}·N^{α(N−1)}/√(2π(N−1))``, computed in logs.
    """
    if N < 10:
        raise ParameterError("N must be at least 10")
    if alpha < 0:
        raise ParameterError("alpha must not be negative")
    threshold = N ** (1 + alpha)

    def task(block, size):
        return int(np.sum(poisson_generator(seed, block).standard_gamma(N, size=size) >= threshold))

    empirical = sum(_run_blocks(trials, task, threads)) / trials
    log_bound = (-threshold + N + alpha * (N - 1) * math.log(N)
                 - 0.5 * math.log(2 * math.pi * (N - 1)))
    result = GammaTail(empirical, math.exp(log_bound), float(special.gammaincc(N, threshold)),
                       math.sqrt(empirical * (1 - empirical) / trials))
    if not result.holds:
        logger.warning("Gamma tail %.4g exceeds ten times its bound scale %.4g", empirical,
                       result.bound_scale)
    return result


def borel_cantelli_sequence(q: float, rho: float, n_max: int, seed: int,
                            budget: int = BUDGET) -> typing.List[typing.Tuple[int, bool]]:
    """On one Poisson path, whether the quadruple for ``ε = 1/n`` exists, for each n.

    The conditions are a middle gap below 1/n, outer gaps above
    ``n^{−q}`` and the top event below ``n^ρ``.

    :raises ResourceError: When the path would be too long, or too short
        to hold a single quadruple.
    """
    check_exponents(q, rho)
    if n_max < 2:
        raise ParameterError("n_max must be at least 2")
    ceiling = float(n_max) ** rho
    if ceiling > budget:
        raise ResourceError("A path up to {:.4g} exceeds the budget".format(ceiling))
    times = _paths(poisson_generator(seed), 1, ceiling, 4)[0]
    times = times[times < ceiling]
    if len(times) < 4:
        raise ResourceError("The path has fewer than four events below {:.4g}".format(ceiling))
    return [(n, bool(_quadruples(times, 1 / n, q, n ** rho).any())) for n in range(1, n_max + 1)]
