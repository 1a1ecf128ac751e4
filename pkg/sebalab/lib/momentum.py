"""Momentum densities for the centred-scatterer rectangle.

The unperturbed mode ``Φ_{n,m} = sin(nπx/2a) sin(mπy/2b)/√(ab)`` on
``(0, 2a) × (0, 2b)`` has a closed-form Fourier transform built from the
smoothed delta ``δ_n(t) = (1 − e^{−int})/(πit)``:

    X_n(k) = (πa/(in))·[δ_n(2ak/n − π) − δ_n(2ak/n + π)]
    Φ̂_{n,m}(p) = X_n(p_x)·Y_m(p_y)/(2π√(ab))

so the transform of any eigenfunction or quasimode, given as a
coefficient sequence over the levels, is a finite sum of separable
terms. It is evaluated on a square grid as one matrix product.

As a level pair becomes degenerate the density concentrates near the
points ``(±nπ/2a, ±mπ/2b)`` of both levels; ``eight_point_mass`` measures
how much of it does.
"""
import concurrent.futures
import math
import typing

import numpy as np
from scipy import integrate

from .exceptions import CoverageError, ParameterError
from .logs import get_logger
from .quasimode import Quasimode
from .secular import PerturbedEigenpair
from .spectrum import Kind, RectangleGeometry

logger = get_logger(__name__)

#: Below this |n·t| the smoothed delta is evaluated by its series.
SERIES_CUTOFF = 1e-6
MIN_RESOLUTION = 8
DEFAULT_RESOLUTION = 512

Level = typing.Tuple[int, int]


def smoothed_delta(n: int, t) -> np.ndarray:
    """``δ_n(t) = (1 − e^{−int})/(πit)``, with ``δ_n(0) = n/π``."""
    t = np.asarray(t, dtype=float)
    x = n * t
    small = np.abs(x) < SERIES_CUTOFF
    safe = np.where(small, 1.0, t)
    exact = (1 - np.exp(-1j * x)) / (1j * math.pi * safe)
    series = n / math.pi * (1 - 0.5j * x - x * x / 6)
    return np.where(small, series, exact)


def smoothed_delta_norm(n: int, periods: int = 2000, points_per_period: int = 32) -> float:
    """``∫|δ_n(t)|² dt`` by Simpson's rule, which should come out as 2n/π.

    The integral is taken over a whole number of periods of the
    numerator; beyond that ``|δ_n|²`` averages to ``2/(π²t²)``, whose
    integral is added in closed form.
    """
    half = periods * 2 * math.pi / n
    t = np.linspace(-half, half, 2 * periods * points_per_period + 1)
    inside = integrate.simpson(np.abs(smoothed_delta(n, t)) ** 2, x=t)
    return float(inside + 4 / (math.pi ** 2 * half))


def axis_transform(n: int, half_side: float, k: np.ndarray) -> np.ndarray:
    """Fourier transform of ``sin(nπx/(2·half_side))`` on ``(0, 2·half_side)``."""
    t = 2 * half_side * np.asarray(k, dtype=float) / n
    return math.pi * half_side / (1j * n) * (smoothed_delta(n, t - math.pi)
                                             - smoothed_delta(n, t + math.pi))


def localisation_points(geom: RectangleGeometry, n: int,
                        m: int) -> typing.List[typing.Tuple[float, float]]:
    """The four points ``(±nπ/2a, ±mπ/2b)``, all on the circle ``|p|² = E_{n,m}``."""
    px = n * math.pi / (2 * geom.a)
    py = m * math.pi / (2 * geom.b)
    return [(sx * px, sy * py) for sx in (1, -1) for sy in (1, -1)]


class MomentumGrid:
    """``|φ̂|²`` sampled on the square ``[−extent, extent]²``.

    ``density[i, j]`` is the value at ``(axis[i], axis[j])``.

    :ivar levels: The modes ``(n, m)`` the function is concentrated on.
    """
    __slots__ = 'extent', 'resolution', 'density', 'geometry', 'levels'

    def __init__(self, extent: float, resolution: int, density: np.ndarray,
                 geometry: RectangleGeometry, levels: typing.Sequence[Level] = ()):
        self.extent = float(extent)
        self.resolution = int(resolution)
        self.density = density
        self.geometry = geometry
        self.levels = tuple(tuple(level) for level in levels)

    def __repr__(self):
        return 'MomentumGrid(extent={!r}, resolution={}, levels={})'.format(
            self.extent, self.resolution, self.levels)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.resolution)

    @property
    def spacing(self) -> float:
        return 2 * self.extent / (self.resolution - 1)

    def total_mass(self) -> float:
        """Riemann sum of the density."""
        return float(self.density.sum()) * self.spacing ** 2


def _grid_axis(extent: float, resolution: int) -> np.ndarray:
    if resolution < MIN_RESOLUTION:
        raise ParameterError("Grid resolution must be at least {}, got {}".format(
            MIN_RESOLUTION, resolution))
    if not extent > 0:
        raise ParameterError("Grid extent must be positive")
    return np.linspace(-extent, extent, resolution)


def mode_density(geom: RectangleGeometry, modes: typing.Sequence[typing.Tuple[Level, complex]],
                 extent: float, resolution: int = DEFAULT_RESOLUTION,
                 threads: int = 1) -> np.ndarray:
    """``|Σ_i w_i·Φ̂_{n_i,m_i}|²`` on the grid for weighted modes ``((n, m), w)``."""
    axis = _grid_axis(extent, resolution)
    if not modes:
        return np.zeros((resolution, resolution))
    weights = np.array([w for _, w in modes], dtype=complex)
    x_part = np.array([axis_transform(n, geom.a, axis) for (n, _), _ in modes])
    y_part = weights[:, None] * np.array([axis_transform(m, geom.b, axis) for (_, m), _ in modes])
    scale = 1 / (2 * math.pi * math.sqrt(geom.a * geom.b))

    def rows(chunk):
        return np.abs(scale * (x_part[:, chunk].T @ y_part)) ** 2

    if threads > 1:
        chunks = np.array_split(np.arange(resolution), threads)
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            return np.vstack(list(executor.map(rows, chunks)))
    return rows(slice(None))


def single_mode_density(geom: RectangleGeometry, n: int, m: int, extent: float,
                        resolution: int = DEFAULT_RESOLUTION) -> MomentumGrid:
    """The momentum density of one normalised mode ``Φ_{n,m}``."""
    density = mode_density(geom, [((n, m), 1.0)], extent, resolution)
    return MomentumGrid(extent, resolution, density, geom, [(n, m)])


def momentum_density(geom: RectangleGeometry, source: typing.Union[PerturbedEigenpair, Quasimode],
                     extent: typing.Optional[float] = None, resolution: int = DEFAULT_RESOLUTION,
                     threads: int = 1) -> MomentumGrid:
    """The momentum density of an eigenfunction or a quasimode.

    Each line of the spectrum is expanded back into the modes merged
    into it, line ``j`` being ``Σ_i conj(a_i)/|Φ_j(p)|·Φ_{n_i,m_i}``.

    :param extent: Half side of the grid; defaults to ``3√E`` at the
        eigenvalue or quasi-eigenvalue.
    :raises ParameterError: Unless the spectrum is a centred rectangle
        with its modes recorded.
    """
    spec = source.spectrum
    if spec.kind != Kind.RECTANGLE_ODD:
        raise ParameterError("Momentum densities need a rectangle-odd spectrum, not {}".format(
            spec.kind.value))
    if isinstance(source, Quasimode):
        coefficients, energy = source.coefficient_vector(), source.mu
    else:
        coefficients, energy = source.coefficients, source.lam
    if extent is None:
        extent = 3 * math.sqrt(max(energy, 1.0))
    modes = []
    for line, c in zip(spec.lines, coefficients):
        if c == 0:
            continue
        if not line.modes:
            raise ParameterError("Line {} has no mode labels".format(line.index))
        for level, amplitude in line.modes:
            modes.append((level, c * np.conj(amplitude) / abs(line.amplitude)))
    masses = np.abs(coefficients) ** 2
    top = int(np.argmax(masses[:-1] + masses[1:])) if len(masses) > 1 else 0
    levels = [level for line in spec.lines[top:top + 2] for level, _ in line.modes]
    logger.debug("Momentum density from %d modes on a %d^2 grid", len(modes), resolution)
    density = mode_density(geom, modes, extent, resolution, threads)
    return MomentumGrid(extent, resolution, density, geom, levels)


def default_radius(geom: RectangleGeometry, level: Level) -> float:
    """Half the mean level spacing, ``4π/(ab)``, converted to momentum at ``E_{n,m}``."""
    return math.pi / (geom.a * geom.b * math.sqrt(geom.level(*level)))


def eight_point_mass(grid: MomentumGrid, levels: typing.Optional[typing.Sequence[Level]] = None,
                     radius: typing.Optional[float] = None, rescaled: bool = False,
                     strict: bool = True) -> float:
    """The fraction of the grid mass near the localisation points of one or two levels.

    The windows are disks of ``radius`` around ``(±nπ/2a, ±mπ/2b)``, or
    with ``rescaled`` ellipses with semi-axes ``(radius·n, radius·m)``.

    :param strict: Require every window to fit inside the grid. Without
        it only the centres need to.
    :raises CoverageError: When the grid does not cover the windows.
    """
    levels = grid.levels if levels is None else tuple(tuple(level) for level in levels)
    if not 1 <= len(levels) <= 2:
        raise ParameterError("Give one or two levels, got {}".format(len(levels)))
    geom = grid.geometry
    if radius is None:
        radius = default_radius(geom, levels[0])
    axis = grid.axis
    px, py = np.meshgrid(axis, axis, indexing='ij')
    inside = np.zeros(grid.density.shape, dtype=bool)
    for n, m in levels:
        rx, ry = (radius * n, radius * m) if rescaled else (radius, radius)
        for cx, cy in localisation_points(geom, n, m):
            reach = (abs(cx) + rx, abs(cy) + ry) if strict else (abs(cx), abs(cy))
            if max(reach) > grid.extent:
                raise CoverageError("Window around ({:.4g}, {:.4g}) leaves the grid of extent {}"
                                    .format(cx, cy, grid.extent))
            inside |= ((px - cx) / rx) ** 2 + ((py - cy) / ry) ** 2 <= 1
    total = grid.density.sum()
    return float(grid.density[inside].sum() / total) if total > 0 else 0.0
