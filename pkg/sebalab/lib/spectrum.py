"""Unperturbed spectra: the levels and their amplitudes at the scatterer.

A ``Spectrum`` is the finite, strictly increasing list of levels
``E_j`` below a generation cutoff ``e_max``, each carrying the value of
the (reduced) eigenfunction at the scatterer. Degenerate levels are
merged into one line whose weight is the sum of the squared moduli of
the merged amplitudes, and levels whose eigenfunction vanishes at the
scatterer are dropped, since the scatterer cannot see them.

There are four ways to get a spectrum:

- ``generate_rectangle_odd`` for the rectangle of sides 2a × 2b with the
  scatterer at the centre, where only the modes odd in both directions
  survive.
- ``generate_rectangle_full`` for a rectangle of arbitrary sides with
  the scatterer anywhere inside.
- ``generate_poisson`` for a synthetic spectrum with exponential gaps.
- ``reduce_multiplicities`` (or ``records.load_text_fixture``) for any
  list of ``(energy, amplitude)`` pairs.

The diagnostics at the bottom of the module audit the Weyl law and the
Diophantine lower bound on the amplitudes of a rectangle.
"""
import enum
import fractions
import math
import typing

import numpy as np

from .exceptions import EmptySpectrumError, OutOfRangeError, ParameterError
from .helpers import check_simple_types
from .logs import get_logger

logger = get_logger(__name__)

#: Energies closer than this relative distance are one level.
DEGENERACY_TOL = 1e-10
#: Amplitudes smaller than this are treated as exact zeros.
ZERO_AMPLITUDE = 1e-12
#: Weyl density of normalised Laplacian eigenfunctions in the plane.
LAPLACE_DENSITY = 1 / (4 * math.pi)

Mode = typing.Tuple[typing.Tuple[int, int], complex]


class Kind(enum.Enum):
    """Where a spectrum came from."""
    RECTANGLE_ODD = 'rectangle-odd'
    RECTANGLE_FULL = 'rectangle-full'
    POISSON = 'poisson'
    FILE = 'file'

    @classmethod
    def from_string(cls, string: str) -> 'Kind':
        """Get an enum value from its name, with or without dashes."""
        key = string.strip().lower().replace('_', '-')
        for kind in cls:
            if kind.value == key:
                return kind
        raise ParameterError("Unknown spectrum kind '{}'".format(string))


class SpectralLine:
    """One level of the reduced spectrum.

    :ivar index: 1-based rank in the spectrum.
    :ivar energy: The level.
    :ivar amplitude: The value of the eigenfunction at the scatterer.
    :ivar weight: Squared modulus of the amplitude.
    :ivar modes: The unperturbed modes merged into this line, as
        ``((n, m), amplitude)`` pairs. Empty for synthetic levels.
    """
    __slots__ = 'index', 'energy', 'amplitude', 'weight', 'modes'

    def __init__(self, index: int, energy: float, amplitude: complex,
                 weight: typing.Optional[float] = None, modes: typing.Sequence[Mode] = ()):
        amplitude = complex(amplitude)
        modulus = abs(amplitude) ** 2
        if weight is None:
            weight = modulus
        if not weight > 0:
            raise ParameterError("Line {} has no weight at the scatterer".format(index))
        if abs(weight - modulus) > 1e-14 * weight:
            raise ParameterError("Weight of line {} is not |amplitude|^2".format(index))
        self.index = int(index)
        self.energy = float(energy)
        self.amplitude = amplitude
        self.weight = float(weight)
        self.modes = tuple(modes)

    def __repr__(self):
        return 'SpectralLine({}, {!r}, {!r}, {!r})'.format(self.index, self.energy,
                                                           self.amplitude, self.weight)

    def __eq__(self, other):
        if not isinstance(other, SpectralLine):
            return NotImplemented
        return (self.index, self.energy, self.amplitude, self.weight) == \
               (other.index, other.energy, other.amplitude, other.weight)


class Spectrum:
    """A strictly increasing, reduced, finite spectrum.

    It behaves as a read-only sequence of ``SpectralLine`` and exposes
    numpy views of the energies, amplitudes and weights for the
    vectorised code downstream. The arrays are flagged read-only so a
    spectrum can be shared freely between threads.
    """
    __slots__ = ('lines', 'e_max', 'kind', 'params', 'weyl_density',
                 'energies', 'amplitudes', 'weights')

    def __init__(self, lines: typing.Sequence[SpectralLine], e_max: float, kind: Kind = Kind.FILE,
                 params: typing.Optional[typing.Mapping[str, typing.Any]] = None,
                 weyl_density: typing.Optional[float] = None):
        self.lines = tuple(lines)
        self.e_max = float(e_max)
        self.kind = kind
        self.params = dict(params or {})
        self.energies = _frozen(np.array([line.energy for line in self.lines], dtype=float))
        self.amplitudes = _frozen(np.array([line.amplitude for line in self.lines], dtype=complex))
        self.weights = _frozen(np.array([line.weight for line in self.lines], dtype=float))
        if np.any(np.diff(self.energies) <= 0):
            raise ParameterError("Spectrum energies must be strictly increasing")
        if len(self) and self.energies[-1] > self.e_max:
            raise ParameterError("Spectrum has levels above its cutoff {}".format(self.e_max))
        for position, line in enumerate(self.lines, 1):
            if line.index != position:
                raise ParameterError("Line {} is out of place at {}".format(line.index, position))
        if weyl_density is None:
            weyl_density = self._default_density()
        self.weyl_density = float(weyl_density)

    @classmethod
    def from_levels(cls, energies: typing.Sequence[float], amplitudes: typing.Sequence[complex],
                    e_max: typing.Optional[float] = None, **kwargs) -> 'Spectrum':
        """Build a spectrum directly from levels that are already reduced.

        Amplitudes are kept exactly as given, which is what small
        hand-made spectra in experiments and tests need.
        """
        lines = [SpectralLine(i, e, a) for i, (e, a) in enumerate(zip(energies, amplitudes), 1)]
        if e_max is None:
            e_max = lines[-1].energy if lines else 0.0
        return cls(lines, e_max, **kwargs)

    def _default_density(self) -> float:
        if self.kind in (Kind.RECTANGLE_ODD, Kind.RECTANGLE_FULL):
            return LAPLACE_DENSITY
        if self.kind == Kind.POISSON:
            return self.params['intensity'] * self.params['weight']
        if len(self) and self.e_max > 0:
            return float(self.weights.sum()) / self.e_max
        return LAPLACE_DENSITY

    def __len__(self):
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)

    def __getitem__(self, item):
        return self.lines[item]

    def __repr__(self):
        return 'Spectrum(<{} lines>, e_max={!r}, kind={})'.format(len(self), self.e_max,
                                                                 self.kind.value)

    def count_below(self, energy: float) -> int:
        """How many levels are at or below ``energy``."""
        return int(np.searchsorted(self.energies, energy, side='right'))

    def position_of(self, energy: float) -> int:
        """The 1-based index of the level at ``energy`` exactly, or 0."""
        k = int(np.searchsorted(self.energies, energy))
        if k < len(self) and self.energies[k] == energy:
            return k + 1
        return 0


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def reduce_multiplicities(raw: typing.Iterable[typing.Sequence],
                          e_max: typing.Optional[float] = None,
                          kind: Kind = Kind.FILE,
                          params: typing.Optional[typing.Mapping[str, typing.Any]] = None,
                          weyl_density: typing.Optional[float] = None) -> Spectrum:
    """Merge degenerate levels and drop the ones invisible to the scatterer.

    Each item of ``raw`` is ``(energy, amplitude)`` or
    ``(energy, amplitude, (n, m))``. Levels whose energies agree to a
    relative ``DEGENERACY_TOL`` form one cluster. A cluster becomes one
    line with weight ``Σ|amplitude|²`` and amplitude ``√weight``; the
    original amplitudes and mode labels are kept in ``modes``.

    :param raw: The levels, in any order.
    :param e_max: The generation cutoff. Defaults to the top level.
    :return: The reduced spectrum.
    """
    items = [tuple(item) for item in raw]
    items.sort(key=lambda item: float(item[0]))
    clusters = []  # type: typing.List[typing.List[tuple]]
    for item in items:
        if abs(complex(item[1])) < ZERO_AMPLITUDE:
            continue
        energy = float(item[0])
        if clusters:
            previous = float(clusters[-1][-1][0])
            if abs(energy - previous) <= DEGENERACY_TOL * max(abs(energy), abs(previous)):
                clusters[-1].append(item)
                continue
        clusters.append([item])
    lines = []
    for index, cluster in enumerate(clusters, 1):
        weight = sum(abs(complex(item[1])) ** 2 for item in cluster)
        modes = tuple((tuple(item[2]), complex(item[1])) for item in cluster if len(item) > 2)
        lines.append(SpectralLine(index, float(cluster[0][0]), complex(math.sqrt(weight)),
                                  weight, modes))
    if e_max is None:
        e_max = lines[-1].energy if lines else 0.0
    logger.debug("Reduced %d raw levels to %d lines", len(items), len(lines))
    return Spectrum(lines, e_max, kind, params, weyl_density)


@check_simple_types
def generate_rectangle_odd(geom: 'RectangleGeometry', e_max: float) -> Spectrum:
    """The centred-scatterer spectrum of the rectangle ``(0, 2a) × (0, 2b)``.

    Only the modes ``sin((s+½)πx/a) sin((t+½)πy/b)`` are nonzero at the
    centre. Their energies are ``π²((s+½)²/a² + (t+½)²/b²)`` and their
    amplitude is ``(−1)^{s+t}/√(ab)``.

    :raises ParameterError: If the scatterer is not at the centre.
    :raises EmptySpectrumError: If ``e_max`` is below the ground level.
    """
    if not geom.is_centred():
        raise ParameterError("The odd-mode spectrum needs the scatterer at the centre")
    a, b = geom.a, geom.b
    ground = math.pi ** 2 * (1 / (4 * a * a) + 1 / (4 * b * b))
    if e_max < ground:
        raise EmptySpectrumError("No level below {}: the ground level is {}".format(e_max, ground))
    s_max = int(a * math.sqrt(e_max) / math.pi) + 1
    t_max = int(b * math.sqrt(e_max) / math.pi) + 1
    s, t = np.meshgrid(np.arange(s_max), np.arange(t_max), indexing='ij')
    energies = math.pi ** 2 * ((s + 0.5) ** 2 / a ** 2 + (t + 0.5) ** 2 / b ** 2)
    keep = energies <= e_max
    s, t, energies = s[keep], t[keep], energies[keep]
    amplitudes = np.where((s + t) % 2 == 0, 1.0, -1.0) / math.sqrt(a * b)
    raw = [(e, amp, (2 * si + 1, 2 * ti + 1))
           for e, amp, si, ti in zip(energies.tolist(), amplitudes.tolist(),
                                     s.tolist(), t.tolist())]
    params = {'a': a, 'b': b, 'x': geom.x, 'y': geom.y}
    return reduce_multiplicities(raw, e_max, Kind.RECTANGLE_ODD, params)


def generate_rectangle_full(geom: 'RectangleGeometry', side_x: float, side_y: float,
                            e_max: float) -> Spectrum:
    """All Dirichlet levels of the rectangle ``(0, side_x) × (0, side_y)``.

    The scatterer sits at ``(geom.x, geom.y)``; the geometry's own half
    sides are not used. Modes whose sine product vanishes at the
    scatterer are dropped.
    """
    x, y = geom.x, geom.y
    if not (0 < x < side_x and 0 < y < side_y):
        raise ParameterError("Scatterer ({}, {}) is not inside the {} x {} rectangle"
                             .format(x, y, side_x, side_y))
    if e_max <= 0:
        raise EmptySpectrumError("No level below {}".format(e_max))
    n, m, energies, amplitudes = _dirichlet_grid(x, y, side_x, side_y,
                                                 int(side_x * math.sqrt(e_max) / math.pi) + 1,
                                                 int(side_y * math.sqrt(e_max) / math.pi) + 1)
    keep = energies <= e_max
    raw = [(e, amp, (ni, mi)) for e, amp, ni, mi in zip(energies[keep].tolist(),
                                                        amplitudes[keep].tolist(),
                                                        n[keep].tolist(), m[keep].tolist())]
    params = {'side_x': side_x, 'side_y': side_y, 'x': x, 'y': y}
    return reduce_multiplicities(raw, e_max, Kind.RECTANGLE_FULL, params)


def _dirichlet_grid(x, y, side_x, side_y, n_max, m_max, odd_only=False):
    step = 2 if odd_only else 1
    n, m = np.meshgrid(np.arange(1, n_max + 1, step), np.arange(1, m_max + 1, step), indexing='ij')
    n, m = n.ravel(), m.ravel()
    energies = math.pi ** 2 * (n ** 2 / side_x ** 2 + m ** 2 / side_y ** 2)
    amplitudes = (2 / math.sqrt(side_x * side_y) * np.sin(n * math.pi * x / side_x)
                  * np.sin(m * math.pi * y / side_y))
    return n, m, energies, amplitudes


def poisson_generator(seed: int, block: int = 0) -> np.random.Generator:
    """A counter-based generator for one independent stream of a seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def generate_poisson(intensity: float, weight: float, e_max: float, seed: int) -> Spectrum:
    """Event times of a Poisson process of rate ``intensity`` up to ``e_max``.

    Every level gets the amplitude ``√weight``. The result only depends
    on ``seed``.
    """
    if not intensity > 0 or not weight > 0:
        raise ParameterError("Poisson spectra need a positive intensity and weight")
    if e_max < 0:
        raise ParameterError("The cutoff of a Poisson spectrum must not be negative")
    params = {'intensity': float(intensity), 'weight': float(weight), 'seed': int(seed)}
    rng = poisson_generator(seed)
    chunk = int(intensity * e_max + 10 * math.sqrt(intensity * e_max) + 16)
    times = np.empty(0)
    top = 0.0
    while top <= e_max:
        steps = top + np.cumsum(rng.exponential(1 / intensity, size=chunk))
        times = np.concatenate((times, steps))
        top = float(steps[-1])
    times = times[times <= e_max]
    amplitude = math.sqrt(weight)
    logger.debug("Poisson spectrum with %d levels below %s", len(times), e_max)
    raw = ((t, amplitude) for t in times.tolist())
    return reduce_multiplicities(raw, e_max, Kind.POISSON, params)


def weyl_count(spec: Spectrum, energy: float) -> float:
    """The weighted counting function ``N(E) = Σ_{E_j ≤ E} weight_j``.

    :raises OutOfRangeError: Above the cutoff the count is not known.
    """
    if energy > spec.e_max:
        raise OutOfRangeError("N({}) is beyond the spectrum cutoff {}".format(energy, spec.e_max))
    return float(spec.weights[:spec.count_below(energy)].sum())


def weyl_remainder(spec: Spectrum, energies: typing.Sequence[float]) -> np.ndarray:
    """``(N(E) − ρE)/√E`` at each energy, for auditing the Weyl law."""
    energies = np.asarray(energies, dtype=float)
    if np.any(energies > spec.e_max) or np.any(energies <= 0):
        raise OutOfRangeError("Weyl remainders need energies in (0, e_max]")
    cumulative = np.concatenate(([0.0], np.cumsum(spec.weights)))
    counts = cumulative[np.searchsorted(spec.energies, energies, side='right')]
    return (counts - spec.weyl_density * energies) / np.sqrt(energies)


class RectangleGeometry:
    """The rectangle ``(0, 2a) × (0, 2b)`` with a scatterer at ``(x, y)``."""
    __slots__ = 'a', 'b', 'x', 'y'

    def __init__(self, a: float, b: float, x: typing.Optional[float] = None,
                 y: typing.Optional[float] = None):
        if not (a > 0 and b > 0):
            raise ParameterError("Rectangle half sides must be positive")
        x = a if x is None else x
        y = b if y is None else y
        if not (0 < x < 2 * a and 0 < y < 2 * b):
            raise ParameterError("Scatterer ({}, {}) is on or outside the boundary".format(x, y))
        self.a, self.b, self.x, self.y = float(a), float(b), float(x), float(y)

    def __repr__(self):
        return 'RectangleGeometry({!r}, {!r}, {!r}, {!r})'.format(self.a, self.b, self.x, self.y)

    def is_centred(self) -> bool:
        return abs(self.x - self.a) <= 1e-12 * self.a and abs(self.y - self.b) <= 1e-12 * self.b

    def level(self, n: int, m: int) -> float:
        """The energy of the mode with ``n``, ``m`` half waves on the 2a × 2b box."""
        return math.pi ** 2 / 4 * (n * n / self.a ** 2 + m * m / self.b ** 2)


class FloorRecord(typing.NamedTuple):
    """A new minimum of ``E²·weight`` reached at mode ``(n, m)``."""
    energy: float
    value: float
    n: int
    m: int


def diophantine_floor(geom: RectangleGeometry, side_x: float, side_y: float, n_max: int,
                      odd_only: bool = False) -> typing.List[FloorRecord]:
    """Records of the running minimum of ``E_{n,m}²·|Φ_{n,m}(p)|²``.

    The modes ``1 ≤ n, m ≤ n_max`` of the ``side_x × side_y`` rectangle
    are visited in order of energy, and each time the product drops
    below everything seen so far a record is emitted. For a badly
    approximable scatterer the records stay bounded away from zero.
    """
    if n_max < 1:
        raise ParameterError("n_max must be at least 1")
    n, m, energies, amplitudes = _dirichlet_grid(geom.x, geom.y, side_x, side_y, n_max, n_max,
                                                 odd_only)
    order = np.argsort(energies, kind='stable')
    n, m, energies = n[order], m[order], energies[order]
    values = energies ** 2 * np.abs(amplitudes[order]) ** 2
    running = np.minimum.accumulate(values)
    is_record = np.ones(len(values), dtype=bool)
    # ties up to rounding are not new records
    is_record[1:] = values[1:] < running[:-1] * (1 - 1e-12)
    return [FloorRecord(float(energies[k]), float(values[k]), int(n[k]), int(m[k]))
            for k in np.flatnonzero(is_record)]


def mode_product_ratio(n: int, m: int, side_x: float, side_y: float) -> float:
    """``4π⁴n²m²/(side_x² side_y² E²)``, which never exceeds 1.

    It equals 1 exactly when ``n/side_x = m/side_y``.
    """
    energy = math.pi ** 2 * (n * n / side_x ** 2 + m * m / side_y ** 2)
    return 4 * math.pi ** 4 * n * n * m * m / (side_x ** 2 * side_y ** 2 * energy ** 2)


def continued_fraction(x: float, depth: int = 20) -> typing.List[int]:
    """The first partial quotients of ``x``, computed exactly from its float value."""
    value = fractions.Fraction(x)
    terms = []
    for _ in range(depth):
        whole = math.floor(value)
        terms.append(int(whole))
        value -= whole
        if value == 0:
            break
        value = 1 / value
    return terms


def convergents(x: float, depth: int = 20) -> typing.List[fractions.Fraction]:
    """The continued-fraction convergents ``p/q`` of ``x``."""
    result = []
    p, p_before = 1, 0
    q, q_before = 0, 1
    for term in continued_fraction(x, depth):
        p, p_before = term * p + p_before, p
        q, q_before = term * q + q_before, q
        result.append(fractions.Fraction(p, q))
    return result


def approximation_constant(x: float, n_max: int) -> float:
    """``min_{1≤n≤n_max} n·‖n x‖``, ``‖·‖`` being the distance to the nearest integer.

    A badly approximable number keeps this bounded away from zero.
    """
    n = np.arange(1, n_max + 1)
    return float(np.min(n * np.abs(n * x - np.round(n * x))))
