"""Run the experiments of the package as reproducible, file-producing jobs.

A ``RunConfig`` names a ``Command``, where to read and write, and a bag
of parameters. ``run`` carries it out, writes the artifacts of the
command plus a ``manifest.json`` echoing every resolved parameter, and
returns the process exit status: 0 on success, 2 for bad parameters and
3 for numerical failures.

``PARAMETERS`` declares, for every command, the parameters it takes
with their converters and defaults. The command-line front end is built
from it, so flags, config files and library callers all go through the
same conversions.
"""
import enum
import fractions
import math
import pathlib
import re
import typing

from .lib import records, roots
from .lib.exceptions import InputTypeError, NumericalError, ParameterError, SebaError
from .lib.localisation import (DEFAULT_C0, convergence_experiment, default_eps_sequence,
                               overlap_bound_check, scan_quadruples)
from .lib.logs import get_logger
from .lib.momentum import eight_point_mass, momentum_density
from .lib.quasimode import (build_quasimode, make_interval, residual_oracle,
                            solve_quasi_eigenvalues)
from .lib.secular import ScattererConfig, eigenpair_coefficients, solve_all_eigenvalues
from .lib.spectrum import (Kind, RectangleGeometry, Spectrum, generate_poisson,
                           generate_rectangle_full, generate_rectangle_odd)
from .lib.stochastic import BlockEventParams, simulate_quadruple_probability

__version__ = '0.1.0'

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_NUMERICAL = 3

_ALIASES = {'theorem7': 'convergence'}


class Command(enum.Enum):
    """What a run does."""
    SPECTRUM = 'spectrum'
    SOLVE = 'solve'
    QUASIMODE = 'quasimode'
    LOCALIZE = 'localize'
    SCAN_GAPS = 'scan-gaps'
    CONVERGENCE = 'convergence'
    MOMENTUM = 'momentum'
    POISSON_MC = 'poisson-mc'

    @property
    def aliases(self) -> typing.List[str]:
        """Other names the command line accepts for this command."""
        return [alias for alias, name in _ALIASES.items() if name == self.value]

    @classmethod
    def from_string(cls, string: str) -> 'Command':
        """Get an enum value from the command name or one of its aliases."""
        string = string.strip().lower()
        string = _ALIASES.get(string, string)
        for command in cls:
            if command.value == string:
                return command
        raise ParameterError("Unknown command '{}'".format(string))


_THETA = re.compile(r'^(?P<num>[0-9.]*)\s*\*?\s*pi\s*(?:/\s*(?P<den>[0-9.]+))?$')


def parse_theta(text: typing.Union[str, float]) -> float:
    """Read a coupling angle such as ``pi``, ``pi/2``, ``3pi/2`` or ``1.25``."""
    if not isinstance(text, str):
        return float(text)
    match = _THETA.match(text.strip().lower())
    if match is None:
        return _number(text)
    num = float(match.group('num')) if match.group('num') else 1.0
    den = float(match.group('den')) if match.group('den') else 1.0
    if num == 1.0 and den == 1.0:
        return math.pi
    return num * math.pi / den


def _number(text: str) -> float:
    try:
        return float(fractions.Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as e:
        raise ParameterError("'{}' is not a number".format(text)) from e


def parse_floats(text: typing.Union[str, typing.Sequence[float]]) -> typing.List[float]:
    """Read a comma-separated list of numbers."""
    if not isinstance(text, str):
        return [float(x) for x in text]
    return [_number(part) for part in text.split(',') if part.strip()]


def parse_window(text) -> typing.Tuple[float, float]:
    values = parse_floats(text)
    if len(values) != 2:
        raise ParameterError("A window is two numbers 'lo,hi', got '{}'".format(text))
    return values[0], values[1]


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ParameterError("'{}' is not a boolean".format(text))


def optional(convert: typing.Callable) -> typing.Callable:
    def wrapped(text):
        if text is None or (isinstance(text, str) and text.strip().lower() in ('', 'none')):
            return None
        return convert(text)

    return wrapped


def _integer(text) -> int:
    value = _number(text) if isinstance(text, str) else text
    if value != int(value):
        raise ParameterError("'{}' is not an integer".format(text))
    return int(value)


class Parameter(typing.NamedTuple):
    convert: typing.Callable
    default: typing.Any
    help: str


_THETA_PARAM = Parameter(parse_theta, 'pi', 'coupling angle, e.g. pi, pi/2 or a decimal')
_EXPONENTS = {
    'q': Parameter(float, 0.25, 'outer gap exponent, eps^q'),
    'rho': Parameter(float, 1.4, 'ceiling exponent, eps^-rho'),
}
_TAIL = Parameter(parse_bool, True, 'add the Weyl tail above the cutoff')

PARAMETERS = {
    Command.SPECTRUM: {
        'kind': Parameter(Kind.from_string, 'rectangle-odd',
                          'rectangle-odd, rectangle-full or poisson'),
        'a': Parameter(float, 1.0, 'rectangle half width'),
        'b': Parameter(float, 1.0, 'rectangle half height'),
        'x': Parameter(optional(float), None, 'scatterer x, the centre by default'),
        'y': Parameter(optional(float), None, 'scatterer y, the centre by default'),
        'side_x': Parameter(optional(float), None, 'full rectangle side along x (2a by default)'),
        'side_y': Parameter(optional(float), None, 'full rectangle side along y (2b by default)'),
        'emax': Parameter(float, 5000.0, 'generation cutoff'),
        'intensity': Parameter(float, 1.0, 'Poisson intensity'),
        'weight': Parameter(float, 1.0, 'Poisson line weight'),
    },
    Command.SOLVE: {
        'theta': _THETA_PARAM,
        'window': Parameter(optional(parse_window), None, "'lo,hi'; the whole spectrum by default"),
        'tail': _TAIL,
    },
    Command.QUASIMODE: {
        'theta': _THETA_PARAM,
        'lo': Parameter(float, None, 'interval bottom'),
        'hi': Parameter(float, None, 'interval top'),
        'sigma': Parameter(float, 0.0, 'weight of the tail vector in [0, 1]'),
        'tail': _TAIL,
    },
    Command.LOCALIZE: dict(_EXPONENTS, **{
        'theta': _THETA_PARAM,
        'eps': Parameter(parse_floats, '0.1', 'comma-separated eps values'),
        'tail': _TAIL,
    }),
    Command.SCAN_GAPS: dict(_EXPONENTS, **{
        'eps': Parameter(parse_floats, '0.1,0.05,0.02', 'comma-separated eps values'),
    }),
    Command.CONVERGENCE: dict(_EXPONENTS, **{
        'theta': _THETA_PARAM,
        'eps': Parameter(optional(parse_floats), None,
                         'comma-separated decreasing eps values, 0.1*2^-k by default'),
        'c0': Parameter(float, DEFAULT_C0, 'lower bound to audit the amplitudes against'),
        'skip': Parameter(parse_bool, False, 'leave out an eps with no gap quadruple'),
        'tail': _TAIL,
    }),
    Command.MOMENTUM: {
        'theta': _THETA_PARAM,
        'gap': Parameter(_integer, 1, 'gap index of the eigenfunction'),
        'extent': Parameter(optional(float), None, 'grid half side, 3*sqrt(lambda) by default'),
        'radius': Parameter(optional(float), None, 'localisation window radius'),
        'tail': _TAIL,
    },
    Command.POISSON_MC: dict(_EXPONENTS, **{
        'eps': Parameter(float, 0.05, 'eps'),
        'rho_prime': Parameter(optional(float), None, 'block exponent, (1+rho)/2 by default'),
        'trials': Parameter(_integer, 10000, 'number of simulated paths'),
    }),
}


class Precision(typing.NamedTuple):
    root_tol: float = roots.ROOT_TOL
    cutoff: typing.Optional[float] = None
    grid_resolution: int = 512


class RunConfig:
    """Everything a run needs.

    :ivar params: The command's parameters, converted. Missing ones take
        their defaults from ``PARAMETERS``.
    """
    __slots__ = 'command', 'output', 'input', 'params', 'seed', 'precision', 'threads'

    def __init__(self, command: typing.Union[Command, str], output: typing.Union[str, pathlib.Path],
                 params: typing.Optional[typing.Mapping[str, typing.Any]] = None,
                 input: typing.Optional[typing.Union[str, pathlib.Path]] = None, seed: int = 0,
                 precision: Precision = Precision(), threads: int = 1):
        if isinstance(command, str):
            command = Command.from_string(command)
        if not isinstance(command, Command):
            raise InputTypeError("command must be a Command or its name")
        self.command = command
        self.output = pathlib.Path(output)
        self.input = None if input is None else pathlib.Path(input)
        self.params = resolve_params(command, params or {})
        self.seed = int(seed)
        self.precision = precision
        self.threads = max(1, int(threads))

    def manifest(self) -> typing.Dict[str, typing.Any]:
        """The fully resolved configuration, ready for JSON."""
        return {
            'version': __version__,
            'command': self.command.value,
            'input': None if self.input is None else str(self.input),
            'output': str(self.output),
            'seed': self.seed,
            'threads': self.threads,
            'precision': self.precision._asdict(),
            'params': {key: _plain(value) for key, value in self.params.items()},
        }


def resolve_params(command: Command,
                   given: typing.Mapping[str, typing.Any]) -> typing.Dict[str, typing.Any]:
    """Convert ``given`` and fill in defaults for ``command``."""
    table = PARAMETERS[command]
    unknown = set(given) - set(table)
    if unknown:
        raise ParameterError("Unknown parameters for {}: {}".format(command.value,
                                                                    ', '.join(sorted(unknown))))
    resolved = {}
    for name, parameter in table.items():
        value = given.get(name, parameter.default)
        try:
            resolved[name] = None if value is None else parameter.convert(value)
        except (ValueError, TypeError) as e:
            if isinstance(e, SebaError):
                raise
            raise ParameterError("Bad value {!r} for {}: {}".format(value, name, e)) from e
    return resolved


def _plain(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, tuple):
        return list(value)
    return value


def _require(config: RunConfig, *names: str) -> None:
    missing = [name for name in names if config.params.get(name) is None]
    if missing:
        raise ParameterError("{} needs {}".format(config.command.value, ', '.join(missing)))


def _input_spectrum(config: RunConfig) -> Spectrum:
    if config.input is None:
        raise ParameterError("{} needs an --input spectrum".format(config.command.value))
    return records.load_spectrum(config.input)


def _scatterer(config: RunConfig) -> ScattererConfig:
    return ScattererConfig(config.params['theta'], config.precision.cutoff,
                           config.params['tail'])


def _do_spectrum(config: RunConfig) -> typing.Dict[str, typing.Any]:
    p = config.params
    kind = p['kind']
    if kind == Kind.POISSON:
        spec = generate_poisson(p['intensity'], p['weight'], p['emax'], config.seed)
    elif kind == Kind.RECTANGLE_ODD:
        spec = generate_rectangle_odd(RectangleGeometry(p['a'], p['b'], p['x'], p['y']), p['emax'])
    elif kind == Kind.RECTANGLE_FULL:
        side_x = p['side_x'] or 2 * p['a']
        side_y = p['side_y'] or 2 * p['b']
        geom = RectangleGeometry(side_x / 2, side_y / 2,
                                 side_x / 2 if p['x'] is None else p['x'],
                                 side_y / 2 if p['y'] is None else p['y'])
        spec = generate_rectangle_full(geom, side_x, side_y, p['emax'])
    else:
        raise ParameterError("Cannot generate a '{}' spectrum".format(kind.value))
    records.save_spectrum(spec, config.output / 'spectrum.jsonl')
    return {'lines': len(spec), 'weyl_density': spec.weyl_density}


def _do_solve(config: RunConfig) -> typing.Dict[str, typing.Any]:
    spec = _input_spectrum(config)
    cfg = _scatterer(config)
    window = config.params['window']
    if window is None:
        top = cfg.limit(spec)
        window = (min(0.0, float(spec.energies[0])) if len(spec) else 0.0,
                  spec.e_max if math.isinf(top) else top)
    solution = solve_all_eigenvalues(spec, cfg, window, config.threads, config.precision.root_tol)
    records.save_eigenvalues(solution, config.output / 'eigenvalues.jsonl')
    return {'eigenvalues': len(solution), 'skipped_gaps': solution.skipped}


def _do_quasimode(config: RunConfig) -> typing.Dict[str, typing.Any]:
    _require(config, 'lo', 'hi')
    spec = _input_spectrum(config)
    cfg = _scatterer(config)
    p = config.params
    interval = make_interval(spec, p['lo'], p['hi'])
    reports = []
    for mu in solve_quasi_eigenvalues(spec, interval, p['sigma'], cfg,
                                      tol=config.precision.root_tol):
        qm = build_quasimode(spec, interval, p['sigma'], mu, cfg)
        reports.append(records.quasimode_report(qm, residual_oracle(spec, qm, cfg)))
    records.save_quasimodes(reports, config.output / 'quasimodes.json')
    return {'quasimodes': len(reports)}


def _do_localize(config: RunConfig) -> typing.Dict[str, typing.Any]:
    spec = _input_spectrum(config)
    cfg = _scatterer(config)
    p = config.params
    limit = cfg.limit(spec)
    results = []
    for eps in p['eps']:
        for quad in scan_quadruples(spec, eps, p['q'], p['rho']):
            if quad.energies[3] < limit:
                results.append((quad, overlap_bound_check(spec, cfg, quad)))
    records.save_overlap_checks(results, config.output / 'overlap_bounds.csv')
    return {'checked': len(results), 'violations': sum(not check.holds for _, check in results)}


def _do_scan_gaps(config: RunConfig) -> typing.Dict[str, typing.Any]:
    spec = _input_spectrum(config)
    p = config.params
    found = []
    summary = {}
    for eps in p['eps']:
        scan = scan_quadruples(spec, eps, p['q'], p['rho'])
        found.extend(scan)
        summary[repr(eps)] = dict(scan.counts, examined=scan.examined, satisfied=len(scan))
    records.save_quadruples(found, config.output / 'quadruples.csv')
    return summary


def _do_convergence(config: RunConfig) -> typing.Dict[str, typing.Any]:
    p = config.params
    eps_sequence = p['eps'] or default_eps_sequence()
    if config.input is None:
        ceiling = min(eps_sequence) ** -p['rho']
        spec = generate_poisson(1.0, 1.0, 2 * ceiling + 2, config.seed)
    else:
        spec = _input_spectrum(config)
    rows = convergence_experiment(spec, _scatterer(config), eps_sequence, p['q'], p['rho'], p['c0'],
                                  config.threads, p['skip'])
    records.save_experiment(rows, config.output / 'convergence.csv')
    return {'defects': [row.defect for row in rows]}


def _do_momentum(config: RunConfig) -> typing.Dict[str, typing.Any]:
    spec = _input_spectrum(config)
    if spec.kind != Kind.RECTANGLE_ODD:
        raise ParameterError("momentum needs a rectangle-odd spectrum")
    cfg = _scatterer(config)
    p = config.params
    gap = p['gap']
    if not 1 <= gap < spec.count_below(cfg.cutoff(spec)):
        raise ParameterError("No gap {} in the spectrum".format(gap))
    window = (float(spec.energies[gap - 1]), float(spec.energies[gap]))
    pairs = [pair for pair in solve_all_eigenvalues(spec, cfg, window,
                                                    tol=config.precision.root_tol)
             if pair.gap_index == gap]
    if not pairs:
        raise NumericalError("Gap {} was not solved".format(gap), gap)
    pair = eigenpair_coefficients(spec, pairs[0].lam, cfg)
    geom = RectangleGeometry(spec.params['a'], spec.params['b'])
    grid = momentum_density(geom, pair, p['extent'], config.precision.grid_resolution,
                            config.threads)
    records.save_momentum_grid(grid, config.output / 'momentum.csv')
    mass = eight_point_mass(grid, grid.levels[:2], p['radius'], strict=False)
    return {'lambda': pair.lam, 'levels': [list(level) for level in grid.levels],
            'eight_point_mass': mass, 'grid_mass': grid.total_mass()}


def _do_poisson_mc(config: RunConfig) -> typing.Dict[str, typing.Any]:
    p = config.params
    params = BlockEventParams(p['eps'], p['q'], p['rho'], p['rho_prime'], p['trials'], config.seed)
    result = simulate_quadruple_probability(params, config.threads)
    records.save_report(records.mc_report(result), config.output / 'mc_report.json')
    return {'empirical_p': result.empirical_p, 'analytic_lower': result.analytic_lower}


_COMMANDS = {
    Command.SPECTRUM: _do_spectrum,
    Command.SOLVE: _do_solve,
    Command.QUASIMODE: _do_quasimode,
    Command.LOCALIZE: _do_localize,
    Command.SCAN_GAPS: _do_scan_gaps,
    Command.CONVERGENCE: _do_convergence,
    Command.MOMENTUM: _do_momentum,
    Command.POISSON_MC: _do_poisson_mc,
}


def run(config: RunConfig) -> int:
    """Carry out a run and write its artifacts and manifest.

    :param config: The resolved configuration.
    :return: The exit status.
    """
    manifest = config.manifest()
    status = EXIT_OK
    try:
        config.output.mkdir(parents=True, exist_ok=True)
        manifest['results'] = _COMMANDS[config.command](config)
    except ParameterError as e:
        logger.error("%s: %s", config.command.value, e)
        manifest['error'] = str(e)
        status = EXIT_PARAMETER
    except NumericalError as e:
        logger.error("%s failed: %s", config.command.value, e)
        manifest['error'] = str(e)
        manifest['error_index'] = e.index
        status = EXIT_NUMERICAL
    except OSError as e:
        logger.error("%s: %s", config.command.value, e)
        return EXIT_PARAMETER
    manifest['status'] = status
    records.save_manifest(manifest, config.output)
    return status
