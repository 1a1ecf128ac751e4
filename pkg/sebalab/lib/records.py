"""Reading and writing spectra and experiment reports.

Spectra and eigenvalues are JSON lines; the first line of a spectrum
file is a header object with the kind, cutoff and generation parameters.
Plain-text fixtures hold one ``energy amplitude_re amplitude_im`` per
line, with ``#`` comments. Tabular reports are CSV, everything else is
indented JSON. All files are UTF-8 and end with a newline.
"""
import csv
import json
import pathlib
import typing

import numpy as np

from .exceptions import ParameterError
from .helpers import wrap_exceptions_with
from .localisation import ConvergenceRow, GapQuadruple, OverlapCheck
from .momentum import MomentumGrid
from .quasimode import Quasimode
from .secular import PerturbedEigenpair
from .spectrum import Kind, SpectralLine, Spectrum, reduce_multiplicities
from .stochastic import GammaTail, MonteCarloResult

PathLike = typing.Union[str, pathlib.Path]

_READ_ERRORS = (OSError, ValueError, KeyError, TypeError, IndexError)


def _write_json(path: PathLike, payload) -> None:
    with pathlib.Path(path).open('w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, ensure_ascii=False)
        f.write('\n')


@wrap_exceptions_with(ParameterError, 'Cannot write spectrum', target=OSError)
def save_spectrum(spec: Spectrum, path: PathLike) -> None:
    """Write ``spec`` as JSON lines, header first."""
    header = {'kind': spec.kind.value, 'e_max': spec.e_max, 'params': spec.params,
              'weyl_density': spec.weyl_density}
    with pathlib.Path(path).open('w', encoding='utf-8') as f:
        f.write(json.dumps(header) + '\n')
        for line in spec:
            record = {'index': line.index, 'energy': line.energy,
                      'amplitude_re': line.amplitude.real, 'amplitude_im': line.amplitude.imag,
                      'weight': line.weight}
            if line.modes:
                record['modes'] = [[n, m, a.real, a.imag] for (n, m), a in line.modes]
            f.write(json.dumps(record) + '\n')


@wrap_exceptions_with(ParameterError, 'Cannot read spectrum', target=_READ_ERRORS)
def load_spectrum(path: PathLike) -> Spectrum:
    """Read a spectrum written by ``save_spectrum``."""
    with pathlib.Path(path).open(encoding='utf-8') as f:
        rows = [json.loads(text) for text in f if text.strip()]
    if not rows:
        raise ParameterError("{} is empty".format(path))
    header, records = rows[0], rows[1:]
    lines = []
    for record in records:
        modes = [((int(n), int(m)), complex(re, im)) for n, m, re, im in record.get('modes', ())]
        lines.append(SpectralLine(record['index'], record['energy'],
                                  complex(record['amplitude_re'], record['amplitude_im']),
                                  record['weight'], modes))
    return Spectrum(lines, header['e_max'], Kind.from_string(header['kind']),
                    header.get('params'), header.get('weyl_density'))


@wrap_exceptions_with(ParameterError, 'Cannot read fixture', target=_READ_ERRORS)
def load_text_fixture(path: PathLike, e_max: typing.Optional[float] = None,
                      weyl_density: typing.Optional[float] = None) -> Spectrum:
    """Read ``energy amplitude_re amplitude_im`` lines and reduce them."""
    raw = []
    with pathlib.Path(path).open(encoding='utf-8') as f:
        for text in f:
            text = text.split('#', 1)[0].strip()
            if not text:
                continue
            fields = text.split()
            imag = float(fields[2]) if len(fields) > 2 else 0.0
            raw.append((float(fields[0]), complex(float(fields[1]), imag)))
    return reduce_multiplicities(raw, e_max, Kind.FILE, {'source': str(path)}, weyl_density)


def save_text_fixture(spec: Spectrum, path: PathLike) -> None:
    with pathlib.Path(path).open('w', encoding='utf-8') as f:
        f.write('# energy amplitude_re amplitude_im\n')
        for line in spec:
            f.write('{!r} {!r} {!r}\n'.format(line.energy, line.amplitude.real,
                                              line.amplitude.imag))


def save_eigenvalues(pairs: typing.Iterable[PerturbedEigenpair], path: PathLike) -> None:
    with pathlib.Path(path).open('w', encoding='utf-8') as f:
        for pair in pairs:
            f.write(json.dumps({'gap_index': pair.gap_index, 'lambda': pair.lam,
                                'residual': pair.residual,
                                'bracket_width': pair.bracket_width}) + '\n')


def quasimode_report(qm: Quasimode,
                     oracle: typing.Optional[float] = None) -> typing.Dict[str, typing.Any]:
    """The JSON object describing one quasimode."""
    return {
        'sigma': qm.sigma,
        'interval': [qm.interval.lo, qm.interval.hi],
        'members': list(qm.interval.member_indices),
        'mu': qm.mu,
        'norm_sq': qm.norm_sq,
        'discrepancy': qm.discrepancy,
        'oracle_discrepancy': None if oracle is None else float(np.sqrt(oracle)),
        'coefficients': [[c.real, c.imag] for c in qm.in_coeffs.tolist()],
    }


def save_quasimodes(reports: typing.Sequence[typing.Dict[str, typing.Any]], path: PathLike) -> None:
    _write_json(path, list(reports))


def _flags(quad: GapQuadruple) -> typing.List[int]:
    return [int(quad.small_middle), int(quad.wide_upper), int(quad.wide_lower),
            int(quad.below_ceiling)]


def save_quadruples(quadruples: typing.Iterable[GapQuadruple], path: PathLike) -> None:
    with pathlib.Path(path).open('w', newline='', encoding='utf-8') as f:
        w = csv.writer(f)
        w.writerow(['eps', 'a', 'E_a', 'E_b', 'E_c', 'E_d', 'small_middle', 'wide_upper',
                    'wide_lower', 'below_ceiling'])
        for quad in quadruples:
            w.writerow([quad.eps, quad.indices[0], *quad.energies, *_flags(quad)])


def save_overlap_checks(results: typing.Iterable[typing.Tuple[GapQuadruple, OverlapCheck]],
                        path: PathLike) -> None:
    with pathlib.Path(path).open('w', newline='', encoding='utf-8') as f:
        w = csv.writer(f)
        w.writerow(['eps', 'a', 'E_a', 'E_b', 'E_c', 'E_d', 'best_overlap', 'bound', 'holds'])
        for quad, check in results:
            w.writerow([quad.eps, quad.indices[0], *quad.energies, check.best_overlap, check.bound,
                        int(check.holds)])


def save_experiment(rows: typing.Iterable[ConvergenceRow], path: PathLike) -> None:
    with pathlib.Path(path).open('w', newline='', encoding='utf-8') as f:
        w = csv.writer(f)
        w.writerow(['eps', 'mu', 'lambda', 'defect', 'gap_margin', 'top2_mass'])
        for row in rows:
            w.writerow([row.eps, row.mu, row.lam, row.defect, row.gap_margin, row.top2_mass])


def save_momentum_grid(grid: MomentumGrid, path: PathLike) -> pathlib.Path:
    """Write the density as a CSV matrix and its header as JSON next to it.

    :return: The path of the JSON header.
    """
    path = pathlib.Path(path)
    np.savetxt(str(path), grid.density, delimiter=',')
    header = path.with_suffix('.json')
    _write_json(header, {'extent': grid.extent, 'resolution': grid.resolution,
                         'levels': [list(level) for level in grid.levels],
                         'a': grid.geometry.a, 'b': grid.geometry.b})
    return header


def mc_report(result: MonteCarloResult) -> typing.Dict[str, typing.Any]:
    return {'params': result.params.as_dict(), 'empirical_p': result.empirical_p,
            'analytic_lower': result.analytic_lower, 'stderr': result.stderr,
            'block_p': result.block_p, 'trials': result.trials, 'seed': result.params.seed}


def gamma_report(result: GammaTail) -> typing.Dict[str, typing.Any]:
    return dict(result._asdict(), holds=result.holds)


def save_report(payload: typing.Dict[str, typing.Any], path: PathLike) -> None:
    _write_json(path, payload)


def save_manifest(payload: typing.Dict[str, typing.Any], directory: PathLike) -> pathlib.Path:
    """Write ``manifest.json`` into ``directory``."""
    path = pathlib.Path(directory) / 'manifest.json'
    _write_json(path, payload)
    return path
