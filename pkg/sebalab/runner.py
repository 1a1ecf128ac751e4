#!/usr/bin/env python3
"""Command-line front end.

Each command takes the parameters declared for it in
``core.PARAMETERS`` as ``--name value`` flags. A value is taken from
the flag if given, then from the environment for the seed and the
thread count, then from a ``key=value`` config file, then from the
built-in default.
"""
import argparse
import os
import pathlib
import sys
import typing

from sebalab.core import PARAMETERS, Command, Precision, RunConfig, run, EXIT_PARAMETER
from sebalab.lib import roots
from sebalab.lib.exceptions import ParameterError
from sebalab.lib.logs import configure

ENV_SEED = 'SEBALAB_SEED'
ENV_THREADS = 'SEBALAB_THREADS'

_COMMON = {
    'seed': (int, 0),
    'threads': (int, 1),
    'root_tol': (float, roots.ROOT_TOL),
    'cutoff': (float, None),
    'resolution': (int, 512),
}
_ENVIRONMENT = {'seed': ENV_SEED, 'threads': ENV_THREADS}


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('-i', '--input', help='spectrum file to read')
    parser.add_argument('-o', '--output',
                        help='directory for the artifacts, the current one by default')
    parser.add_argument('--config', help='flat key=value file of parameters')
    parser.add_argument('--seed', help='random seed (env {})'.format(ENV_SEED))
    parser.add_argument('--threads', help='worker threads (env {})'.format(ENV_THREADS))
    parser.add_argument('--root-tol', dest='root_tol', help='relative bracket width of roots')
    parser.add_argument('--cutoff', help='series truncation energy, the spectrum cutoff by default')
    parser.add_argument('--resolution', help='momentum grid points per axis')
    parser.add_argument('--log-level', dest='log_level',
                        help='logging level, overrides SEBALAB_LOG_LEVEL')
    return parser


def parse(argv: typing.Optional[typing.Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Numerical experiments on point scatterers in quantum billiards: "
                    "generate spectra, solve for perturbed eigenvalues, build quasimodes "
                    "and check how eigenfunctions localise on close pairs of levels.")
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True
    common = _common_parser()
    for command, table in PARAMETERS.items():
        sub = commands.add_parser(command.value, parents=[common], aliases=command.aliases)
        for name, parameter in table.items():
            sub.add_argument('--' + name.replace('_', '-'), dest=name,
                             help='{} (default {})'.format(parameter.help, parameter.default))
    return parser.parse_args(sys.argv[1:] if argv is None else argv)


def read_config_file(path: typing.Union[str, pathlib.Path]) -> typing.Dict[str, str]:
    """Read ``key=value`` lines, ignoring blanks and ``#`` comments."""
    values = {}
    try:
        text = pathlib.Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ParameterError("Cannot read config file {}: {}".format(path, e)) from e
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ParameterError("{}:{}: expected key=value".format(path, number))
        key, value = line.split('=', 1)
        values[key.strip().replace('-', '_')] = value.strip()
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    """Apply flag > environment > config file > default precedence."""
    command = Command.from_string(args.command)
    from_file = read_config_file(args.config) if args.config else {}
    given = {}
    for name in PARAMETERS[command]:
        flag = getattr(args, name, None)
        if flag is not None:
            given[name] = flag
        elif name in from_file:
            given[name] = from_file[name]
    common = {}
    for name, (convert, default) in _COMMON.items():
        value = getattr(args, name, None)
        if value is None and name in _ENVIRONMENT:
            value = os.getenv(_ENVIRONMENT[name])
        if value is None:
            value = from_file.get(name)
        try:
            common[name] = default if value is None else convert(value)
        except ValueError as e:
            raise ParameterError("Bad value {!r} for {}".format(value, name)) from e
    unknown = set(from_file) - set(PARAMETERS[command]) - set(_COMMON) - {'input', 'output'}
    if unknown:
        raise ParameterError("Unknown keys in {}: {}".format(args.config,
                                                               ', '.join(sorted(unknown))))
    precision = Precision(common['root_tol'], common['cutoff'], common['resolution'])
    return RunConfig(command, args.output or from_file.get('output', '.'), given,
                     args.input or from_file.get('input'), common['seed'], precision,
                     common['threads'])


def main():
    args = parse()
    configure(args.log_level)
    try:
        config = build_config(args)
    except ParameterError as e:
        print('error: {}'.format(e), file=sys.stderr)
        sys.exit(EXIT_PARAMETER)
    sys.exit(run(config))


if __name__ == '__main__':
    main()
