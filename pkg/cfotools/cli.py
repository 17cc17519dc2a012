''' Command Line Module

This module contains the ``cfotools`` command: convergence studies, single
solves, two-phase simulations and mesh dumps, configured by a flat JSON file
and/or command-line flags.
'''

import argparse
import json
import logging
import os
import sys

import numpy as np

from cfotools import analysis
from cfotools import assembly
from cfotools import export
from cfotools import mesh as meshlib
from cfotools import sparse_linear
from cfotools import twophase
from cfotools.cases import CASES, test_case
from cfotools.problem import AssemblyError


log = logging.getLogger(__name__)

COMMANDS = ('converge', 'solve', 'twophase', 'dumpmesh')
MESH_FAMILIES = ('uniform', 'perturbed')
FORMATS = ('csv', 'vtk', 'hdf5')
OUTPUT_DIR_VARIABLE = 'CFO_OUTPUT_DIR'

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MESH = 3
EXIT_ASSEMBLY = 4
EXIT_SOLVE = 5
EXIT_IO = 6

LOG_FORMAT = '%(asctime)s|%(name)s|%(levelname)s| %(message)s'


class ConfigError(ValueError):
    pass


class RunConfig(object):
    '''
    Settings of one command-line run.

    Every key of DEFAULTS is an attribute; see main --help for meanings.
    '''

    DEFAULTS = {
        'command': None,
        'case': 1,
        'mesh': 'uniform',
        'seed': 0,
        'magnitude': 0.2,
        'n': 8,
        'levels': [2, 4, 8, 16, 32],
        'relative': False,
        'workers': None,
        'dt': 1e-5,
        't_end': 0.002,
        'pressure_update_interval': 1,
        'output_times': None,
        'permeability': 'heterogeneous',
        'mobility': 'total',
        'output_dir': None,
        'formats': ['csv', 'vtk'],
        'dump_matrix': False,
        'verbose': False,
    }

    def __init__(self, **values):
        unknown = sorted(set(values) - set(self.DEFAULTS))
        if unknown:
            raise ConfigError('unknown configuration keys: {}'.format(', '.join(unknown)))
        for key, default in self.DEFAULTS.items():
            setattr(self, key, values.get(key, default))
        if self.output_dir is None:
            self.output_dir = os.environ.get(OUTPUT_DIR_VARIABLE, 'output')
        self._normalize()
        self._validate()

    def __repr__(self):
        return 'RunConfig({})'.format(', '.join('{}={!r}'.format(k, getattr(self, k))
                                                for k in sorted(self.DEFAULTS)))

    def as_dict(self):
        return {k: getattr(self, k) for k in self.DEFAULTS}

    def _normalize(self):
        try:
            self.case = int(self.case)
            self.seed = int(self.seed)
            self.magnitude = float(self.magnitude)
            self.n = int(self.n)
            self.levels = _int_list(self.levels)
            self.dt = float(self.dt)
            self.t_end = float(self.t_end)
            self.pressure_update_interval = int(self.pressure_update_interval)
            self.workers = None if self.workers is None else int(self.workers)
            if self.output_times is not None:
                self.output_times = _float_list(self.output_times)
            self.formats = _str_list(self.formats)
        except (TypeError, ValueError) as err:
            raise ConfigError('malformed configuration value: {}'.format(err))

    def _validate(self):
        if self.command not in COMMANDS:
            raise ConfigError('unknown command {!r}, expected one of {}'.format(self.command, COMMANDS))
        if self.case not in CASES:
            raise ConfigError('unknown case id {}, expected one of {}'.format(self.case, sorted(CASES)))
        if self.mesh not in MESH_FAMILIES:
            raise ConfigError('unknown mesh family {!r}'.format(self.mesh))
        if self.n < 1:
            raise ConfigError('n must be positive, got {}'.format(self.n))
        if self.command == 'converge':
            try:
                analysis.check_levels(self.levels)
            except ValueError as err:
                raise ConfigError(str(err))
        bad = sorted(set(self.formats) - set(FORMATS))
        if bad:
            raise ConfigError('unknown output formats: {}'.format(', '.join(bad)))

    def twophase_config(self):
        try:
            return twophase.TwoPhaseConfig(self.n, self.dt, self.t_end,
                                           self.pressure_update_interval, self.output_times,
                                           self.permeability, self.mobility)
        except ValueError as err:
            raise ConfigError(str(err))


def _split(value):
    if isinstance(value, str):
        return [v for v in value.replace(' ', '').split(',') if v]
    return list(value)


def _int_list(value):
    return [int(v) for v in _split(value)]


def _float_list(value):
    return [float(v) for v in _split(value)]


def _str_list(value):
    return [str(v) for v in _split(value)]


def build_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--config', help='flat JSON file of configuration keys')
    common.add_argument('--case', type=int, help='test case id, 1-5')
    common.add_argument('--mesh', choices=MESH_FAMILIES, help='mesh family')
    common.add_argument('--seed', type=int, help='perturbed mesh seed')
    common.add_argument('--magnitude', type=float, help='perturbation as a fraction of h')
    common.add_argument('--n', type=int, help='cells per side')
    common.add_argument('--levels', help='comma separated cells per side, each doubling')
    common.add_argument('--relative', action='store_true', help='relative error columns')
    common.add_argument('--workers', type=int, help='threads for convergence levels')
    common.add_argument('--dt', type=float, help='two-phase time step')
    common.add_argument('--t-end', dest='t_end', type=float, help='two-phase final time')
    common.add_argument('--pressure-interval', dest='pressure_update_interval', type=int,
                        help='transport steps between pressure solves')
    common.add_argument('--output-times', dest='output_times',
                        help='comma separated snapshot times')
    common.add_argument('--permeability', choices=sorted(twophase.PERMEABILITY_MODELS))
    common.add_argument('--mobility', choices=sorted(twophase.MOBILITY_MODELS))
    common.add_argument('--output-dir', dest='output_dir',
                        help='output directory, default ${} or ./output'.format(OUTPUT_DIR_VARIABLE))
    common.add_argument('--formats', help='comma separated subset of {}'.format(','.join(FORMATS)))
    common.add_argument('--dump-matrix', dest='dump_matrix', action='store_true',
                        help='write the assembled system in MatrixMarket format')
    common.add_argument('--verbose', action='store_true', help='debug logging')

    parser = argparse.ArgumentParser(prog='cfotools',
                                     description='Conservative flux optimization finite elements')
    sub = parser.add_subparsers(dest='command')
    sub.add_parser('converge', parents=[common], help='convergence study of a test case')
    sub.add_parser('solve', parents=[common], help='single solve with VTK and flux output')
    sub.add_parser('twophase', parents=[common], help='two-phase flow simulation')
    sub.add_parser('dumpmesh', parents=[common], help='write the mesh as VTK')
    return parser


def read_config_file(path):
    try:
        with open(path) as f:
            text = f.read()
    except OSError as err:
        raise ConfigError('cannot read config file {}: {}'.format(path, err))
    if not text.strip():
        return {}
    try:
        values = json.loads(text)
    except ValueError as err:
        raise ConfigError('malformed config file {}: {}'.format(path, err))
    if not isinstance(values, dict):
        raise ConfigError('config file {} must hold a JSON object'.format(path))
    return values


def parse_config(argv=None):
    '''
    Build a RunConfig from command-line arguments.

    Values come from RunConfig.DEFAULTS, then the --config file, then flags.

    Parameters
    ----------
    argv: list of str, optional
        Defaults to sys.argv[1:].

    Returns
    -------
    RunConfig
    '''
    args = vars(build_parser().parse_args(argv))
    if args.get('command') is None:
        raise ConfigError('a command is required: {}'.format(', '.join(COMMANDS)))

    command = args['command']
    if command == 'converge' and 'n' in args:
        raise ConfigError('--n contradicts converge, use --levels')
    if command != 'converge' and 'levels' in args:
        raise ConfigError('--levels is only valid for converge')

    values = {}
    path = args.pop('config', None)
    if path is not None:
        values.update(read_config_file(path))
    values.update(args)
    return RunConfig(**values)


def _path(config, name):
    return os.path.join(config.output_dir, name)


def _converge(config):
    table = analysis.convergence_study(config.case, config.levels, family=config.mesh,
                                       relative=config.relative, magnitude=config.magnitude,
                                       seed=config.seed, workers=config.workers)
    if 'csv' in config.formats:
        export.write_convergence_csv(_path(config, 'converge_case{}.csv'.format(config.case)), table)
    print(export.format_table(table))


def _build_mesh(config, domain):
    return analysis.build_mesh(domain, config.n, config.mesh, config.magnitude, config.seed)


def _solve(config):
    problem = test_case(config.case)
    mesh = _build_mesh(config, problem.domain)
    stem = _path(config, 'solve_case{}_n{}'.format(config.case, config.n))
    if config.dump_matrix:
        matrix, _, _ = assembly.assemble_system(mesh, problem)
        sparse_linear.write_matrix_market(stem + '.mtx', matrix)
    solution = assembly.solve_cfo(mesh, problem)
    if 'vtk' in config.formats:
        export.write_vtk(stem + '.vtk', mesh, point_data={'u': solution.u},
                         cell_data={'lambda': solution.lam}, title=problem.name)
    if 'csv' in config.formats:
        export.write_edge_flux_csv(stem + '_flux.csv', mesh, solution.q)
    report = analysis.error_report(mesh, problem, solution)
    print('case {} n={}: l2={:.3g} h1={:.3g} residual={:.3g} flux={:.3g} lambda={:.3g}'.format(
        config.case, config.n, report.l2, report.h1, report.residual, report.flux, report.lam))


def _twophase(config):
    settings = config.twophase_config()
    mesh = meshlib.build_uniform(twophase.UNIT_SQUARE, settings.n)
    snapshots = twophase.run_simulation(settings, mesh)
    if 'vtk' in config.formats or 'csv' in config.formats:
        export.write_snapshot_series(config.output_dir, mesh, snapshots)
    if 'hdf5' in config.formats:
        export.write_snapshots_hdf5(_path(config, 'saturation.h5'), snapshots)
    for state in snapshots:
        print('t={:.6g} mean saturation={:.6g}'.format(state.t, np.mean(state.S)))


def _dumpmesh(config):
    domain = test_case(config.case).domain
    mesh = _build_mesh(config, domain)
    export.write_vtk(_path(config, 'mesh_n{}.vtk'.format(config.n)), mesh, title=repr(mesh))


HANDLERS = {
    'converge': _converge,
    'solve': _solve,
    'twophase': _twophase,
    'dumpmesh': _dumpmesh,
}

# most specific classes first
FAILURES = (
    (ConfigError, EXIT_CONFIG, 'config'),
    (meshlib.MeshError, EXIT_MESH, 'mesh'),
    (AssemblyError, EXIT_ASSEMBLY, 'assembly'),
    (sparse_linear.SingularMatrixError, EXIT_SOLVE, 'solve'),
    (twophase.CFLError, EXIT_SOLVE, 'solve'),
    (twophase.SaturationBoundsError, EXIT_SOLVE, 'solve'),
    (OSError, EXIT_IO, 'io'),
)


def _failure(err):
    for cls, status, label in FAILURES:
        if isinstance(err, cls):
            return status, label
    return None


def run(config):
    '''
    Execute a RunConfig.

    Returns
    -------
    int
        0 when every requested output was written, otherwise the exit status
        of the failure class (mesh 3, assembly 4, solve 5, io 6).
    '''
    try:
        os.makedirs(config.output_dir, exist_ok=True)
        HANDLERS[config.command](config)
    except Exception as err:
        failure = _failure(err)
        if failure is None:
            raise
        status, label = failure
        sys.stderr.write('cfotools: {} error: {}\n'.format(label, err))
        return status
    return EXIT_OK


def main(argv=None):
    '''Entry point of the cfotools command'''
    try:
        config = parse_config(argv)
    except ConfigError as err:
        sys.stderr.write('cfotools: config error: {}\n'.format(err))
        return EXIT_CONFIG
    logging.basicConfig(format=LOG_FORMAT,
                        level=logging.DEBUG if config.verbose else logging.WARNING)
    log.debug('%r', config)
    return run(config)


if __name__ == '__main__':
    sys.exit(main())
