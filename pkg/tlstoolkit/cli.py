#
# Copyright 2024-2025, Martin Renters
#
# This file is part of TLStoolkit
#
# TLStoolkit is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# TLStoolkit is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with TLStoolkit.  If not, see <http://www.gnu.org/licenses/>.
#
'''
Command line front end

Every run writes manifest.json next to its outputs.  The SHA-256 of the
manifest is written as the first line of every CSV output ("# manifest
<sha>") and as the "manifest" entry of every JSON output.  Exit status is 0
on success, 1 for invalid input and 2 when a numerical method fails to
converge.
'''

import argparse
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .config import load_config
from .echo import (AbundanceCalibration, EchoModelConfig, PulseSequence,
                   abundance_tradeoff, compose_echo, one_over_e_time,
                   scaling_slopes, stretched_exp_fit, time_grid)
from .errors import (ConvergenceError, PerturbationError, ToolkitError,
                     ValidationError, print_exception, setup_logging)
from .fitting import (GridSpec, filter_mims, fitted_curves, global_fit,
                      valley_direction)
from .kernels import (DephasingChannel, kernel_crossover, kernel_long,
                      kernel_short, long_time, short_time, vbar)
from .levels import clock_field, level_table, pair_levels
from .material import HyperfineState, PairConfig, RateParams
from .rangelist import PulseList, RangeListAction
from .rates import rate_table
from .report import ToolkitXLSX
from .traces import read_manifest, read_trace, write_curve_csv
from .validation import SUITES, run_suite

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('levels', 'rates', 'kernel', 'echo', 'fit-trace', 'fit',
               'mc-validate', 'abundance')

#############################################################################
# RunManifest
#############################################################################
def canonical_json(value):
    '''stable JSON text used for hashing'''
    return json.dumps(value, sort_keys=True, separators=(',', ':'),
                      default=_jsonable)

def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, HyperfineState):
        return value.label
    if isinstance(value, PulseList):
        return value.to_string()
    raise TypeError(f'{type(value).__name__} is not JSON serializable')

class RunManifest:
    '''What was run, with which configuration, seed and toolkit version'''
    # pylint: disable=too-many-arguments
    def __init__(self, subcommand, flags, config_files, seed, out_dir,
                 version=__version__):
        self.subcommand = subcommand
        self.flags = dict(flags)
        self.config_files = list(config_files)
        self.seed = seed
        self.out_dir = out_dir
        self.version = version
        self.config_contents = {}
        for filename in self.config_files:
            with open(filename, 'r', encoding='utf-8') as handle:
                self.config_contents[os.path.basename(filename)] = \
                    handle.read()

    def as_dict(self):
        '''manifest contents without the digest'''
        return {
            'subcommand': self.subcommand,
            'flags': self.flags,
            'config_files': self.config_files,
            'config_contents': self.config_contents,
            'seed': self.seed,
            'out_dir': self.out_dir,
            'version': self.version,
        }

    @property
    def digest(self):
        '''SHA-256 of the canonical manifest'''
        return hashlib.sha256(canonical_json(self.as_dict())
                              .encode('utf-8')).hexdigest()

    def write(self):
        '''write manifest.json into the output directory'''
        path = os.path.join(self.out_dir, 'manifest.json')
        contents = self.as_dict()
        contents['sha256'] = self.digest
        with open(path, 'w', encoding='utf-8') as output:
            json.dump(contents, output, indent=2, sort_keys=True,
                      default=_jsonable)
            output.write('\n')
        return path

class OutputWriter:
    '''Writes CSV and JSON outputs stamped with the manifest digest'''
    def __init__(self, manifest, table_format='csv'):
        self.manifest = manifest
        self.table_format = table_format
        self.written = []

    def path(self, name):
        '''path of an output file'''
        return os.path.join(self.manifest.out_dir, name)

    def json(self, name, value):
        '''write a JSON result'''
        contents = {'manifest': self.manifest.digest}
        contents.update(value)
        path = self.path(f'{name}.json')
        with open(path, 'w', encoding='utf-8') as output:
            json.dump(contents, output, indent=2, sort_keys=True,
                      default=_jsonable)
            output.write('\n')
        self.written.append(path)
        return path

    def curves(self, name, columns, comments=None):
        '''write named columns as CSV'''
        path = self.path(f'{name}.csv')
        write_curve_csv(path, columns, self.manifest.digest, comments)
        self.written.append(path)
        return path

    def table(self, name, rows):
        '''write a list of row dicts in the selected table format'''
        if self.table_format == 'json':
            return self.json(name, {'rows': rows})
        columns = {key: [row[key] for row in rows] for key in rows[0]} \
            if rows else {'empty': []}
        return self.curves(name, {key: [_csv_value(v) for v in values]
                                  for key, values in columns.items()})

def _csv_value(value):
    if value is None:
        return ''
    if isinstance(value, HyperfineState):
        return value.label
    return value

#############################################################################
# Argument parsing
#############################################################################
class ToolkitArgumentParser(argparse.ArgumentParser):
    '''ArgumentParser raising ValidationError on usage errors'''
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError('usage', message)

def _times(args, config):
    t_min = config.t_min if args.t_min_us is None else args.t_min_us * 1e-6
    t_max = config.t_max if args.t_max_us is None else args.t_max_us * 1e-6
    return time_grid(t_min, t_max, config.per_decade)

def _add_time_flags(parser):
    parser.add_argument('--t-min-us', type=float,
                        help='first time of the grid in microseconds')
    parser.add_argument('--t-max-us', type=float,
                        help='last time of the grid in microseconds')

def _add_model_flags(parser):
    parser.add_argument('--x', type=float,
                        help='Tb concentration as a fraction (0.001 = 0.1%%)')
    parser.add_argument('--w-delta-mhz', type=float,
                        help='crystal-field disorder W_delta in MHz at the '
                        'reference concentration')
    parser.add_argument('--c1', type=float, help='resonance counting c1')
    parser.add_argument('--c2', type=float, help='resonance counting c2')
    parser.add_argument('--bz-mt', type=float,
                        help='static field in mT (default: -3/2 clock field)')

def build_parser():
    '''the argument parser with all subcommands'''
    parser = ToolkitArgumentParser(
        prog='tlstoolkit',
        description='Coherence model of clock-state Tb:LiYF4 qubits')
    parser.add_argument('--version', action='version',
                        version=f'%(prog)s {__version__}')
    parser.add_argument('--config', help='material configuration file')
    parser.add_argument('--out-dir', default='.',
                        help='directory for outputs (default: .)')
    parser.add_argument('--format', choices=('csv', 'json'), default='csv',
                        help='format of tabular outputs')
    parser.add_argument('--threads', type=int, default=1,
                        help='maximum number of worker processes')
    parser.add_argument('--seed', type=int, default=0,
                        help='master seed of random streams')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='verbose logging, repeat for debug output')
    parser.add_argument('--log', help='append log messages to this file')
    sub = parser.add_subparsers(dest='subcommand', metavar='SUBCOMMAND',
                                parser_class=ToolkitArgumentParser)

    levels = sub.add_parser('levels', help='single ion and pair levels')
    levels.add_argument('--iz', type=HyperfineState,
                        help='restrict to one hyperfine species, eg. -3/2')
    levels.add_argument('--bz-mt', type=float,
                        help='static field in mT (default: -3/2 clock field)')
    levels.add_argument('--dh-mt', type=float, default=0.0,
                        help='internal field offset in mT')
    levels.add_argument('--j-pair-ghz', type=float,
                        help='pair flip-flop coupling in GHz, adds pair levels')
    levels.add_argument('--j-ex-ghz', type=float, default=0.0,
                        help='pair exchange coupling in GHz')

    rates = sub.add_parser('rates', help='flip rates of all species')
    _add_model_flags(rates)
    rates.add_argument('--xlsx', help='also write an Excel workbook')

    kernel = sub.add_parser('kernel', help='dephasing kernels of a channel')
    kernel.add_argument('--gamma', type=int, choices=(3, 6), default=3,
                        help='coupling power law r^-gamma')
    kernel.add_argument('--v0-hz-m', type=float, required=True,
                        help='coupling constant V0 in Hz m^gamma')
    kernel.add_argument('--kappa-hz', type=float, required=True,
                        help='fluctuator flip rate in 1/s')
    kernel.add_argument('--density-m3', type=float,
                        help='fluctuator density in 1/m^3 (default: one '
                        'hyperfine species)')
    kernel.add_argument('--n-pulses', default=PulseList('1'),
                        action=RangeListAction,
                        help='pi-pulse counts, eg. 1-5 (default: 1)')
    _add_time_flags(kernel)

    echo = sub.add_parser('echo', help='composed echo decay')
    _add_model_flags(echo)
    echo.add_argument('--regime', default='single',
                      choices=('single', 'loose_pair', 'nnn_pair'),
                      help='observed transition')
    echo.add_argument('--drive-ghz', type=float,
                      help='drive frequency in GHz (default: regime value)')
    echo.add_argument('--n-pulses', default=PulseList('1'),
                      action=RangeListAction,
                      help='pi-pulse counts, eg. 1-5 (default: 1)')
    _add_time_flags(echo)

    fit_trace = sub.add_parser('fit-trace',
                               help='stretched exponential fit of a trace')
    fit_trace.add_argument('trace', help='trace CSV or xlsx file')
    fit_trace.add_argument('--fix-beta', type=float,
                           help='hold the stretching exponent fixed')
    fit_trace.add_argument('--mims', action='store_true',
                           help='filter fluorine modulation first')
    fit_trace.add_argument('--iz', type=HyperfineState,
                           default=HyperfineState(-1.5),
                           help='observed hyperfine species for --mims')
    fit_trace.add_argument('--unweighted', action='store_true',
                           help='ignore the sigma column')

    fit = sub.add_parser('fit', help='global fit over a (c1, c2) grid')
    fit.add_argument('manifest', help='fit manifest listing trace files')
    fit.add_argument('--c1-range', default='0.2:1.0',
                     help='c1 grid as low:high (default: 0.2:1.0)')
    fit.add_argument('--c2-range', default='0.5:3.0',
                     help='c2 grid as low:high (default: 0.5:3.0)')
    fit.add_argument('--grid', type=int, default=10,
                     help='grid points per axis (default: 10)')
    fit.add_argument('--w-delta-mhz', type=float, default=21.0,
                     help='starting W_delta in MHz (default: 21)')
    fit.add_argument('--weighted', action='store_true',
                     help='weight points by 1/sigma instead of equally')
    fit.add_argument('--no-x-scaling', action='store_true',
                     help='hold W_delta fixed across concentrations')
    fit.add_argument('--mims', action='store_true',
                     help='filter fluorine modulation from every trace first')
    fit.add_argument('--fixed-fluorine', action='store_true',
                     help='keep the configured fluorine parameters')
    fit.add_argument('--xlsx', help='also write an Excel workbook')

    validate = sub.add_parser('mc-validate', help='run a validation suite')
    validate.add_argument('--suite', default='kernels',
                          choices=('all',) + tuple(SUITES),
                          help='suite to run (default: kernels)')
    validate.add_argument('--n-samples', type=int, default=20000,
                          help='Monte Carlo samples per estimate')
    validate.add_argument('--xlsx', help='also write an Excel workbook')

    abundance = sub.add_parser('abundance',
                               help='concentration for a target T2')
    _add_model_flags(abundance)
    abundance.add_argument('--target-t2-us', type=float, required=True,
                           help='target coherence time in microseconds')
    return parser

def _range(text, field):
    try:
        low, high = (float(value) for value in text.split(':'))
    except ValueError as err:
        raise ValidationError(field, f'expected low:high, not "{text}"') \
            from err
    if not 0 < low < high:
        raise ValidationError(field, 'need 0 < low < high')
    return low, high

def _model(args, config):
    '''apply the model flags to the configuration'''
    params = config.params
    if getattr(args, 'x', None) is not None:
        params = params.with_x(args.x)
    disorder = config.disorder
    if getattr(args, 'w_delta_mhz', None) is not None:
        disorder = disorder.with_w_delta(args.w_delta_mhz * 1e6)
    rates = config.rates
    if getattr(args, 'c1', None) is not None or \
            getattr(args, 'c2', None) is not None:
        rates = RateParams(rates.c1 if args.c1 is None else args.c1,
                           rates.c2 if args.c2 is None else args.c2)
    b_z = None if getattr(args, 'bz_mt', None) is None else args.bz_mt * 1e-3
    return params, disorder, rates, b_z

#############################################################################
# Subcommands
#############################################################################
def cmd_levels(args, config, out):
    '''single ion levels, optionally with a pair'''
    params = config.params
    b_z = clock_field(params, -1.5) if args.bz_mt is None else \
        args.bz_mt * 1e-3
    dh = args.dh_mt * 1e-3 * 0.5 * params.zeeman
    rows = []
    for iz, b_iz, energy, m_off, m_diag in level_table(params, b_z, dh):
        if args.iz is not None and iz != args.iz:
            continue
        rows.append({'iz': iz, 'b_z_t': b_z, 'b_clock_t': b_iz,
                     'energy_hz': energy, 'm_off': m_off, 'm_diag': m_diag})
    out.table('levels', rows)
    if args.j_pair_ghz is not None:
        pair = PairConfig(args.j_pair_ghz * 1e9, args.j_ex_ghz * 1e9)
        levels = pair_levels(params, pair, b_z)
        out.json('pair_levels', {'b_z_t': b_z,
                                 'levels_hz': levels.as_dict(),
                                 'observed_transition_hz':
                                 levels.observed_transition})
    return 0

def cmd_rates(args, config, out):
    '''rate table'''
    params, disorder, rates, b_z = _model(args, config)
    table = rate_table(params, disorder, rates, b_z, config.quasi_static_s,
                       n_jobs=args.threads)
    out.table('rates', table.rows())
    if args.xlsx:
        ToolkitXLSX(args.xlsx, out.manifest.digest).generate(table=table)
    return 0

def cmd_kernel(args, config, out):
    '''short, long and crossover kernels of one channel'''
    density = args.density_m3 or config.params.species_density
    channel = DephasingChannel(args.gamma, args.v0_hz_m, args.kappa_hz,
                               density, f'gamma {args.gamma}')
    times = _times(args, config)
    columns = {'t_s': times, 'long': kernel_long(channel, times)}
    summary = {'vbar_hz': vbar(channel), 't_l_s': long_time(channel),
               't_s_s': {}}
    for n in args.n_pulses:
        columns[f'short_N{n}'] = kernel_short(channel, n, times)
        columns[f'crossover_N{n}'] = kernel_crossover(channel, n, times)
        summary['t_s_s'][str(n)] = short_time(channel, n)
    out.curves('kernel', columns)
    out.json('kernel', summary)
    return 0

def cmd_echo(args, config, out):
    '''composed echo curves and 1/e times'''
    params, disorder, rates, b_z = _model(args, config)
    regime = config.regime(args.regime)
    drive = None if args.drive_ghz is None else args.drive_ghz * 1e9
    times = _times(args, config)
    table = rate_table(params, disorder, rates, b_z, config.quasi_static_s,
                       n_jobs=args.threads)
    columns = {'t_s': times}
    summary = {'regime': regime.name, 'x': params.x, 't_1e_s': {}}
    for n in args.n_pulses:
        seq = PulseSequence(n, drive_frequency=drive, b_z=b_z)
        model = EchoModelConfig.from_model(params, disorder, rates,
                                           config.fluorine, regime, seq,
                                           threshold_s=config.quasi_static_s,
                                           table=table)
        columns[f'intensity_N{n}'] = compose_echo(model, seq, times)
        try:
            summary['t_1e_s'][str(n)] = one_over_e_time(model, seq)
        except ConvergenceError as err:
            logger.warning('N=%d: %s', n, err)
            summary['t_1e_s'][str(n)] = None
    out.curves('echo', columns, {'regime': regime.name})
    out.json('echo', summary)
    return 0

def cmd_fit_trace(args, config, out):
    '''fit one trace'''
    trace = read_trace(args.trace)
    result = {'trace': trace.filename}
    fitted = trace
    envelope = np.ones_like(trace.times)
    if args.mims:
        mims = filter_mims(trace, config.params, config.fluorine, args.iz)
        result['mims'] = mims.as_dict()
        fitted = mims.demodulated
        envelope = mims.envelope
    fit = stretched_exp_fit(fitted, args.fix_beta,
                            weighted=not args.unweighted and trace.weighted)
    result['fit'] = fit.as_dict()
    out.json('fit_trace', result)
    out.curves('fit_trace', {'t_s': trace.times,
                             'intensity': trace.intensities,
                             'model': fit.curve(trace.times) * envelope})
    return 0

def cmd_fit(args, config, out):
    '''global fit of a manifest of traces'''
    traces = read_manifest(args.manifest)
    if args.mims:
        traces = [filter_mims(trace, config.params, config.fluorine)
                  .demodulated for trace in traces]
    if args.no_x_scaling:
        config.disorder.scale_with_x = False
    low1, high1 = _range(args.c1_range, 'c1_range')
    low2, high2 = _range(args.c2_range, 'c2_range')
    grid = GridSpec(np.linspace(low1, high1, args.grid),
                    np.linspace(low2, high2, args.grid),
                    w_delta_start=args.w_delta_mhz * 1e6,
                    weighted=args.weighted,
                    fit_fluorine=not args.fixed_fluorine,
                    unit_envelope=args.mims)
    state, surface, table = global_fit(traces, config, grid,
                                       n_jobs=args.threads)
    direction, anisotropy = valley_direction(surface)
    summary = state.as_dict()
    summary['valley'] = {'direction': direction,
                         'anisotropy': anisotropy}
    out.json('fit_state', summary)
    out.table('surface', surface.rows())
    out.table('rates', table.rows())
    for name, curve in fitted_curves(traces, config, state).items():
        trace = next(trace for trace in traces if trace.name == name)
        out.curves(f'curve_{name}', {'t_s': trace.times,
                                     'intensity': trace.intensities,
                                     'model': curve})
    if args.xlsx:
        ToolkitXLSX(args.xlsx, out.manifest.digest).generate(
            table=table, surface=surface, state=state)
    return 0

def cmd_mc_validate(args, config, out):
    '''run validation checks'''
    checks = run_suite(args.suite, config, seed=args.seed,
                       n_samples=args.n_samples, n_jobs=args.threads)
    out.json('validation', {
        'suite': args.suite,
        'seed': args.seed,
        'passed': checks.passed,
        'checks': [record.as_dict() for record in checks],
    })
    for name, columns in sorted(checks.curves.items()):
        out.curves(name, columns)
    if args.xlsx:
        ToolkitXLSX(args.xlsx, out.manifest.digest).generate(checks=checks)
    for record in checks.failures(minimum_severity=5):
        logger.warning('%s.%s outside tolerance (%.3g)', record.suite,
                       record.name, record.deviation)
    return 0

def cmd_abundance(args, config, out):
    '''concentrations reaching a target coherence time'''
    params, disorder, rates, _ = _model(args, config)
    reference = AbundanceCalibration.from_model(
        params, disorder, rates, config.regime('loose_pair'))
    x_single, x_pair, ratio = abundance_tradeoff(args.target_t2_us * 1e-6,
                                                 reference)
    kappa_slope, pair_slope = scaling_slopes(params, disorder, rates)
    out.json('abundance', {
        'reference_x': reference.x_ref,
        't2_single_s': reference.t2_single,
        't2_pair_s': reference.t2_pair,
        'target_t2_s': args.target_t2_us * 1e-6,
        'x_single': x_single,
        'x_pair': x_pair,
        'pair_density_ratio': ratio,
        'kappa_slope': kappa_slope,
        'pair_rate_slope': pair_slope,
    })
    return 0

COMMANDS = {
    'levels': cmd_levels,
    'rates': cmd_rates,
    'kernel': cmd_kernel,
    'echo': cmd_echo,
    'fit-trace': cmd_fit_trace,
    'fit': cmd_fit,
    'mc-validate': cmd_mc_validate,
    'abundance': cmd_abundance,
}

#############################################################################
# run
#############################################################################
def run(argv=None):
    '''run the command line, returning the exit status'''
    parser = build_parser()
    verbose = 0
    try:
        args = parser.parse_args(argv)
        verbose = args.verbose
        setup_logging(args.verbose, args.log)
        if args.subcommand is None:
            raise ValidationError('subcommand', 'expected one of ' +
                                  ', '.join(SUBCOMMANDS))
        if args.threads < 1:
            raise ValidationError('threads', 'must be at least 1')
        config = load_config(args.config)
        os.makedirs(args.out_dir, exist_ok=True)
        flags = {key: value for key, value in vars(args).items()
                 if key not in ('config', 'out_dir', 'seed', 'verbose',
                                'log', 'subcommand')}
        manifest = RunManifest(args.subcommand, flags, config.filenames,
                               args.seed, args.out_dir)
        manifest.write()
        status = COMMANDS[args.subcommand](args, config,
                                           OutputWriter(manifest,
                                                        args.format))
        logger.info('%s finished', args.subcommand)
        return status
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 0
    except (ConvergenceError, PerturbationError):
        print_exception(verbose, 'Numerical method did not converge')
        return 2
    except (ToolkitError, OSError):
        print_exception(verbose)
        return 1

def main():
    '''console entry point'''
    sys.exit(run())

if __name__ == '__main__':
    main()
