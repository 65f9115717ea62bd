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
Global fits of echo traces

The fit runs in stages: fluorine modulation is filtered out of each trace,
then for every (c1, c2) cell of a grid the flip rates are recomputed and
W_delta is optimized with the per-trace amplitude and offset solved as a
linear least squares problem.  Cells are independent and run in parallel.
'''

import logging
import math
import warnings

import numpy as np
from joblib import Parallel, delayed
from scipy import optimize

from .echo import (EchoModelConfig, PulseSequence, compose_echo,
                   stretched_exp, stretched_exp_fit)
from .errors import (ConvergenceError, PerturbationError, ValidationError,
                     require)
from .kernels import mims_couplings, mims_depth, mims_factor, nuclear_zeeman
from .levels import clock_field
from .lookup import CorrelationMap
from .material import FWHM_PER_SIGMA, RateParams
from .rates import rate_table
from .traces import EchoTrace

logger = logging.getLogger(__name__)

# A_nn / B_nn of the fluorine shell couplings
COUPLING_RATIO = 0.51

#############################################################################
# Mims filtering
#############################################################################
class MimsFilter:
    '''Fluorine modulation removed from one trace'''
    # pylint: disable=too-many-arguments
    def __init__(self, envelope, demodulated, omega_f, couplings,
                 flagged=False, decay=None):
        self.envelope = envelope
        self.demodulated = demodulated
        self.omega_f = omega_f
        self.couplings = couplings
        self.flagged = flagged
        self.decay = decay

    @property
    def omega_f_angular(self):
        '''fluorine Larmor frequency in rad/s'''
        return 2.0 * math.pi * self.omega_f

    @property
    def frequencies(self):
        '''(omega_alpha, omega_beta) of the nn shell in Hz'''
        _, omega_alpha, omega_beta = mims_depth(self.omega_f,
                                                self.couplings[0],
                                                self.couplings[1])
        return omega_alpha, omega_beta

    def as_dict(self):
        '''JSON friendly summary'''
        return {
            'omega_f_hz': self.omega_f,
            'a_nn_hz': self.couplings[0],
            'b_nn_hz': self.couplings[1],
            'a_nnn_hz': self.couplings[2],
            'b_nnn_hz': self.couplings[3],
            'unit_envelope': self.flagged,
        }

def _shell_couplings(b_nn, fluorine):
    a_nn = COUPLING_RATIO * b_nn
    return a_nn, b_nn, a_nn / fluorine.ratio_a, b_nn / fluorine.ratio_b

def _modulation_periods(omega_f, n_pulses, t_max):
    return omega_f * t_max / (2.0 if n_pulses == 1 else n_pulses)

def _noise_level(trace):
    '''point to point scatter from second differences'''
    if len(trace) < 3:
        return 0.0
    return float(np.std(np.diff(trace.intensities, 2)) / math.sqrt(6.0))

def filter_mims(trace, params, fluorine, iz=-1.5, min_periods=2.0):
    '''
    Fit I0 exp[-(t/T)^beta] I_mims(t) + c with the fluorine frequency and
    the nn transverse coupling free, the remaining couplings tied to it by
    the shell ratios.  Returns a MimsFilter with the envelope and the trace
    divided by it.
    '''
    b_z = trace.b_z if trace.b_z is not None else clock_field(params, iz)
    n_pulses = trace.n_pulses
    omega_f = fluorine.omega_f if fluorine.omega_f is not None else \
        nuclear_zeeman(params, b_z)
    couplings = mims_couplings(fluorine, params, b_z, iz)
    times = trace.times
    unit = np.ones_like(times)

    predicted = 1.0 - float(np.min(mims_factor(omega_f, couplings, n_pulses,
                                               times)))
    noise = _noise_level(trace)
    amplitude = float(np.max(np.abs(trace.intensities)))
    if predicted * amplitude <= noise or \
            _modulation_periods(omega_f, n_pulses, times[-1]) < min_periods:
        logger.info('%s: modulation depth %.3g below noise %.3g, unit '
                    'envelope', trace.name, predicted * amplitude, noise)
        return MimsFilter(unit, trace, omega_f, couplings, True)

    scale = float(np.median(times))
    b_start = abs(couplings[1])

    def model(t, a, t_c, beta, c, f_ratio, b_ratio):
        shell = _shell_couplings(b_ratio * b_start, fluorine)
        return a * np.exp(-(t / (t_c * scale)) ** beta) * \
            mims_factor(f_ratio * omega_f, shell, n_pulses, t) + c

    try:
        decay = stretched_exp_fit(trace, weighted=False)
        guess = [decay.amplitude, decay.t_char / scale, decay.beta,
                 decay.offset]
    except (ConvergenceError, ValidationError):
        guess = [amplitude, 1.0, 1.0, 0.0]
    bounds = ([0.0, 1e-6, 0.1, -np.inf, 0.5, 0.0],
              [np.inf, np.inf, 3.0, np.inf, 1.5, 10.0])
    guess = list(np.clip(guess, bounds[0][:4], bounds[1][:4]))

    best = None
    for f_start in (0.9, 1.0, 1.1):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', optimize.OptimizeWarning)
                popt, _ = optimize.curve_fit(
                    model, times, trace.intensities,
                    p0=guess + [f_start, 1.0], bounds=bounds, max_nfev=20000)
        except (RuntimeError, ValueError) as err:
            logger.debug('%s: Mims start %.1f failed: %s', trace.name,
                         f_start, err)
            continue
        cost = float(np.sum((model(times, *popt) - trace.intensities) ** 2))
        if best is None or cost < best[0]:
            best = (cost, popt)
    if best is None:
        raise ConvergenceError(f'{trace.name}: Mims envelope fit failed')

    popt = best[1]
    omega_fit = popt[4] * omega_f
    shell = _shell_couplings(popt[5] * b_start, fluorine)
    envelope = mims_factor(omega_fit, shell, n_pulses, times)
    demodulated = trace.replace(
        intensities=trace.intensities / np.maximum(envelope, 1e-3))
    logger.info('%s: omega_F=%.4g Hz, B_nn=%.4g Hz', trace.name, omega_fit,
                shell[1])
    return MimsFilter(envelope, demodulated, omega_fit, shell, False,
                      (popt[0], popt[1] * scale, popt[2], popt[3]))

#############################################################################
# Coupling extraction across a field sweep
#############################################################################
class MimsCouplingFit:
    '''Couplings and 1/e time at one field'''
    def __init__(self, b_z, couplings, t_1e, amplitude):
        self.b_z = b_z
        self.couplings = couplings
        self.t_1e = t_1e
        self.amplitude = amplitude

    def as_dict(self):
        '''JSON friendly row'''
        return {
            'b_z_t': self.b_z,
            'a_nn_hz': self.couplings[0],
            'b_nn_hz': self.couplings[1],
            'a_nnn_hz': self.couplings[2],
            'b_nnn_hz': self.couplings[3],
            't_1e_s': self.t_1e,
        }

def _fit_simple_mims(trace, params, fluorine, iz):
    b_z = trace.b_z
    require(b_z is not None, 'b_z_t', 'field sweep traces need a field')
    omega_f = fluorine.omega_f if fluorine.omega_f is not None else \
        nuclear_zeeman(params, b_z)
    start = abs(mims_couplings(fluorine, params, b_z, iz)[1])
    start = start if start > 0 else 1e5
    times = trace.times
    scale = float(np.median(times))

    def model(t, a, t_1e, b_nn):
        return a * np.exp(-t / (t_1e * scale)) * \
            mims_factor(omega_f, _shell_couplings(b_nn * start, fluorine),
                        trace.n_pulses, t)

    depth = 1.0 - float(np.min(mims_factor(
        omega_f, _shell_couplings(start, fluorine), trace.n_pulses, times)))
    if depth < 0.01:
        raise ConvergenceError(f'{trace.name}: insufficient modulation '
                               f'contrast ({depth:.2g})')
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', optimize.OptimizeWarning)
            popt, _ = optimize.curve_fit(
                model, times, trace.intensities,
                p0=[float(trace.intensities[0]), 1.0, 1.0],
                bounds=([0.0, 1e-6, 0.0], [np.inf, np.inf, 10.0]),
                max_nfev=20000)
    except (RuntimeError, ValueError) as err:
        raise ConvergenceError(f'{trace.name}: Mims coupling fit failed: '
                               f'{err}') from err
    return MimsCouplingFit(b_z, _shell_couplings(popt[2] * start, fluorine),
                           popt[1] * scale, popt[0])

def fit_mims_coupling(traces, params, fluorine, iz=-1.5):
    '''
    Fit exp(-t/T_1e) I_mims(t) to each trace of a field sweep.  Returns the
    per-field fits and the slope dB_nn/dB_z in Hz/T.
    '''
    fits = sorted((_fit_simple_mims(trace, params, fluorine, iz)
                   for trace in traces), key=lambda fit: fit.b_z)
    slope = math.nan
    if len(fits) >= 2:
        fields = np.array([fit.b_z for fit in fits])
        couplings = np.array([fit.couplings[1] for fit in fits])
        slope = float(np.polyfit(fields, couplings, 1)[0])
    return fits, slope

#############################################################################
# Disorder from the pair line shape
#############################################################################
def disorder_from_lineshape(peak_fwhm, correlation='uncorrelated'):
    '''W_delta from the FWHM of a pair peak'''
    require(peak_fwhm > 0, 'peak_fwhm_hz', 'must be positive')
    factor = CorrelationMap()[CorrelationMap().check(correlation,
                                                     'correlation')]
    return factor * peak_fwhm / FWHM_PER_SIGMA

#############################################################################
# Grid and state
#############################################################################
class GridSpec:
    '''
    (c1, c2) grid and W_delta optimizer settings.  fit_fluorine adds a
    second stage at the best cell that refines W_delta together with the
    fluorine parameters the traces constrain.
    unit_envelope leaves the Mims modulation out of every model, for
    traces that were already divided by it.
    '''
    # pylint: disable=too-many-arguments
    def __init__(self, c1_values, c2_values, w_delta_start=21e6,
                 w_delta_bounds=(1e6, 200e6), weighted=False, xatol=1e-3,
                 fatol=1e-10, max_iter=200, fit_fluorine=True,
                 unit_envelope=False):
        self.c1_values = np.asarray(c1_values, dtype=float)
        self.c2_values = np.asarray(c2_values, dtype=float)
        self.w_delta_start = float(w_delta_start)
        self.w_delta_bounds = tuple(float(w) for w in w_delta_bounds)
        self.weighted = bool(weighted)
        self.xatol = xatol
        self.fatol = fatol
        self.max_iter = max_iter
        self.fit_fluorine = bool(fit_fluorine)
        self.unit_envelope = bool(unit_envelope)
        require(self.c1_values.size and np.all(self.c1_values > 0), 'c1',
                'grid needs positive values')
        require(self.c2_values.size and np.all(self.c2_values > 0), 'c2',
                'grid needs positive values')
        low, high = self.w_delta_bounds
        require(0 < low < self.w_delta_start < high, 'w_delta_hz',
                'start must lie inside the bounds')

    @classmethod
    def linear(cls, c1_range=(0.2, 1.0), c2_range=(0.5, 3.0), size=10,
               **kwargs):
        '''evenly spaced size x size grid'''
        return cls(np.linspace(*c1_range, size), np.linspace(*c2_range, size),
                   **kwargs)

    @property
    def shape(self):
        '''(len c1, len c2)'''
        return len(self.c1_values), len(self.c2_values)

class FitState:
    '''Global fit parameters and the per-trace nuisance parameters'''
    # pylint: disable=too-many-arguments
    def __init__(self, c1, c2, w_delta, fluorine, nuisance, residual_sum,
                 reference_x=0.001, fitted_fluorine=(), unit_envelope=False):
        self.c1 = float(c1)
        self.c2 = float(c2)
        self.w_delta = float(w_delta)
        self.fluorine = fluorine
        self.nuisance = dict(nuisance)
        self.residual_sum = float(residual_sum)
        self.reference_x = reference_x
        self.fitted_fluorine = tuple(fitted_fluorine)
        self.unit_envelope = bool(unit_envelope)

    @property
    def rates(self):
        '''RateParams of the state'''
        return RateParams(self.c1, self.c2)

    def as_dict(self):
        '''JSON friendly summary'''
        return {
            'c1': self.c1,
            'c2': self.c2,
            'w_delta_hz': self.w_delta,
            'reference_x': self.reference_x,
            'residual_sum': self.residual_sum,
            'fluorine': {key: value for key, value in
                         self.fluorine.__dict__.items()},
            'fluorine_fitted': list(self.fitted_fluorine),
            'unit_envelope': self.unit_envelope,
            'traces': {name: {'amplitude': values[0], 'offset': values[1]}
                       for name, values in self.nuisance.items()},
        }

    def __repr__(self):
        return f'FitState<c1={self.c1:.3g}, c2={self.c2:.3g}, ' \
               f'W={self.w_delta:.4g} Hz, residual={self.residual_sum:.4g}>'

class ResidualSurface:
    '''Best W_delta and residual for every (c1, c2) cell'''
    def __init__(self, c1_values, c2_values):
        self.c1_values = np.asarray(c1_values, dtype=float)
        self.c2_values = np.asarray(c2_values, dtype=float)
        shape = (len(self.c1_values), len(self.c2_values))
        self.residuals = np.full(shape, np.nan)
        self.w_delta = np.full(shape, np.nan)
        self.messages = {}

    @property
    def valid(self):
        '''mask of converged cells'''
        return np.isfinite(self.residuals)

    def record(self, index, w_delta, residual, message=None):
        '''store the result of one cell'''
        self.w_delta[index] = w_delta
        self.residuals[index] = residual
        if message:
            self.messages[index] = message

    def minimum(self):
        '''index of the best valid cell'''
        if not np.any(self.valid):
            raise ConvergenceError('no grid cell converged')
        masked = np.where(self.valid, self.residuals, np.inf)
        return np.unravel_index(int(np.argmin(masked)), masked.shape)

    def rows(self):
        '''one dict per cell'''
        rows = []
        for i, c1 in enumerate(self.c1_values):
            for j, c2 in enumerate(self.c2_values):
                rows.append({
                    'c1': c1, 'c2': c2,
                    'w_delta_hz': self.w_delta[i, j],
                    'residual_sum': self.residuals[i, j],
                    'valid': bool(self.valid[i, j]),
                })
        return rows

def valley_direction(surface, tolerance=0.5):
    '''
    Principal direction of the low residual region, cells within
    (1 + tolerance) of the minimum.  Returns ((dc1, dc2) unit vector in grid
    units, anisotropy as the ratio of the principal spreads).
    '''
    best = surface.residuals[surface.minimum()]
    c1_grid, c2_grid = np.meshgrid(surface.c1_values, surface.c2_values,
                                   indexing='ij')
    low = surface.valid & (surface.residuals <= best * (1.0 + tolerance))
    points = np.column_stack([c1_grid[low], c2_grid[low]])
    if len(points) < 3:
        return np.array([math.nan, math.nan]), math.nan
    span = np.array([np.ptp(surface.c1_values) or 1.0,
                     np.ptp(surface.c2_values) or 1.0])
    covariance = np.cov((points / span).T)
    values, vectors = np.linalg.eigh(covariance)
    direction = vectors[:, -1] * span
    direction /= np.linalg.norm(direction)
    if direction[0] < 0:
        direction = -direction
    anisotropy = math.sqrt(values[-1] / values[0]) if values[0] > 0 else \
        math.inf
    return direction, anisotropy

def degradation_ratio(surface, c1_split=0.6):
    '''best residual for c1 above c1_split over the best below it'''
    above = surface.c1_values > c1_split
    if not np.any(above) or np.all(above):
        return math.nan
    masked = np.where(surface.valid, surface.residuals, np.inf)
    return float(np.min(masked[above]) / np.min(masked[~above]))

#############################################################################
# Trace models
#############################################################################
def sequence_for(trace):
    '''PulseSequence described by trace metadata'''
    return PulseSequence(trace.n_pulses, drive_frequency=trace.drive_frequency,
                         b_z=trace.b_z)

def trace_shape(trace, config, rates, disorder, tables=None, t_scale=1.0,
                fluorine=None, unit_envelope=False):
    '''unit amplitude model of a trace, times optionally stretched'''
    params = config.params.with_x(trace.x)
    seq = sequence_for(trace)
    key = (trace.x, seq.field(params))
    if tables is None:
        tables = {}
    if key not in tables:
        tables[key] = rate_table(params, disorder, rates, key[1],
                                 config.quasi_static_s)
    model = EchoModelConfig.from_model(
        params, disorder, rates, fluorine or config.fluorine,
        config.regime(trace.regime), seq, threshold_s=config.quasi_static_s,
        table=tables[key], unit_envelope=unit_envelope)
    return compose_echo(model, seq, trace.times / t_scale)

def solve_nuisance(shape, trace, weighted=False):
    '''least squares (I0, c_off) for a model shape; returns (coeffs, sse)'''
    weights = 1.0 / trace.sigmas if weighted else np.ones_like(shape)
    design = np.column_stack([shape, np.ones_like(shape)])
    coeffs, *_ = np.linalg.lstsq(design * weights[:, None],
                                 trace.intensities * weights, rcond=None)
    residual = (trace.intensities - design @ coeffs) * weights
    return (float(coeffs[0]), float(coeffs[1])), \
        math.fsum(residual * residual)

def residual_sum(traces, config, rates, disorder, weighted=False,
                 fluorine=None, unit_envelope=False):
    '''total squared residual with nuisance parameters solved per trace'''
    tables = {}
    nuisance = {}
    parts = []
    for trace in traces:
        shape = trace_shape(trace, config, rates, disorder, tables,
                            fluorine=fluorine, unit_envelope=unit_envelope)
        nuisance[trace.name], sse = solve_nuisance(shape, trace, weighted)
        parts.append(sse)
    return math.fsum(sorted(parts)), nuisance

def _fit_cell(index, c1, c2, traces, config, grid):
    rates = RateParams(c1, c2)
    low, high = (math.log(w) for w in grid.w_delta_bounds)

    def objective(point):
        log_w = float(point[0])
        if not low <= log_w <= high:
            return math.inf
        disorder = config.disorder.with_w_delta(math.exp(log_w))
        try:
            value, _ = residual_sum(traces, config, rates, disorder,
                                    grid.weighted,
                                    unit_envelope=grid.unit_envelope)
        except (ConvergenceError, PerturbationError) as err:
            logger.debug('cell %s at W=%.4g: %s', index, math.exp(log_w), err)
            return math.inf
        return value

    try:
        result = optimize.minimize(
            objective, [math.log(grid.w_delta_start)], method='Nelder-Mead',
            options={'xatol': grid.xatol, 'fatol': grid.fatol,
                     'maxiter': grid.max_iter,
                     'initial_simplex': [[math.log(grid.w_delta_start)],
                                         [math.log(grid.w_delta_start) +
                                          0.3]]})
    except (ConvergenceError, ValidationError) as err:
        return index, math.nan, math.nan, str(err)
    if not math.isfinite(result.fun):
        return index, math.nan, math.nan, 'no finite residual'
    message = None if result.success else result.message
    logger.info('cell c1=%.3g c2=%.3g: W=%.4g Hz residual=%.4g', c1, c2,
                math.exp(result.x[0]), result.fun)
    return index, math.exp(result.x[0]), float(result.fun), message

#############################################################################
# Fluorine refinement
#############################################################################
# log range around the starting values the refinement may explore
FLUORINE_SPAN = 3.0

def free_fluorine(traces):
    '''
    Fluorine parameters a set of traces constrains: T_F and beta_F through
    single ion and loose pair traces, kappa_F and the scale of the
    longitudinal shell couplings through nnn pair traces.
    '''
    regimes = {trace.regime for trace in traces}
    names = []
    if regimes - {'nnn_pair'}:
        names += ['t_f', 'beta_f']
    if 'nnn_pair' in regimes:
        names += ['kappa_f', 'j_par']
    return tuple(names)

def _fluorine_point(fluorine, names):
    point = []
    for name in names:
        if name == 'j_par':
            point.append(0.0)
        else:
            # kappa_F = 0 has no log; start the search at 1/s
            point.append(math.log(max(getattr(fluorine, name), 1.0)))
    return point

def fluorine_at(base, names, point):
    '''copy of base with the named parameters set from log values'''
    fields = {}
    for name, value in zip(names, point):
        if name == 'j_par':
            scale = math.exp(value)
            fields['j_par_nn'] = base.j_par_nn * scale
            fields['j_par_nnn'] = base.j_par_nnn * scale
        else:
            fields[name] = math.exp(value)
    return base.copy(**fields)

def refine_fluorine(traces, config, rates, w_delta, grid):
    '''
    Nelder-Mead over log W_delta and the free fluorine parameters with the
    rate constants fixed.  Returns (FluorineModel, W_delta, names).
    '''
    names = free_fluorine(traces)
    base = config.fluorine
    start = [math.log(w_delta)] + _fluorine_point(base, names)
    low, high = (math.log(w) for w in grid.w_delta_bounds)

    def objective(point):
        if not low <= point[0] <= high:
            return math.inf
        if any(abs(value - origin) > FLUORINE_SPAN
               for value, origin in zip(point[1:], start[1:])):
            return math.inf
        try:
            fluorine = fluorine_at(base, names, point[1:])
            value, _ = residual_sum(
                traces, config, rates,
                config.disorder.with_w_delta(math.exp(point[0])),
                grid.weighted, fluorine, grid.unit_envelope)
        except (ConvergenceError, PerturbationError, ValidationError) as err:
            logger.debug('fluorine %s: %s', point, err)
            return math.inf
        return value

    simplex = [start] + [[value + (0.2 if i == k else 0.0)
                          for i, value in enumerate(start)]
                         for k in range(len(start))]
    result = optimize.minimize(
        objective, start, method='Nelder-Mead',
        options={'xatol': grid.xatol, 'fatol': grid.fatol,
                 'maxiter': grid.max_iter * len(start),
                 'initial_simplex': simplex})
    if not math.isfinite(result.fun):
        logger.warning('fluorine refinement found no finite residual; '
                       'keeping the configured model')
        return base, w_delta, ()
    if not result.success:
        logger.warning('fluorine refinement: %s', result.message)
    fluorine = fluorine_at(base, names, result.x[1:])
    logger.info('refined %r at W=%.4g Hz, residual=%.4g', fluorine,
                math.exp(result.x[0]), result.fun)
    return fluorine, math.exp(result.x[0]), names

def global_fit(traces, config, grid, n_jobs=1):
    '''
    Scan the (c1, c2) grid, optimizing W_delta in every cell, then refine
    the fluorine parameters at the best cell.  Returns (FitState,
    ResidualSurface, RateTable at the reference concentration).
    '''
    traces = list(traces)
    require(traces, 'traces', 'nothing to fit')
    for trace in traces:
        trace.require_metadata()
    if len(set(trace.x for trace in traces)) < 2:
        logger.warning('all traces share one concentration; c1 and c2 are '
                       'poorly constrained')

    surface = ResidualSurface(grid.c1_values, grid.c2_values)
    cells = [((i, j), c1, c2) for i, c1 in enumerate(grid.c1_values)
             for j, c2 in enumerate(grid.c2_values)]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_fit_cell)(index, c1, c2, traces, config, grid)
        for index, c1, c2 in cells)
    for index, w_delta, residual, message in sorted(results,
                                                    key=lambda r: r[0]):
        surface.record(index, w_delta, residual, message)
        if not math.isfinite(residual):
            logger.warning('grid cell c1=%.3g c2=%.3g invalid: %s',
                           grid.c1_values[index[0]], grid.c2_values[index[1]],
                           message)

    best = surface.minimum()
    c1 = grid.c1_values[best[0]]
    c2 = grid.c2_values[best[1]]
    rates = RateParams(c1, c2)
    fluorine, w_delta, names = config.fluorine, surface.w_delta[best], ()
    if grid.fit_fluorine:
        fluorine, w_delta, names = refine_fluorine(traces, config, rates,
                                                   w_delta, grid)
    disorder = config.disorder.with_w_delta(w_delta)
    total, nuisance = residual_sum(traces, config, rates, disorder,
                                   grid.weighted, fluorine,
                                   grid.unit_envelope)
    state = FitState(c1, c2, disorder.w_delta, fluorine, nuisance, total,
                     disorder.reference_x, names, grid.unit_envelope)
    params = config.params.with_x(disorder.reference_x)
    table = rate_table(params, disorder, rates, None, config.quasi_static_s,
                       n_jobs=1)
    return state, surface, table

def fitted_curves(traces, config, state):
    '''model curve of every trace at a fit state, keyed by trace name'''
    disorder = config.disorder.with_w_delta(state.w_delta)
    tables = {}
    curves = {}
    for trace in traces:
        shape = trace_shape(trace, config, state.rates, disorder, tables,
                            fluorine=state.fluorine,
                            unit_envelope=state.unit_envelope)
        amplitude, offset = state.nuisance[trace.name]
        curves[trace.name] = amplitude * shape + offset
    return curves

#############################################################################
# Synthetic data and sensitivity
#############################################################################
def synthesize_trace(config, regime, x, n_pulses, times, rates=None,
                     disorder=None, noise=0.01, seed=0, amplitude=1.0,
                     offset=0.0, b_z=None, drive_frequency=None, name=None):
    '''model trace with Gaussian noise from a seeded generator'''
    metadata = {'x': x, 'n_pulses': n_pulses, 'regime': regime,
                'name': name or f'{regime}-x{x:g}-N{n_pulses}'}
    if b_z is not None:
        metadata['b_z_t'] = b_z
    if drive_frequency is not None:
        metadata['drive_frequency_hz'] = drive_frequency
    times = np.asarray(times, dtype=float)
    trace = EchoTrace(times, np.zeros_like(times), metadata=metadata)
    shape = trace_shape(trace, config, rates or config.rates,
                        disorder or config.disorder)
    values = amplitude * shape + offset
    if noise:
        values = values + np.random.default_rng(seed).normal(
            0.0, noise * amplitude, len(times))
    return trace.replace(intensities=values)

def synthesize_mims_trace(omega_f, couplings, n_pulses, times, t_char,
                          beta=1.0, b_z=None, noise=0.0, seed=0):
    '''stretched decay times a Mims envelope with explicit couplings'''
    times = np.asarray(times, dtype=float)
    values = stretched_exp(times, 1.0, t_char, beta, 0.0) * \
        mims_factor(omega_f, couplings, n_pulses, times)
    if noise:
        values = values + np.random.default_rng(seed).normal(0.0, noise,
                                                             len(times))
    metadata = {'n_pulses': n_pulses, 'regime': 'single', 'x': 0.001}
    if b_z is not None:
        metadata['b_z_t'] = b_z
    return EchoTrace(times, values, metadata=metadata)

def sensitivity_check(traces, config, state, factor=2.0):
    '''
    Refit the nuisance parameters with every model time scale multiplied by
    factor.  Returns (residual at the state, perturbed residual); the
    perturbed one must be larger if amplitude and offset cannot absorb the
    regime physics.
    '''
    disorder = config.disorder.with_w_delta(state.w_delta)
    tables = {}
    base = []
    perturbed = []
    for trace in traces:
        shape = trace_shape(trace, config, state.rates, disorder, tables,
                            fluorine=state.fluorine,
                            unit_envelope=state.unit_envelope)
        base.append(solve_nuisance(shape, trace)[1])
        stretched = trace_shape(trace, config, state.rates, disorder, tables,
                                t_scale=factor, fluorine=state.fluorine,
                                unit_envelope=state.unit_envelope)
        perturbed.append(solve_nuisance(stretched, trace)[1])
    return math.fsum(base), math.fsum(perturbed)
