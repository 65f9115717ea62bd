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
'''Echo composition under Hahn and CPMG sequences

The echo intensity factorizes as

    I(t) = I0 I_mims(t) I_F(t) prod_iz I_Tb,iz(t) + c_off

where every Tb species contributes the strongest of its lifetime, ring
exchange and magnetic suppression at each time.
'''

import logging
import math
import warnings

import numpy as np
from scipy import integrate, interpolate, optimize

from .errors import ConvergenceError, ValidationError, require
from .kernels import (CrossoverShape, DephasingChannel, FluorineModel,
                      fluorine_loose, fluorine_nnn, kernel_crossover,
                      long_time, mims_envelope)
from .levels import clock_field, level_energy, matrix_elements, \
    neighbor_moment
from .lookup import RegimeMap
from .material import HyperfineState, as_state
from .rates import (decay_suppression_single, golden_rule_T1,
                    pair_decay_suppression, pair_T1, rate_table,
                    species_alpha)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

#############################################################################
# PulseSequence
#############################################################################
class PulseSequence:
    '''N pi-pulses at (2n-1) tau with detection at t = 2 N tau'''
    def __init__(self, n_pulses=1, total_time=None, drive_frequency=None,
                 b_z=None):
        self.n_pulses = int(n_pulses)
        self.total_time = None if total_time is None else float(total_time)
        self.drive_frequency = None if drive_frequency is None else \
            float(drive_frequency)
        self.b_z = None if b_z is None else float(b_z)
        require(self.n_pulses >= 1, 'n_pulses', 'must be at least 1')
        if self.total_time is not None:
            require(self.total_time > 0, 'total_time', 'must be positive')

    @property
    def tau(self):
        '''half the spacing between pi-pulses'''
        if self.total_time is None:
            raise ValidationError('total_time', 'sequence has no total time')
        return self.total_time / (2 * self.n_pulses)

    @property
    def pulse_times(self):
        '''times of the pi-pulses'''
        return np.array([(2 * n - 1) * self.tau
                         for n in range(1, self.n_pulses + 1)])

    def field(self, params, iz=-1.5):
        '''static field, by default the clock field of the observed species'''
        return clock_field(params, iz) if self.b_z is None else self.b_z

    def with_pulses(self, n_pulses):
        '''copy with another pulse count'''
        return PulseSequence(n_pulses, self.total_time, self.drive_frequency,
                             self.b_z)

    def __repr__(self):
        return f'PulseSequence<N={self.n_pulses}, t={self.total_time}, ' \
               f'drive={self.drive_frequency}, B={self.b_z}>'

#############################################################################
# PairRegime
#############################################################################
class PairRegime:
    '''Measurement regime: detuning and moment of the observed transition'''
    def __init__(self, name, detuning, moment=None):
        self.name = RegimeMap().check(name, 'regime')
        self.detuning = float(detuning)
        self.moment = None if moment is None else float(moment)

    @property
    def is_pair(self):
        '''whether the observed transition belongs to a pair'''
        return self.name != 'single'

    def observed_moment(self, params, disorder):
        '''moment of the observed transition'''
        if self.moment is not None:
            return self.moment
        return neighbor_moment(params, -1.5, clock_field(params, -1.5),
                               disorder.clock_hwhm * 0.5 * params.zeeman)

    def __repr__(self):
        return f'PairRegime<{self.name}, detuning={self.detuning:.4g}, ' \
               f'moment={self.moment}>'

def default_regimes():
    '''regimes with the shipped detunings and pair moments'''
    return {
        'single': PairRegime('single', 0.0),
        'loose_pair': PairRegime('loose_pair', -0.5e9, 0.0016),
        'nnn_pair': PairRegime('nnn_pair', 7.61e9, 0.00098),
    }

def build_channels(params, disorder, rates, regime, seq, table=None,
                   threshold_s=1.0):
    '''
    Ring exchange (pairs only) and magnetic channels for every neighbouring
    species.  Returns {HyperfineState: [DephasingChannel, ...]}.
    '''
    disorder_x = disorder.at(params.x)
    b_z = seq.field(params)
    if table is None:
        table = rate_table(params, disorder, rates, b_z, threshold_s)
    drive = drive_frequency(params, regime, seq)
    observed_moment = regime.observed_moment(params, disorder_x)
    dh = disorder_x.clock_hwhm * 0.5 * params.zeeman
    density = params.species_density
    channels = {}
    for iz in HyperfineState.all():
        entry = table[iz]
        kappa = 0.0 if entry.quasi_static else entry.kappa
        species = []
        if regime.is_pair:
            m_off, _ = matrix_elements(params, iz, b_z)
            detuning = abs(drive - level_energy(params, iz, b_z))
            if detuning > 0:
                v0 = params.dipolar_constant ** 2 * m_off ** 2 / \
                    (2.0 * detuning)
                species.append(DephasingChannel(6, v0, kappa, density,
                                                f'ring {iz}'))
        moment = neighbor_moment(params, iz, b_z, dh)
        v0 = params.dipolar_constant * observed_moment * moment
        species.append(DephasingChannel(3, v0, kappa, density,
                                        f'magnetic {iz}'))
        channels[iz] = species
    return channels

def drive_frequency(params, regime, seq):
    '''observed transition frequency in Hz'''
    if seq.drive_frequency is not None:
        return seq.drive_frequency
    return params.delta + regime.detuning

#############################################################################
# Lifetimes
#############################################################################
class Lifetime:
    '''
    Decay of the observed excitation into the resonant partners of one
    species.  tau_s is the flip time of those partners, T1 the averaged
    golden rule lifetime.  Decay into another species is always the
    stretched form since the excitation only reaches it through the far
    tail of its line.
    '''
    def __init__(self, tau_s=math.inf, T1=math.inf, stretched=False):
        self.tau_s = float(tau_s)
        self.T1 = float(T1)
        self.stretched = bool(stretched)

    @property
    def finite(self):
        '''whether this decay does anything'''
        return math.isfinite(self.tau_s) and math.isfinite(self.T1)

    def suppression(self, t):
        '''decay factor at times t'''
        if self.stretched:
            return pair_decay_suppression(t, self.T1)
        return decay_suppression_single(t, self.tau_s, self.T1)

    def __repr__(self):
        return f'Lifetime<tau_s={self.tau_s:.4g}, T1={self.T1:.4g}, ' \
               f'stretched={self.stretched}>'

def species_lifetime(params, disorder, table, regime, seq, iz, observed=-1.5):
    '''Lifetime of the observed transition against decay into species iz'''
    iz = as_state(iz)
    kappa = table.kappa(iz)
    if kappa == 0:
        return Lifetime()
    tau_s = 1.0 / kappa
    target = drive_frequency(params, regime, seq)
    golden_rule = pair_T1 if regime.is_pair else golden_rule_T1
    if iz == as_state(observed):
        return Lifetime(tau_s, golden_rule(params, disorder, target, tau_s),
                        regime.is_pair)
    b_z = seq.field(params, observed)
    _, hopping, width = species_alpha(params, disorder, iz, b_z)
    T1 = golden_rule(params, disorder, target, tau_s, width=width,
                     hopping=hopping, center=level_energy(params, iz, b_z))
    return Lifetime(tau_s, T1, stretched=True)

#############################################################################
# EchoModelConfig
#############################################################################
class EchoModelConfig:
    '''
    Channels, lifetimes and fluorine model of one echo measurement.
    lifetimes maps HyperfineState -> Lifetime; tau_s and T1 seed the
    lifetime of the observed species when it is not in the map.  With
    unit_envelope the Mims modulation is left out, for traces that were
    already divided by it.
    '''
    # pylint: disable=too-many-instance-attributes,too-many-arguments
    def __init__(self, channels, fluorine, regime, params, tau_s=math.inf,
                 T1=math.inf, amplitude=1.0, offset=0.0, shape=None,
                 observed=-1.5, lifetimes=None, unit_envelope=False):
        self.channels = {as_state(iz): list(value)
                         for iz, value in channels.items()}
        self.fluorine = fluorine or FluorineModel()
        self.regime = regime
        self.params = params
        self.amplitude = float(amplitude)
        self.offset = float(offset)
        self.shape = shape or CrossoverShape()
        self.observed = as_state(observed)
        self.unit_envelope = bool(unit_envelope)
        self.lifetimes = {as_state(iz): value
                          for iz, value in (lifetimes or {}).items()}
        if self.observed not in self.lifetimes:
            self.lifetimes[self.observed] = Lifetime(tau_s, T1,
                                                   regime.is_pair)
        if len(self.channels) != len(channels):
            raise ValidationError('channels', 'duplicate hyperfine species')

    @property
    def tau_s(self):
        '''flip time of the observed species'''
        return self.lifetimes.get(self.observed, Lifetime()).tau_s

    @property
    def T1(self):
        '''lifetime of the observed transition against its own species'''
        return self.lifetimes.get(self.observed, Lifetime()).T1

    @classmethod
    def from_model(cls, params, disorder, rates, fluorine, regime, seq,
                   amplitude=1.0, offset=0.0, shape=None, threshold_s=1.0,
                   table=None, unit_envelope=False):
        '''derive channels and lifetimes from the rate model'''
        b_z = seq.field(params)
        if table is None:
            table = rate_table(params, disorder, rates, b_z, threshold_s)
        channels = build_channels(params, disorder, rates, regime, seq,
                                  table, threshold_s)
        lifetimes = {}
        for iz in HyperfineState.all():
            if table[iz].quasi_static:
                continue
            lifetimes[iz] = species_lifetime(params, disorder, table, regime,
                                             seq, iz)
            logger.debug('echo model %s: decay into %s %r', regime.name, iz,
                         lifetimes[iz])
        return cls(channels, fluorine, regime, params, amplitude=amplitude,
                   offset=offset, shape=shape, lifetimes=lifetimes,
                   unit_envelope=unit_envelope)

    def __repr__(self):
        return f'EchoModelConfig<{self.regime.name}, tau_s={self.tau_s:.4g},' \
               f' T1={self.T1:.4g}, I0={self.amplitude}, c={self.offset}>'

def lifetime_suppression(config, t, iz=None):
    '''decay of the observed transition into species iz, default its own'''
    iz = config.observed if iz is None else as_state(iz)
    return config.lifetimes.get(iz, Lifetime()).suppression(t)

def tb_suppression(config, seq, iz, t):
    '''strongest suppression among the channels of one species'''
    t = np.asarray(t, dtype=float)
    iz = as_state(iz)
    factors = [np.ones_like(t)]
    if iz in config.lifetimes:
        factors.append(lifetime_suppression(config, t, iz))
    for channel in config.channels.get(iz, []):
        factors.append(kernel_crossover(channel, seq.n_pulses, t,
                                        config.shape))
    return np.minimum.reduce(factors)

def fluorine_suppression(config, seq, t):
    '''I_F for the regime: shell product for nnn pairs, stretched otherwise'''
    if config.regime.name == 'nnn_pair':
        return fluorine_nnn(config.fluorine, seq.n_pulses, t)
    return fluorine_loose(config.fluorine.t_f, config.fluorine.beta_f, t)

def compose_echo(config, seq, t):
    '''full echo intensity at total times t'''
    t = np.asarray(t, dtype=float)
    value = fluorine_suppression(config, seq, t)
    if not config.unit_envelope:
        b_z = seq.field(config.params, config.observed)
        value = value * mims_envelope(config.fluorine, config.params, b_z,
                                      config.observed, seq.n_pulses, t)
    for iz in sorted(config.channels):
        value = value * tb_suppression(config, seq, iz, t)
    return config.amplitude * value + config.offset

def time_grid(t_min=1e-8, t_max=1e-4, per_decade=64):
    '''logarithmic grid with per_decade points per decade'''
    require(0 < t_min < t_max, 't_min', 'need 0 < t_min < t_max')
    points = int(round(math.log10(t_max / t_min) * per_decade)) + 1
    return np.logspace(math.log10(t_min), math.log10(t_max), max(points, 2))

def echo_curve(config, seq, times=None):
    '''returns (times, intensities) on a grid'''
    times = time_grid() if times is None else np.asarray(times, dtype=float)
    return times, compose_echo(config, seq, times)

def one_over_e_time(config, seq, t_min=1e-9, t_max=1e-3):
    '''first time where the normalized echo falls to 1/e'''
    times = time_grid(t_min, t_max, 64)

    def normalized(t):
        return (compose_echo(config, seq, t) - config.offset) / \
            config.amplitude - math.exp(-1.0)

    values = normalized(times)
    below = np.nonzero(values <= 0)[0]
    if below.size == 0:
        raise ConvergenceError(f'echo does not reach 1/e before {t_max} s')
    index = below[0]
    if index == 0:
        return float(times[0])
    return optimize.brentq(lambda t: float(normalized(t)), times[index - 1],
                           times[index], xtol=1e-15, rtol=1e-10)

#############################################################################
# Stretched exponential fits
#############################################################################
class StretchedExpFit:
    '''Result of a stretched exponential fit'''
    def __init__(self, values, errors, covariance, fixed_beta=None):
        self.amplitude, self.t_char, self.beta, self.offset = values
        self.errors = dict(zip(('amplitude', 't_char', 'beta', 'offset'),
                               errors))
        self.covariance = covariance
        self.fixed_beta = fixed_beta

    def curve(self, t):
        '''model evaluated at t'''
        return stretched_exp(np.asarray(t, dtype=float), self.amplitude,
                             self.t_char, self.beta, self.offset)

    def as_dict(self):
        '''returns a JSON friendly summary'''
        return {
            'amplitude': self.amplitude, 'amplitude_err':
            self.errors['amplitude'],
            't_char_s': self.t_char, 't_char_err_s': self.errors['t_char'],
            'beta': self.beta, 'beta_err': self.errors['beta'],
            'offset': self.offset, 'offset_err': self.errors['offset'],
            'beta_fixed': self.fixed_beta is not None,
        }

    def __repr__(self):
        return f'StretchedExpFit<T={self.t_char:.4g}, beta={self.beta:.3g}>'

def stretched_exp(t, amplitude, t_char, beta, offset):
    '''I0 exp[-(t/T)^beta] + c_off'''
    return amplitude * np.exp(-(np.abs(t) / t_char) ** beta) + offset

def _initial_guess(times, values):
    '''T_char from the 1/e crossing of the monotone envelope, beta from a
    two point log-log slope'''
    envelope = np.minimum.accumulate(values)
    start = envelope[0]
    offset = min(0.0, float(envelope[-1]))
    scaled = (envelope - offset) / (start - offset)
    smooth = interpolate.PchipInterpolator(times, scaled)
    dense = np.geomspace(times[times > 0][0], times[-1], 512)
    curve = smooth(dense)

    def crossing(level):
        below = np.nonzero(curve <= level)[0]
        return dense[below[0]] if below.size else dense[-1]

    t_char = crossing(math.exp(-1.0))
    t_hi, t_lo = crossing(0.8), crossing(0.3)
    beta = 1.0
    if t_lo > t_hi:
        beta = (math.log(-math.log(0.3)) - math.log(-math.log(0.8))) / \
            math.log(t_lo / t_hi)
    return start - offset, t_char, float(np.clip(beta, 0.2, 2.9)), offset

def stretched_exp_fit(trace, fix_beta=None, weighted=True):
    '''weighted least squares fit of I0 exp[-(t/T)^beta] + c_off'''
    times = np.asarray(trace.times, dtype=float)
    values = np.asarray(trace.intensities, dtype=float)
    sigmas = trace.sigmas if weighted else None
    if len(times) < 8:
        raise ValidationError('times', 'need at least 8 points for a fit',
                              trace.filename)
    positive = times[times > 0]
    if positive.size < 2 or positive[-1] < 10 * positive[0]:
        raise ValidationError('times', 'fit window must span a decade',
                              trace.filename)
    if (values.max() - values.min()) < 0.2 * abs(values.max()):
        raise ConvergenceError('stretched exponential fit is ill-conditioned:'
                               ' decay below 20% over the window')

    scale = float(np.median(positive))
    amplitude, t_char, beta, offset = _initial_guess(times, values)
    if fix_beta is not None:
        def model(t, a, t_c, c):
            return stretched_exp(t, a, t_c, fix_beta, c)
        guess = [amplitude, t_char / scale, offset]
        bounds = ([0.0, 0.0, -np.inf], [np.inf, np.inf, np.inf])
    else:
        def model(t, a, t_c, b, c):
            return stretched_exp(t, a, t_c, b, c)
        guess = [amplitude, t_char / scale, beta, offset]
        bounds = ([0.0, 0.0, 0.1, -np.inf], [np.inf, np.inf, 3.0, np.inf])

    try:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', optimize.OptimizeWarning)
            popt, pcov = optimize.curve_fit(
                model, times / scale, values, p0=guess, sigma=sigmas,
                absolute_sigma=sigmas is not None, bounds=bounds,
                max_nfev=20000)
    except (RuntimeError, ValueError) as err:
        raise ConvergenceError(f'stretched exponential fit failed: {err}')
    errors = np.sqrt(np.diag(pcov))
    if not np.all(np.isfinite(errors)):
        raise ConvergenceError('stretched exponential fit is ill-conditioned')

    if fix_beta is not None:
        popt = np.insert(popt, 2, fix_beta)
        errors = np.insert(errors, 2, 0.0)
        pcov = np.insert(np.insert(pcov, 2, 0.0, axis=0), 2, 0.0, axis=1)
    popt[1] *= scale
    errors[1] *= scale
    pcov[1, :] *= scale
    pcov[:, 1] *= scale
    return StretchedExpFit(popt, errors, pcov, fix_beta)

#############################################################################
# Pair Rabi oscillations
#############################################################################
class RabiConfig:
    '''Rabi drive of an inhomogeneously broadened pair line'''
    def __init__(self, rabi_frequency, w_pair, pulse_length):
        self.rabi_frequency = float(rabi_frequency)
        self.w_pair = float(w_pair)
        self.pulse_length = float(pulse_length)
        require(self.rabi_frequency > 0, 'rabi_frequency_hz',
                'must be positive')
        require(self.w_pair >= 0, 'w_pair_hz', 'must not be negative')
        require(self.pulse_length >= 0, 't_p_s', 'must not be negative')

    def at(self, pulse_length):
        '''copy with another pulse length'''
        return RabiConfig(self.rabi_frequency, self.w_pair, pulse_length)

def rabi_pair(config):
    '''
    Gaussian average of (Omega / Omega_eff) sin(Omega_eff t_p) over the
    detuning distribution of the pair line
    '''
    omega = TWO_PI * config.rabi_frequency
    width = TWO_PI * config.w_pair
    t_p = config.pulse_length
    if width == 0:
        return math.sin(omega * t_p)

    def integrand(u):
        effective = math.hypot(omega, width * u)
        return 2.0 * math.exp(-0.5 * u * u) / math.sqrt(TWO_PI) * \
            omega / effective * math.sin(effective * t_p)

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', integrate.IntegrationWarning)
        result = integrate.quad(integrand, 0.0, 9.0, epsabs=1e-10,
                                epsrel=1e-8, limit=5000, full_output=1)
    if len(result) > 3:
        raise ConvergenceError(f'Rabi quadrature: {result[3]}')
    return result[0]

def rabi_asymptote(config):
    '''
    stationary phase limit sqrt(Omega / (W^2 t_p)) sin(Omega t_p + pi/4).
    The prefactor of 1/2 from the Omega/2 drive amplitude is left out, so
    the amplitude is twice the usual convention.
    '''
    omega = TWO_PI * config.rabi_frequency
    width = TWO_PI * config.w_pair
    t_p = config.pulse_length
    require(t_p > 0 and width > 0, 't_p_s', 'asymptote needs t_p, W > 0')
    return math.sqrt(omega / (width ** 2 * t_p)) * \
        math.sin(omega * t_p + math.pi / 4.0)

def rabi_peak_times(config, t_min, t_max):
    '''pulse lengths where the asymptotic oscillation peaks'''
    omega = TWO_PI * config.rabi_frequency
    first = math.ceil((omega * t_min - math.pi / 4.0) / (2.0 * math.pi))
    last = math.floor((omega * t_max - math.pi / 4.0) / (2.0 * math.pi))
    return np.array([(math.pi / 4.0 + 2.0 * math.pi * k) / omega
                     for k in range(max(first, 0), last + 1)])

def rabi_envelope_power(config, t_min, t_max):
    '''log-log slope of the Rabi peak amplitudes against t_p'''
    peaks = rabi_peak_times(config, t_min, t_max)
    require(peaks.size >= 2, 't_p_s', 'window holds fewer than two peaks')
    amplitudes = np.array([abs(rabi_pair(config.at(t))) for t in peaks])
    slope, _ = np.polyfit(np.log(peaks), np.log(amplitudes), 1)
    return float(slope)

#############################################################################
# Abundance
#############################################################################
class AbundanceCalibration:
    '''Single ion and pair coherence times at one reference concentration'''
    def __init__(self, x_ref, t2_single, t2_pair):
        self.x_ref = float(x_ref)
        self.t2_single = float(t2_single)
        self.t2_pair = float(t2_pair)
        require(0 < self.x_ref < 1, 'x_ref', 'must lie in (0, 1)')
        require(self.t2_single > 0, 't2_single', 'must be positive')
        require(self.t2_pair > 0, 't2_pair', 'must be positive')

    @classmethod
    def from_model(cls, params, disorder, rates, regime=None):
        '''
        Single ions are limited by kappa_s, pairs by the motionally narrowed
        ring exchange rate V_ring^2 / kappa_s of clock neighbours.
        '''
        t2_single, t2_pair = coherence_times(params, disorder, rates, regime)
        return cls(params.x, t2_single, t2_pair)

def coherence_times(params, disorder, rates, regime=None):
    '''(1/kappa_s, T_l of the clock ring channel) at the material x'''
    regime = regime or default_regimes()['loose_pair']
    seq = PulseSequence(1)
    b_z = seq.field(params)
    table = rate_table(params, disorder, rates, b_z)
    kappa = table.kappa(-1.5)
    require(kappa > 0, 'kappa', 'clock species must fluctuate')
    channels = build_channels(params, disorder, rates, regime, seq, table)
    ring = [channel for channel in channels[as_state(-1.5)]
            if channel.gamma == 6][0]
    return 1.0 / kappa, long_time(ring)

def abundance_tradeoff(target_t2, reference, x_max=0.1):
    '''
    Concentrations reaching target_t2 for single ions (x ~ 1/T2) and pairs
    (x ~ T2^(-1/3)), and the ratio of coherent pair to single densities
    '''
    require(target_t2 > 0, 'target_t2', 'must be positive')
    x_single = reference.x_ref * reference.t2_single / target_t2
    x_pair = reference.x_ref * (reference.t2_pair / target_t2) ** (1.0 / 3.0)
    if x_single > x_max or x_pair > x_max:
        raise ValidationError('target_t2', f'target {target_t2:g} s lies '
                              'outside the calibrated dilute regime')
    return x_single, x_pair, x_pair ** 2 / x_single

def scaling_slopes(params, disorder, rates, xs=(1e-4, 1e-3)):
    '''two point log slopes of kappa_s and the pair dephasing rate in x'''
    low, high = (coherence_times(params.with_x(x), disorder, rates)
                 for x in xs)
    span = math.log(xs[1] / xs[0])
    kappa_slope = math.log(low[0] / high[0]) / span
    pair_slope = math.log(low[1] / high[1]) / span
    return kappa_slope, pair_slope
