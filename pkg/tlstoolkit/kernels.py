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
'''Pure dephasing suppression factors

Each kernel returns a factor in (0, 1] multiplying the echo intensity.
Couplings are passed as ordinary frequencies (Hz) and converted to angular
frequencies here, rates are in 1/s and times in s.
'''

import logging
import math
import warnings

import numpy as np
from scipy import integrate, optimize, special

from .errors import ConvergenceError, ValidationError, require
from .levels import full_clock_energy

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
SERIES_LIMIT = 1e-8

def magic_angle():
    '''angle where 1 - 3 cos^2 theta vanishes'''
    return math.acos(1.0 / math.sqrt(3.0))

def angular_factor(gamma, cos_theta):
    '''g_gamma(theta): (1 - 3 cos^2) for gamma=3, its square for gamma=6'''
    value = 1.0 - 3.0 * np.asarray(cos_theta) ** 2
    if gamma == 3:
        return value
    if gamma == 6:
        return value ** 2
    raise ValidationError('gamma', f'must be 3 or 6, not {gamma}')

def _checked_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValidationError('t', 'times must be finite and not negative')
    return t

#############################################################################
# DephasingChannel
#############################################################################
class DephasingChannel:
    '''
    A bath of classical fluctuators with V(r) = V0 g(theta) / r^gamma,
    flipping at rate kappa
    '''
    def __init__(self, gamma, v0, kappa, density, name=None):
        if gamma not in (3, 6):
            raise ValidationError('gamma', f'must be 3 or 6, not {gamma}')
        self.gamma = int(gamma)
        self.v0 = float(v0)
        self.kappa = float(kappa)
        self.density = float(density)
        self.name = name or ('ring' if gamma == 6 else 'magnetic')
        require(math.isfinite(self.v0), 'v0', 'must be finite')
        require(self.kappa >= 0, 'kappa', 'must not be negative')
        require(self.density >= 0, 'density', 'must not be negative')

    @property
    def power(self):
        '''p = 3 / gamma'''
        return 3.0 / self.gamma

    def angular(self, cos_theta):
        '''angular factor of this channel'''
        return angular_factor(self.gamma, cos_theta)

    def with_kappa(self, kappa):
        '''copy with another flip rate'''
        return DephasingChannel(self.gamma, self.v0, kappa, self.density,
                                self.name)

    def __repr__(self):
        return f'DephasingChannel<{self.name}, gamma={self.gamma}, ' \
               f'v0={self.v0:.4g}, kappa={self.kappa:.4g}>'

def angular_average(gamma):
    '''integral of 1/2 |g_gamma|^(3/gamma) over cos(theta) in [-1, 1]'''
    power = 3.0 / gamma
    node = 1.0 / math.sqrt(3.0)
    value, _ = integrate.quad(
        lambda c: 0.5 * abs(float(angular_factor(gamma, c))) ** power,
        -1.0, 1.0, points=[-node, node], epsrel=1e-12)
    return value

def counting_constant(gamma):
    '''
    cos(3 pi / 2 gamma) |Gamma(-3/gamma)| (4 pi / gamma), evaluated through
    the reflection formula so gamma = 3 stays finite
    '''
    power = 3.0 / gamma
    return 4.0 * math.pi / gamma * math.pi / \
        (2.0 * math.sin(math.pi * power / 2.0) * special.gamma(1.0 + power))

def vbar_coefficient(gamma):
    '''V_bar / (V0 n^(gamma/3))'''
    return 2.0 * (counting_constant(gamma) *
                  angular_average(gamma)) ** (gamma / 3.0)

def vbar(channel):
    '''typical coupling of the fluctuator bath in Hz'''
    return channel.v0 * vbar_coefficient(channel.gamma) * \
        channel.density ** (channel.gamma / 3.0)

def short_time_coefficient(gamma):
    '''prefactor of 1/T_s in units of (kappa V0 n^(gamma/3)/N)^(p/(1+p))'''
    power = 3.0 / gamma
    return (vbar_coefficient(gamma) ** power / (1.0 + power)) ** \
        (1.0 / (1.0 + power))

def long_time_prefactor(gamma):
    '''1/T_l = prefactor V_bar^2 / kappa'''
    power = 3.0 / gamma
    return 2.0 * (special.gamma((1.0 + power) / 2.0) /
                  math.sqrt(math.pi)) ** (2.0 / power)

def long_time_coefficient(gamma):
    '''prefactor of 1/T_l in units of (V0 n^(gamma/3))^2 / kappa'''
    return long_time_prefactor(gamma) * vbar_coefficient(gamma) ** 2

def short_time(channel, n_pulses=1):
    '''T_s in s, infinite for static or uncoupled baths'''
    power = channel.power
    v_bar = TWO_PI * abs(vbar(channel))
    if channel.kappa == 0 or v_bar == 0:
        return math.inf
    rate = (channel.kappa * v_bar ** power /
            ((1.0 + power) * n_pulses ** power)) ** (1.0 / (1.0 + power))
    return 1.0 / rate

def long_time(channel):
    '''T_l in s of the motionally narrowed decay'''
    v_bar = TWO_PI * abs(vbar(channel))
    if v_bar == 0:
        return math.inf
    if channel.kappa == 0:
        return 0.0
    return channel.kappa / (long_time_prefactor(channel.gamma) * v_bar ** 2)

def kernel_short(channel, n_pulses, t):
    '''exp[-(t/T_s)^(1 + 3/gamma)]'''
    t = _checked_times(t)
    t_s = short_time(channel, n_pulses)
    if math.isinf(t_s):
        return np.ones_like(t)
    return np.exp(-(t / t_s) ** (1.0 + channel.power))

def kernel_long(channel, t):
    '''exp[-(t/T_l)^(3/(2 gamma))]'''
    t = _checked_times(t)
    t_l = long_time(channel)
    if math.isinf(t_l):
        return np.ones_like(t)
    if t_l == 0:
        return np.ones_like(t)
    return np.exp(-(t / t_l) ** (0.5 * channel.power))

#############################################################################
# CrossoverShape
#############################################################################
class CrossoverShape:
    '''Crossover sharpness per pulse count for the two channel types'''
    def __init__(self, beta_ring=(1.2, 1.1, 1.1, 1.0, 0.93),
                 beta_magn=(0.93, 0.74, 0.63, 0.58, 0.54)):
        self.beta_ring = tuple(float(value) for value in beta_ring)
        self.beta_magn = tuple(float(value) for value in beta_magn)
        for name, values in (('beta_ring', self.beta_ring),
                             ('beta_magn', self.beta_magn)):
            require(len(values) > 0, name, 'needs at least one value')
            require(all(value > 0 for value in values), name,
                    'values must be positive')
            require(all(a >= b for a, b in zip(values, values[1:])), name,
                    'values must not increase with N')

    def beta(self, gamma, n_pulses):
        '''sharpness for a channel type and pulse count'''
        values = self.beta_ring if gamma == 6 else self.beta_magn
        if n_pulses < 1:
            raise ValidationError('n_pulses', 'must be at least 1')
        if n_pulses > len(values):
            logger.warning('crossover beta for N=%d extrapolated from N=%d',
                           n_pulses, len(values))
            return values[-1]
        return values[n_pulses - 1]

    def __repr__(self):
        return f'CrossoverShape<ring={list(self.beta_ring)}, ' \
               f'magn={list(self.beta_magn)}>'

def crossover_exponent(t, t_s, t_l, power, beta):
    '''
    -ln I of the crossover interpolant: x^a / (1 + (x^a (T_l/t)^b)^beta)^(1/beta)
    with x = t / T_s, a = 1 + p and b = p / 2
    '''
    t = np.asarray(t, dtype=float)
    a = 1.0 + power
    b = 0.5 * power
    short = (t / t_s) ** a
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(t > 0, short * (t_l / np.where(t > 0, t, 1.0)) ** b,
                         0.0)
    return short / (1.0 + ratio ** beta) ** (1.0 / beta)

def kernel_crossover(channel, n_pulses, t, shape=None):
    '''smooth interpolation between kernel_short and kernel_long'''
    t = _checked_times(t)
    shape = shape or CrossoverShape()
    t_s = short_time(channel, n_pulses)
    if math.isinf(t_s):
        return np.ones_like(t)
    t_l = long_time(channel)
    beta = shape.beta(channel.gamma, n_pulses)
    return np.exp(-crossover_exponent(t, t_s, t_l, channel.power, beta))

#############################################################################
# Telegraph noise
#############################################################################
def _sinhc(y2):
    '''sinh(sqrt(y2)) / sqrt(y2) for any sign of y2'''
    y2 = np.asarray(y2, dtype=float)
    root = np.sqrt(np.abs(y2))
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        value = np.where(y2 > 0, np.sinh(root) / root, np.sin(root) / root)
    return np.where(np.abs(y2) < SERIES_LIMIT, 1.0 + y2 / 6.0, value)

def _coshm1(y2):
    '''(cosh(sqrt(y2)) - 1) / y2 for any sign of y2'''
    y2 = np.asarray(y2, dtype=float)
    root = np.sqrt(np.abs(y2))
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        value = np.where(y2 > 0, 2.0 * np.sinh(0.5 * root) ** 2 / y2,
                         -2.0 * np.sin(0.5 * root) ** 2 / y2)
    return np.where(np.abs(y2) < SERIES_LIMIT, 0.5 + y2 / 24.0, value)

TELEGRAPH_FORMS = ('echo', 'free')

def telegraph(j_par, kappa, t, form='echo'):
    '''
    Suppression by one telegraph fluctuator with coupling j_par (Hz)
    flipping at kappa (1/s).  The Hahn echo form is

        exp(-x) [1 + sinh(lam x)/lam + (cosh(lam x) - 1)/lam^2]

    and form='free' gives the decay without refocusing,

        exp(-x) [cosh(lam x) + sinh(lam x)/lam]

    with x = kappa t and lam = sqrt(1 - (2J/kappa)^2), continued to imaginary
    lam.  Only the free form goes negative.
    '''
    if form not in TELEGRAPH_FORMS:
        raise ValidationError('form', f'expected one of {TELEGRAPH_FORMS}')
    t = _checked_times(t)
    coupling = TWO_PI * abs(j_par)
    if coupling == 0 or kappa == 0:
        if form == 'free' and coupling != 0:
            return np.cos(2.0 * coupling * t)
        return np.ones_like(t)
    require(kappa > 0, 'kappa', 'must not be negative')
    lam2 = 1.0 - (2.0 * coupling / kappa) ** 2
    x = kappa * t
    y2 = lam2 * x * x
    decay = np.exp(-x)
    low = 0.0 if form == 'echo' else -1.0
    with np.errstate(over='ignore', invalid='ignore'):
        if form == 'echo':
            small = decay * (1.0 + x * _sinhc(y2) + x * x * _coshm1(y2))
        else:
            small = decay * (1.0 + x * _sinhc(y2) + y2 * _coshm1(y2))
    if lam2 <= 0:
        return np.clip(small, low, 1.0)
    # large positive lam x: combine the exponentials before evaluating
    lam = math.sqrt(lam2)
    with np.errstate(over='ignore', under='ignore'):
        plus = np.exp(-x * (1.0 - lam))
        minus = np.exp(-x * (1.0 + lam))
        if form == 'echo':
            large = decay + (plus - minus) / (2.0 * lam) + \
                (0.5 * (plus + minus) - decay) / lam2
        else:
            large = 0.5 * (plus + minus) + (plus - minus) / (2.0 * lam)
    return np.clip(np.where(lam * x > 30.0, large, small), low, 1.0)

#############################################################################
# Fluorine
#############################################################################
class FluorineModel:
    '''Couplings of a Tb ion to its nn and nnn fluorine shells'''
    # pylint: disable=too-many-instance-attributes
    def __init__(self, j_par_nn=70.0e3, j_par_nnn=103.5e3, j_zz_nn=31.26e6,
                 j_zx_nn=61.30e6, kappa_f=16393.4, omega_f=None,
                 t_f=10.6e-6, beta_f=1.3, ratio_a=0.677, ratio_b=0.792,
                 sites_nn=8, sites_nnn=8):
        self.j_par_nn = float(j_par_nn)
        self.j_par_nnn = float(j_par_nnn)
        self.j_zz_nn = float(j_zz_nn)
        self.j_zx_nn = float(j_zx_nn)
        self.kappa_f = float(kappa_f)
        self.omega_f = None if omega_f is None else float(omega_f)
        self.t_f = float(t_f)
        self.beta_f = float(beta_f)
        self.ratio_a = float(ratio_a)
        self.ratio_b = float(ratio_b)
        self.sites_nn = int(sites_nn)
        self.sites_nnn = int(sites_nnn)
        require(self.kappa_f >= 0, 'kappa_f_hz', 'must not be negative')
        require(self.t_f > 0, 't_f_s', 'must be positive')
        require(self.beta_f > 0, 'beta_f', 'must be positive')
        require(self.ratio_a > 0 and self.ratio_b > 0, 'ratio',
                'shell ratios must be positive')

    @property
    def j_zz_nnn(self):
        '''longitudinal Tb-F coupling of the nnn shell'''
        return self.j_zz_nn / self.ratio_a

    @property
    def j_zx_nnn(self):
        '''transverse Tb-F coupling of the nnn shell'''
        return self.j_zx_nn / self.ratio_b

    @property
    def asymptotic_time(self):
        '''T_F,nnn = 1 / (16 kappa_F) for the default shells'''
        sites = self.sites_nn + self.sites_nnn
        return math.inf if self.kappa_f == 0 else 1.0 / (sites * self.kappa_f)

    def copy(self, **kwargs):
        '''copy with selected fields replaced'''
        fields = dict(self.__dict__)
        fields.update(kwargs)
        return FluorineModel(**fields)

    def __repr__(self):
        return f'FluorineModel<J_nn={self.j_par_nn:.4g}, ' \
               f'J_nnn={self.j_par_nnn:.4g}, kappa_F={self.kappa_f:.4g}>'

def fluorine_site(j_par, kappa, n_pulses, t):
    '''
    Telegraph factor of one fluorine site under N pulses: the coupling is
    divided by N first, then the oscillating form is kept up to the cutoff
    pi / (2 J') and replaced by exp(-kappa t) beyond it.
    '''
    t = _checked_times(t)
    rescaled = j_par / n_pulses
    coupling = TWO_PI * abs(rescaled)
    if coupling == 0:
        return np.ones_like(t)
    cutoff = math.pi / (2.0 * coupling)
    return np.where(t < cutoff, telegraph(rescaled, kappa, t),
                    np.exp(-kappa * t))

def fluorine_nnn(model, n_pulses, t):
    '''product of telegraph factors over the nn and nnn fluorine shells'''
    if n_pulses < 1:
        raise ValidationError('n_pulses', 'must be at least 1')
    nn = fluorine_site(model.j_par_nn, model.kappa_f, n_pulses, t)
    nnn = fluorine_site(model.j_par_nnn, model.kappa_f, n_pulses, t)
    return nn ** model.sites_nn * nnn ** model.sites_nnn

def fluorine_nnn_time(model, n_pulses, level=1.0, t_min=1e-9, t_max=1e-3):
    '''
    First time at which -log I_F,nnn reaches level.  Small levels sample the
    short-time law -log I ~ kappa (J/N)^2 t^3, where the time scales as
    N^(2/3).
    '''
    require(level > 0, 'level', 'must be positive')
    times = np.geomspace(t_min, t_max, 1024)
    with np.errstate(divide='ignore'):
        excess = -np.log(fluorine_nnn(model, n_pulses, times)) - level
    above = np.nonzero(excess >= 0)[0]
    if above.size == 0:
        raise ConvergenceError(f'fluorine decay stays above exp(-{level}) '
                               f'before {t_max} s')
    index = above[0]
    if index == 0:
        return float(times[0])

    def residual(t):
        return float(-np.log(fluorine_nnn(model, n_pulses, t)) - level)

    return optimize.brentq(residual, times[index - 1], times[index],
                           xtol=1e-15, rtol=1e-10)

def fluorine_loose(t_f, beta_f, t):
    '''stretched exponential exp[-(t/T_F)^beta_F]'''
    require(t_f > 0, 't_f', 'must be positive')
    require(beta_f > 0, 'beta_f', 'must be positive')
    t = _checked_times(t)
    return np.exp(-(t / t_f) ** beta_f)

#############################################################################
# Mims envelope
#############################################################################
def nuclear_zeeman(params, b_z):
    '''fluorine Larmor frequency in Hz'''
    return params.fluorine_gyro * abs(b_z)

def mims_couplings(model, params, b_z, iz):
    '''returns (A_nn, B_nn, A_nnn, B_nnn) in Hz'''
    energy = full_clock_energy(params, iz, b_z)
    a_nn = energy * model.j_zz_nn / params.delta
    b_nn = energy * model.j_zx_nn / params.delta
    return a_nn, b_nn, a_nn / model.ratio_a, b_nn / model.ratio_b

def mims_depth(omega_f, a, b):
    '''modulation depth k = (omega_F B / (omega_alpha omega_beta))^2'''
    omega_alpha = math.hypot(omega_f + 0.5 * a, 0.5 * b)
    omega_beta = math.hypot(omega_f - 0.5 * a, 0.5 * b)
    if omega_alpha == 0 or omega_beta == 0:
        return 0.0, omega_alpha, omega_beta
    return (omega_f * b / (omega_alpha * omega_beta)) ** 2, omega_alpha, \
        omega_beta

def mims_site(omega_f, a, b, n_pulses, t):
    '''
    Modulation from one fluorine site with secular coupling a and
    pseudo-secular coupling b (all Hz).  For N > 1 the frequencies are
    doubled and the depth grows with N.
    '''
    t = _checked_times(t)
    depth, omega_alpha, omega_beta = mims_depth(TWO_PI * omega_f,
                                                TWO_PI * a, TWO_PI * b)
    if depth == 0:
        return np.ones_like(t)
    if n_pulses == 1:
        tau = 0.5 * t
        product = np.sin(0.5 * omega_alpha * tau) ** 2 * \
            np.sin(0.5 * omega_beta * tau) ** 2
        return np.clip(1.0 - 2.0 * depth * product, 0.0, 1.0)
    tau = t / (2.0 * n_pulses)
    product = np.sin(omega_alpha * tau) ** 2 * np.sin(omega_beta * tau) ** 2
    return np.clip(1.0 - 2.0 * n_pulses * depth * product, 0.0, 1.0)

def mims_factor(omega_f, couplings, n_pulses, t):
    '''(I_nn)^4 (I_nnn)^4 for explicit couplings (A_nn, B_nn, A_nnn, B_nnn)'''
    a_nn, b_nn, a_nnn, b_nnn = couplings
    nn = mims_site(omega_f, a_nn, b_nn, n_pulses, t)
    nnn = mims_site(omega_f, a_nnn, b_nnn, n_pulses, t)
    return nn ** 4 * nnn ** 4

def mims_envelope(model, params, b_z, iz, n_pulses, t):
    '''electron spin echo envelope modulation from the fluorine shells'''
    omega_f = model.omega_f if model.omega_f is not None else \
        nuclear_zeeman(params, b_z)
    return mims_factor(omega_f, mims_couplings(model, params, b_z, iz),
                       n_pulses, t)

def stretching_slope(t, suppression):
    '''local slope of log(-log I) against log t'''
    t = np.asarray(t, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', RuntimeWarning)
        return np.gradient(np.log(-np.log(suppression)), np.log(t))
