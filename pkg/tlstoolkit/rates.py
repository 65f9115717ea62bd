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
'''Fluctuation rates and lifetimes

Typical flip rates come from resonance counting: a spin finds a resonant
partner with probability alpha = 4 J_typ rho(omega) and

    kappa = 2 e c2 (J_typ / alpha) exp(-1 / (c1 alpha))

Hopping energies enter the rates as angular frequencies, so kappa is
returned in 1/s.  Lifetimes of the observed spins follow from a golden rule
average over the Lorentzian broadened density of states.
'''

import logging
import math
import warnings

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate, special

from .errors import ConvergenceError, ValidationError, require
from .levels import clock_field, level_energy, matrix_elements
from .material import HyperfineState, as_state

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
QUASI_STATIC_RATE = 1e-12
QUADRATURE_SIGMAS = 8.0

def j_typ(params):
    '''typical hopping (8 pi / 9 sqrt 3) n J0 in Hz'''
    return 8.0 * math.pi / (9.0 * math.sqrt(3.0)) * \
        params.species_density * params.dipolar_constant

def rho_delta(omega, center, width):
    '''normalized Gaussian density of gaps in 1/Hz'''
    require(width > 0, 'width', 'must be positive')
    return np.exp(-0.5 * ((np.asarray(omega) - center) / width) ** 2) / \
        (math.sqrt(TWO_PI) * width)

def alpha(params, disorder, omega_p, center=None, width=None, hopping=None):
    '''resonance probability 4 J_typ rho(omega_p)'''
    disorder = disorder.at(params.x)
    center = params.delta if center is None else center
    width = disorder.w_delta if width is None else width
    hopping = j_typ(params) if hopping is None else hopping
    return float(4.0 * hopping * rho_delta(omega_p, center, width))

def hyperfine_disorder(params, disorder, iz, b_z):
    '''width W_iz of the gap distribution of one hyperfine species in Hz'''
    disorder = disorder.at(params.x)
    _, m_diag = matrix_elements(params, iz, b_z)
    dh_rms = disorder.dh_sigma * 0.5 * params.zeeman
    return math.hypot(disorder.w_delta, m_diag * dh_rms)

def flip_rate(hopping, alpha_value, rates):
    '''2 e c2 (2 pi hopping / alpha) exp(-1 / (c1 alpha)) in 1/s'''
    if alpha_value <= 0:
        return 0.0
    exponent = -1.0 / (rates.c1 * alpha_value)
    if exponent < -700:
        return 0.0
    return 2.0 * math.e * rates.c2 * TWO_PI * hopping / alpha_value * \
        math.exp(exponent)

def species_alpha(params, disorder, iz, b_z=None, omega_p=None):
    '''
    alpha of species iz with matrix element rescaled hopping and its
    hyperfine resolved width; returns (alpha, hopping, width)
    '''
    iz = as_state(iz)
    if b_z is None:
        b_z = clock_field(params, -1.5)
    m_off, _ = matrix_elements(params, iz, b_z)
    hopping = j_typ(params) * m_off ** 2
    width = hyperfine_disorder(params, disorder, iz, b_z)
    center = level_energy(params, iz, b_z)
    omega_p = center if omega_p is None else omega_p
    return (float(4.0 * hopping * rho_delta(omega_p, center, width)),
            hopping, width)

def tau_s_inv(params, disorder, rates, omega_p=None, iz=-1.5, b_z=None):
    '''typical flip rate kappa of species iz in 1/s'''
    alpha_value, hopping, _ = species_alpha(params, disorder, iz, b_z,
                                            omega_p)
    return flip_rate(hopping, alpha_value, rates)

def tau_s_inv_reduced(params, disorder, rates, omega_p=None, iz=-1.5,
                      b_z=None):
    '''
    The same rate written as exp[(1/c1)(alpha - 1)/alpha] with the constant
    exp(-1/c1) absorbed into the prefactor.
    '''
    alpha_value, hopping, _ = species_alpha(params, disorder, iz, b_z,
                                            omega_p)
    if alpha_value <= 0:
        return 0.0
    prefactor = 2.0 * math.e * rates.c2 * math.exp(-1.0 / rates.c1)
    exponent = (alpha_value - 1.0) / (rates.c1 * alpha_value)
    if exponent < -700:
        return 0.0
    return prefactor * TWO_PI * hopping / alpha_value * math.exp(exponent)

def quasi_static(kappa, threshold_s=1.0):
    '''whether a rate is slow enough to be treated as static'''
    return kappa < QUASI_STATIC_RATE or 1.0 / kappa > threshold_s

def spectral_function(omega_p, omega, tau_s):
    '''Lorentzian of half width 1/(2 tau_s) centred on omega_p'''
    require(tau_s > 0, 'tau_s', 'must be positive')
    half_width = 0.5 / tau_s
    return half_width / math.pi / \
        (half_width ** 2 + (np.asarray(omega) - omega_p) ** 2)

def _sqrt_overlap(detuning, width, tau_s):
    '''
    <sqrt(A)> = integral rho(omega) sqrt(A(omega_p; omega)) d omega, all in
    angular units.  detuning is omega_p minus the centre of rho.
    '''
    half_width = 0.5 / tau_s
    if width == 0:
        return math.sqrt(spectral_function(detuning, 0.0, tau_s))

    def integrand(u):
        gauss = math.exp(-0.5 * u * u) / math.sqrt(TWO_PI)
        return gauss * math.sqrt(half_width / math.pi) / \
            math.hypot(half_width, width * u - detuning)

    core = detuning / width
    points = [core] if -QUADRATURE_SIGMAS < core < QUADRATURE_SIGMAS else None
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', integrate.IntegrationWarning)
        result = integrate.quad(integrand, -QUADRATURE_SIGMAS,
                                QUADRATURE_SIGMAS, points=points,
                                epsabs=0.0, epsrel=1e-6, limit=400,
                                full_output=1)
    if len(result) > 3:
        raise ConvergenceError(f'golden rule quadrature: {result[3]}')
    logger.debug('golden rule overlap %.6g (error %.2g)', result[0],
                 result[1])
    return result[0]

def sqrt_overlap_closed_form(width, tau_s):
    '''closed form of the on-resonance overlap for a Gaussian density'''
    half_width = 0.5 / tau_s
    z = half_width ** 2 / (4.0 * width ** 2)
    return math.sqrt(half_width / math.pi) / (math.sqrt(TWO_PI) * width) * \
        special.k0e(z)

def golden_rule_T1(params, disorder, omega_p, tau_s, width=None,
                   hopping=None, prefactor=4.0, center=None):
    '''
    averaged golden rule lifetime in s.  center is the middle of the
    density the excitation decays into, delta unless given.
    '''
    require(tau_s > 0, 'tau_s', 'must be positive')
    disorder = disorder.at(params.x)
    width = disorder.w_delta if width is None else width
    hopping = j_typ(params) if hopping is None else hopping
    center = params.delta if center is None else center
    overlap = _sqrt_overlap(TWO_PI * (omega_p - center),
                            TWO_PI * width, tau_s)
    rate = prefactor * math.pi ** 2 * (TWO_PI * hopping) ** 2 * overlap ** 2
    return math.inf if rate == 0 else 1.0 / rate

def pair_T1(params, disorder, omega_p, tau_s, width=None, hopping=None,
            center=None):
    '''lifetime of a pair driven at omega_p, three times shorter than a
    single ion at the same detuning'''
    return golden_rule_T1(params, disorder, omega_p, tau_s, width, hopping,
                          prefactor=12.0, center=center)

def pair_T1_asymptote(params, omega_p, tau_s, hopping=None):
    '''large detuning limit 1/T1 = 6 pi (J_typ / d omega)^2 / tau_s'''
    hopping = j_typ(params) if hopping is None else hopping
    detuning = omega_p - params.delta
    require(detuning != 0, 'omega_p', 'must be detuned from delta')
    return tau_s / (6.0 * math.pi * (hopping / detuning) ** 2)

def decay_rate_density(gamma, T1):
    '''density p(gamma) of decay rates whose average gives exp(-sqrt(t/T1))'''
    gamma = np.asarray(gamma, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        value = np.exp(-1.0 / (4.0 * gamma * T1)) / \
            np.sqrt(4.0 * math.pi * gamma ** 3 * T1)
    return np.where(gamma > 0, value, 0.0)

def laplace_decay(t, T1):
    '''integral of p(gamma) exp(-gamma t) over gamma by quadrature'''
    # substitute gamma = s / T1 so the integrand is order one
    def integrand(s):
        return float(decay_rate_density(s / T1, T1)) / T1 * math.exp(-s * t / T1)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', integrate.IntegrationWarning)
        result = integrate.quad(integrand, 0.0, np.inf, epsrel=1e-8,
                                limit=400, full_output=1)
    if len(result) > 3:
        raise ConvergenceError(f'decay rate quadrature: {result[3]}')
    return result[0]

def decay_suppression_single(t, tau_s, T1):
    '''crossover from exp(-t/tau_s) to exp(-sqrt(t/T1))'''
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError('t', 'times must not be negative')
    if math.isinf(tau_s):
        return np.ones_like(t)
    ratio = t / tau_s
    return np.exp(-ratio / (1.0 + np.sqrt(t * T1) / tau_s))

def pair_decay_suppression(t, T1_pair):
    '''stretched decay exp(-sqrt(t/T1)) of pairs'''
    t = np.asarray(t, dtype=float)
    if math.isinf(T1_pair):
        return np.ones_like(t)
    return np.exp(-np.sqrt(t / T1_pair))

def phonon_ratio(freq_a, freq_b, channel_multiplicity=1):
    '''direct phonon process scaling M^2 omega^3 between two transitions'''
    require(freq_a > 0, 'freq_a', 'must be positive')
    require(freq_b > 0, 'freq_b', 'must be positive')
    return channel_multiplicity * (freq_a / freq_b) ** 3

#############################################################################
# RateTable
#############################################################################
class RateEntry:
    '''Flip rate of one hyperfine species'''
    def __init__(self, iz, kappa, alpha_value, w_iz, threshold_s=1.0):
        self.iz = as_state(iz)
        self.kappa = kappa
        self.alpha = alpha_value
        self.w_iz = w_iz
        self.quasi_static = quasi_static(kappa, threshold_s)

    @property
    def flip_time(self):
        '''1/kappa in s'''
        return math.inf if self.kappa == 0 else 1.0 / self.kappa

    def as_dict(self):
        '''returns a JSON friendly row'''
        return {
            'iz': self.iz.label,
            'kappa_hz': self.kappa,
            'flip_time_s': None if self.kappa == 0 else self.flip_time,
            'alpha': self.alpha,
            'w_iz_hz': self.w_iz,
            'quasi_static': self.quasi_static,
        }

    def __repr__(self):
        return f'RateEntry<{self.iz}, kappa={self.kappa:.4g}>'

class RateTable(dict):
    '''HyperfineState -> RateEntry'''
    columns = ('iz', 'kappa_hz', 'flip_time_s', 'alpha', 'w_iz_hz',
               'quasi_static')

    def rows(self):
        '''entries in ascending iz'''
        return [self[iz].as_dict() for iz in sorted(self)]

    def kappa(self, iz):
        '''flip rate of a species'''
        return self[as_state(iz)].kappa

def _rate_entry(params, disorder, rates, iz, b_z, threshold_s):
    alpha_value, hopping, width = species_alpha(params, disorder, iz, b_z)
    kappa = flip_rate(hopping, alpha_value, rates)
    entry = RateEntry(iz, kappa, alpha_value, width, threshold_s)
    if entry.quasi_static:
        logger.info('species %s is quasi-static (kappa=%.3g 1/s)', iz, kappa)
    return entry

def rate_table(params, disorder, rates, b_z=None, threshold_s=1.0,
               n_jobs=1):
    '''build the RateTable for all four hyperfine species'''
    if b_z is None:
        b_z = clock_field(params, -1.5)
    entries = Parallel(n_jobs=n_jobs)(
        delayed(_rate_entry)(params, disorder, rates, iz, b_z, threshold_s)
        for iz in HyperfineState.all())
    table = RateTable()
    for entry in entries:
        table[entry.iz] = entry
    return table
