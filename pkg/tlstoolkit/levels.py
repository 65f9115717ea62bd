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
'''Single ion and pair level structure

A Tb ion at a clock transition is a two level system with gap Delta and an
Ising coupling to the longitudinal field

    H = (Delta sigma_x + h sigma_z) / 2,
    h = (g muB / 2) B_z + (A / 2) I_z + dh

so that its transition energy is sqrt(Delta^2 + h^2) with minima at the
clock fields B = -A I_z / (g muB).
'''

import math

from scipy import optimize

from .errors import ConvergenceError, PerturbationError, ValidationError
from .material import as_state

PAIR_LABELS = ('|00>', '|01-10>', '|01+10>', '|11>')

def longitudinal_field(params, iz, b_z, dh=0.0):
    '''effective longitudinal field h in Hz'''
    iz = float(as_state(iz))
    return 0.5 * params.zeeman * b_z + 0.5 * params.hyperfine_a * iz + dh

def level_energy(params, iz, b_z, dh=0.0):
    '''transition energy sqrt(Delta^2 + h^2) in Hz'''
    return math.hypot(params.delta, longitudinal_field(params, iz, b_z, dh))

def clock_field(params, iz):
    '''field in T where the transition energy of species iz is minimal'''
    return -params.hyperfine_a * float(as_state(iz)) / params.zeeman

def matrix_elements(params, iz, b_z, dh=0.0):
    '''returns (m_off, m_diag) of sigma_z in the eigenbasis'''
    h = longitudinal_field(params, iz, b_z, dh)
    if math.isinf(h):
        return 0.0, 1.0
    energy = math.hypot(params.delta, h)
    return params.delta / energy, abs(h) / energy

def full_clock_energy(params, iz, b_z):
    '''Zeeman detuning g muB (B_z - B_iz) from the clock field, in Hz'''
    return params.zeeman * (b_z - clock_field(params, iz))

def neighbor_moment(params, iz, b_z, dh=0.0):
    '''
    Magnetic moment fraction of a neighbouring ion of species iz.  dh is an
    rms internal field (Hz) added in quadrature to the static field term.
    '''
    h = math.hypot(longitudinal_field(params, iz, b_z), dh)
    return h / math.hypot(params.delta, h)

def dipolar_coupling(params, r, theta):
    '''Ising dipolar coupling J0 (1 - 3 cos^2 theta) / r^3 in Hz'''
    if not r > 0:
        raise ValidationError('r', f'distance must be positive, not {r}')
    return params.dipolar_constant * (1.0 - 3.0 * math.cos(theta) ** 2) / \
        r ** 3

#############################################################################
# PairLevels
#############################################################################
class PairLevels:
    '''The four levels of a coupled pair, ordered |00>, |01-10>, |01+10>, |11>'''
    def __init__(self, energies, coupling):
        self.energies = tuple(float(value) for value in energies)
        self.coupling = coupling

    @property
    def labels(self):
        '''returns the state labels'''
        return PAIR_LABELS

    @property
    def observed_transition(self):
        '''|00> -> |01+10> transition frequency in Hz'''
        return self.energies[2] - self.energies[0]

    def energy(self, label):
        '''returns the energy of a labelled state'''
        return self.energies[PAIR_LABELS.index(label)]

    def as_dict(self):
        '''returns {label: energy}'''
        return dict(zip(PAIR_LABELS, self.energies))

    def __repr__(self):
        return 'PairLevels<' + ', '.join(
            f'{label}={value:.6g}' for label, value in
            zip(PAIR_LABELS, self.energies)) + '>'

def pair_terms(params, pair, b_z, dh_1=0.0, dh_2=0.0):
    '''
    Secular pair Hamiltonian in the product of single ion eigenbases.
    Returns (e_1, e_2, ising, flip_flop): the two single ion gaps, the
    diagonal Ising part and the flip-flop amplitude, all in Hz.
    '''
    h_1 = longitudinal_field(params, pair.i_z_1, b_z, dh_1)
    h_2 = longitudinal_field(params, pair.i_z_2, b_z, dh_2)
    e_1 = math.hypot(params.delta, h_1)
    e_2 = math.hypot(params.delta, h_2)
    ising = pair.coupling * (h_1 / e_1) * (h_2 / e_2)
    flip_flop = pair.coupling * (params.delta / e_1) * (params.delta / e_2)
    return e_1, e_2, ising, flip_flop

def pair_levels(params, pair, b_z, dh_1=0.0, dh_2=0.0):
    '''energies of the four pair states in Hz'''
    e_1, e_2, ising, flip_flop = pair_terms(params, pair, b_z, dh_1, dh_2)
    split = math.hypot(0.5 * (e_1 - e_2), flip_flop)
    symmetric = -ising + math.copysign(split, flip_flop or 1.0)
    antisymmetric = -ising - math.copysign(split, flip_flop or 1.0)
    return PairLevels((-0.5 * (e_1 + e_2) + ising, antisymmetric,
                       symmetric, 0.5 * (e_1 + e_2) + ising), pair.coupling)

def pair_moment(params, pair, b_z, label='|01+10>', step=1e-5):
    '''magnetic moment -dE/dB (Hz/T) of a pair state by central difference'''
    upper = pair_levels(params, pair, b_z + step).energy(label)
    lower = pair_levels(params, pair, b_z - step).energy(label)
    return -(upper - lower) / (2 * step)

def ring_exchange(j13, j23, delta_pair, j_pair, delta3, tau, threshold=10.0):
    '''
    Second order ring exchange between a pair and a third ion in state tau
    (0 or 1).  Raises PerturbationError when the virtual excitation is
    closer than threshold times the largest coupling.
    '''
    if tau not in (0, 1):
        raise ValidationError('tau', f'must be 0 or 1, not {tau}')
    if j13 == 0 or j23 == 0 or math.isinf(delta3):
        return 0.0
    sign = 1 - 2 * tau
    denominator = (delta_pair - sign * j_pair) - delta3
    if abs(denominator) < threshold * max(abs(j13), abs(j23)):
        raise PerturbationError(
            f'ring exchange denominator {denominator:.4g} Hz is within '
            f'{threshold:g} couplings of resonance')
    return sign * j13 * j23 / (2.0 * denominator)

def ring_exchange_at(params, r, theta_13, theta_23, delta_pair, j_pair,
                     delta3, tau):
    '''ring exchange for a third ion at distance r from both pair members'''
    return ring_exchange(dipolar_coupling(params, r, theta_13),
                         dipolar_coupling(params, r, theta_23),
                         delta_pair, j_pair, delta3, tau)

def numeric_clock_field(params, iz, span=0.02, tolerance=1e-9):
    '''locate the minimum of level_energy over B_z numerically'''
    center = clock_field(params, iz)
    result = optimize.minimize_scalar(
        lambda b_z: level_energy(params, iz, b_z),
        bounds=(center - span, center + span), method='bounded',
        options={'xatol': tolerance})
    if not result.success:
        raise ConvergenceError(f'clock field of {as_state(iz)}: '
                               f'{result.message}')
    return float(result.x)

def level_table(params, b_z, dh=0.0):
    '''returns rows (iz, B_iz, energy, m_off, m_diag) for all species'''
    rows = []
    for i_z in (-1.5, -0.5, 0.5, 1.5):
        m_off, m_diag = matrix_elements(params, i_z, b_z, dh)
        rows.append((as_state(i_z), clock_field(params, i_z),
                     level_energy(params, i_z, b_z, dh), m_off, m_diag))
    return rows

def site_energy(params, site, b_z):
    '''transition energy of a SpinSite with its own gap and internal field'''
    return math.hypot(params.delta + site.cf_shift,
                      longitudinal_field(params, site.i_z, b_z,
                                         site.local_field))
