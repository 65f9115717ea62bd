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
'''Material, site, pair and disorder descriptions

All energies are stored as ordinary frequencies in Hz, fields in Tesla and
lengths in metres.  Angular frequencies only appear inside the kernels.
'''

import copy
import math
from fractions import Fraction

import numpy as np
from scipy import constants

from .errors import ValidationError, require

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

#############################################################################
# HyperfineState
#############################################################################
class HyperfineState:
    '''Nuclear spin projection of a Tb ion (I=3/2)'''
    values = (-1.5, -0.5, 0.5, 1.5)

    def __init__(self, i_z):
        try:
            i_z = float(Fraction(str(i_z).replace('−', '-')))
        except (ValueError, ZeroDivisionError):
            raise ValidationError('iz', f'not a nuclear projection: {i_z}')
        if i_z not in self.values:
            raise ValidationError('iz', f'must be one of -3/2, -1/2, 1/2, '
                                  f'3/2, not {i_z}')
        self.i_z = i_z

    @classmethod
    def all(cls):
        '''returns the four hyperfine states in ascending order'''
        return [cls(value) for value in cls.values]

    @property
    def label(self):
        '''returns the fractional label, eg. -3/2'''
        return str(Fraction(self.i_z).limit_denominator(2))

    def __float__(self):
        return self.i_z

    def __eq__(self, other):
        if isinstance(other, HyperfineState):
            return self.i_z == other.i_z
        try:
            return self.i_z == float(other)
        except (TypeError, ValueError):
            return False

    def __lt__(self, other):
        return self.i_z < float(other)

    def __hash__(self):
        return hash(self.i_z)

    def __repr__(self):
        return f'HyperfineState<{self.label}>'

    def __str__(self):
        return self.label

def as_state(i_z):
    '''coerce a number, string or HyperfineState to a HyperfineState'''
    if isinstance(i_z, HyperfineState):
        return i_z
    return HyperfineState(i_z)

#############################################################################
# MaterialParams
#############################################################################
class MaterialParams:
    '''Physical configuration of one doped sample'''
    # pylint: disable=too-many-instance-attributes
    def __init__(self, delta_hz=27.8e9, g_par=17.40, hyperfine_a_hz=6.21e9,
                 lattice_a_m=5.16e-10, lattice_c_m=10.85e-10,
                 ions_per_cell=4, x=0.001,
                 bohr_magneton=constants.physical_constants[
                     'Bohr magneton'][0],
                 vacuum_permeability=constants.mu_0,
                 nuclear_magneton=constants.physical_constants[
                     'nuclear magneton'][0],
                 planck=constants.h, fluorine_moment=2.63,
                 nuclear_spin=1.5):
        self.delta = float(delta_hz)
        self.g_par = float(g_par)
        self.hyperfine_a = float(hyperfine_a_hz)
        self.lattice_a = float(lattice_a_m)
        self.lattice_c = float(lattice_c_m)
        self.ions_per_cell = int(ions_per_cell)
        self.x = float(x)
        self.bohr_magneton = float(bohr_magneton)
        self.vacuum_permeability = float(vacuum_permeability)
        self.nuclear_magneton = float(nuclear_magneton)
        self.planck = float(planck)
        self.fluorine_moment = float(fluorine_moment)
        self.nuclear_spin = float(nuclear_spin)
        self.validate()

    def validate(self):
        '''check the invariants of a material description'''
        require(math.isfinite(self.delta) and self.delta > 0, 'delta_hz',
                'crystal-field gap must be positive')
        require(self.g_par > 0, 'g_par', 'g-factor must be positive')
        require(0 < self.x < 1, 'x', 'dopant fraction must lie in (0, 1)')
        require(self.lattice_a > 0, 'lattice_a_m', 'must be positive')
        require(self.lattice_c > 0, 'lattice_c_m', 'must be positive')
        require(self.ions_per_cell > 0, 'ions_per_cell', 'must be positive')
        require(self.planck > 0, 'planck', 'must be positive')

    def with_x(self, x):
        '''returns a copy of the material at another concentration'''
        other = copy.copy(self)
        other.x = float(x)
        other.validate()
        return other

    @property
    def cell_volume(self):
        '''unit cell volume a*a*c in m^3'''
        return self.lattice_a ** 2 * self.lattice_c

    @property
    def tb_density(self):
        '''total dopant density in 1/m^3'''
        return self.ions_per_cell * self.x / self.cell_volume

    @property
    def hyperfine_species(self):
        '''number of hyperfine species, 2I+1'''
        return int(round(2 * self.nuclear_spin + 1))

    @property
    def species_density(self):
        '''density of one hyperfine species in 1/m^3'''
        return self.tb_density / self.hyperfine_species

    @property
    def zeeman(self):
        '''full Ising Zeeman coefficient g*muB/h in Hz/T'''
        return self.g_par * self.bohr_magneton / self.planck

    @property
    def dipolar_constant(self):
        '''J0 = mu0 (muB g/2)^2 / (4 pi) in Hz m^3'''
        moment = self.bohr_magneton * self.g_par / 2.0
        return self.vacuum_permeability * moment ** 2 / \
            (4.0 * math.pi) / self.planck

    @property
    def fluorine_gyro(self):
        '''fluorine nuclear Zeeman coefficient (spin 1/2) in Hz/T'''
        return 2.0 * self.fluorine_moment * self.nuclear_magneton / \
            self.planck

    def __repr__(self):
        return f'MaterialParams<delta={self.delta:.4g} Hz, ' \
               f'g={self.g_par}, A={self.hyperfine_a:.4g} Hz, x={self.x}>'

#############################################################################
# SpinSite
#############################################################################
class SpinSite:
    '''A single dopant with its local disorder'''
    def __init__(self, position, i_z, cf_shift_hz=0.0, local_field_hz=0.0):
        self.position = np.asarray(position, dtype=float)
        if self.position.shape != (3,):
            raise ValidationError('position', 'must be a 3-vector')
        self.i_z = as_state(i_z)
        self.cf_shift = float(cf_shift_hz)
        self.local_field = float(local_field_hz)

    @classmethod
    def draw(cls, rng, position, i_z, disorder, zeeman_half):
        '''draw a site with crystal-field and internal-field disorder'''
        return cls(position, i_z,
                   cf_shift_hz=rng.normal(0.0, disorder.w_delta),
                   local_field_hz=rng.normal(0.0, disorder.dh_sigma *
                                             zeeman_half))

    def __repr__(self):
        return f'SpinSite<{self.position.tolist()}, iz={self.i_z}>'

#############################################################################
# PairConfig
#############################################################################
class PairConfig:
    '''A coupled pair of clock-state ions'''
    def __init__(self, j_pair_hz, j_ex_hz=0.0, i_z_1=-1.5, i_z_2=-1.5,
                 name=None):
        self.j_pair = float(j_pair_hz)
        self.j_ex = float(j_ex_hz)
        self.i_z_1 = as_state(i_z_1)
        self.i_z_2 = as_state(i_z_2)
        self.name = name

    @property
    def coupling(self):
        '''total flip-flop coupling J_pair + J_ex'''
        return self.j_pair + self.j_ex

    @classmethod
    def from_shell(cls, params, vector, j_ex_hz=0.0, name=None):
        '''pair coupled by dipolar interaction along a lattice vector'''
        vector = np.asarray(vector, dtype=float) * \
            np.array([params.lattice_a, params.lattice_a, params.lattice_c])
        dist = float(np.linalg.norm(vector))
        if dist <= 0:
            raise ValidationError('vector', 'pair separation must be nonzero')
        cos_theta = vector[2] / dist
        j_pair = params.dipolar_constant * (1 - 3 * cos_theta ** 2) / \
            dist ** 3
        return cls(j_pair, j_ex_hz, name=name)

    def __repr__(self):
        return f'PairConfig<{self.name}, J_pair={self.j_pair:.4g} Hz, ' \
               f'J_ex={self.j_ex:.4g} Hz>'

#############################################################################
# DisorderModel
#############################################################################
class DisorderModel:
    '''Crystal-field and internal-field disorder'''
    def __init__(self, w_delta_hz=21e6, dh_fwhm_t=4.66e-3,
                 clock_hwhm_t=0.277e-3, reference_x=0.001,
                 scale_with_x=True):
        self.w_delta = float(w_delta_hz)
        self.dh_fwhm = float(dh_fwhm_t)
        self.clock_hwhm = float(clock_hwhm_t)
        self.reference_x = float(reference_x)
        self.scale_with_x = bool(scale_with_x)
        require(0 < self.reference_x < 1, 'reference_x',
                'reference concentration must lie in (0, 1)')
        require(self.w_delta > 0, 'w_delta_hz', 'must be positive')
        require(self.dh_fwhm >= 0, 'dh_fwhm_t', 'must not be negative')
        require(self.clock_hwhm >= 0, 'clock_hwhm_t', 'must not be negative')

    @property
    def dh_sigma(self):
        '''standard deviation of the internal field in T'''
        return self.dh_fwhm / FWHM_PER_SIGMA

    def rho(self, omega, center, width=None):
        '''Gaussian density of excitation energies in 1/Hz'''
        width = self.w_delta if width is None else width
        return np.exp(-0.5 * ((np.asarray(omega) - center) / width) ** 2) / \
            (math.sqrt(2.0 * math.pi) * width)

    def at(self, x):
        '''disorder at concentration x, W_delta scaled in proportion to x'''
        if not self.scale_with_x or x == self.reference_x:
            return self
        return DisorderModel(self.w_delta * x / self.reference_x,
                             self.dh_fwhm, self.clock_hwhm, x,
                             self.scale_with_x)

    def with_w_delta(self, w_delta_hz):
        '''returns a copy with another reference width'''
        return DisorderModel(w_delta_hz, self.dh_fwhm, self.clock_hwhm,
                             self.reference_x, self.scale_with_x)

    def __repr__(self):
        return f'DisorderModel<W={self.w_delta:.4g} Hz, ' \
               f'dh_fwhm={self.dh_fwhm:.4g} T>'

#############################################################################
# RateParams
#############################################################################
class RateParams:
    '''Resonance-counting coefficients c1 = c_res/c_N, c2 = c_tau/c_res'''
    def __init__(self, c1=0.41, c2=1.67):
        self.c1 = float(c1)
        self.c2 = float(c2)
        require(self.c1 > 0, 'c1', 'must be positive')
        require(self.c2 > 0, 'c2', 'must be positive')

    def __repr__(self):
        return f'RateParams<c1={self.c1}, c2={self.c2}>'
