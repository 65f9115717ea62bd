#!/usr/bin/env python
#
# Copyright 2021-2025, Martin Renters
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
'''Flip rate and lifetime tests'''

import math
import unittest

import numpy as np
from scipy import integrate

from tlstoolkit.errors import ValidationError
from tlstoolkit.levels import clock_field
from tlstoolkit.material import DisorderModel, MaterialParams, RateParams
from tlstoolkit.rates import (TWO_PI, _sqrt_overlap, decay_rate_density,
                              decay_suppression_single, golden_rule_T1,
                              hyperfine_disorder, j_typ,
                              laplace_decay, pair_T1, pair_T1_asymptote,
                              pair_decay_suppression, phonon_ratio,
                              quasi_static, rate_table, rho_delta,
                              sqrt_overlap_closed_form, tau_s_inv,
                              tau_s_inv_reduced)

class RateTableTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.params = MaterialParams()
        cls.disorder = DisorderModel()
        cls.rates = RateParams()
        cls.table = rate_table(cls.params, cls.disorder, cls.rates)

    def test_clock_species(self):
        self.assertAlmostEqual(self.table[-1.5].flip_time / 0.45e-6, 1.0,
                               delta=0.15)
        self.assertFalse(self.table[-1.5].quasi_static)

    def test_other_species(self):
        self.assertAlmostEqual(self.table[-0.5].flip_time / 12e-6, 1.0,
                               delta=0.15)
        self.assertFalse(self.table[0.5].quasi_static)
        self.assertGreater(self.table[0.5].flip_time, 1e-4)
        self.assertTrue(self.table[1.5].quasi_static)

    def test_rows(self):
        rows = self.table.rows()
        self.assertEqual([row['iz'] for row in rows],
                         ['-3/2', '-1/2', '1/2', '3/2'])
        self.assertEqual(tuple(rows[0]), self.table.columns)
        self.assertAlmostEqual(self.table.kappa('-3/2'), rows[0]['kappa_hz'])

    def test_dilution(self):
        dilute = rate_table(self.params.with_x(0.0001), self.disorder,
                            self.rates)
        self.assertAlmostEqual(dilute[-1.5].flip_time / 4.6e-6, 1.0,
                               delta=0.15)
        self.assertAlmostEqual(dilute.kappa(-1.5) / self.table.kappa(-1.5),
                               0.1, places=6)

    def test_parallel_matches_serial(self):
        parallel = rate_table(self.params, self.disorder, self.rates,
                              n_jobs=2)
        for iz, entry in self.table.items():
            self.assertEqual(parallel[iz].kappa, entry.kappa)

class FlipRateTests(unittest.TestCase):
    def setUp(self):
        self.params = MaterialParams()
        self.disorder = DisorderModel()

    def test_two_forms_agree(self):
        rates = RateParams(0.41, 1.67)
        self.assertAlmostEqual(
            tau_s_inv_reduced(self.params, self.disorder, rates) /
            tau_s_inv(self.params, self.disorder, rates), 1.0, places=9)

    def test_c1_sensitivity(self):
        slow = tau_s_inv(self.params, self.disorder, RateParams(0.3, 1.67))
        fast = tau_s_inv(self.params, self.disorder, RateParams(0.6, 1.67))
        self.assertGreater(fast, slow)

    def test_c2_prefactor(self):
        base = tau_s_inv(self.params, self.disorder, RateParams(0.41, 1.0))
        double = tau_s_inv(self.params, self.disorder, RateParams(0.41, 2.0))
        self.assertAlmostEqual(double / base, 2.0)

    def test_detuned_drive(self):
        center = tau_s_inv(self.params, self.disorder, RateParams())
        detuned = tau_s_inv(self.params, self.disorder, RateParams(),
                            omega_p=self.params.delta + 40e6)
        self.assertLess(detuned, center)

    def test_quasi_static(self):
        self.assertTrue(quasi_static(0.0))
        self.assertTrue(quasi_static(0.5))
        self.assertFalse(quasi_static(2.0))
        self.assertFalse(quasi_static(0.5, threshold_s=10.0))

    def test_bad_rates(self):
        with self.assertRaises(ValidationError):
            RateParams(0.0, 1.0)
        with self.assertRaises(ValidationError):
            RateParams(0.4, -1.0)

class DisorderWidthTests(unittest.TestCase):
    def setUp(self):
        self.params = MaterialParams()
        self.b_z = clock_field(self.params, -1.5)
        self.disorder = DisorderModel(dh_fwhm_t=1.1e-3)

    def width(self, iz, disorder=None):
        return hyperfine_disorder(self.params, disorder or self.disorder, iz,
                                  self.b_z)

    def test_clock_species(self):
        self.assertAlmostEqual(self.width(-1.5) / 21e6, 1.0, places=12)

    def test_magnetized_species(self):
        self.assertAlmostEqual(self.width(-0.5) / 24.39e6, 1.0, delta=0.01)
        widths = [self.width(iz) for iz in (-1.5, -0.5, 0.5, 1.5)]
        self.assertTrue(all(a < b for a, b in zip(widths, widths[1:])))

    def test_no_internal_field(self):
        quiet = DisorderModel(dh_fwhm_t=0.0)
        for iz in (-1.5, -0.5, 0.5, 1.5):
            self.assertAlmostEqual(self.width(iz, quiet), 21e6)

class LifetimeTests(unittest.TestCase):
    def setUp(self):
        self.params = MaterialParams()
        self.disorder = DisorderModel()

    def test_overlap_closed_form(self):
        width = TWO_PI * 21e6
        tau_s = 0.464e-6
        self.assertAlmostEqual(
            _sqrt_overlap(0.0, width, tau_s) /
            sqrt_overlap_closed_form(width, tau_s), 1.0, places=4)

    def test_pair_lifetime(self):
        tau_s = 0.464e-6
        omega_p = self.params.delta + 0.5e9
        single = golden_rule_T1(self.params, self.disorder, omega_p, tau_s)
        pair = pair_T1(self.params, self.disorder, omega_p, tau_s)
        self.assertAlmostEqual(single / pair, 3.0)

    def test_lifetime_center(self):
        tau_s = 12e-6
        delta = self.params.delta
        shifted = golden_rule_T1(self.params, self.disorder, delta + 1.5e9,
                                 tau_s, center=delta + 1e9)
        plain = golden_rule_T1(self.params, self.disorder, delta + 0.5e9,
                               tau_s)
        self.assertAlmostEqual(shifted / plain, 1.0, places=9)
        self.assertAlmostEqual(
            pair_T1(self.params, self.disorder, delta + 1.5e9, tau_s,
                    center=delta + 1e9) / plain, 1.0 / 3.0, places=9)

    def test_pair_asymptote(self):
        tau_s = 0.464e-6
        omega_p = self.params.delta + 7.61e9
        numeric = pair_T1(self.params, self.disorder, omega_p, tau_s)
        asymptote = pair_T1_asymptote(self.params, omega_p, tau_s)
        self.assertAlmostEqual(numeric / asymptote, 1.0, delta=0.01)
        self.assertGreater(asymptote, 1e-3)
        with self.assertRaises(ValidationError):
            pair_T1_asymptote(self.params, self.params.delta, tau_s)

    def test_stretched_decay_from_rates(self):
        T1 = 1e-3
        for t in (1e-6, 1e-4, 1e-2):
            self.assertAlmostEqual(laplace_decay(t, T1),
                                   math.exp(-math.sqrt(t / T1)), places=4)

    def test_decay_suppression(self):
        t = np.array([0.0, 1e-7, 1e-5])
        np.testing.assert_array_equal(
            decay_suppression_single(t, math.inf, 1e-3), np.ones(3))
        np.testing.assert_array_equal(pair_decay_suppression(t, math.inf),
                                      np.ones(3))
        early = decay_suppression_single(1e-9, 1e-6, 1e-9)
        self.assertAlmostEqual(float(early), math.exp(-1e-3 / 1.001))
        with self.assertRaises(ValidationError):
            decay_suppression_single([-1.0], 1e-6, 1e-3)

    def test_phonon_ratio(self):
        self.assertAlmostEqual(phonon_ratio(2.0, 1.0), 8.0)
        self.assertAlmostEqual(phonon_ratio(2.0, 1.0, 3), 24.0)
        with self.assertRaises(ValidationError):
            phonon_ratio(0.0, 1.0)

    def test_hopping_scale(self):
        dense = j_typ(self.params.with_x(0.002))
        self.assertAlmostEqual(dense / j_typ(self.params), 2.0)

class DensityTests(unittest.TestCase):
    def test_gap_density(self):
        width = 21e6
        omega = np.linspace(-10 * width, 10 * width, 2001) + 27.8e9
        density = rho_delta(omega, 27.8e9, width)
        self.assertAlmostEqual(float(integrate.trapezoid(density, omega)),
                               1.0, places=6)
        with self.assertRaises(ValidationError):
            rho_delta(27.8e9, 27.8e9, 0.0)

    def test_decay_rate_density(self):
        t1 = 2e-6
        mode = 1.0 / (6.0 * t1)
        peak = float(decay_rate_density(mode, t1))
        for factor in (0.9, 1.1):
            self.assertLess(float(decay_rate_density(factor * mode, t1)),
                            peak)
        np.testing.assert_array_equal(decay_rate_density([-1.0, 0.0], t1),
                                      [0.0, 0.0])

if __name__ == '__main__':
    unittest.main()
