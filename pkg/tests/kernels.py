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
'''Dephasing kernel tests'''

import math
import unittest

import numpy as np

from tlstoolkit.errors import ConvergenceError, ValidationError
from tlstoolkit.kernels import (CrossoverShape, DephasingChannel,
                                FluorineModel, TWO_PI, angular_average,
                                crossover_exponent, fluorine_loose,
                                fluorine_nnn, fluorine_nnn_time,
                                fluorine_site, kernel_crossover, kernel_long,
                                kernel_short, long_time,
                                long_time_coefficient, magic_angle,
                                mims_couplings, mims_envelope, mims_site,
                                nuclear_zeeman, short_time,
                                short_time_coefficient, stretching_slope,
                                telegraph)
from tlstoolkit.levels import clock_field
from tlstoolkit.material import MaterialParams

class CoefficientTests(unittest.TestCase):
    def test_short_time(self):
        self.assertAlmostEqual(short_time_coefficient(3) / 2.2506, 1.0,
                               delta=0.005)
        self.assertAlmostEqual(short_time_coefficient(6) / 2.4394, 1.0,
                               delta=0.005)

    def test_long_time(self):
        self.assertAlmostEqual(long_time_coefficient(3) / 65.33, 1.0,
                               delta=0.005)
        self.assertAlmostEqual(long_time_coefficient(6) / 487.6, 1.0,
                               delta=0.005)

    def test_angular_average(self):
        self.assertAlmostEqual(angular_average(3), 4.0 / (3 * math.sqrt(3)),
                               places=8)
        self.assertAlmostEqual(math.cos(magic_angle()) ** 2, 1.0 / 3.0)

class KernelTests(unittest.TestCase):
    def setUp(self):
        self.magnetic = DephasingChannel(3, 1e-20, 2e6, 1e24)
        self.ring = DephasingChannel(6, 1e-48, 2e6, 1e24)

    def test_short_time_scaling(self):
        for channel in (self.magnetic, self.ring):
            t_s = short_time(channel, 1)
            self.assertAlmostEqual(float(kernel_short(channel, 1, t_s)),
                                   math.exp(-1.0))
            power = channel.power
            self.assertAlmostEqual(short_time(channel, 4) / t_s,
                                   4 ** (power / (1 + power)))

    def test_long_time_narrowing(self):
        faster = self.magnetic.with_kappa(4e6)
        self.assertAlmostEqual(long_time(faster) / long_time(self.magnetic),
                               2.0)
        t_l = long_time(self.ring)
        self.assertAlmostEqual(float(kernel_long(self.ring, t_l)),
                               math.exp(-1.0))

    def test_static_and_uncoupled(self):
        t = np.array([0.0, 1e-6, 1e-3])
        static = self.magnetic.with_kappa(0.0)
        np.testing.assert_array_equal(kernel_short(static, 1, t), np.ones(3))
        np.testing.assert_array_equal(kernel_long(static, t), np.ones(3))
        np.testing.assert_array_equal(kernel_crossover(static, 1, t),
                                      np.ones(3))
        uncoupled = DephasingChannel(3, 0.0, 2e6, 1e24)
        np.testing.assert_array_equal(kernel_long(uncoupled, t), np.ones(3))

    def test_crossover_limits(self):
        for channel in (self.magnetic, self.ring):
            t_s = short_time(channel, 1)
            t_l = long_time(channel)
            early = 1e-5 * min(t_s, t_l)
            late = 1e4 * max(t_s, t_l)
            short = -math.log(float(kernel_short(channel, 1, early)))
            cross = -math.log(float(kernel_crossover(channel, 1, early)))
            self.assertAlmostEqual(cross / short, 1.0, delta=0.01)
            long = (late / t_l) ** (0.5 * channel.power)
            cross = float(crossover_exponent(late, t_s, t_l, channel.power,
                                             1.0))
            self.assertAlmostEqual(cross / long, 1.0, delta=0.01)

    def test_times_validated(self):
        with self.assertRaises(ValidationError):
            kernel_short(self.magnetic, 1, [-1e-6])
        with self.assertRaises(ValidationError):
            DephasingChannel(4, 1.0, 1.0, 1.0)

    def test_crossover_shape(self):
        shape = CrossoverShape()
        self.assertEqual(shape.beta(6, 1), 1.2)
        self.assertEqual(shape.beta(3, 5), 0.54)
        with self.assertLogs('tlstoolkit.kernels', level='WARNING'):
            self.assertEqual(shape.beta(3, 9), 0.54)
        with self.assertRaises(ValidationError):
            CrossoverShape(beta_ring=(1.0, 1.2))
        with self.assertRaises(ValidationError):
            shape.beta(3, 0)

class TelegraphTests(unittest.TestCase):
    def test_start(self):
        self.assertAlmostEqual(float(telegraph(1e5, 1e4, 0.0)), 1.0)
        np.testing.assert_array_equal(telegraph(0.0, 1e4, [1e-6, 1e-3]),
                                      np.ones(2))

    def test_bounded(self):
        t = np.logspace(-8, -2, 200)
        for kappa in (1e2, 1e5, 1e8):
            values = telegraph(1e5, kappa, t)
            self.assertTrue(np.all((values >= 0.0) & (values <= 1.0)))

    def test_motional_narrowing(self):
        coupling = TWO_PI * 1e3
        kappa = 1e6
        t = np.array([1e-3, 2e-3])
        values = np.log(telegraph(1e3, kappa, t))
        rate = -(values[1] - values[0]) / (t[1] - t[0])
        self.assertAlmostEqual(rate / (2 * coupling ** 2 / kappa), 1.0,
                               delta=0.01)

    def test_branches_join(self):
        # lam * kappa * t crosses 30 between the two points
        kappa = 1e6
        lam = math.sqrt(1.0 - (2 * TWO_PI * 1e4 / kappa) ** 2)
        t = np.array([29.999, 30.001]) / (lam * kappa)
        values = telegraph(1e4, kappa, t)
        self.assertAlmostEqual(values[0] / values[1], 1.0, places=4)

    def test_free_form(self):
        kappa = 1e6
        coupling = TWO_PI * 1e4
        lam = math.sqrt(1.0 - (2 * coupling / kappa) ** 2)
        t = np.linspace(0.0, 20e-6, 50)
        closed = np.exp(-kappa * t) / (2 * lam) * (
            (lam + 1) * np.exp(kappa * lam * t) +
            (lam - 1) * np.exp(-kappa * lam * t))
        np.testing.assert_allclose(telegraph(1e4, kappa, t, form='free'),
                                   closed, rtol=1e-9, atol=1e-15)
        self.assertAlmostEqual(float(telegraph(1e4, kappa, 0.0, 'free')), 1.0)
        # refocusing only helps
        self.assertTrue(np.all(telegraph(1e4, kappa, t) >=
                               telegraph(1e4, kappa, t, 'free') - 1e-12))
        with self.assertRaises(ValidationError):
            telegraph(1e4, kappa, t, form='hahn')

    def test_strong_coupling(self):
        kappa = 1e3
        coupling = TWO_PI * 1e5
        mu = math.sqrt((2 * coupling / kappa) ** 2 - 1.0)
        t = np.linspace(0.0, 10e-6, 40)
        free = np.exp(-kappa * t) * (np.cos(mu * kappa * t) +
                                     np.sin(mu * kappa * t) / mu)
        np.testing.assert_allclose(telegraph(1e5, kappa, t, 'free'), free,
                                   atol=1e-9)
        self.assertLess(float(np.min(telegraph(1e5, kappa, t, 'free'))), 0.0)
        # the echo keeps 1 + kappa sin(2Jt) / 2J up to (kappa / J)^2
        echo = np.exp(-kappa * t) * (1.0 + kappa / (2 * coupling) *
                                     np.sin(2 * coupling * t))
        np.testing.assert_allclose(telegraph(1e5, kappa, t), echo,
                                   atol=5e-6)
        np.testing.assert_allclose(telegraph(1e5, 0.0, t, 'free'),
                                   np.cos(2 * coupling * t))
        np.testing.assert_allclose(telegraph(1e5, 1e-3, t, 'free'),
                                   np.cos(2 * coupling * t), atol=1e-6)

class FluorineTests(unittest.TestCase):
    def setUp(self):
        self.model = FluorineModel()

    def test_asymptotic_time(self):
        self.assertAlmostEqual(self.model.asymptotic_time / 3.8e-6, 1.0,
                               delta=0.02)
        self.assertEqual(self.model.copy(kappa_f=0.0).asymptotic_time,
                         math.inf)

    def test_site_cutoff(self):
        kappa = self.model.kappa_f
        cutoff = math.pi / (2 * TWO_PI * self.model.j_par_nn)
        late = 2.0 * cutoff
        self.assertAlmostEqual(
            float(fluorine_site(self.model.j_par_nn, kappa, 1, late)),
            math.exp(-kappa * late))

    def test_decoupling(self):
        t = np.logspace(-7, -5, 50)
        hahn = fluorine_nnn(self.model, 1, t)
        cpmg = fluorine_nnn(self.model, 5, t)
        self.assertTrue(np.all(cpmg >= hahn - 1e-12))
        self.assertAlmostEqual(float(fluorine_nnn(self.model, 1, 0.0)), 1.0)
        with self.assertRaises(ValidationError):
            fluorine_nnn(self.model, 0, t)

    def test_loose(self):
        self.assertAlmostEqual(float(fluorine_loose(10.6e-6, 1.3, 10.6e-6)),
                               math.exp(-1.0))
        with self.assertRaises(ValidationError):
            fluorine_loose(0.0, 1.3, 1e-6)

    def test_short_time_scaling(self):
        model = self.model
        hahn = fluorine_nnn_time(model, 1, 0.01)
        cpmg = fluorine_nnn_time(model, 5, 0.01)
        self.assertAlmostEqual(math.log(cpmg / hahn) / math.log(5.0),
                               2.0 / 3.0, delta=0.01)
        # -log I = (2/3) kappa sum (2 pi J)^2 t^3 before any cutoff
        couplings = 8 * TWO_PI ** 2 * (model.j_par_nn ** 2 +
                                       model.j_par_nnn ** 2)
        cubic = (1.5 * 0.01 / (model.kappa_f * couplings)) ** (1.0 / 3.0)
        self.assertAlmostEqual(hahn / cubic, 1.0, delta=0.03)
        slope = math.log(fluorine_nnn_time(model, 5, 0.2) /
                         fluorine_nnn_time(model, 1, 0.2)) / math.log(5.0)
        self.assertTrue(0.6 <= slope <= 0.75)
        with self.assertRaises(ConvergenceError):
            fluorine_nnn_time(model.copy(kappa_f=0.0), 1, 0.1)

class MimsTests(unittest.TestCase):
    def test_no_pseudo_secular_coupling(self):
        t = np.linspace(0.0, 5e-6, 20)
        np.testing.assert_array_equal(mims_site(0.5e6, 1e5, 0.0, 1, t),
                                      np.ones(20))

    def test_site_bounded(self):
        t = np.linspace(0.0, 5e-6, 500)
        for n_pulses in (1, 3):
            values = mims_site(0.5e6, 1e5, 2e5, n_pulses, t)
            self.assertAlmostEqual(values[0], 1.0)
            self.assertTrue(np.all((values >= 0.0) & (values <= 1.0)))
            self.assertLess(values.min(), 1.0)

    def test_clock_field_unmodulated(self):
        params = MaterialParams()
        t = np.linspace(0.0, 5e-6, 20)
        envelope = mims_envelope(FluorineModel(), params,
                                 clock_field(params, -1.5), -1.5, 1, t)
        np.testing.assert_allclose(envelope, np.ones(20), atol=1e-12)

    def test_stretching_slope(self):
        t = np.logspace(-7, -5, 100)
        slope = stretching_slope(t, np.exp(-(t / 1e-6) ** 2))
        np.testing.assert_allclose(slope, 2.0, rtol=1e-6)

    def test_nuclear_zeeman(self):
        params = MaterialParams()
        omega_f = nuclear_zeeman(params, 38.2e-3)
        self.assertAlmostEqual(omega_f / 1.53e6, 1.0, delta=0.01)
        self.assertAlmostEqual(TWO_PI * omega_f / 9.6e6, 1.0, delta=0.01)
        self.assertEqual(nuclear_zeeman(params, -38.2e-3), omega_f)

    def test_coupling_slope(self):
        params = MaterialParams()
        model = FluorineModel()
        low = mims_couplings(model, params, 14e-3, -0.5)
        high = mims_couplings(model, params, 15e-3, -0.5)
        # dB_nn / dB_z in MHz/mT
        slope = (high[1] - low[1]) / 1e6
        self.assertAlmostEqual(slope / 0.537, 1.0, delta=0.01)
        self.assertAlmostEqual(high[3] / high[1], 1.0 / model.ratio_b)

if __name__ == '__main__':
    unittest.main()
