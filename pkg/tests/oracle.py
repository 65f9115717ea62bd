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
'''Monte Carlo and exact diagonalization oracle tests'''

import math
import os
import unittest

import numpy as np

from tlstoolkit.config import ToolkitConfig
from tlstoolkit.echo import PulseSequence
from tlstoolkit.errors import ValidationError
from tlstoolkit.kernels import CrossoverShape, DephasingChannel
from tlstoolkit.oracle import (FilterFunction, FluctuatorEnsemble,
                               TelegraphHistories, beta_refit, exact_echo,
                               exact_three_site, history_average, mc_echo,
                               radius_for_tolerance, telegraph_histories,
                               three_site_hamiltonian, truncation_bound)
from tlstoolkit.validation import run_suite

SLOW = os.environ.get('TLSTOOLKIT_SLOW_TESTS') == '1'

class FilterFunctionTests(unittest.TestCase):
    def test_refocusing(self):
        for n_pulses in range(1, 6):
            self.assertAlmostEqual(FilterFunction(n_pulses, 1e-6).integral(),
                                   0.0)

    def test_signs(self):
        function = FilterFunction(2, 1.0)
        np.testing.assert_array_equal(function.value([0.5, 2.0, 3.5]),
                                      [1.0, -1.0, 1.0])
        self.assertEqual(function.total_time, 4.0)
        with self.assertRaises(ValidationError):
            FilterFunction(0, 1.0)

class HistoryTests(unittest.TestCase):
    def setUp(self):
        self.histories = TelegraphHistories(
            [1.0, -1.0], [[0.3, np.inf], [0.3, 0.7]], 1.0)

    def test_antiderivative(self):
        values = self.histories.antiderivative(np.array([[0.5, 1.0],
                                                         [0.5, 1.0]]))
        np.testing.assert_allclose(values, [[0.1, -0.4], [-0.1, -0.2]])

    def test_phase_integral(self):
        np.testing.assert_allclose(self.histories.phase_integral(1, [1.0]),
                                   [[0.6], [0.0]], atol=1e-12)

    def test_static_histories(self):
        rng = np.random.default_rng(1)
        static = telegraph_histories(rng, 50, 0.0, 1.0)
        np.testing.assert_array_equal(
            static.phase_integral(3, [0.2, 1.0]), np.zeros((50, 2)))
        self.assertTrue(set(static.initial) <= {-1.0, 1.0})

    def test_mixed_static_rows(self):
        histories = TelegraphHistories(
            [1.0, -1.0, 1.0], [[0.3, np.inf], [np.inf, np.inf], [0.1, 0.45]],
            1.0)
        phase = histories.phase_integral(5, [0.37, 0.9])
        np.testing.assert_array_equal(phase[1], [0.0, 0.0])
        self.assertTrue(np.all(phase[0] != 0.0))

    def test_flip_count(self):
        rng = np.random.default_rng(2)
        histories = telegraph_histories(rng, 20000, 3.0, 1.0)
        counts = np.sum(np.isfinite(histories.flips), axis=1)
        self.assertAlmostEqual(counts.mean(), 3.0, delta=0.05)

class HistoryAverageTests(unittest.TestCase):
    def test_short_time(self):
        # one flip at u gives |X| = 2 min(u, t - u), so G = (kappa t)^2 / 2
        mean, error = history_average(3, 1, [0.05], n_samples=20000)
        self.assertLess(abs(mean[0] - 0.05 ** 2 / 2),
                        4 * error[0] + 0.1 * 0.05 ** 2 / 2)

    def test_independent_of_workers(self):
        serial = history_average(6, 3, [1.0, 5.0], n_samples=4000, seed=7)
        parallel = history_average(6, 3, [1.0, 5.0], n_samples=4000, seed=7,
                                   n_jobs=2)
        np.testing.assert_array_equal(serial[0], parallel[0])
        other = history_average(6, 3, [1.0, 5.0], n_samples=4000, seed=8)
        self.assertFalse(np.array_equal(serial[0], other[0]))

    def test_needs_flips(self):
        channel = DephasingChannel(3, 1.0, 0.0, 1e24)
        with self.assertRaises(ValidationError):
            exact_echo(channel, 1, [1e-6], n_samples=100)

class EnsembleTests(unittest.TestCase):
    def setUp(self):
        self.params = ToolkitConfig().params
        self.density = self.params.species_density
        self.times = np.linspace(2e-6, 2e-5, 10)

    def test_static_refocusing(self):
        static = DephasingChannel(3, 1e3, 0.0, self.density)
        ensemble = FluctuatorEnsemble(static, 0, 500,
                                      sample_radius=20 * self.params.lattice_a)
        result = mc_echo(ensemble, PulseSequence(1), self.times)
        np.testing.assert_allclose(result.intensity, 1.0, atol=1e-12)
        self.assertFalse(result.flagged)

    def test_deterministic(self):
        channel = DephasingChannel(3, 1e-21, 1e6, self.density)
        ensemble = FluctuatorEnsemble(channel, 5, 600,
                                      sample_radius=10 * self.params.lattice_a)
        first = mc_echo(ensemble, PulseSequence(1), self.times, chunk=200)
        second = mc_echo(ensemble, PulseSequence(1), self.times, n_jobs=2,
                         chunk=200)
        np.testing.assert_array_equal(first.intensity, second.intensity)
        self.assertTrue(np.all(first.intensity <= 1.0))

    def test_undersampled_flagged(self):
        channel = DephasingChannel(3, 1e-19, 1e6, self.density)
        ensemble = FluctuatorEnsemble(channel, 0, 10,
                                      sample_radius=10 * self.params.lattice_a)
        with self.assertLogs('tlstoolkit.oracle', level='WARNING'):
            result = mc_echo(ensemble, PulseSequence(1), self.times,
                             max_error=1e-6)
        self.assertTrue(result.flagged)

    def test_sample_radius(self):
        channel = DephasingChannel(3, 1e-21, 1e6, self.density)
        radius = radius_for_tolerance(channel, 1e-5, tolerance=0.005)
        x2 = min(1e-10, 1e-5 / 1e6)
        self.assertAlmostEqual(truncation_bound(channel, radius, x2) / 0.005,
                               1.0)
        ensemble = FluctuatorEnsemble(channel, t_max=1e-5)
        self.assertAlmostEqual(ensemble.sample_radius, radius)
        with self.assertRaises(ValidationError):
            FluctuatorEnsemble(channel)

class ThreeSiteTests(unittest.TestCase):
    def test_uncoupled_spectrum(self):
        values = exact_three_site(0.0, 0.0, 0.0, (1.0, 2.0, 3.0))
        np.testing.assert_allclose(values, [-3, -2, -1, 0, 0, 1, 2, 3],
                                   atol=1e-12)

    def test_coupled(self):
        hamiltonian = three_site_hamiltonian(0.1, 0.2, 0.3, (1.0, 1.0, 1.5))
        np.testing.assert_array_equal(hamiltonian, hamiltonian.T)
        values = exact_three_site(0.1, 0.2, 0.3, (1.0, 1.0, 1.5))
        self.assertAlmostEqual(float(np.sum(values)), 0.0)
        with self.assertRaises(ValidationError):
            three_site_hamiltonian(0.1, 0.2, 0.3, (1.0, 1.0))

@unittest.skipUnless(SLOW, 'set TLSTOOLKIT_SLOW_TESTS=1')
class OracleSuiteTests(unittest.TestCase):
    def test_crossover_against_exact_average(self):
        checks = run_suite('oracle', ToolkitConfig(), seed=0,
                           n_samples=20000)
        self.assertTrue(checks.passed, [record.as_dict() for record in
                                        checks.failures()])
        self.assertIn('oracle_g6_N1', checks.curves)

    def test_beta_refit(self):
        shape = CrossoverShape()
        for gamma in (6, 3):
            beta = beta_refit(gamma, 1, n_samples=20000, seed=2)
            self.assertAlmostEqual(beta, shape.beta(gamma, 1), delta=0.3)

if __name__ == '__main__':
    unittest.main()
