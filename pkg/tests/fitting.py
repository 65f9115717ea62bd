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
'''Mims filtering and global fit tests'''

import math
import unittest

import numpy as np

from tlstoolkit.config import ToolkitConfig
from tlstoolkit.echo import time_grid
from tlstoolkit.errors import ConvergenceError, ValidationError
from tlstoolkit.fitting import (FitState, GridSpec, ResidualSurface,
                                _shell_couplings, degradation_ratio,
                                disorder_from_lineshape, filter_mims,
                                fit_mims_coupling, fitted_curves,
                                fluorine_at, free_fluorine, global_fit,
                                residual_sum, sensitivity_check,
                                solve_nuisance, synthesize_mims_trace,
                                synthesize_trace, valley_direction)
from tlstoolkit.kernels import mims_couplings, mims_envelope, nuclear_zeeman
from tlstoolkit.levels import clock_field
from tlstoolkit.material import RateParams
from tlstoolkit.traces import EchoTrace

class MimsFilterTests(unittest.TestCase):
    def setUp(self):
        self.config = ToolkitConfig()

    def test_recovers_larmor_frequency(self):
        fluorine = self.config.fluorine
        times = np.linspace(0.05e-6, 12e-6, 400)
        trace = synthesize_mims_trace(0.509e6, _shell_couplings(2.0e5,
                                                                fluorine),
                                      1, times, 20e-6, b_z=13.1e-3,
                                      noise=0.002, seed=4)
        mims = filter_mims(trace, self.config.params, fluorine, iz=-0.5)
        self.assertFalse(mims.flagged)
        self.assertAlmostEqual(mims.omega_f_angular, 3.20e6, delta=0.05e6)
        self.assertAlmostEqual(mims.couplings[1] / 2.0e5, 1.0, delta=0.1)
        self.assertEqual(set(mims.as_dict()),
                         {'omega_f_hz', 'a_nn_hz', 'b_nn_hz', 'a_nnn_hz',
                          'b_nnn_hz', 'unit_envelope'})

    def test_unit_envelope_at_clock(self):
        params = self.config.params
        times = np.linspace(0.05e-6, 12e-6, 100)
        trace = synthesize_mims_trace(0.5e6, (0.0, 0.0, 0.0, 0.0), 1, times,
                                      20e-6, b_z=clock_field(params, -1.5),
                                      noise=0.001, seed=1)
        mims = filter_mims(trace, params, self.config.fluorine, iz=-1.5)
        self.assertTrue(mims.flagged)
        np.testing.assert_array_equal(mims.envelope, np.ones(100))
        self.assertIs(mims.demodulated, trace)

    def test_coupling_slope(self):
        params = self.config.params
        fluorine = self.config.fluorine
        times = np.linspace(0.02e-6, 10e-6, 300)
        traces = []
        for b_z in (15.5e-3, 13.5e-3, 14.5e-3):
            couplings = mims_couplings(fluorine, params, b_z, -0.5)
            traces.append(synthesize_mims_trace(
                nuclear_zeeman(params, b_z), couplings, 1, times, 10e-6,
                b_z=b_z))
        fits, slope = fit_mims_coupling(traces, params, fluorine, iz=-0.5)
        self.assertEqual([fit.b_z for fit in fits],
                         [13.5e-3, 14.5e-3, 15.5e-3])
        self.assertAlmostEqual(slope / 5.37e8, 1.0, delta=0.05)
        self.assertAlmostEqual(fits[0].t_1e / 10e-6, 1.0, delta=0.05)

    def test_sweep_needs_field(self):
        times = np.linspace(0.02e-6, 10e-6, 50)
        trace = synthesize_mims_trace(0.5e6, (0.0, 0.0, 0.0, 0.0), 1, times,
                                      10e-6)
        with self.assertRaises(ValidationError):
            fit_mims_coupling([trace], self.config.params,
                              self.config.fluorine, iz=-0.5)

class LineshapeTests(unittest.TestCase):
    def test_correlation(self):
        sigma = 10e6 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
        self.assertAlmostEqual(disorder_from_lineshape(10e6, 'correlated'),
                               sigma)
        self.assertAlmostEqual(disorder_from_lineshape(10e6),
                               math.sqrt(2.0) * sigma)
        with self.assertRaises(ValidationError):
            disorder_from_lineshape(10e6, 'partial')
        with self.assertRaises(ValidationError):
            disorder_from_lineshape(0.0)

class SurfaceTests(unittest.TestCase):
    def setUp(self):
        self.grid = GridSpec.linear((0.2, 1.0), (0.4, 2.0), size=9)
        self.surface = ResidualSurface(self.grid.c1_values,
                                       self.grid.c2_values)
        for i, c1 in enumerate(self.grid.c1_values):
            for j, c2 in enumerate(self.grid.c2_values):
                self.surface.record((i, j), 21e6, (c2 - 2 * c1) ** 2 + 0.01)

    def test_grid(self):
        self.assertEqual(self.grid.shape, (9, 9))
        with self.assertRaises(ValidationError):
            GridSpec([0.4], [1.6], w_delta_start=500e6)
        with self.assertRaises(ValidationError):
            GridSpec([], [1.6])

    def test_minimum_skips_failed_cells(self):
        self.surface.record((0, 0), math.nan, math.nan, 'failed')
        best = self.surface.minimum()
        self.assertNotEqual(best, (0, 0))
        self.assertAlmostEqual(self.surface.residuals[best], 0.01)
        self.assertEqual(len(self.surface.rows()), 81)
        self.assertFalse(self.surface.rows()[0]['valid'])
        empty = ResidualSurface([0.4], [1.6])
        with self.assertRaises(ConvergenceError):
            empty.minimum()

    def test_valley(self):
        direction, anisotropy = valley_direction(self.surface)
        self.assertAlmostEqual(direction[1] / direction[0], 2.0, places=6)
        self.assertGreater(anisotropy, 10.0)

    def test_degradation(self):
        for i, c1 in enumerate(self.grid.c1_values):
            for j in range(len(self.grid.c2_values)):
                self.surface.record((i, j), 21e6, c1)
        self.assertAlmostEqual(degradation_ratio(self.surface, 0.65),
                               0.7 / 0.2)

class NuisanceTests(unittest.TestCase):
    def test_linear_solution(self):
        times = np.linspace(1e-7, 1e-5, 30)
        shape = np.exp(-times / 3e-6)
        trace = EchoTrace(times, 0.8 * shape + 0.1)
        (amplitude, offset), sse = solve_nuisance(shape, trace)
        self.assertAlmostEqual(amplitude, 0.8)
        self.assertAlmostEqual(offset, 0.1)
        self.assertAlmostEqual(sse, 0.0)

class GlobalFitTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.config = ToolkitConfig()
        times = time_grid(1e-8, 1e-4, 16)
        cls.traces = [
            synthesize_trace(cls.config, 'single', x, 1, times, noise=0.0,
                             amplitude=0.9, offset=0.01)
            for x in (0.001, 0.0001)]
        grid = GridSpec([0.41], [1.67], w_delta_start=30e6)
        cls.state, cls.surface, cls.table = global_fit(cls.traces,
                                                       cls.config, grid)

    def test_recovers_disorder(self):
        self.assertAlmostEqual(self.state.w_delta / 21e6, 1.0, delta=0.02)
        self.assertEqual((self.state.c1, self.state.c2), (0.41, 1.67))
        for amplitude, offset in self.state.nuisance.values():
            self.assertAlmostEqual(amplitude, 0.9, delta=0.01)
            self.assertAlmostEqual(offset, 0.01, delta=0.01)
        self.assertEqual(len(self.table), 4)

    def test_curves(self):
        curves = fitted_curves(self.traces, self.config, self.state)
        for trace in self.traces:
            np.testing.assert_allclose(curves[trace.name], trace.intensities,
                                       atol=0.01)

    def test_time_scale_matters(self):
        base, perturbed = sensitivity_check(self.traces, self.config,
                                            self.state)
        self.assertGreater(perturbed, 10 * base)

    def test_state_summary(self):
        summary = self.state.as_dict()
        self.assertEqual(set(summary['traces']),
                         {trace.name for trace in self.traces})
        self.assertIsInstance(self.state.rates, RateParams)
        self.assertIsInstance(self.state, FitState)

    def test_needs_metadata(self):
        bare = EchoTrace(np.linspace(1e-7, 1e-5, 10), np.ones(10))
        with self.assertRaises(ValidationError):
            global_fit([bare], self.config, GridSpec([0.41], [1.67]))

class FluorineFitTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.config = ToolkitConfig()
        truth = ToolkitConfig()
        truth.fluorine = truth.fluorine.copy(t_f=14e-6, beta_f=1.5)
        times = time_grid(1e-8, 1e-4, 16)
        cls.traces = [synthesize_trace(truth, 'single', x, 1, times,
                                       noise=0.0, amplitude=0.9)
                      for x in (0.001, 0.0001)]
        grid = GridSpec([0.41], [1.67], w_delta_start=25e6)
        cls.state, _, _ = global_fit(cls.traces, cls.config, grid)

    def test_recovers_fluorine(self):
        self.assertEqual(self.state.fitted_fluorine, ('t_f', 'beta_f'))
        self.assertAlmostEqual(self.state.fluorine.t_f / 14e-6, 1.0,
                               delta=0.03)
        self.assertAlmostEqual(self.state.fluorine.beta_f / 1.5, 1.0,
                               delta=0.03)
        self.assertAlmostEqual(self.state.w_delta / 21e6, 1.0, delta=0.05)
        summary = self.state.as_dict()
        self.assertAlmostEqual(summary['fluorine']['t_f'],
                               self.state.fluorine.t_f)
        self.assertEqual(summary['fluorine_fitted'], ['t_f', 'beta_f'])
        # the configured model is left alone
        self.assertEqual(self.config.fluorine.t_f, 10.6e-6)

    def test_fixed_fluorine(self):
        grid = GridSpec([0.41], [1.67], fit_fluorine=False)
        state, _, _ = global_fit(self.traces[1:], self.config, grid)
        self.assertEqual(state.fitted_fluorine, ())
        self.assertIs(state.fluorine, self.config.fluorine)

    def test_free_parameters(self):
        times = np.linspace(1e-7, 1e-5, 5)
        nnn = EchoTrace(times, np.ones(5), metadata={'regime': 'nnn_pair'})
        loose = EchoTrace(times, np.ones(5),
                          metadata={'regime': 'loose_pair'})
        self.assertEqual(free_fluorine([nnn]), ('kappa_f', 'j_par'))
        self.assertEqual(free_fluorine([loose, nnn]),
                         ('t_f', 'beta_f', 'kappa_f', 'j_par'))
        fluorine = fluorine_at(self.config.fluorine, ('kappa_f', 'j_par'),
                               [math.log(1000.0), math.log(2.0)])
        self.assertAlmostEqual(fluorine.kappa_f, 1000.0)
        self.assertAlmostEqual(fluorine.j_par_nn, 140e3)
        self.assertAlmostEqual(fluorine.j_par_nnn, 207e3)

class UnitEnvelopeTests(unittest.TestCase):
    def test_demodulated_trace(self):
        config = ToolkitConfig()
        params = config.params
        b_z = clock_field(params, -1.5) + 1e-3
        times = time_grid(1e-8, 5e-5, 16)
        trace = synthesize_trace(config, 'single', 0.001, 1, times,
                                 noise=0.0, b_z=b_z)
        envelope = mims_envelope(config.fluorine, params, b_z, -1.5, 1,
                                 times)
        self.assertLess(np.min(envelope), 0.9)
        demodulated = trace.replace(intensities=trace.intensities / envelope)
        plain, _ = residual_sum([demodulated], config, config.rates,
                                config.disorder, unit_envelope=True)
        twice, _ = residual_sum([demodulated], config, config.rates,
                                config.disorder)
        self.assertLess(plain, 1e-12)
        self.assertGreater(twice, 1e-4)

if __name__ == '__main__':
    unittest.main()
