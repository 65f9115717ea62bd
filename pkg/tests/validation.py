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
'''Validation suite tests'''

import math
import unittest

from tlstoolkit.config import ToolkitConfig
from tlstoolkit.errors import ValidationError
from tlstoolkit.validation import CheckList, CheckRecord, SUITES, run_suite

class CheckRecordTests(unittest.TestCase):
    def test_relative(self):
        record = CheckRecord('rates', 'flip_time', 0.5e-6, 0.45e-6, 0.15)
        self.assertAlmostEqual(record.deviation, 0.1111111, places=6)
        self.assertTrue(record.passed)
        self.assertEqual(record.severity_label, 'High')

    def test_absolute(self):
        record = CheckRecord('echo', 'slope', 0.55, 0.675, 0.075,
                             relative=False, severity=0)
        self.assertAlmostEqual(record.deviation, -0.125)
        self.assertFalse(record.passed)
        self.assertEqual(record.as_dict()['severity'], 'Low')

    def test_not_finite(self):
        self.assertFalse(CheckRecord('a', 'b', math.nan, 1.0, 1.0).passed)
        self.assertFalse(CheckRecord('a', 'b', 1.0, 0.0, 1.0).passed)
        self.assertEqual(CheckRecord('a', 'b', 1.0, 1.0, 0.0,
                                     severity=7).severity_label, 'Med')

class CheckListTests(unittest.TestCase):
    def test_failures(self):
        checks = CheckList()
        checks.check('a', 'good', 1.0, 1.0, 0.01)
        with self.assertLogs('tlstoolkit.validation', 'WARNING'):
            checks.check('a', 'bad', 2.0, 1.0, 0.01)
        checks.check('a', 'minor', 2.0, 1.0, 0.01, severity=0)
        self.assertFalse(checks.passed)
        self.assertEqual([record.name for record in checks.failures()],
                         ['bad', 'minor'])
        self.assertEqual([record.name for record in checks.failures(5)],
                         ['bad'])

    def test_extend(self):
        first = CheckList()
        first.curves['one'] = {'t_s': [0.0]}
        second = CheckList()
        second.check('b', 'good', 1.0, 1.0, 0.0)
        second.curves['two'] = {'t_s': [1.0]}
        first.extend_from(second)
        self.assertEqual(len(first), 1)
        self.assertEqual(set(first.curves), {'one', 'two'})

class SuiteTests(unittest.TestCase):
    def setUp(self):
        self.config = ToolkitConfig()

    def test_names(self):
        self.assertEqual(list(SUITES),
                         ['levels', 'rates', 'kernels', 'oracle', 'echo'])
        with self.assertRaises(ValidationError):
            run_suite('phonons', self.config)

    def test_fast_suites(self):
        for name in ('levels', 'kernels', 'rates'):
            with self.subTest(suite=name):
                checks = run_suite(name, self.config)
                self.assertTrue(checks)
                self.assertEqual(checks.failures(), [])
                self.assertTrue(all(record.suite == name
                                    for record in checks))

    def test_sampled_widths(self):
        checks = run_suite('rates', self.config, n_samples=5000)
        widths = [record for record in checks
                  if record.name.startswith('sampled_width')]
        self.assertEqual([record.name for record in widths],
                         ['sampled_width_-0.5_hz', 'sampled_width_+0.5_hz'])
        self.assertTrue(all(record.passed for record in widths))
        self.assertGreater(widths[1].value, widths[0].value)

    def test_echo_suite(self):
        checks = run_suite('echo', self.config)
        self.assertEqual(checks.failures(minimum_severity=5), [])
        names = [record.name for record in checks]
        self.assertIn('nnn_1e_time_N5_s', names)
        self.assertIn('pair_rate_vs_x_slope', names)
        slope = next(record for record in checks
                     if record.name == 'nnn_fluorine_log_slope_N')
        self.assertEqual(slope.severity, 10)
        self.assertTrue(slope.passed)
        self.assertAlmostEqual(slope.value, 2.0 / 3.0, delta=0.04)

if __name__ == '__main__':
    unittest.main()
