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
'''Excel report tests'''

import os
import tempfile
import unittest

from openpyxl import load_workbook

from tlstoolkit.fitting import FitState, ResidualSurface
from tlstoolkit.kernels import FluorineModel
from tlstoolkit.material import DisorderModel, MaterialParams, RateParams
from tlstoolkit.rates import rate_table
from tlstoolkit.report import ToolkitXLSX
from tlstoolkit.validation import CheckList

class ReportTests(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tempdir.cleanup)
        self.filename = os.path.join(self.tempdir.name, 'report.xlsx')

    def test_sheets(self):
        table = rate_table(MaterialParams(), DisorderModel(), RateParams())
        surface = ResidualSurface([0.4, 0.6], [1.6])
        surface.record((0, 0), 21e6, 0.25)
        surface.record((1, 0), float('nan'), float('nan'), 'failed')
        state = FitState(0.4, 1.6, 21e6, FluorineModel(),
                         {'hahn': (0.9, 0.01)}, 0.25,
                         fitted_fluorine=('t_f',))
        checks = CheckList()
        checks.check('levels', 'good', 1.0, 1.0, 0.01)
        checks.check('echo', 'minor', 2.0, 1.0, 0.01, severity=0)

        ToolkitXLSX(self.filename, 'c0ffee').generate(table, surface, state,
                                                      checks)
        workbook = load_workbook(self.filename)
        self.assertEqual(workbook.sheetnames,
                         ['Rates', 'Surface', 'Fit', 'Checks'])
        rates = list(workbook['Rates'].iter_rows(values_only=True))
        self.assertEqual(rates[0][0], 'I_z')
        self.assertEqual(len(rates), 5)
        fit = list(workbook['Fit'].iter_rows(values_only=True))
        self.assertEqual(fit[1][:2], ('c1', 0.4))
        self.assertEqual(fit[-1], ('I0 hahn', 0.9, 0.01))
        self.assertEqual(fit[-2][:2], ('T_F (s)', 10.6e-6))
        surface_rows = list(workbook['Surface'].iter_rows(values_only=True))
        self.assertEqual(surface_rows[2][4], 'False')
        checks_rows = list(workbook['Checks'].iter_rows(values_only=True))
        self.assertEqual(checks_rows[2][7], 'Low')
        self.assertEqual(workbook.properties.description, 'manifest c0ffee')

    def test_empty_sheet(self):
        ToolkitXLSX(self.filename).generate(checks=CheckList())
        workbook = load_workbook(self.filename)
        self.assertEqual(workbook['Checks']['A1'].value,
                         'No results to report')

if __name__ == '__main__':
    unittest.main()
