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
'''Excel workbooks of rate tables, residual surfaces, fits and checks'''

import math

from xlsxwriter import Workbook

class ToolkitXLSX:
    '''Generate an Excel report'''
    def __init__(self, filename, manifest=None):
        self.workbook = Workbook(filename, {'nan_inf_to_errors': True})
        self.manifest = manifest
        cell = {'align': 'center', 'valign': 'vcenter', 'text_wrap': True}
        self.formats = {
            'header': self.workbook.add_format({
                'bold': True,
                'font_color': 'white',
                'bg_color': '#244062',
                'align': 'center',
                'valign': 'vcenter',
                'text_wrap': True,
                'num_format': '@',
            }),
            'string': self.workbook.add_format(dict(cell)),
            'number': self.workbook.add_format(
                dict(cell, num_format='0.0000E+00')),
            'low': self.workbook.add_format(dict(cell)),
            'med': self.workbook.add_format(dict(
                cell, font_color='#9c6500', bg_color='#ffeb9c')),
            'high': self.workbook.add_format(dict(
                cell, font_color='#9c0006', bg_color='#ffc7ce')),
        }

    def _write_row(self, sheet, row, values, style=None):
        for col, value in enumerate(values):
            if isinstance(value, bool) or value is None:
                sheet.write(row, col, '' if value is None else str(value),
                            style or self.formats['string'])
            elif isinstance(value, (int, float)):
                if isinstance(value, float) and not math.isfinite(value):
                    sheet.write(row, col, str(value),
                                style or self.formats['string'])
                else:
                    sheet.write_number(row, col, value,
                                       style or self.formats['number'])
            else:
                sheet.write(row, col, str(value),
                            style or self.formats['string'])

    def list_rates(self, table):
        '''one row per hyperfine species'''
        sheet = self.workbook.add_worksheet('Rates')
        columns = [('I_z', 10), ('kappa (1/s)', 16), ('1/kappa (s)', 16),
                   ('alpha', 12), ('W_iz (Hz)', 16), ('Quasi-static', 14)]
        row = 1
        for entry in table.rows():
            self._write_row(sheet, row, [entry[name] for name in
                                         table.columns])
            row += 1
        self.add_table(sheet, row, columns)

    def list_surface(self, surface):
        '''one row per (c1, c2) cell'''
        sheet = self.workbook.add_worksheet('Surface')
        columns = [('c1', 10), ('c2', 10), ('W_delta (Hz)', 16),
                   ('Residual', 16), ('Valid', 10)]
        row = 1
        for cell in surface.rows():
            style = None if cell['valid'] else self.formats['high']
            self._write_row(sheet, row, [cell['c1'], cell['c2'],
                                         cell['w_delta_hz'],
                                         cell['residual_sum'],
                                         cell['valid']], style)
            row += 1
        self.add_table(sheet, row, columns)

    def list_fit(self, state):
        '''global parameters followed by the per-trace nuisance values'''
        sheet = self.workbook.add_worksheet('Fit')
        columns = [('Parameter', 30), ('Value', 18), ('Offset', 18)]
        rows = [('c1', state.c1, None), ('c2', state.c2, None),
                ('W_delta (Hz)', state.w_delta, None),
                ('Reference x', state.reference_x, None),
                ('Residual sum', state.residual_sum, None)]
        fluorine = {'t_f': ('T_F (s)', 't_f'), 'beta_f': ('beta_F', 'beta_f'),
                    'kappa_f': ('kappa_F (1/s)', 'kappa_f'),
                    'j_par': ('J_par nn (Hz)', 'j_par_nn')}
        rows.extend((fluorine[name][0],
                     getattr(state.fluorine, fluorine[name][1]), None)
                    for name in state.fitted_fluorine)
        rows.extend((f'I0 {name}', amplitude, offset)
                    for name, (amplitude, offset) in state.nuisance.items())
        row = 1
        for values in rows:
            self._write_row(sheet, row, values)
            row += 1
        self.add_table(sheet, row, columns)

    def list_checks(self, checks):
        '''validation checks coloured by severity when failing'''
        sheet = self.workbook.add_worksheet('Checks')
        columns = [('Suite', 12), ('Check', 36), ('Value', 16),
                   ('Expected', 16), ('Deviation', 14), ('Tolerance', 12),
                   ('Passed', 10), ('Severity', 10), ('Note', 40)]
        row = 1
        for record in checks:
            style = None if record.passed else \
                self.formats[record.severity_label.lower()]
            self._write_row(sheet, row, [
                record.suite, record.name, record.value, record.expected,
                record.deviation, record.tolerance, record.passed,
                record.severity_label, record.note or ''], style)
            row += 1
        self.add_table(sheet, row, columns)

    def generate(self, table=None, surface=None, state=None, checks=None):
        '''Generate the workbook from whatever results are available'''
        if table is not None:
            self.list_rates(table)
        if surface is not None:
            self.list_surface(surface)
        if state is not None:
            self.list_fit(state)
        if checks is not None:
            self.list_checks(checks)
        if self.manifest:
            self.workbook.set_properties({'comments':
                                          f'manifest {self.manifest}'})
        self.workbook.close()

    def add_table(self, sheet, row, columns):
        '''add the table to the workbook'''

        # If no data, don't add the table
        if row == 1:
            sheet.merge_range(0, 0, 0, len(columns)-1, 'No results to report')
            return

        for colno, (_, colwidth) in enumerate(columns):
            sheet.set_column(colno, colno, colwidth)

        headers = [
            {'header': colname, 'header_format': self.formats['header']} \
            for colname, _ in columns]
        sheet.add_table(0, 0, row-1, len(columns)-1, {
            'autofilter': True, 'name': sheet.name, 'columns': headers})
