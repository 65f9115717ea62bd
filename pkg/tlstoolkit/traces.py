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
'''
Echo traces

A trace file is a comma separated file with the header t_s,intensity,sigma
(sigma is optional).  Lines starting with # are comments; comments of the
form "# key=value" carry trace metadata and "# manifest <sha256>" names the
run that produced the file:

    # manifest 3f2a...
    # regime=nnn_pair
    # n_pulses=1
    t_s,intensity,sigma
    1e-07,0.98,0.01
'''

import configparser
import logging
import math
import os

import numpy as np
from openpyxl import load_workbook
from requests.structures import CaseInsensitiveDict

from .errors import ValidationError
from .lookup import RegimeMap

logger = logging.getLogger(__name__)

HEADER = ('t_s', 'intensity', 'sigma')
METADATA_KEYS = ('drive_frequency_hz', 'b_z_t', 'x', 'n_pulses', 'regime')

#############################################################################
# EchoTrace
#############################################################################
class EchoTrace:
    '''A measured or synthesized echo intensity versus total time'''
    def __init__(self, times, intensities, sigmas=None, metadata=None,
                 filename=None):
        self.filename = filename
        self.times = np.asarray(times, dtype=float)
        self.intensities = np.asarray(intensities, dtype=float)
        self.weighted = sigmas is not None
        self.sigmas = np.ones_like(self.times) if sigmas is None else \
            np.asarray(sigmas, dtype=float)
        self.metadata = CaseInsensitiveDict(metadata or {})
        self.validate()

    def validate(self):
        '''check the trace invariants'''
        if self.times.size == 0:
            raise ValidationError('t_s', 'trace has no data points',
                                  self.filename)
        if self.times.shape != self.intensities.shape or \
                self.times.shape != self.sigmas.shape:
            raise ValidationError('intensity', 'column lengths differ',
                                  self.filename)
        if not np.all(np.isfinite(self.times)):
            raise ValidationError('t_s', 'times must be finite', self.filename)
        if np.any(np.diff(self.times) <= 0):
            bad = int(np.argmax(np.diff(self.times) <= 0)) + 1
            raise ValidationError('t_s', f'times not strictly increasing at '
                                  f'point {bad + 1}', self.filename)
        if not np.all(np.isfinite(self.intensities)):
            raise ValidationError('intensity', 'intensities must be finite',
                                  self.filename)
        if np.any(self.sigmas <= 0) or not np.all(np.isfinite(self.sigmas)):
            raise ValidationError('sigma', 'sigmas must be positive',
                                  self.filename)

    def __len__(self):
        return len(self.times)

    @property
    def name(self):
        '''short name for reports'''
        return self.metadata.get('name') or \
            (os.path.basename(self.filename) if self.filename else 'trace')

    @property
    def regime(self):
        '''measurement regime tag'''
        return self.metadata.get('regime', 'single')

    @property
    def n_pulses(self):
        '''number of pi-pulses'''
        return int(self.metadata.get('n_pulses', 1))

    @property
    def x(self):
        '''Tb concentration'''
        return float(self.metadata['x'])

    @property
    def b_z(self):
        '''static field in T, None at the clock field'''
        value = self.metadata.get('b_z_t')
        return None if value in (None, '') else float(value)

    @property
    def drive_frequency(self):
        '''drive frequency in Hz, None for the regime default'''
        value = self.metadata.get('drive_frequency_hz')
        return None if value in (None, '') else float(value)

    def require_metadata(self, keys=('x', 'n_pulses', 'regime')):
        '''raise ValidationError unless the named metadata are present'''
        for key in keys:
            if self.metadata.get(key) in (None, ''):
                raise ValidationError(key, 'missing trace metadata',
                                      self.filename)
        RegimeMap().check(self.regime, 'regime')
        for key, convert in (('x', float), ('n_pulses', int),
                             ('b_z_t', float), ('drive_frequency_hz', float)):
            value = self.metadata.get(key)
            if value in (None, ''):
                continue
            try:
                convert(value)
            except ValueError as err:
                raise ValidationError(key, f'invalid value "{value}"',
                                      self.filename) from err
        if not 0 < self.x < 1:
            raise ValidationError('x', 'must lie in (0, 1)', self.filename)
        if self.n_pulses < 1:
            raise ValidationError('n_pulses', 'must be at least 1',
                                  self.filename)

    def replace(self, intensities=None, sigmas=None, **metadata):
        '''copy with other intensities or extra metadata'''
        merged = CaseInsensitiveDict(self.metadata)
        merged.update(metadata)
        return EchoTrace(self.times,
                         self.intensities if intensities is None
                         else intensities,
                         (self.sigmas if self.weighted else None)
                         if sigmas is None else sigmas,
                         merged, self.filename)

    def __repr__(self):
        return f'EchoTrace<{self.name}, {len(self)} points, ' \
               f'regime={self.regime}, N={self.n_pulses}>'

#############################################################################
# CSV files
#############################################################################
def _number(text, field, filename, lineno, column):
    try:
        value = float(text)
    except ValueError as err:
        raise ValidationError(field, f'invalid number "{text.strip()}"',
                              filename, lineno, column) from err
    if not math.isfinite(value):
        raise ValidationError(field, 'value must be finite', filename,
                              lineno, column)
    return value

def read_trace_csv(filename, metadata=None):
    '''read a trace CSV file'''
    meta = CaseInsensitiveDict()
    columns = None
    rows = []
    with open(filename, 'r', encoding='utf-8') as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith('#'):
                comment = line[1:].strip()
                if comment.startswith('manifest '):
                    meta['manifest'] = comment.split(None, 1)[1]
                elif '=' in comment:
                    key, value = comment.split('=', 1)
                    meta[key.strip()] = value.strip()
                continue
            fields = line.split(',')
            if columns is None:
                columns = [name.strip().lower() for name in fields]
                if columns not in (list(HEADER), list(HEADER[:2])):
                    raise ValidationError(
                        'header', f'expected "{",".join(HEADER)}", got '
                        f'"{line}"', filename, lineno, 1)
                continue
            if len(fields) != len(columns):
                raise ValidationError(
                    'row', f'expected {len(columns)} values, got '
                    f'{len(fields)}', filename, lineno,
                    len(','.join(fields[:len(columns)])) + 1)
            row = []
            column = 1
            for name, text in zip(columns, fields):
                row.append(_number(text, name, filename, lineno, column))
                column += len(text) + 1
            rows.append(row)

    if columns is None or not rows:
        raise ValidationError('t_s', 'trace has no data points', filename)
    if metadata:
        meta.update(metadata)
    data = np.array(rows)
    sigmas = data[:, 2] if data.shape[1] == 3 else None
    logger.debug('read %d points from %s', len(data), filename)
    return EchoTrace(data[:, 0], data[:, 1], sigmas, meta, filename)

def write_trace_csv(filename, trace, manifest=None, model=None):
    '''write a trace, optionally with a model column for plotting'''
    with open(filename, 'w', encoding='utf-8') as output:
        if manifest:
            print(f'# manifest {manifest}', file=output)
        for key, value in trace.metadata.items():
            if key.lower() != 'manifest':
                print(f'# {key}={value}', file=output)
        header = list(HEADER) + (['model'] if model is not None else [])
        print(','.join(header), file=output)
        for index, t in enumerate(trace.times):
            values = [t, trace.intensities[index], trace.sigmas[index]]
            if model is not None:
                values.append(model[index])
            print(','.join(repr(float(value)) for value in values),
                  file=output)

def write_curve_csv(filename, columns, manifest=None, comments=None):
    '''write named columns {'t_s': [...], 'intensity': [...]} as CSV'''
    names = list(columns)
    length = len(columns[names[0]])
    with open(filename, 'w', encoding='utf-8') as output:
        if manifest:
            print(f'# manifest {manifest}', file=output)
        for key, value in (comments or {}).items():
            print(f'# {key}={value}', file=output)
        print(','.join(names), file=output)
        for row in range(length):
            print(','.join(_cell(columns[name][row]) for name in names),
                  file=output)

def _cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    return repr(float(value))

#############################################################################
# Excel workbooks
#############################################################################
def read_trace_xlsx(filename, metadata=None):
    '''read a trace from the first sheet of a workbook'''
    workbook = load_workbook(filename, read_only=True, data_only=True)
    rows = []
    columns = None
    for lineno, row in enumerate(workbook.worksheets[0].iter_rows(
            values_only=True), 1):
        cells = [cell for cell in row if cell is not None]
        if not cells:
            continue
        if columns is None:
            columns = [str(cell).strip().lower() for cell in cells]
            if columns not in (list(HEADER), list(HEADER[:2])):
                raise ValidationError('header', f'expected '
                                      f'"{",".join(HEADER)}"', filename,
                                      lineno, 1)
            continue
        values = []
        for column, (name, cell) in enumerate(zip(columns, row), 1):
            if cell is None:
                raise ValidationError(name, 'missing value', filename,
                                      lineno, column)
            values.append(_number(str(cell), name, filename, lineno, column))
        rows.append(values)
    workbook.close()
    if not rows:
        raise ValidationError('t_s', 'trace has no data points', filename)
    data = np.array(rows)
    sigmas = data[:, 2] if data.shape[1] == 3 else None
    return EchoTrace(data[:, 0], data[:, 1], sigmas, metadata, filename)

def read_trace(filename, metadata=None):
    '''read a trace from CSV or an Excel workbook'''
    if not os.path.exists(filename):
        raise ValidationError('file', 'no such file', filename)
    if filename.lower().endswith('.xlsx'):
        return read_trace_xlsx(filename, metadata)
    return read_trace_csv(filename, metadata)

#############################################################################
# Fit manifests
#############################################################################
def read_manifest(filename):
    '''
    Read a fit manifest: one INI section per trace naming its file (relative
    to the manifest) and metadata.  Returns traces in section order.
    '''
    parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'))
    try:
        with open(filename, 'r', encoding='utf-8') as handle:
            parser.read_file(handle, source=filename)
    except configparser.MissingSectionHeaderError as err:
        raise ValidationError('syntax', 'no section header', filename,
                              err.lineno) from err
    except configparser.ParsingError as err:
        raise ValidationError('syntax', 'malformed line', filename,
                              err.errors[0][0]) from err
    except configparser.Error as err:
        raise ValidationError('syntax', err.message, filename,
                              getattr(err, 'lineno', None)) from err
    except OSError as err:
        raise ValidationError('manifest', err.strerror, filename) from err

    base = os.path.dirname(os.path.abspath(filename))
    traces = []
    for section in parser.sections():
        entries = CaseInsensitiveDict(parser[section])
        if 'file' not in entries:
            raise ValidationError(f'{section}.file', 'missing trace file',
                                  filename)
        unknown = set(k.lower() for k in entries) - \
            set(METADATA_KEYS) - {'file'}
        if unknown:
            raise ValidationError(f'{section}.{sorted(unknown)[0]}',
                                  'unknown key', filename)
        path = os.path.join(base, entries.pop('file'))
        entries['name'] = section
        trace = read_trace(path, entries)
        trace.require_metadata()
        traces.append(trace)
    if not traces:
        raise ValidationError('manifest', 'lists no traces', filename)
    logger.info('manifest %s: %d traces', filename, len(traces))
    return traces
