# vim:ts=4:sw=4:et:ai:sts=4
#
# Copyright 2020-2025, Martin Renters
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

'''RangeList functions and support classes'''

import argparse
import re

class RangeList:
    '''
    RangeList stores integer lists written as: number, number-number,
    e.g. "1-3,5" for pulse counts 1, 2, 3 and 5
    '''
    def __init__(self, min_value, max_value, default=None):
        '''Initialize a Rangelist'''
        self.min_value = min_value
        self.max_value = max_value
        self.values = []
        if default:
            self.from_string(default)

    @property
    def empty(self):
        '''returns whether the rangelist has entries'''
        return len(self.values) == 0

    def from_string(self, range_string):
        '''Convert a range list string to a rangelist item'''
        self.values = []
        range_string = range_string.strip()
        if range_string.upper() == 'ALL':
            self.append(self.min_value, self.max_value)
            return

        range_string = range_string.replace('~', '-')
        range_string = re.sub(r'\s*-\s*', '-', range_string)
        range_string = re.sub(r'[\s,]+', ',', range_string)
        for range_item in range_string.split(','):
            if range_item == '':
                continue
            bounds = range_item.split('-')
            if len(bounds) == 2:
                self.append(int(bounds[0]), int(bounds[1]))
            elif len(bounds) == 1:
                self.append(int(bounds[0]), int(bounds[0]))
            else:
                raise ValueError(f'Invalid range specification "{range_item}"')

    def append(self, low, high):
        '''Appends a low, high value to a RangeList'''
        if low > high or low < self.min_value or high > self.max_value:
            raise ValueError(f'Invalid range {low}-{high}, allowed '
                             f'{self.min_value}-{self.max_value}')
        self.values.append((low, high))

    def __contains__(self, value):
        return any(low <= value <= high for low, high in self.values)

    def __iter__(self):
        '''distinct values in ascending order'''
        seen = set()
        for low, high in self.values:
            seen.update(range(low, high + 1))
        return iter(sorted(seen))

    def __len__(self):
        return len(list(iter(self)))

    def to_string(self):
        '''Returns a string representation of a RangeList'''
        return ','.join(
            f'{low}' if low == high else f'{low}-{high}'
            for low, high in self.values)

    def __repr__(self):
        return self.to_string()

    def __str__(self):
        return self.to_string()

class PulseList(RangeList):
    '''A list of CPMG pi-pulse counts'''
    def __init__(self, default='1', max_pulses=64):
        super().__init__(1, max_pulses, default=default)

class RangeListAction(argparse.Action):
    '''
    An argparse action to fill a RangeList. Example:
    parser.add_argument('--n-pulses', default=PulseList('1'),
                        action=RangeListAction)
    '''
    def __init__(self, option_strings, dest, nargs=None, **kwargs):
        super().__init__(option_strings, dest, **kwargs)
        if not isinstance(self.default, RangeList):
            raise ValueError('No default rangelist specified')

    def __call__(self, parser, namespace, values, option_string=None):
        range_list = getattr(namespace, self.dest)
        try:
            range_list.from_string(values)
        except ValueError as err:
            raise argparse.ArgumentError(self, f'invalid range: {values} '
                                         f'({err})')
