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
'''Lookup Table type classes'''

import math

from .errors import ValidationError

#############################################################################
# LUTBase - Base Lookup Table
#############################################################################
class LUTBase(dict):
    '''Basic Lookup table class'''
    def label(self, code):
        '''Returns the label for a code'''
        return self.get(code, 'unknown')

    def check(self, code, field):
        '''Returns code if known, raises ValidationError naming field if not'''
        if code not in self:
            raise ValidationError(field, f'unknown value "{code}", expected '
                                  f'one of {", ".join(map(str, self))}')
        return code

#############################################################################
# RegimeMap - echo regimes
#############################################################################
class RegimeMap(LUTBase):
    '''Measurement regimes, selected from trace metadata'''
    def __init__(self):
        super().__init__({
            'single': 'Single ion',
            'loose_pair': 'Loose pair',
            'nnn_pair': 'Next nearest neighbour pair',
        })

#############################################################################
# CorrelationMap - site correlation of the crystal field disorder
#############################################################################
class CorrelationMap(LUTBase):
    '''W_delta / W_pair for the two site-correlation assumptions'''
    def __init__(self):
        super().__init__({
            'correlated': 1.0,
            'uncorrelated': math.sqrt(2.0),
        })

#############################################################################
# SeverityMap - check severities
#############################################################################
class SeverityMap(LUTBase):
    '''Severity labels for validation checks'''
    def __init__(self):
        super().__init__({
            0: 'Low',
            5: 'Med',
            10: 'High',
        })

    def label(self, code):
        '''Returns the label of the highest level not above code'''
        levels = [level for level in sorted(self) if level <= code]
        return self[levels[-1]] if levels else self[min(self)]
