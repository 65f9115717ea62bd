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
'''TLStoolkit module'''

__version__ = '1.0.0'
__VERSION__ = __version__

import sys
from .config import load_config
from .errors import print_exception

def config_from_files(explicit=None, verbose=0):
    '''load the material configuration and terminate on error'''
    try:
        config = load_config(explicit)
    except Exception:
        print_exception(verbose, 'Unable to load material configuration')
        sys.exit(2)

    return config
