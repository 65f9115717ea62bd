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
'''TLStoolkit logging functions and exception classes'''

import logging
import sys
import traceback

#############################################################################
# Exceptions
#############################################################################
class ToolkitError(Exception):
    '''Base class for all toolkit errors'''

class ValidationError(ToolkitError, ValueError):
    '''An input value, file or flag failed validation'''
    def __init__(self, field, message, filename=None, line=None,
                 column=None):
        self.field = field
        self.message = message
        self.filename = filename
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        where = ''
        if self.filename:
            where = self.filename
            if self.line is not None:
                where += f':{self.line}'
                if self.column is not None:
                    where += f':{self.column}'
            where += ': '
        return f'{where}{self.field}: {self.message}'

class ConvergenceError(ToolkitError, RuntimeError):
    '''A quadrature, root finder or optimizer did not converge'''

class PerturbationError(ToolkitError, ArithmeticError):
    '''Perturbation theory is not valid for the supplied couplings'''

def require(condition, field, message):
    '''raise a ValidationError naming field unless condition holds'''
    if not condition:
        raise ValidationError(field, message)

#############################################################################
# Logging
#############################################################################
def setup_logging(verbose=0, filename=None, mode='a'):
    '''Sets up logging'''
    level = logging.WARNING
    if verbose >= 2:
        level = logging.DEBUG
    if verbose == 1:
        level = logging.INFO

    # Remove old handler
    log = logging.getLogger()
    for handler in list(log.handlers):
        if isinstance(handler, logging.StreamHandler):
            log.removeHandler(handler)

    if filename is None:
        handler = logging.StreamHandler(sys.stderr)
    else:
        handler = logging.FileHandler(filename, mode, encoding='utf-8')
    formatter = logging.Formatter('%(asctime)s %(levelname)s: %(message)s',
                                  datefmt='%Y-%m-%d %H:%M:%S')
    handler.setFormatter(formatter)
    log.setLevel(level)
    log.addHandler(handler)

def print_exception(verbose=0, msg=None):
    '''Print a python exception to stderr'''
    err_type, err_value, err_traceback = sys.exc_info()
    msgs = traceback.format_exception_only(err_type, err_value)
    if msg:
        print(msg, file=sys.stderr)
    if verbose:
        msgs = traceback.format_exception(err_type, err_value,
                                          err_traceback)
    for err_string in msgs:
        print(err_string, end='', file=sys.stderr)
