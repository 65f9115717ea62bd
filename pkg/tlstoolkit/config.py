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
Material configuration files

A configuration file is INI style.  Every key carries its unit in its name,
for example:

    [material]
    delta_hz = 27.8e9
    g_par = 17.40

    [disorder]
    w_delta_hz = 21e6

Keys missing from a file take the shipped defaults, unknown sections and
keys are rejected.
'''

import configparser
import logging
import os
import re

from .echo import PairRegime, default_regimes
from .errors import ValidationError
from .kernels import FluorineModel
from .material import DisorderModel, MaterialParams, RateParams

logger = logging.getLogger(__name__)

CONFIG_NAME = 'LiYF4.cf'
CONFIG_DIR_ENV = 'TLSTOOLKIT_CONFIG_DIR'
DEFAULT_CONFIG = os.path.join(os.path.dirname(__file__), 'data', CONFIG_NAME)

# section -> key -> (constructor argument, converter)
SCHEMA = {
    'material': {
        'delta_hz': ('delta_hz', float),
        'g_par': ('g_par', float),
        'hyperfine_a_hz': ('hyperfine_a_hz', float),
        'x': ('x', float),
        'fluorine_moment_mun': ('fluorine_moment', float),
        'nuclear_spin': ('nuclear_spin', float),
    },
    'lattice': {
        'lattice_a_m': ('lattice_a_m', float),
        'lattice_c_m': ('lattice_c_m', float),
        'ions_per_cell': ('ions_per_cell', int),
    },
    'constants': {
        'bohr_magneton_j_t': ('bohr_magneton', float),
        'nuclear_magneton_j_t': ('nuclear_magneton', float),
        'vacuum_permeability_n_a2': ('vacuum_permeability', float),
        'planck_j_s': ('planck', float),
    },
    'disorder': {
        'w_delta_hz': ('w_delta_hz', float),
        'dh_fwhm_t': ('dh_fwhm_t', float),
        'clock_hwhm_t': ('clock_hwhm_t', float),
        'reference_x': ('reference_x', float),
        'scale_with_x': ('scale_with_x', 'boolean'),
    },
    'rates': {
        'c1': ('c1', float),
        'c2': ('c2', float),
        'quasi_static_s': ('quasi_static_s', float),
    },
    'fluorine': {
        'j_par_nn_hz': ('j_par_nn', float),
        'j_par_nnn_hz': ('j_par_nnn', float),
        'j_zz_nn_hz': ('j_zz_nn', float),
        'j_zx_nn_hz': ('j_zx_nn', float),
        'kappa_f_hz': ('kappa_f', float),
        'omega_f_hz': ('omega_f', float),
        't_f_s': ('t_f', float),
        'beta_f': ('beta_f', float),
        'ratio_a': ('ratio_a', float),
        'ratio_b': ('ratio_b', float),
        'sites_nn': ('sites_nn', int),
        'sites_nnn': ('sites_nnn', int),
    },
    'pairs': {
        'loose_detuning_hz': ('loose_detuning', float),
        'loose_moment': ('loose_moment', float),
        'nnn_detuning_hz': ('nnn_detuning', float),
        'nnn_moment': ('nnn_moment', float),
    },
    'echo': {
        't_min_s': ('t_min', float),
        't_max_s': ('t_max', float),
        'points_per_decade': ('per_decade', int),
    },
}

#############################################################################
# ToolkitConfig
#############################################################################
class ToolkitConfig:
    '''Everything a subcommand needs to know about the material'''
    # pylint: disable=too-many-instance-attributes
    def __init__(self, params=None, disorder=None, rates=None, fluorine=None,
                 regimes=None, quasi_static_s=1.0, t_min=1e-8, t_max=1e-4,
                 per_decade=64, filenames=None):
        self.params = params or MaterialParams()
        self.disorder = disorder or DisorderModel()
        self.rates = rates or RateParams()
        self.fluorine = fluorine or FluorineModel()
        self.regimes = regimes or default_regimes()
        self.quasi_static_s = float(quasi_static_s)
        self.t_min = float(t_min)
        self.t_max = float(t_max)
        self.per_decade = int(per_decade)
        self.filenames = list(filenames or [])

    def regime(self, name):
        '''named measurement regime'''
        if name not in self.regimes:
            raise ValidationError('regime', f'unknown regime "{name}"')
        return self.regimes[name]

    def __repr__(self):
        return f'ToolkitConfig<{", ".join(self.filenames) or "defaults"}>'

def _line_of(filename, section, key=None):
    '''line number of key inside section (of the header without key)'''
    current = None
    with open(filename, 'r', encoding='utf-8') as handle:
        for lineno, text in enumerate(handle, 1):
            match = re.match(r'\s*\[([^\]]+)\]', text)
            if match:
                current = match.group(1).strip()
                if key is None and current == section:
                    return lineno
                continue
            if key is not None and current == section and \
                    re.match(rf'\s*{re.escape(key)}\s*[=:]', text, re.I):
                return lineno
    return None

def _read(filenames):
    values = {}
    for filename in filenames:
        parser = configparser.ConfigParser(
            inline_comment_prefixes=('#', ';'))
        try:
            with open(filename, 'r', encoding='utf-8') as handle:
                parser.read_file(handle, source=filename)
        except configparser.MissingSectionHeaderError as err:
            raise ValidationError('syntax', 'no section header', filename,
                                  err.lineno) from err
        except configparser.ParsingError as err:
            lineno, _ = err.errors[0]
            raise ValidationError('syntax', 'malformed line', filename,
                                  lineno) from err
        except configparser.Error as err:
            raise ValidationError('syntax', err.message, filename,
                                  getattr(err, 'lineno', None)) from err
        except OSError as err:
            raise ValidationError('config', err.strerror, filename) from err

        for section in parser.sections():
            if section not in SCHEMA:
                raise ValidationError('section', f'unknown section '
                                      f'[{section}]', filename,
                                      _line_of(filename, section))
            for key in parser[section]:
                field = f'{section}.{key}'
                if key not in SCHEMA[section]:
                    raise ValidationError(field, 'unknown key', filename,
                                          _line_of(filename, section, key))
                name, converter = SCHEMA[section][key]
                try:
                    if converter == 'boolean':
                        value = parser.getboolean(section, key)
                    else:
                        value = converter(parser.get(section, key))
                except ValueError as err:
                    raise ValidationError(
                        field, f'invalid value "{parser.get(section, key)}"',
                        filename, _line_of(filename, section, key)) from err
                values.setdefault(section, {})[name] = value
    return values

def config_files(explicit=None):
    '''files to read: shipped defaults, then the environment or explicit file'''
    files = [DEFAULT_CONFIG]
    if explicit:
        files.append(explicit)
    elif os.environ.get(CONFIG_DIR_ENV):
        candidate = os.path.join(os.environ[CONFIG_DIR_ENV], CONFIG_NAME)
        if os.path.exists(candidate):
            files.append(candidate)
        else:
            logger.warning('%s set but %s not found, using defaults',
                           CONFIG_DIR_ENV, candidate)
    return files

def load_config(explicit=None):
    '''read the configuration and build the model objects'''
    files = config_files(explicit)
    values = _read(files)
    logger.info('configuration read from %s', ', '.join(files))
    material = dict(values.get('material', {}))
    material.update(values.get('lattice', {}))
    material.update(values.get('constants', {}))
    params = MaterialParams(**material)
    disorder = DisorderModel(**values.get('disorder', {}))
    rate_values = dict(values.get('rates', {}))
    quasi_static_s = rate_values.pop('quasi_static_s', 1.0)
    rates = RateParams(**rate_values)
    fluorine = FluorineModel(**values.get('fluorine', {}))
    pairs = values.get('pairs', {})
    regimes = {
        'single': PairRegime('single', 0.0),
        'loose_pair': PairRegime('loose_pair',
                                 pairs.get('loose_detuning', -0.5e9),
                                 pairs.get('loose_moment', 0.0016)),
        'nnn_pair': PairRegime('nnn_pair', pairs.get('nnn_detuning', 7.61e9),
                               pairs.get('nnn_moment', 0.00098)),
    }
    if quasi_static_s <= 0:
        raise ValidationError('rates.quasi_static_s', 'must be positive',
                              files[-1])
    return ToolkitConfig(params, disorder, rates, fluorine, regimes,
                         quasi_static_s, filenames=files,
                         **values.get('echo', {}))
