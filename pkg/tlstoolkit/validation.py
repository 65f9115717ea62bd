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
'''Validation suites comparing the model against reference values'''

import logging
import math

import numpy as np

from .echo import (EchoModelConfig, PulseSequence, RabiConfig,
                   one_over_e_time, rabi_asymptote, rabi_envelope_power,
                   rabi_pair, rabi_peak_times, scaling_slopes)
from .errors import ValidationError
from .kernels import (DephasingChannel, fluorine_nnn_time, kernel_crossover,
                      long_time_coefficient, short_time_coefficient, vbar)
from .levels import (clock_field, level_energy, numeric_clock_field,
                     pair_levels, ring_exchange, ring_exchange_at, site_energy)
from .lookup import SeverityMap
from .material import PairConfig, SpinSite
from .oracle import (FluctuatorEnsemble, exact_echo, mc_echo,
                     pair_hamiltonian, ring_splitting)
from .rates import hyperfine_disorder, rate_table

logger = logging.getLogger(__name__)

#############################################################################
# CheckRecord
#############################################################################
class CheckRecord:
    '''One comparison of a computed value with its reference'''
    # pylint: disable=too-many-arguments
    def __init__(self, suite, name, value, expected, tolerance,
                 relative=True, severity=10, note=None):
        self.suite = suite
        self.name = name
        self.value = float(value)
        self.expected = float(expected)
        self.tolerance = float(tolerance)
        self.relative = relative
        self.severity = severity
        self.note = note

    @property
    def deviation(self):
        '''relative or absolute difference from the expected value'''
        difference = self.value - self.expected
        if self.relative:
            return difference / abs(self.expected) if self.expected else \
                math.inf
        return difference

    @property
    def passed(self):
        '''whether the deviation is inside the tolerance'''
        return math.isfinite(self.value) and \
            abs(self.deviation) <= self.tolerance

    @property
    def severity_label(self):
        '''returns severity as a textual representation'''
        return SeverityMap().label(self.severity)

    def as_dict(self):
        '''JSON friendly row'''
        return {
            'suite': self.suite,
            'check': self.name,
            'value': self.value,
            'expected': self.expected,
            'deviation': self.deviation,
            'tolerance': self.tolerance,
            'relative': self.relative,
            'passed': self.passed,
            'severity': self.severity_label,
            'note': self.note,
        }

    def __repr__(self):
        return f'CheckRecord<{self.suite}.{self.name}, value={self.value:.6g}' \
               f', expected={self.expected:.6g}, passed={self.passed}>'

class CheckList(list):
    '''Checks of one or more suites, with curves for plotting'''
    def __init__(self, *args):
        super().__init__(*args)
        self.curves = {}

    def check(self, suite, name, value, expected, tolerance, **kwargs):
        '''add a check and log failures'''
        record = CheckRecord(suite, name, value, expected, tolerance,
                             **kwargs)
        self.append(record)
        if not record.passed:
            log = logger.warning if record.severity >= 5 else logger.info
            log('check %s.%s failed: %.6g vs %.6g', suite, name,
                record.value, record.expected)
        return record

    def extend_from(self, other):
        '''merge another CheckList'''
        self.extend(other)
        self.curves.update(other.curves)

    @property
    def passed(self):
        '''whether every check passed'''
        return all(record.passed for record in self)

    def failures(self, minimum_severity=0):
        '''failed checks at or above a severity'''
        return [record for record in self
                if not record.passed and record.severity >= minimum_severity]

#############################################################################
# Suites
#############################################################################
def levels_suite(config, **_):
    '''clock fields, clock energy, ring exchange and pair levels'''
    params = config.params
    checks = CheckList()
    checks.check('levels', 'clock_field_-3/2_mT',
                 clock_field(params, -1.5) * 1e3, 38.0, 0.5, relative=False)
    checks.check('levels', 'clock_field_-1/2_mT',
                 clock_field(params, -0.5) * 1e3, 13.0, 0.5, relative=False)
    checks.check('levels', 'clock_energy_hz',
                 level_energy(params, -1.5, clock_field(params, -1.5)),
                 params.delta, 1e-12)
    checks.check('levels', 'numeric_clock_field_t',
                 numeric_clock_field(params, -1.5),
                 clock_field(params, -1.5), 1e-5, relative=False)

    j_pair = 100e6
    for tau in (0, 1):
        perturbative = ring_exchange(1e6, 1.3e6, params.delta, j_pair,
                                     params.delta + 1e9, tau)
        exact = ring_splitting(1e6, 1.3e6, j_pair, params.delta,
                               params.delta + 1e9, tau)
        checks.check('levels', f'ring_exchange_tau{tau}', perturbative,
                     exact, 0.05)
    r = 4.0 * params.lattice_a
    near = ring_exchange_at(params, r, 0.3, 1.1, params.delta, j_pair,
                            params.delta + 20e9, 0)
    far = ring_exchange_at(params, 2.0 * r, 0.3, 1.1, params.delta, j_pair,
                           params.delta + 20e9, 0)
    checks.check('levels', 'ring_exchange_r6_scaling', near / far, 64.0,
                  1e-9)

    pair = PairConfig(7.151e9, 0.589e9)
    b_z = clock_field(params, -1.5) + 1e-3
    levels = np.sort(pair_levels(params, pair, b_z).energies)
    exact = np.linalg.eigvalsh(pair_hamiltonian(params, pair, b_z))
    checks.check('levels', 'pair_levels_vs_diagonalization',
                 float(np.max(np.abs(levels - exact))) / params.delta, 0.0,
                 1e-12, relative=False)
    checks.check('levels', 'pair_transition_at_clock_hz',
                 pair_levels(params, pair, clock_field(params, -1.5))
                 .observed_transition, params.delta + pair.coupling, 1e-12)
    return checks

def rates_suite(config, seed=0, n_samples=20000, **_):
    '''flip times and gap widths of the hyperfine species'''
    checks = CheckList()
    params = config.params
    disorder = config.disorder.at(params.x)
    b_z = clock_field(params, -1.5)
    rng = np.random.default_rng(seed)
    for iz in (-0.5, 0.5):
        energies = [site_energy(params, SpinSite.draw(
            rng, np.zeros(3), iz, disorder, 0.5 * params.zeeman), b_z)
            for _ in range(n_samples)]
        checks.check('rates', f'sampled_width_{iz:+g}_hz',
                     float(np.std(energies)),
                     hyperfine_disorder(params, config.disorder, iz, b_z),
                     0.05, note='spread of drawn sites')
    reference = {
        (0.001, -1.5): 0.45e-6,
        (0.0001, -1.5): 4.6e-6,
        (0.001, -0.5): 12e-6,
    }
    tables = {}
    for (x, iz), expected in reference.items():
        if x not in tables:
            tables[x] = rate_table(config.params.with_x(x), config.disorder,
                                   config.rates, None, config.quasi_static_s)
        entry = tables[x][iz]
        checks.check('rates', f'flip_time_{iz:+g}_x{x:g}_s', entry.flip_time,
                     expected, 0.15)
    table = tables[0.001]
    checks.check('rates', 'flag_+1/2_fluctuating',
                 0.0 if table[0.5].quasi_static else 1.0, 1.0, 0.0,
                 relative=False)
    checks.check('rates', 'flag_+3/2_quasi_static',
                 1.0 if table[1.5].quasi_static else 0.0, 1.0, 0.0,
                 relative=False)
    checks.check('rates', 'flip_time_+1/2_s', table[0.5].flip_time, 0.016,
                 1.0, severity=0,
                 note='order of magnitude, flip time of a magnetized species')
    return checks

def kernels_suite(config, **_):
    '''closed form kernel coefficients'''
    checks = CheckList()
    for gamma, short, long in ((3, 2.25, 65.3), (6, 2.44, 488.0)):
        checks.check('kernels', f'short_time_coefficient_g{gamma}',
                     short_time_coefficient(gamma), short, 0.005)
        checks.check('kernels', f'long_time_coefficient_g{gamma}',
                     long_time_coefficient(gamma), long, 0.005)
    checks.check('kernels', 'fluorine_asymptotic_time_s',
                 config.fluorine.asymptotic_time, 3.8e-6, 0.02)
    return checks

def oracle_suite(config, seed=0, n_samples=20000, n_pulses=(1, 3, 5),
                 n_jobs=1, **_):
    '''exact fluctuator averages against the crossover interpolant'''
    checks = CheckList()
    density = config.params.species_density
    kappa = 1e6
    times = np.linspace(20.0 / kappa / 100, 20.0 / kappa, 100)
    for gamma in (6, 3):
        # V0 chosen so 2 pi V_bar equals kappa
        channel = DephasingChannel(gamma, 1.0, kappa, density)
        channel = DephasingChannel(gamma, kappa / (2 * math.pi) /
                                   vbar(channel), kappa, density,
                                   f'gamma {gamma}')
        for n in n_pulses:
            exact, _ = exact_echo(channel, n, times, n_samples, seed, n_jobs)
            model = kernel_crossover(channel, n, times)
            decayed = -np.log(exact) > 0.02
            worst = float(np.max(np.abs(np.log(model[decayed]) /
                                        np.log(exact[decayed]) - 1.0)))
            checks.check('oracle', f'ln_I_vs_crossover_g{gamma}_N{n}', worst,
                         0.0, 0.10, relative=False)
            checks.curves[f'oracle_g{gamma}_N{n}'] = {
                't_s': times, 'exact': exact, 'crossover': model}

    static = DephasingChannel(3, 1e3, 0.0, density, 'static')
    ensemble = FluctuatorEnsemble(static, seed, max(n_samples // 10, 100),
                                  sample_radius=20 * config.params.lattice_a)
    result = mc_echo(ensemble, PulseSequence(1), times[::10], n_jobs)
    checks.check('oracle', 'static_refocusing',
                 float(np.max(np.abs(result.intensity - 1.0) /
                              np.maximum(2.0 * result.error, 1e-12))),
                 0.0, 1.0, relative=False)
    silent = DephasingChannel(3, 0.0, kappa, density, 'silent')
    ensemble = FluctuatorEnsemble(silent, seed, 100,
                                  sample_radius=20 * config.params.lattice_a)
    result = mc_echo(ensemble, PulseSequence(1), times[::10], n_jobs)
    checks.check('oracle', 'zero_coupling',
                 float(np.max(np.abs(result.intensity - 1.0))), 0.0, 0.0,
                 relative=False)
    return checks

def echo_suite(config, **_):
    '''composed nnn CPMG decay, Rabi envelope and abundance scaling'''
    checks = CheckList()
    params = config.params
    regime = config.regime('nnn_pair')
    table = rate_table(params, config.disorder, config.rates, None,
                       config.quasi_static_s)
    times = {}
    for n, expected in ((1, 2.4e-6), (5, 7.1e-6)):
        seq = PulseSequence(n)
        model = EchoModelConfig.from_model(params, config.disorder,
                                           config.rates, config.fluorine,
                                           regime, seq,
                                           threshold_s=config.quasi_static_s,
                                           table=table)
        times[n] = one_over_e_time(model, seq)
        checks.check('echo', f'nnn_1e_time_N{n}_s', times[n], expected, 0.2)
    short = {n: fluorine_nnn_time(config.fluorine, n, 0.2) for n in (1, 5)}
    checks.check('echo', 'nnn_fluorine_log_slope_N',
                 math.log(short[5] / short[1]) / math.log(5.0), 0.675, 0.075,
                 relative=False)

    rabi = RabiConfig(5e6, 17.8e6, 1e-6)
    peaks = rabi_peak_times(rabi, 0.5e-6, 2e-6)
    worst = max(abs(rabi_pair(rabi.at(t)) / rabi_asymptote(rabi.at(t)) - 1.0)
                for t in peaks)
    checks.check('echo', 'rabi_asymptote', worst, 0.0, 0.05, relative=False)
    checks.check('echo', 'rabi_envelope_power',
                 rabi_envelope_power(rabi, 0.5e-6, 4e-6), -0.5, 0.05,
                 relative=False)

    kappa_slope, pair_slope = scaling_slopes(params, config.disorder,
                                             config.rates)
    checks.check('echo', 'kappa_vs_x_slope', kappa_slope, 1.0, 0.1,
                 relative=False)
    checks.check('echo', 'pair_rate_vs_x_slope', pair_slope, 3.0, 0.2,
                 relative=False)
    return checks

SUITES = {
    'levels': levels_suite,
    'rates': rates_suite,
    'kernels': kernels_suite,
    'oracle': oracle_suite,
    'echo': echo_suite,
}

def run_suite(name, config, **kwargs):
    '''run one named suite, or all of them for "all"'''
    if name == 'all':
        checks = CheckList()
        for suite in SUITES.values():
            checks.extend_from(suite(config, **kwargs))
        return checks
    if name not in SUITES:
        raise ValidationError('suite', f'unknown suite "{name}", expected '
                              f'one of all, {", ".join(SUITES)}')
    return SUITES[name](config, **kwargs)
