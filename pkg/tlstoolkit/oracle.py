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
'''Brute force oracles

Monte Carlo averages over classical telegraph fluctuators and exact
diagonalization of small secular Hamiltonians, used to validate the
analytic kernels and the perturbative ring exchange.

Random streams: the master seed feeds numpy.random.SeedSequence and chunk k
of a run always draws from spawn()[k], so results do not depend on the
number of workers.
'''

import logging
import math

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate, optimize

from .errors import ConvergenceError, ValidationError, require
from .kernels import (CrossoverShape, angular_factor, crossover_exponent,
                      long_time_prefactor, vbar)
from .levels import pair_terms

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
CHUNK = 2000

#############################################################################
# FilterFunction
#############################################################################
class FilterFunction:
    '''Sign of the observed spin under N pi-pulses at (2n-1) tau'''
    def __init__(self, n_pulses, tau):
        self.n_pulses = int(n_pulses)
        self.tau = float(tau)
        require(self.n_pulses >= 1, 'n_pulses', 'must be at least 1')
        require(self.tau >= 0, 'tau', 'must not be negative')

    @property
    def total_time(self):
        '''detection time 2 N tau'''
        return 2 * self.n_pulses * self.tau

    @property
    def breakpoints(self):
        '''0, the pulse times and the detection time'''
        return np.array([0.0] + [(2 * k - 1) * self.tau
                                 for k in range(1, self.n_pulses + 1)] +
                        [self.total_time])

    def value(self, t):
        '''f(t) = +1 before the first pulse, alternating after each pulse'''
        t = np.asarray(t, dtype=float)
        passed = np.searchsorted(self.breakpoints[1:-1], t, side='right')
        return np.where(passed % 2 == 0, 1.0, -1.0)

    def integral(self):
        '''integral of f over the sequence, zero for every N'''
        points = self.breakpoints
        signs = np.where(np.arange(len(points) - 1) % 2 == 0, 1.0, -1.0)
        return float(np.sum(signs * np.diff(points)))

def breakpoint_matrix(n_pulses, times):
    '''breakpoints (len(times), N + 2) for sequences ending at each time'''
    times = np.asarray(times, dtype=float)
    tau = times / (2 * n_pulses)
    inner = np.outer(tau, 2 * np.arange(1, n_pulses + 1) - 1)
    return np.column_stack([np.zeros_like(times), inner, times])

#############################################################################
# TelegraphHistories
#############################################################################
class TelegraphHistories:
    '''Independent +/-1 telegraph histories with Poisson flips on [0, t_max]'''
    def __init__(self, initial, flips, t_max):
        self.initial = np.asarray(initial, dtype=float)
        self.flips = np.asarray(flips, dtype=float)
        self.t_max = float(t_max)
        rows, width = self.flips.shape
        # flips past the last real one sit beyond t_max
        self._padded = np.where(np.isinf(self.flips), 1.5 * self.t_max,
                                self.flips)
        self._stride = 2.0 * self.t_max + 1.0
        self._flat = (self._padded + np.arange(rows)[:, None] *
                      self._stride).ravel()
        corners = np.column_stack([np.zeros(rows),
                                   np.minimum(self._padded, self.t_max)])
        signs = np.where(np.arange(width + 1) % 2 == 0, 1.0, -1.0)
        steps = signs[:-1] * np.diff(corners, axis=1)
        self._corners = corners
        self._anchors = np.column_stack([np.zeros(rows),
                                         np.cumsum(steps, axis=1)])

    def __len__(self):
        return len(self.initial)

    def antiderivative(self, u):
        '''S(u) = integral of s over [0, u] for each history, u (rows, q)'''
        u = np.asarray(u, dtype=float)
        rows = len(self)
        width = self.flips.shape[1]
        offsets = np.arange(rows)[:, None] * self._stride
        query = (u + offsets).ravel()
        found = np.searchsorted(self._flat, query, side='right')
        segment = found.reshape(u.shape) - np.arange(rows)[:, None] * width
        row_index = np.broadcast_to(np.arange(rows)[:, None], u.shape)
        anchor = self._anchors[row_index, segment]
        corner = self._corners[row_index, segment]
        sign = np.where(segment % 2 == 0, 1.0, -1.0)
        return self.initial[:, None] * (anchor + sign * (u - corner))

    def phase_integral(self, n_pulses, times):
        '''X(t) = integral of s f over [0, t] for every history and time'''
        points = breakpoint_matrix(n_pulses, times)
        q, width = points.shape
        values = self.antiderivative(
            np.broadcast_to(points.ravel(), (len(self), q * width)))
        values = values.reshape(len(self), q, width)
        signs = np.where(np.arange(width - 1) % 2 == 0, 1.0, -1.0)
        phase = np.sum(signs * np.diff(values, axis=2), axis=2)
        # the filter refocuses a constant field exactly
        phase[~np.isfinite(self.flips).any(axis=1)] = 0.0
        return phase

def telegraph_histories(rng, n_histories, kappa, t_max):
    '''draw histories with equiprobable initial states and rate kappa'''
    counts = rng.poisson(kappa * t_max, n_histories)
    width = int(counts.max()) if n_histories and counts.max() > 0 else 0
    flips = np.sort(rng.random((n_histories, width)) * t_max, axis=1)
    flips[np.arange(width)[None, :] >= counts[:, None]] = np.inf
    flips.sort(axis=1)
    initial = rng.choice(np.array([-1.0, 1.0]), n_histories)
    return TelegraphHistories(initial, flips, t_max)

def _streams(seed, n_chunks):
    return [np.random.default_rng(child) for child in
            np.random.SeedSequence(seed).spawn(n_chunks)]

def _chunks(n_samples, chunk):
    sizes = [chunk] * (n_samples // chunk)
    if n_samples % chunk:
        sizes.append(n_samples % chunk)
    return sizes

#############################################################################
# Exact fluctuator average
#############################################################################
def _history_chunk(rng, size, power, n_pulses, kappa_t):
    histories = telegraph_histories(rng, size, 1.0, float(np.max(kappa_t)))
    x = np.abs(histories.phase_integral(n_pulses, kappa_t)) ** power
    return x.sum(axis=0), (x * x).sum(axis=0)

def history_average(gamma, n_pulses, kappa_t, n_samples=100000, seed=0,
                    n_jobs=1, chunk=CHUNK):
    '''
    G(kappa t) = <|integral s f|^(3/gamma)> for unit flip rate.  Returns
    (mean, standard error) arrays.
    '''
    kappa_t = np.asarray(kappa_t, dtype=float)
    require(np.all(kappa_t >= 0), 'kappa_t', 'must not be negative')
    require(n_samples > 1, 'n_samples', 'need at least two samples')
    power = 3.0 / gamma
    sizes = _chunks(n_samples, chunk)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_history_chunk)(rng, size, power, n_pulses, kappa_t)
        for rng, size in zip(_streams(seed, len(sizes)), sizes))
    total = np.array([math.fsum(column) for column in
                      zip(*[result[0] for result in results])])
    squares = np.array([math.fsum(column) for column in
                        zip(*[result[1] for result in results])])
    mean = total / n_samples
    variance = np.maximum(squares / n_samples - mean ** 2, 0.0)
    return mean, np.sqrt(variance / (n_samples - 1))

def exact_echo(channel, n_pulses, t, n_samples=100000, seed=0, n_jobs=1):
    '''exp(-(V_bar/kappa)^p G(kappa t)); returns (intensity, error)'''
    t = np.asarray(t, dtype=float)
    require(channel.kappa > 0, 'kappa', 'exact average needs kappa > 0')
    scale = (TWO_PI * abs(vbar(channel)) / channel.kappa) ** channel.power
    mean, error = history_average(channel.gamma, n_pulses, channel.kappa * t,
                                  n_samples, seed, n_jobs)
    intensity = np.exp(-scale * mean)
    return intensity, intensity * scale * error

def crossover_shape_exponent(gamma, n_pulses, kappa_t, beta):
    '''-ln I of the crossover interpolant for V_bar = kappa = 1'''
    power = 3.0 / gamma
    t_s = ((1.0 + power) * n_pulses ** power) ** (1.0 / (1.0 + power))
    t_l = 1.0 / long_time_prefactor(gamma)
    return crossover_exponent(kappa_t, t_s, t_l, power, beta)

def beta_refit(gamma, n_pulses, n_samples=100000, seed=0, points=200,
               window=20.0, n_jobs=1):
    '''
    Least squares fit of the crossover sharpness to the exact average on
    0 < kappa t <= window, with residuals taken on log(-ln I).  The ratio
    V_bar / kappa drops out of these residuals.
    '''
    kappa_t = np.linspace(window / points, window, points)
    exact, _ = history_average(gamma, n_pulses, kappa_t, n_samples, seed,
                               n_jobs)
    valid = exact > 0
    target = np.log(exact[valid])

    def residual(beta):
        model = crossover_shape_exponent(gamma, n_pulses, kappa_t[valid],
                                         beta)
        return float(np.sum((np.log(model) - target) ** 2))

    result = optimize.minimize_scalar(residual, bounds=(0.2, 3.0),
                                      method='bounded',
                                      options={'xatol': 1e-4})
    if not result.success:
        raise ConvergenceError(f'beta refit: {result.message}')
    logger.info('beta refit gamma=%d N=%d: %.3f', gamma, n_pulses, result.x)
    return float(result.x)

def refit_shape(n_samples=100000, seed=0, n_max=5, n_jobs=1):
    '''CrossoverShape with every beta refitted against the exact average'''
    ring = [beta_refit(6, n, n_samples, seed, n_jobs=n_jobs)
            for n in range(1, n_max + 1)]
    magn = [beta_refit(3, n, n_samples, seed, n_jobs=n_jobs)
            for n in range(1, n_max + 1)]
    return CrossoverShape(sorted(ring, reverse=True),
                          sorted(magn, reverse=True))

#############################################################################
# Fluctuator ensemble
#############################################################################
def mean_square_angular(gamma):
    '''<g_gamma^2> over cos(theta)'''
    value, _ = integrate.quad(
        lambda c: 0.5 * float(angular_factor(gamma, c)) ** 2, -1.0, 1.0,
        epsrel=1e-12)
    return value

def truncation_bound(channel, radius, x2):
    '''
    Mean field estimate of the ln I carried by fluctuators beyond radius,
    2 pi n <g^2> (2 V0)^2 <X^2> R^(3 - 2 gamma) / (2 gamma - 3)
    '''
    gamma = channel.gamma
    coupling = 2.0 * TWO_PI * channel.v0
    return 2.0 * math.pi * channel.density * mean_square_angular(gamma) * \
        coupling ** 2 * x2 * radius ** (3 - 2 * gamma) / (2 * gamma - 3)

def radius_for_tolerance(channel, t_max, tolerance=0.005, ln_i=1.0):
    '''radius where the truncation bound equals tolerance * ln_i'''
    gamma = channel.gamma
    x2 = min(t_max ** 2, t_max / channel.kappa) if channel.kappa > 0 else \
        t_max ** 2
    bound_at_unit = truncation_bound(channel, 1.0, x2)
    return (bound_at_unit / (tolerance * ln_i)) ** (1.0 / (2 * gamma - 3))

class FluctuatorEnsemble:
    '''Poisson distributed fluctuators of one channel in a ball'''
    def __init__(self, channel, seed=0, n_samples=10000, sample_radius=None,
                 t_max=None):
        self.channel = channel
        self.seed = int(seed)
        self.n_samples = int(n_samples)
        require(self.n_samples > 1, 'n_samples', 'need at least two samples')
        if sample_radius is None:
            require(t_max is not None, 't_max',
                    'needed to choose the sample radius')
            sample_radius = radius_for_tolerance(channel, t_max)
        self.sample_radius = float(sample_radius)
        require(self.sample_radius > 0, 'sample_radius', 'must be positive')

    @property
    def n_spins_per_sample(self):
        '''mean number of fluctuators in the ball'''
        return self.channel.density * 4.0 / 3.0 * math.pi * \
            self.sample_radius ** 3

    def __repr__(self):
        return f'FluctuatorEnsemble<{self.channel.name}, ' \
               f'samples={self.n_samples}, spins={self.n_spins_per_sample:.1f}>'

class MCResult:
    '''Monte Carlo estimate of the echo on a time grid'''
    def __init__(self, times, intensity, error, flagged=False):
        self.times = times
        self.intensity = intensity
        self.error = error
        self.flagged = flagged

def _ensemble_chunk(rng, size, ensemble, n_pulses, times):
    channel = ensemble.channel
    counts = rng.poisson(ensemble.n_spins_per_sample, size)
    total = int(counts.sum())
    phases = np.zeros((size, len(times)))
    if total:
        radius = ensemble.sample_radius * rng.random(total) ** (1.0 / 3.0)
        cos_theta = rng.uniform(-1.0, 1.0, total)
        coupling = TWO_PI * channel.v0 * \
            angular_factor(channel.gamma, cos_theta) / radius ** channel.gamma
        histories = telegraph_histories(rng, total, channel.kappa,
                                        float(np.max(times)))
        x = histories.phase_integral(n_pulses, times)
        owner = np.repeat(np.arange(size), counts)
        np.add.at(phases, owner, 2.0 * coupling[:, None] * x)
    values = np.cos(phases)
    return values.sum(axis=0), (values * values).sum(axis=0)

def mc_echo(ensemble, seq, times, n_jobs=1, chunk=CHUNK, max_error=0.01):
    '''<cos(sum 2 V_i integral s_i f)> over positions, angles and histories'''
    times = np.asarray(times, dtype=float)
    require(np.all(times > 0), 'times', 'must be positive')
    sizes = _chunks(ensemble.n_samples, chunk)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_ensemble_chunk)(rng, size, ensemble, seq.n_pulses, times)
        for rng, size in zip(_streams(ensemble.seed, len(sizes)), sizes))
    n = ensemble.n_samples
    total = np.array([math.fsum(column) for column in
                      zip(*[result[0] for result in results])])
    squares = np.array([math.fsum(column) for column in
                        zip(*[result[1] for result in results])])
    mean = total / n
    error = np.sqrt(np.maximum(squares / n - mean ** 2, 0.0) / (n - 1))
    flagged = bool(np.any(error > max_error))
    if flagged:
        logger.warning('Monte Carlo standard error %.3g exceeds %.3g; '
                       'increase n_samples', float(error.max()), max_error)
    return MCResult(times, mean, error, flagged)

#############################################################################
# Exact diagonalization
#############################################################################
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]])
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]])

def _site_operator(operator, site, n_sites):
    '''operator acting on one site of n_sites (basis |0>=ground, |1>)'''
    result = np.array([[1.0]])
    for index in range(n_sites):
        result = np.kron(result, operator if index == site else np.eye(2))
    return result

def _flip_flop(site_a, site_b, n_sites):
    raising = _site_operator(SIGMA_PLUS, site_a, n_sites) @ \
        _site_operator(SIGMA_PLUS.T, site_b, n_sites)
    return raising + raising.T

def three_site_hamiltonian(j13, j23, j_pair, deltas):
    '''secular Hamiltonian of a pair (sites 0, 1) and a third ion (site 2)'''
    if len(deltas) != 3:
        raise ValidationError('deltas', 'need three gaps')
    hamiltonian = np.zeros((8, 8))
    for site, gap in enumerate(deltas):
        hamiltonian += 0.5 * gap * _site_operator(SIGMA_Z, site, 3)
    hamiltonian += j_pair * _flip_flop(0, 1, 3)
    hamiltonian += j13 * _flip_flop(0, 2, 3)
    hamiltonian += j23 * _flip_flop(1, 2, 3)
    if not np.allclose(hamiltonian, hamiltonian.T):
        raise ValidationError('hamiltonian', 'construction is not Hermitian')
    return hamiltonian

def exact_three_site(j13, j23, j_pair, deltas):
    '''sorted eigenvalues of the three site secular Hamiltonian'''
    return np.linalg.eigvalsh(three_site_hamiltonian(j13, j23, j_pair,
                                                     deltas))

def _symmetric_level(j13, j23, j_pair, delta_pair, delta3, third):
    '''energy of the eigenstate closest to (|10> + |01>)|third>'''
    hamiltonian = three_site_hamiltonian(j13, j23, j_pair,
                                         (delta_pair, delta_pair, delta3))
    values, vectors = np.linalg.eigh(hamiltonian)
    state = np.zeros(8)
    state[4 + third] = state[2 + third] = 1.0 / math.sqrt(2.0)
    return values[np.argmax(np.abs(vectors.T @ state))]

def ring_splitting(j13, j23, j_pair, delta_pair, delta3, tau):
    '''
    Ring exchange read off the exact spectrum: the part of the |01+10>
    level shift bilinear in j13 j23, isolated by switching each coupling
    off in turn and reported as -1/2 of that mediated shift.
    '''
    if tau not in (0, 1):
        raise ValidationError('tau', f'must be 0 or 1, not {tau}')
    third = 1 - tau

    def level(a, b):
        return _symmetric_level(a, b, j_pair, delta_pair, delta3, third)

    mediated = level(j13, j23) - level(j13, 0.0) - level(0.0, j23) + \
        level(0.0, 0.0)
    return -0.5 * mediated

def pair_hamiltonian(params, pair, b_z):
    '''4x4 secular pair Hamiltonian in the basis |00>, |01>, |10>, |11>'''
    e_1, e_2, ising, flip_flop = pair_terms(params, pair, b_z)
    hamiltonian = np.diag([-0.5 * (e_1 + e_2) + ising,
                           0.5 * (e_2 - e_1) - ising,
                           0.5 * (e_1 - e_2) - ising,
                           0.5 * (e_1 + e_2) + ising])
    hamiltonian[1, 2] = hamiltonian[2, 1] = flip_flop
    return hamiltonian
