"""Hyperboloidal evolution of perturbed kinks.

With s = t/a - sqrt(r^2/a^2 + 1) and y = arctan(r/a) the field h(s, y) = phi(t, r)
is evolved as the first-order system for (h, q, p), q = h_y, p = h_s + sin(y) h_y,
on a cell-centred grid over (-pi/2, pi/2). The endpoints are outflow-only and are
never sampled.
"""
__author__ = 'wormhole-tool developers'

import json
import logging
import math
import os
import time

import numpy as np
from scipy.interpolate import make_interp_spline

from wormhole_tool.exceptions import (ConfigurationError, ConvergenceError, DimensionError, NonFiniteStateError,
                                      StaleInputError, UnstableRunError)
from wormhole_tool.numerics import (StencilSet, UniformGrid, fd_derivative, interpolation_weights, ko_dissipation,
                                    rk4_step)
from wormhole_tool.physics.kink import SQRT2, WormholeConfig
from wormhole_tool.util.output import git_blob_hash, read_csv, write_csv, write_json

logger = logging.getLogger("wormhole_tool.physics.evolve")

HALF_PI = 0.5 * math.pi
RECORD_COLUMNS = ('s', 'h_probe', 'u_probe', 'alpha_proj', 'constraint_norm', 'degree')
LOG_CADENCE_AFTER = 100.0
LOG_CADENCE_FRACTION = 1e-3
SAMPLES_PER_PERIOD = 20


def compactified_grid(num_points):
    return UniformGrid(-HALF_PI, HALF_PI, num_points, cell_centered=True)


def degree_of(h):
    return int(round((h[-1] - h[0]) / math.pi))


class EvolutionConfig(object):
    def __init__(self, wormhole, num_points=2048, cfl=0.25, sigma_ko=0.02, eps_c=-0.1, s_end=100.0,
                 output_every=100, probe_y=0.0):
        if not 0 < cfl <= 1:
            raise ConfigurationError("Courant factor must lie in (0, 1], got {}.".format(cfl))
        if eps_c > 0:
            raise ConfigurationError("Constraint damping coefficient must be <= 0, got {}.".format(eps_c))
        if sigma_ko < 0:
            raise ConfigurationError("Dissipation coefficient must be >= 0, got {}.".format(sigma_ko))
        if not s_end > 0:
            raise ConfigurationError("s_end must be positive, got {}.".format(s_end))
        if int(output_every) < 1:
            raise ConfigurationError("output_every must be at least 1, got {}.".format(output_every))
        if not abs(probe_y) < HALF_PI:
            raise ConfigurationError("The probe must lie inside (-pi/2, pi/2), got {}.".format(probe_y))
        self.wormhole = wormhole
        self.num_points = int(num_points)
        self.cfl = float(cfl)
        self.sigma_ko = float(sigma_ko)
        self.eps_c = float(eps_c)
        self.s_end = float(s_end)
        self.output_every = int(output_every)
        self.probe_y = float(probe_y)

    @property
    def a(self):
        return self.wormhole.a

    @property
    def n(self):
        return self.wormhole.n

    def grid(self):
        return compactified_grid(self.num_points)

    def max_time_step(self, grid=None):
        """cfl * dy over the fastest speed: 2, or the mass-term frequency at the outermost node."""
        grid = grid or self.grid()
        dy = grid.spacing
        edge = math.cos(grid.points[-1])
        return self.cfl * dy / max(2.0, SQRT2 * self.a * dy / edge)

    def with_changes(self, **changes):
        values = dict(wormhole=self.wormhole, num_points=self.num_points, cfl=self.cfl, sigma_ko=self.sigma_ko,
                      eps_c=self.eps_c, s_end=self.s_end, output_every=self.output_every, probe_y=self.probe_y)
        values.update(changes)
        return EvolutionConfig(**values)

    def describe(self):
        return {
            'a': self.a,
            'n': self.n,
            'num_points': self.num_points,
            'cfl': self.cfl,
            'sigma_ko': self.sigma_ko,
            'eps_c': self.eps_c,
            's_end': self.s_end,
            'output_every': self.output_every,
            'probe_y': self.probe_y,
        }


class FieldState(object):
    def __init__(self, s, grid, h, q, p):
        for name, values in (('h', h), ('q', q), ('p', p)):
            if np.shape(values) != (grid.num_points,):
                raise DimensionError("{} has shape {}, expected ({},).".format(name, np.shape(values), grid.num_points))
        self.s = float(s)
        self.grid = grid
        self.h = np.asarray(h, dtype=float)
        self.q = np.asarray(q, dtype=float)
        self.p = np.asarray(p, dtype=float)

    @property
    def degree(self):
        return degree_of(self.h)

    def vector(self):
        return np.concatenate([self.h, self.q, self.p])

    @classmethod
    def from_vector(cls, s, grid, vector):
        h, q, p = np.split(np.asarray(vector, dtype=float), 3)
        return cls(s, grid, h, q, p)

    def constraint_norm(self, stencils=None):
        return float(np.max(np.abs(self.q - fd_derivative(self.h, self.grid, stencils))))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.vector())))


class HyperboloidalSystem(object):
    """Right-hand side of the (h, q, p) system on a fixed cell-centred grid."""

    def __init__(self, grid, config):
        if not grid.cell_centered:
            raise ConfigurationError("The evolution grid must be cell-centred.")
        self.grid = grid
        self.config = config
        y = grid.points
        self.sin_y = np.sin(y)
        self.tan_y = np.tan(y)
        self.mass = config.a ** 2 / np.cos(y) ** 2
        self.stencils = StencilSet.build(1, 8)
        self.size = grid.num_points

    def derivative(self, values):
        return fd_derivative(values, self.grid, self.stencils)

    def split(self, vector):
        n = self.size
        return vector[:n], vector[n:2 * n], vector[2 * n:]

    def constraint(self, h, q):
        return q - self.derivative(h)

    def __call__(self, vector):
        h, q, p = self.split(vector)
        w = p - q * self.sin_y
        u = q - p * self.sin_y
        dy = self.grid.spacing
        sigma = self.config.sigma_ko
        dh = w
        dq = self.derivative(w) + self.config.eps_c * self.constraint(h, q)
        dp = self.derivative(u) + 2.0 * self.tan_y * u - self.mass * np.sin(2.0 * h)
        if sigma:
            dq = dq + ko_dissipation(q, sigma, dy)
            dp = dp + ko_dissipation(p, sigma, dy)
        return np.concatenate([dh, dq, dp])


def rhs(state, config):
    """Time derivatives (dh, dq, dp) of ``state``."""
    system = HyperboloidalSystem(state.grid, config)
    derivative = system(state.vector())
    finite = np.isfinite(derivative)
    if not finite.all():
        index = int(np.flatnonzero(~finite)[0]) % state.grid.num_points
        raise UnstableRunError("Non-finite right-hand side at s = {} near node {}.".format(state.s, index),
                               s=state.s, index=index)
    return system.split(derivative)


def kink_in_y(kink, y):
    """h_n(y) and its y-derivative; zeros for the vacuum."""
    y = np.asarray(y, dtype=float)
    if kink is None:
        return np.zeros_like(y), np.zeros_like(y)
    a = kink.config.a
    phi, dphi = kink.evaluate(a * np.tan(y))
    return phi, dphi * a / np.cos(y) ** 2


def init_from_profile(kink, alpha_fn, beta_fn, config, dalpha_fn=None):
    """Initial state h = alpha, q = alpha', p = beta + sin(y) alpha'."""
    grid = config.grid()
    y = grid.points
    alpha = np.asarray(alpha_fn(y), dtype=float)
    if dalpha_fn is not None:
        dalpha = np.asarray(dalpha_fn(y), dtype=float)
    else:
        dalpha = fd_derivative(alpha, grid)
    degree = degree_of(alpha)
    if degree != config.n:
        raise ConfigurationError("Initial data has degree {} but the configuration asks for n = {}."
                                 .format(degree, config.n))
    if kink is not None and kink.config != config.wormhole:
        raise ConfigurationError("Kink {!r} does not match the evolution configuration.".format(kink.config))
    beta = np.asarray(beta_fn(y), dtype=float)
    return FieldState(0.0, grid, alpha, dalpha, beta + np.sin(y) * dalpha)


class InitialData(object):
    """A family of initial data; subclasses provide alpha, its derivative and beta."""
    name = None

    def alpha(self, y):
        raise NotImplementedError

    def dalpha(self, y):
        return None

    def beta(self, y):
        return np.zeros_like(y)

    def field_state(self, kink, config):
        dalpha = self.dalpha if type(self).dalpha is not InitialData.dalpha else None
        return init_from_profile(kink, self.alpha, self.beta, config, dalpha_fn=dalpha)

    def describe(self):
        return {'family': self.name}


class SampleData(InitialData):
    """alpha = h_n(y) + A exp(-w tan^2 y), beta = 0."""
    name = 'sample'

    def __init__(self, kink, amplitude=1.0, width=0.25):
        self.kink = kink
        self.amplitude = amplitude
        self.width = width

    def _bump(self, y):
        t = np.tan(y)
        with np.errstate(under='ignore'):
            return self.amplitude * np.exp(-self.width * t * t), t

    def alpha(self, y):
        grid_values, _ = kink_in_y(self.kink, y)
        return grid_values + self._bump(y)[0]

    def dalpha(self, y):
        _, slope = kink_in_y(self.kink, y)
        bump, t = self._bump(y)
        return slope - 2.0 * self.width * t * (1.0 + t * t) * bump

    def describe(self):
        return {'family': self.name, 'amplitude': self.amplitude, 'width': self.width}


class KinkPlusBump(InitialData):
    """The kink plus a Gaussian bump centred at r0 in the areal radius."""
    name = 'gaussian'

    def __init__(self, kink, amplitude=0.5, center=0.0, width=1.0):
        self.kink = kink
        self.amplitude = amplitude
        self.center = center
        self.width = width

    def _bump(self, y):
        a = self.kink.config.a if self.kink is not None else 1.0
        x = (a * np.tan(y) - self.center) / self.width
        with np.errstate(under='ignore'):
            bump = self.amplitude * np.exp(-x * x)
        return bump, -2.0 * x / self.width * bump * a / np.cos(y) ** 2

    def alpha(self, y):
        return kink_in_y(self.kink, y)[0] + self._bump(y)[0]

    def dalpha(self, y):
        return kink_in_y(self.kink, y)[1] + self._bump(y)[1]

    def describe(self):
        return {'family': self.name, 'amplitude': self.amplitude, 'center': self.center, 'width': self.width}


class VacuumPulse(KinkPlusBump):
    """A degree-0 Gaussian pulse on the vacuum."""
    name = 'vacuum'

    def __init__(self, a, amplitude=0.5, center=0.0, width=1.0):
        super(VacuumPulse, self).__init__(None, amplitude=amplitude, center=center, width=width)
        self.a = a

    def _bump(self, y):
        x = (self.a * np.tan(y) - self.center) / self.width
        with np.errstate(under='ignore'):
            bump = self.amplitude * np.exp(-x * x)
        return bump, -2.0 * x / self.width * bump * self.a / np.cos(y) ** 2


class TabulatedData(InitialData):
    """alpha and beta read from a CSV file with columns y, alpha, beta."""
    name = 'file'

    def __init__(self, path):
        self.path = path
        columns = read_csv(path)
        try:
            y, alpha, beta = (np.asarray(columns[key], dtype=float) for key in ('y', 'alpha', 'beta'))
        except KeyError as e:
            raise ConfigurationError("{} is missing the column {}.".format(path, e))
        order = np.argsort(y)
        self._alpha = make_interp_spline(y[order], alpha[order], k=5)
        self._beta = make_interp_spline(y[order], beta[order], k=5)
        self._dalpha = self._alpha.derivative()

    def alpha(self, y):
        return self._alpha(y)

    def dalpha(self, y):
        return self._dalpha(y)

    def beta(self, y):
        return self._beta(y)

    def describe(self):
        return {'family': self.name, 'path': os.path.abspath(self.path), 'sha1': git_blob_hash(self.path)}


class RunRecord(object):
    def __init__(self, metadata=None):
        self.metadata = metadata or {}
        self.rows = []
        self.warnings = []
        self.wall_clock = None

    def append(self, s, h_probe, u_probe, alpha_proj, constraint_norm, degree):
        if self.rows and not s > self.rows[-1][0]:
            raise ConfigurationError("Record times must increase ({} after {}).".format(s, self.rows[-1][0]))
        self.rows.append((float(s), float(h_probe), float(u_probe), float(alpha_proj), float(constraint_norm),
                          int(degree)))

    def warn(self, message):
        if message not in self.warnings:
            logger.warning(message)
            self.warnings.append(message)

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        index = RECORD_COLUMNS.index(name)
        return np.array([row[index] for row in self.rows], dtype=float)

    @property
    def s(self):
        return self.column('s')

    def to_csv(self, path):
        return write_csv(path, RECORD_COLUMNS, self.rows)

    @classmethod
    def from_csv(cls, path, metadata=None):
        columns = read_csv(path)
        missing = [name for name in RECORD_COLUMNS if name not in columns]
        if missing:
            raise StaleInputError("{} lacks the columns {}.".format(path, ", ".join(missing)))
        record = cls(metadata)
        for values in zip(*(columns[name] for name in RECORD_COLUMNS)):
            record.rows.append(tuple(float(v) for v in values[:-1]) + (int(float(values[-1])),))
        return record


class Evolution(object):
    """The method-of-lines stepper for one run."""

    def __init__(self, config, kink=None, mode=None):
        if config.n >= 1 and kink is None:
            raise ConfigurationError("A degree-{} run needs the background kink.".format(config.n))
        self.config = config
        self.kink = kink
        self.mode = mode
        self.grid = config.grid()
        self.system = HyperboloidalSystem(self.grid, config)
        self.background = kink_in_y(kink, self.grid.points)[0]
        y = self.grid.points
        a = config.a
        self.probe_indices, self.probe_weights = interpolation_weights(self.grid, config.probe_y)
        self.probe_scale = a / math.cos(config.probe_y)
        self.projection = None
        if mode is not None:
            secant = 1.0 / np.cos(y)
            self.projection = a * a * secant ** 3 * mode(a * np.tan(y)) * self.grid.spacing
        steps = int(math.ceil(config.s_end / config.max_time_step(self.grid) - 1e-9))
        self.num_steps = max(steps, 1)
        self.dt = config.s_end / self.num_steps
        # Record spacing in s never exceeds a twentieth of the shortest mode period.
        self.max_record_interval = 2.0 * math.pi / (SAMPLES_PER_PERIOD * SQRT2 * a)
        self.final_state = None

    def probe(self, values):
        return float(np.dot(self.probe_weights, values[self.probe_indices]))

    def diagnostics(self, state):
        difference = state.h - self.background
        h_probe = self.probe(state.h)
        u_probe = self.probe_scale * self.probe(difference)
        alpha = float(np.dot(self.projection, difference)) if self.projection is not None else float('nan')
        return h_probe, u_probe, alpha, float(np.max(np.abs(self.system.constraint(state.h, state.q)))), state.degree

    def _record(self, record, state):
        h_probe, u_probe, alpha, constraint, degree = self.diagnostics(state)
        record.append(state.s, h_probe, u_probe, alpha, constraint, degree)
        if degree != self.config.n:
            record.warn("Degree changed to {} at s = {:.6g}.".format(degree, state.s))
        if constraint > 1e-2 * max(float(np.max(np.abs(state.q))), 1e-300):
            record.warn("Constraint violation {:.3g} exceeds 1% of max|q| at s = {:.6g}.".format(constraint, state.s))

    def record_interval(self, s):
        base = self.config.output_every * self.dt
        if s < LOG_CADENCE_AFTER:
            return base
        return max(base, min(LOG_CADENCE_FRACTION * s, self.max_record_interval))

    def metadata(self):
        meta = {'config': self.config.describe(), 'grid': self.grid.describe(), 'dt': self.dt,
                'num_steps': self.num_steps}
        if self.kink is not None:
            meta['kink'] = self.kink.describe()
        if self.mode is not None:
            meta['mode'] = self.mode.describe()
        return meta

    def run(self, initial, progress=None, checkpoint=None, checkpoint_every=None):
        if initial.grid.num_points != self.grid.num_points:
            raise DimensionError("Initial data has {} points, the run uses {}.".format(
                initial.grid.num_points, self.grid.num_points))
        record = RunRecord(self.metadata())
        started = time.time()
        vector = initial.vector()
        state = initial
        self._record(record, state)
        next_record = self.record_interval(0.0)
        next_checkpoint = checkpoint_every
        logger.info("Evolving a=%g n=%d on %d points: %d steps of ds=%.3g", self.config.a, self.config.n,
                    self.grid.num_points, self.num_steps, self.dt)
        for step in range(1, self.num_steps + 1):
            s = step * self.dt
            try:
                vector = rk4_step(vector, self.system, self.dt, step_index=step)
            except NonFiniteStateError as e:
                index = e.index % self.grid.num_points if e.index is not None else None
                record.wall_clock = time.time() - started
                raise UnstableRunError("Run became unstable at s = {:.6g} near node {}.".format(s, index),
                                       s=s, index=index, record=record)
            if s + 1e-12 >= next_record or step == self.num_steps:
                state = FieldState.from_vector(s, self.grid, vector)
                self._record(record, state)
                next_record = s + self.record_interval(s)
            if progress is not None:
                progress(s, self.config.s_end)
            if checkpoint is not None and next_checkpoint is not None and s + 1e-12 >= next_checkpoint:
                checkpoint(FieldState.from_vector(s, self.grid, vector))
                while next_checkpoint <= s + 1e-12:
                    next_checkpoint += checkpoint_every
        record.wall_clock = time.time() - started
        self.final_state = FieldState.from_vector(self.config.s_end, self.grid, vector)
        return record


def evolve_run(initial, config, kink=None, mode=None, progress=None, checkpoint=None, checkpoint_every=None):
    """Step ``initial`` to ``config.s_end`` and return the diagnostic record."""
    evolution = Evolution(config, kink=kink, mode=mode)
    return evolution.run(initial, progress=progress, checkpoint=checkpoint, checkpoint_every=checkpoint_every)


def write_checkpoint(path, state, config):
    data = np.concatenate([[state.s], state.h, state.q, state.p]).astype('<f8')
    with open(path, 'wb') as f:
        f.write(data.tobytes())
    sidecar = {
        'num_points': state.grid.num_points,
        'a': config.a,
        'n': config.n,
        's': state.s,
        'dtype': '<f8',
        'sha1': git_blob_hash(path),
    }
    write_json(path + '.json', sidecar)
    logger.debug("Checkpoint at s=%g written to %s", state.s, path)
    return sidecar


def read_checkpoint(path):
    try:
        with open(path + '.json') as f:
            sidecar = json.load(f)
    except (IOError, OSError, ValueError) as e:
        raise StaleInputError("Cannot read the checkpoint sidecar for {}: {}".format(path, e))
    if not os.path.exists(path) or git_blob_hash(path) != sidecar.get('sha1'):
        raise StaleInputError("Checkpoint {} is missing or does not match its sidecar hash.".format(path))
    data = np.fromfile(path, dtype=sidecar.get('dtype', '<f8')).astype(float)
    num_points = int(sidecar['num_points'])
    if data.size != 3 * num_points + 1:
        raise StaleInputError("Checkpoint {} holds {} values, expected {}.".format(path, data.size, 3 * num_points + 1))
    state = FieldState.from_vector(data[0], compactified_grid(num_points), data[1:])
    return state, WormholeConfig(sidecar['a'], sidecar['n'], allow_vacuum=True)


class ConvergenceReport(object):
    def __init__(self, order, orders, differences, status, resolutions):
        self.order = order
        self.orders = orders
        self.differences = differences
        self.status = status
        self.resolutions = resolutions

    def describe(self):
        return {
            'order': self.order,
            'orders': self.orders,
            'differences': self.differences,
            'status': self.status,
            'resolutions': self.resolutions,
        }


def _sample_at(state, points):
    values = np.empty(len(points))
    for i, x in enumerate(points):
        indices, weights = interpolation_weights(state.grid, x)
        values[i] = np.dot(weights, state.h[indices])
    return values


def convergence_test(generator, config, resolutions, kink=None, window=1.2, minimum_order=3.5):
    """Self-convergence order of h at ``config.s_end`` from runs at 2:1 resolutions.

    ``generator(config)`` returns the initial FieldState for a configuration.
    Differences are compared at the coarse-grid nodes with |y| < window.
    """
    resolutions = sorted(int(n) for n in resolutions)
    if len(resolutions) < 3:
        raise ConfigurationError("Self-convergence needs at least 3 resolutions, got {}.".format(len(resolutions)))
    if any(fine != 2 * coarse for coarse, fine in zip(resolutions, resolutions[1:])):
        raise ConfigurationError("Resolutions must be in 2:1 ratio, got {}.".format(resolutions))
    coarse_grid = compactified_grid(resolutions[0])
    points = coarse_grid.points[np.abs(coarse_grid.points) < window]
    samples = []
    for num_points in resolutions:
        run_config = config.with_changes(num_points=num_points)
        evolution = Evolution(run_config, kink=kink)
        evolution.run(generator(run_config))
        samples.append(_sample_at(evolution.final_state, points))
        logger.info("Convergence run with %d points finished", num_points)
    differences = [float(np.max(np.abs(c - f))) for c, f in zip(samples, samples[1:])]
    if max(differences) < 1e-12:
        return ConvergenceReport(None, [], differences, 'at_floor', resolutions)
    orders = [math.log(c / f, 2) if f > 0 else float('inf') for c, f in zip(differences, differences[1:])]
    order = orders[-1]
    if resolutions[0] < 128:
        logger.warning("Coarsest resolution %d is below the asymptotic regime; order %.3g is indicative only.",
                       resolutions[0], order)
        return ConvergenceReport(order, orders, differences, 'pre_asymptotic', resolutions)
    if order < minimum_order:
        raise ConvergenceError("Observed self-convergence order {:.3f} is below {}.".format(order, minimum_order))
    return ConvergenceReport(order, orders, differences, 'converged', resolutions)
