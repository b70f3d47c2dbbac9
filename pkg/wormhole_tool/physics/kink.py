"""Stationary n-kinks on the wormhole and their asymptotic data.

A kink solves  phi'' + 2r/(r^2+a^2) phi' - sin(2 phi) = 0  with phi(0) = n*pi/2,
phi(+inf) = n*pi and phi(-r) = n*pi - phi(r). The slope b_n at the throat is
found by shooting; the tail coefficient c_n by matching against the decaying
solution phi_L of the linearised equation.
"""
__author__ = 'wormhole-tool developers'

from collections import namedtuple
import logging
import math

import numpy as np
from scipy import linalg
from scipy.interpolate import make_interp_spline

from wormhole_tool.exceptions import (BracketError, ConfigurationError, SingularSystemError)
from wormhole_tool.numerics import (StencilSet, UniformGrid, bisect_root, integrate_ode_adaptive, quadrature,
                                    shanks_accelerate)

logger = logging.getLogger("wormhole_tool.physics.kink")

SQRT2 = math.sqrt(2.0)

B_LOW = 1e-8
B_MAX = 50.0
SHOOT_TOL = 1e-13
SHOOT_RTOL = 1e-12
SHOOT_ATOL = 1e-14
R_MATCH = 6.0
RELIABLE_FRACTION = 1e-4


class WormholeConfig(object):
    """Throat radius ``a`` and topological degree ``n``."""

    def __init__(self, a, n, allow_vacuum=False):
        a = float(a)
        if not a > 0 or not math.isfinite(a):
            raise ConfigurationError("Throat radius must be positive, got {}.".format(a))
        if int(n) != n:
            raise ConfigurationError("Degree must be an integer, got {}.".format(n))
        n = int(n)
        lowest = 0 if allow_vacuum else 1
        if n < lowest:
            raise ConfigurationError("Degree must be at least {}, got {}.".format(lowest, n))
        self.a = a
        self.n = n

    @property
    def default_r_max(self):
        return max(25.0, 10.0 * self.a)

    @property
    def default_r_start(self):
        return max(35.0, 4.0 * self.a)

    def describe(self):
        return {'a': self.a, 'n': self.n}

    def __eq__(self, other):
        return isinstance(other, WormholeConfig) and (self.a, self.n) == (other.a, other.n)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.a, self.n))

    def __repr__(self):
        return "WormholeConfig(a={!r}, n={!r})".format(self.a, self.n)


def _kink_rhs(a):
    a2 = a * a

    def rhs(r, y):
        return [y[1], math.sin(2.0 * y[0]) - 2.0 * r / (r * r + a2) * y[1]]
    return rhs


def _shooting_events(target):
    def overshoot(r, y):
        return y[0] - target
    overshoot.terminal = True
    overshoot.direction = 1

    def turn_back(r, y):
        return y[1]
    turn_back.terminal = True
    turn_back.direction = -1
    return [overshoot, turn_back]


def _trajectory(config, b, r_max):
    return integrate_ode_adaptive(_kink_rhs(config.a), [config.n * math.pi / 2.0, b], (0.0, r_max),
                                  SHOOT_RTOL, SHOOT_ATOL, events=_shooting_events(config.n * math.pi))


def _classify(config, b, r_max):
    """+1 if the trajectory overshoots n*pi, -1 if it turns back first."""
    sampler = _trajectory(config, b, r_max)
    if sampler.event == 0:
        return 1.0
    if sampler.event == 1:
        return -1.0
    # Still undecided at r_max: read off the unstable direction of the saddle at n*pi.
    phi, dphi = sampler.y_end
    return 1.0 if dphi + SQRT2 * (phi - config.n * math.pi) > 0 else -1.0


def _reliable_radius(config, middle, lower, upper):
    """Largest radius up to which the bracketing trajectories agree with each other."""
    common = min(middle.t_end, lower.t_end, upper.t_end)
    radii = np.linspace(0.0, common, max(17, int(common / 0.01) + 1))
    spread = np.abs(upper(radii)[0] - lower(radii)[0])
    tail = np.abs(config.n * math.pi - middle(radii)[0])
    bad = np.flatnonzero(spread > RELIABLE_FRACTION * tail)
    if not len(bad):
        return float(common)
    return float(radii[max(bad[0] - 1, 0)])


class KinkProfile(object):
    """A computed n-kink.

    Up to ``r_join`` the profile is the shooting branch; beyond it (once a tail
    has been attached) it is n*pi - c_n*phi_L(r). Negative radii follow from
    the reflection symmetry.
    """

    def __init__(self, config, b_n, r_max, shoot_tol, branch, r_reliable, coefficient=None, tail=None):
        self.config = config
        self.b_n = b_n
        self.r_max = r_max
        self.shoot_tol = shoot_tol
        self.branch = branch
        self.r_reliable = r_reliable
        self.coefficient = coefficient
        self.tail = tail
        if tail is not None:
            self.r_join = max(tail.r_match, min(r_reliable, tail.r_match + 4.0))
        else:
            self.r_join = r_reliable

    @property
    def c_n(self):
        return None if self.coefficient is None else self.coefficient.value

    def with_tail(self, coefficient, tail):
        return KinkProfile(self.config, self.b_n, self.r_max, self.shoot_tol, self.branch, self.r_reliable,
                           coefficient=coefficient, tail=tail)

    def branch_phi(self, r):
        return self.branch(np.asarray(r, dtype=float))[0]

    def _half_line(self, x):
        phi = np.empty_like(x)
        dphi = np.empty_like(x)
        inner = x <= self.r_join
        if inner.any():
            values = self.branch(x[inner])
            phi[inner] = values[0]
            dphi[inner] = values[1]
        outer = ~inner
        if outer.any():
            if self.tail is None:
                clipped = self.branch(np.full(outer.sum(), self.r_join))
                phi[outer] = clipped[0]
                dphi[outer] = clipped[1]
            else:
                phi[outer] = self.config.n * math.pi - self.c_n * self.tail.phi(x[outer])
                dphi[outer] = -self.c_n * self.tail.dphi(x[outer])
        return phi, dphi

    def evaluate(self, r):
        """Profile and slope at ``r`` (scalar or array)."""
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).ravel()
        phi, dphi = self._half_line(np.abs(flat))
        phi = np.where(flat >= 0, phi, self.config.n * math.pi - phi)
        return phi.reshape(r.shape), dphi.reshape(r.shape)

    def phi(self, r):
        return self.evaluate(r)[0]

    def dphi(self, r):
        return self.evaluate(r)[1]

    def default_grid(self, spacing=0.01):
        return UniformGrid(-self.r_max, self.r_max, 2 * int(round(self.r_max / spacing)) + 1)

    def samples(self, grid=None):
        grid = grid or self.default_grid()
        phi, dphi = self.evaluate(grid.points)
        return grid, phi, dphi

    def describe(self):
        return {
            'a': self.config.a,
            'n': self.config.n,
            'b_n': self.b_n,
            'c_n': self.c_n,
            'c_n_spread': None if self.coefficient is None else self.coefficient.spread,
            'r_max': self.r_max,
            'r_join': self.r_join,
            'r_reliable': self.r_reliable,
            'shoot_tol': self.shoot_tol,
            'rtol': SHOOT_RTOL,
            'atol': SHOOT_ATOL,
        }


def shoot_kink(config, shoot_tol=SHOOT_TOL, r_max=None, b_max=B_MAX):
    if config.n < 1:
        raise ConfigurationError("The vacuum (n = 0) has no kink to shoot for.")
    if not shoot_tol > 0:
        raise ConfigurationError("Shooting tolerance must be positive, got {}.".format(shoot_tol))
    r_max = r_max or config.default_r_max

    def classify(b):
        return _classify(config, b, r_max)

    if classify(B_LOW) > 0 or classify(b_max) < 0:
        raise BracketError("No kink of degree {} with slope in (0, {}] for a = {}.".format(config.n, b_max, config.a))
    b_n = bisect_root(classify, (B_LOW, b_max), shoot_tol)
    logger.debug("Shooting slope for %r: %.15g", config, b_n)

    middle = _trajectory(config, b_n, r_max)
    lower = _trajectory(config, b_n - shoot_tol, r_max)
    upper = _trajectory(config, b_n + shoot_tol, r_max)
    r_reliable = _reliable_radius(config, middle, lower, upper)
    logger.debug("Shooting branch reliable up to r = %.3f", r_reliable)
    return KinkProfile(config, b_n, r_max, shoot_tol, middle, r_reliable)


def tail_series_coefficients(a, order):
    """Coefficients e_k with e^{sqrt2 r} phi_L(r) ~ sum_k e_k r^{-k-1}, e_0 = 1."""
    e = np.zeros(order + 1)
    e[0] = 1.0
    minus_a2 = -a * a
    for m in range(1, order + 1):
        total = -m * (m + 1) * e[m - 1]
        j = 0
        while m - 1 - 2 * j >= 0:
            total += 2.0 * minus_a2 ** j * (m - 2 * j) * e[m - 1 - 2 * j]
            j += 1
        j = 1
        while m - 2 * j >= 0:
            total += 2.0 * SQRT2 * minus_a2 ** j * e[m - 2 * j]
            j += 1
        e[m] = total / (2.0 * SQRT2 * m)
    return e


class TailSolution(object):
    """phi_L, the solution of the linearised tail equation normalised by phi_L ~ e^{-sqrt2 r}/r."""

    def __init__(self, config, r_match, r_start, coefficients, sampler):
        self.config = config
        self.r_match = r_match
        self.r_start = r_start
        self.coefficients = coefficients
        self.sampler = sampler

    @property
    def order(self):
        return len(self.coefficients) - 1

    def _series(self, r):
        powers = np.arange(len(self.coefficients))
        inverse = 1.0 / r[:, None]
        g = np.sum(self.coefficients * inverse ** (powers + 1), axis=1)
        dg = -np.sum((powers + 1) * self.coefficients * inverse ** (powers + 2), axis=1)
        return g, dg

    def _scaled(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r < self.r_match - 1e-12):
            raise ConfigurationError("phi_L is only available for r >= {}.".format(self.r_match))
        g = np.empty_like(r)
        dg = np.empty_like(r)
        inside = r <= self.r_start
        if inside.any():
            values = self.sampler(r[inside])
            g[inside] = values[0]
            dg[inside] = values[1]
        if (~inside).any():
            g[~inside], dg[~inside] = self._series(r[~inside])
        return r, g, dg

    def phi(self, r):
        shape = np.shape(r)
        r, g, _ = self._scaled(r)
        with np.errstate(under='ignore'):
            return (np.exp(-SQRT2 * r) * g).reshape(shape)

    def dphi(self, r):
        shape = np.shape(r)
        r, g, dg = self._scaled(r)
        with np.errstate(under='ignore'):
            return (np.exp(-SQRT2 * r) * (dg - SQRT2 * g)).reshape(shape)

    def samples(self, num_points=401):
        grid = UniformGrid(self.r_match, self.r_start, num_points)
        return grid, self.phi(grid.points)


def tail_solution(config, r_match=R_MATCH, r_start=None, max_order=60):
    r_start = r_start or config.default_r_start
    if not r_start > r_match > 0:
        raise ConfigurationError("Need r_start > r_match > 0 (got {}, {}).".format(r_start, r_match))
    e = tail_series_coefficients(config.a, max_order)
    terms = np.abs(e) / r_start ** np.arange(max_order + 1)
    smallest = int(np.argmin(np.where((np.arange(max_order + 1) >= 2) & (terms > 0), terms, np.inf)))
    if terms[smallest] >= 1e-14:
        raise ConfigurationError("Tail series does not converge at r_start = {} for a = {} (smallest term {:.3g})."
                                 .format(r_start, config.a, terms[smallest]))
    small = np.flatnonzero((terms < 1e-17) & (terms > 0) & (np.arange(max_order + 1) >= 2))
    order = int(small[0]) if len(small) else smallest
    coefficients = e[:order + 1]
    inverse = 1.0 / r_start
    powers = np.arange(order + 1)
    g0 = np.sum(coefficients * inverse ** (powers + 1))
    dg0 = -np.sum((powers + 1) * coefficients * inverse ** (powers + 2))
    a2 = config.a ** 2

    def rhs(r, y):
        friction = 2.0 * r / (r * r + a2)
        return [y[1], 2.0 * SQRT2 * y[1] - friction * (y[1] - SQRT2 * y[0])]

    sampler = integrate_ode_adaptive(rhs, [g0, dg0], (r_start, r_match), 1e-12, 1e-17)
    logger.debug("Tail series order %d at r_start = %s", order, r_start)
    return TailSolution(config, r_match, r_start, coefficients, sampler)


class TailCoefficient(namedtuple('TailCoefficient', ['value', 'spread', 'radii', 'ladder', 'degraded', 'warnings'])):
    def __float__(self):
        return float(self.value)


def tail_coefficient(kink, tail, step=0.5, span=4.0):
    if kink.config != tail.config:
        raise ConfigurationError("Kink and tail belong to different configurations.")
    warnings = []
    upper = min(tail.r_match + span, kink.r_reliable)
    radii = np.arange(tail.r_match, upper + 1e-9, step)
    if len(radii) < 3:
        warnings.append("shooting branch reliable only up to r = {:.3f}".format(kink.r_reliable))
        radii = tail.r_match + step * np.arange(3)
    ladder = (kink.config.n * math.pi - kink.branch_phi(radii)) / tail.phi(radii)
    accelerated = shanks_accelerate(ladder)
    value = ladder[-1] if accelerated.degraded else accelerated.value
    spread = float(np.max(ladder) - np.min(ladder))
    if spread > 1e-2 * abs(value):
        warnings.append("matching ladder spread {:.3g} exceeds 1% of c_n".format(spread))
    for message in warnings:
        logger.warning("Tail coefficient for %r: %s", kink.config, message)
    logger.debug("Tail ladder %s -> %.10g", ladder, value)
    return TailCoefficient(float(value), spread, radii, ladder, accelerated.degraded, warnings)


def solve_kink(config, shoot_tol=SHOOT_TOL, r_max=None, r_match=R_MATCH, r_start=None):
    """Shoot, match the tail, and return the stitched profile."""
    kink = shoot_kink(config, shoot_tol=shoot_tol, r_max=r_max)
    tail = tail_solution(config, r_match=r_match, r_start=r_start)
    coefficient = tail_coefficient(kink, tail)
    logger.info("Kink a=%g n=%d: b_n=%.6f c_n=%.6f", config.a, config.n, kink.b_n, coefficient.value)
    return kink.with_tail(coefficient, tail)


def sine_gordon_kink(r):
    with np.errstate(over='ignore'):
        return 2.0 * np.arctan(np.exp(SQRT2 * np.asarray(r, dtype=float)))


def sine_gordon_kink_derivative(r):
    with np.errstate(over='ignore'):
        return SQRT2 / np.cosh(SQRT2 * np.asarray(r, dtype=float))


def small_a_profile(config, r):
    return config.n * (math.pi / 2.0 + np.arctan(np.asarray(r, dtype=float) / config.a))


def solve_psi(grid):
    """Odd decaying solution of psi'' - 2cos(2H) psi = -2 r H' on a symmetric grid."""
    if grid.cell_centered:
        raise ConfigurationError("solve_psi needs a node-centred grid.")
    length = grid.upper
    if abs(grid.lower + length) > 1e-12 * length or length < 15:
        raise ConfigurationError("solve_psi needs a grid over [-L, L] with L >= 15.")
    if grid.num_points % 2 == 0:
        raise ConfigurationError("solve_psi needs r = 0 on the grid (odd number of points).")
    stencil = StencilSet.build(2, 8)
    weights = stencil.interior_weights
    half = stencil.half_width
    h = grid.spacing
    center = grid.num_points // 2
    last = grid.num_points - 1 - center
    r = grid.points[center + 1:center + last]
    size = last - 1
    kink = sine_gordon_kink(r)
    banded = np.zeros((2 * half + 1, size))

    def add(row, column, value):
        banded[half + row - column, column] += value

    for row in range(size):
        j = row + 1
        for k, weight in zip(range(-half, half + 1), weights):
            neighbour = j + k
            if neighbour < 0:
                add(row, -neighbour - 1, -weight / h ** 2)
            elif 0 < neighbour < last:
                add(row, neighbour - 1, weight / h ** 2)
        add(row, row, -2.0 * np.cos(2.0 * kink[row]))
    source = -2.0 * r * sine_gordon_kink_derivative(r)
    try:
        solution = linalg.solve_banded((half, half), banded, source)
    except linalg.LinAlgError as e:
        raise SingularSystemError("Singular system for psi: {}".format(e))
    if not np.all(np.isfinite(solution)):
        raise SingularSystemError("Singular system for psi: non-finite solution.")
    positive = np.concatenate([[0.0], solution, [0.0]])
    return np.concatenate([-positive[:0:-1], positive])


def large_a_profile(config, r, length=20.0, num_points=4001):
    """H(r) + psi(r)/a^2, the leading large-throat approximation of the 1-kink."""
    if config.n != 1:
        raise ConfigurationError("The large-throat expansion is for n = 1.")
    grid = UniformGrid(-length, length, num_points)
    psi = make_interp_spline(grid.points, solve_psi(grid), k=5)
    r = np.asarray(r, dtype=float)
    correction = np.where(np.abs(r) <= length, psi(np.clip(r, -length, length)), 0.0)
    return sine_gordon_kink(r) + correction / config.a ** 2


def separation_estimate(a):
    return math.log(a) / SQRT2


KinkDiagnostics = namedtuple('KinkDiagnostics', ['energy', 'friction_residual', 'separation'])


def kink_diagnostics(kink, spacing=0.005):
    config = kink.config
    a2 = config.a ** 2
    extent = min(kink.r_max, 60.0)
    panels = int(math.ceil(extent / spacing / 6.0))
    grid = UniformGrid(0.0, extent, 6 * panels + 1)
    r = grid.points
    phi, dphi = kink.evaluate(r)
    density = (0.5 * dphi ** 2 + np.sin(phi) ** 2) * (r ** 2 + a2)
    energy = 2.0 * quadrature(density, grid)
    friction = quadrature(2.0 * r / (r ** 2 + a2) * dphi ** 2, grid)
    throat = float(config.n % 2)
    residual = abs(0.5 * kink.b_n ** 2 - throat - friction)
    separation = None
    if config.n == 2:
        try:
            separation = bisect_root(lambda x: float(kink.phi(x)) - 1.5 * math.pi, (0.0, extent), 1e-10)
        except BracketError:
            separation = None
    return KinkDiagnostics(energy, residual, separation)
