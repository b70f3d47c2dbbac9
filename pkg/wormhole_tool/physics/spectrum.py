"""Linear stability of kinks.

The operator L_n = -d^2/dr^2 + 2 + V_n with V_n = -4 sin^2(phi_n) + a^2/(r^2+a^2)^2
has continuous spectrum [2, inf); its eigenvalues omega^2 in the gap (0, 2) are
the internal modes. Eigenvalues are bracketed by counting zeros of the parity
solution (Pruefer phase) and refined by bisection on the matching Wronskian.
"""
__author__ = 'wormhole-tool developers'

from collections import namedtuple
import logging
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import make_interp_spline

from wormhole_tool.exceptions import (BracketError, ConfigurationError, ConsistencyError, DomainError,
                                      NongenericThresholdError)
from wormhole_tool.numerics import (StencilSet, UniformGrid, bisect_root, fd_derivative, integrate_ode_adaptive,
                                    quadrature, quadrature_adaptive)
from wormhole_tool.physics.kink import SQRT2, WormholeConfig, sine_gordon_kink, solve_kink, solve_psi

logger = logging.getLogger("wormhole_tool.physics.spectrum")

THRESHOLD = 2.0
EIGEN_TOL = 1e-10
NEAR_THRESHOLD = 1e-6
R_CAP = 1e4
MATCH_RTOL = 1e-11
COUNT_RTOL = 1e-9
MATCH_ATOL = 1e-14
MODE_EXTENT = 200.0


class Potential(object):
    """An even potential: quintic spline on [0, r_max], analytic tail beyond."""

    def __init__(self, r_max, radii, values, config=None, core_radius=1.0):
        self.r_max = float(r_max)
        self.radii = radii
        self.values = values
        self.config = config
        self.core_radius = core_radius
        self._spline = make_interp_spline(radii, values, k=5)

    @classmethod
    def from_function(cls, func, r_max=30.0, spacing=0.005, core_radius=1.0):
        radii = np.linspace(0.0, r_max, int(round(r_max / spacing)) + 1)
        return cls(r_max, radii, np.asarray(func(radii), dtype=float), core_radius=core_radius)

    def tail(self, r):
        if self.config is None:
            return np.zeros_like(r)
        a2 = self.config.a ** 2
        return a2 / (r * r + a2) ** 2

    def tail_integral(self, r):
        """Integral of the tail model from r to infinity (r > 0)."""
        if self.config is None:
            return 0.0
        a = self.config.a
        return math.atan(a / r) / (2.0 * a) - r / (2.0 * (r * r + a * a))

    def __call__(self, r):
        x = np.abs(np.asarray(r, dtype=float))
        if x.ndim == 0:
            x = float(x)
            return float(self._spline(x)) if x <= self.r_max else float(self.tail(x))
        inside = x <= self.r_max
        result = self.tail(x)
        if inside.any():
            result[inside] = self._spline(x[inside])
        return result

    def minimum(self):
        return float(np.min(self.values))


def build_potential(kink, spacing=0.005):
    config = kink.config
    radii = np.linspace(0.0, kink.r_max, int(round(kink.r_max / spacing)) + 1)
    a2 = config.a ** 2
    values = -4.0 * np.sin(kink.phi(radii)) ** 2 + a2 / (radii ** 2 + a2) ** 2
    target = config.n * math.pi - 0.5
    core = 0.5
    if kink.phi(kink.r_max) > target:
        core = max(core, bisect_root(lambda r: float(kink.phi(r)) - target, (0.0, kink.r_max), 1e-6))
    return Potential(kink.r_max, radii, values, config=config, core_radius=core)


def sine_gordon_potential(r):
    return -4.0 / np.cosh(SQRT2 * np.asarray(r, dtype=float)) ** 2


def sine_gordon_zero_mode(r):
    return 2.0 ** -0.25 / np.cosh(SQRT2 * np.asarray(r, dtype=float))


def _decay_radius(kappa):
    return min(max(30.0, 12.0 / kappa), R_CAP)


def _kappa(omega2):
    return math.sqrt(max(THRESHOLD - omega2, 1e-300))


def _parity_data(parity):
    return [1.0, 0.0] if parity == 'even' else [0.0, 1.0]


def _zero_count(potential, omega2, parity):
    """Number of eigenvalues of the given parity below omega2 (Sturm oscillation count)."""
    kappa2 = THRESHOLD - omega2

    def rhs(r, theta):
        s, c = math.sin(theta[0]), math.cos(theta[0])
        return [c * c - (kappa2 + potential(r)) * s * s]

    start = math.pi / 2.0 if parity == 'even' else 0.0
    sampler = integrate_ode_adaptive(rhs, [start], (0.0, _decay_radius(_kappa(omega2))), COUNT_RTOL, 1e-12)
    return int(math.floor(sampler.y_end[0] / math.pi))


def _schroedinger_rhs(potential, kappa2):
    def rhs(r, y):
        return [y[1], (kappa2 + potential(r)) * y[0]]
    return rhs


def _branches(potential, omega2, parity, rtol=MATCH_RTOL):
    kappa2 = THRESHOLD - omega2
    radius = _decay_radius(_kappa(omega2))
    r_mid = min(potential.core_radius, radius / 2.0)
    rhs = _schroedinger_rhs(potential, kappa2)
    inner = integrate_ode_adaptive(rhs, _parity_data(parity), (0.0, r_mid), rtol, MATCH_ATOL)
    slope = -math.sqrt(max(kappa2 + potential(radius), 1e-300))
    outer = integrate_ode_adaptive(rhs, [1.0, slope], (radius, r_mid), rtol, MATCH_ATOL)
    return inner, outer, r_mid, radius


def _matching_wronskian(potential, omega2, parity):
    inner, outer, _, _ = _branches(potential, omega2, parity)
    vi, dvi = inner.y_end
    vo, dvo = outer.y_end
    return (vi * dvo - dvi * vo) / (math.hypot(vi, dvi) * math.hypot(vo, dvo))


class ModeData(object):
    """A gap eigenvalue with its L2-normalised eigenfunction."""

    def __init__(self, omega2, parity, node_count, grid=None, values=None, kappa=None, near_threshold=False,
                 config=None):
        self.omega2 = float(omega2)
        self.parity = parity
        self.node_count = node_count
        self.grid = grid
        self.values = values
        self.kappa = _kappa(omega2) if kappa is None else kappa
        self.near_threshold = near_threshold
        self.config = config
        self._spline = None

    @property
    def omega(self):
        return math.sqrt(max(self.omega2, 0.0))

    @property
    def index(self):
        return self.node_count

    def __call__(self, r):
        if self.values is None:
            raise ConfigurationError("This mode carries no eigenfunction samples.")
        if self._spline is None:
            self._spline = make_interp_spline(self.grid.points, self.values, k=5)
        r = np.asarray(r, dtype=float)
        edge = self.grid.upper
        inside = np.abs(r) <= edge
        clipped = np.clip(r, -edge, edge)
        result = self._spline(clipped)
        # exponential continuation outside the sampled interval
        with np.errstate(under='ignore'):
            decay = np.exp(-self.kappa * np.maximum(np.abs(r) - edge, 0.0))
        return np.where(inside, result, result * decay)

    def tail_norm(self):
        """Weight of the exponential continuation beyond both ends of the grid."""
        edges = self.values[[0, -1]]
        return float(np.sum(edges ** 2)) / (2.0 * self.kappa)

    def norm(self):
        return quadrature(self.values ** 2, self.grid) + self.tail_norm()

    def residual(self, potential):
        """||(L - omega^2) v|| / ||v|| on the sample grid."""
        second = fd_derivative(self.values, self.grid, StencilSet.build(2, 8))
        applied = -second + (THRESHOLD + potential(self.grid.points)) * self.values - self.omega2 * self.values
        return math.sqrt(quadrature(applied ** 2, self.grid) / quadrature(self.values ** 2, self.grid))

    def expectation(self, potential):
        second = fd_derivative(self.values, self.grid, StencilSet.build(2, 8))
        applied = -second + (THRESHOLD + potential(self.grid.points)) * self.values
        return quadrature(self.values * applied, self.grid) / self.norm()

    def describe(self):
        row = {
            'omega2': self.omega2,
            'omega': self.omega,
            'parity': self.parity,
            'node_count': self.node_count,
            'index': self.node_count,
            'near_threshold': self.near_threshold,
        }
        if self.config is not None:
            row.update(self.config.describe())
        return row

    @classmethod
    def from_row(cls, row):
        config = None
        if row.get('a') is not None and row.get('n') is not None:
            config = WormholeConfig(float(row['a']), int(row['n']))
        return cls(float(row['omega2']), row.get('parity', 'even'), int(row.get('node_count', 0)),
                   config=config)

    @classmethod
    def from_samples(cls, row, r, values):
        mode = cls.from_row(row)
        mode.grid = UniformGrid(r[0], r[-1], len(r))
        mode.values = np.asarray(values, dtype=float)
        return mode


def _build_mode(potential, omega2, parity, spacing=0.02, max_points=20001):
    inner, outer, r_mid, radius = _branches(potential, omega2, parity, rtol=1e-12)
    vi, dvi = inner.y_end
    vo, dvo = outer.y_end
    scale = vi / vo if abs(vo) > abs(dvo) * 1e-3 else dvi / dvo
    kappa = _kappa(omega2)
    # Beyond the grid the mode is e^{-kappa r}; ModeData.tail_norm carries that weight.
    extent = min(radius, MODE_EXTENT, 0.5 * (max_points - 1) * spacing)
    grid = UniformGrid(-extent, extent, 2 * int(math.ceil(extent / spacing)) + 1)
    center = grid.num_points // 2
    half = grid.points[center:]
    values = np.empty_like(half)
    near = half <= r_mid
    values[near] = inner(half[near])[0]
    values[~near] = scale * outer(half[~near])[0]
    mirror = values[:0:-1] if parity == 'even' else -values[:0:-1]
    full = np.concatenate([mirror, values])
    mode = ModeData(omega2, parity, 0, grid=grid, values=full, kappa=kappa, config=potential.config)
    mode.values = full / math.sqrt(mode.norm())
    significant = np.abs(mode.values) > 1e-8 * np.max(np.abs(mode.values))
    signs = np.sign(mode.values[significant])
    mode.node_count = int(np.count_nonzero(signs[1:] != signs[:-1]))
    mode.near_threshold = THRESHOLD - omega2 < NEAR_THRESHOLD
    if mode.near_threshold:
        logger.warning("Eigenvalue %.12g lies within %g of the continuum threshold.", omega2, NEAR_THRESHOLD)
    return mode


def _locate(potential, parity, index, lower, upper, bracket_tol):
    # Narrow the counting bracket, then bisect on the matching Wronskian.
    while upper - lower > bracket_tol:
        middle = 0.5 * (lower + upper)
        if _zero_count(potential, middle, parity) > index:
            upper = middle
        else:
            lower = middle

    def wronskian(omega2):
        return _matching_wronskian(potential, omega2, parity)

    width = upper - lower
    left, right = lower, upper
    for _ in range(12):
        if np.sign(wronskian(left)) != np.sign(wronskian(right)):
            return bisect_root(wronskian, (left, right), EIGEN_TOL)
        width *= 2.0
        left = lower - width
        right = min(upper + width, THRESHOLD - 1e-14)
    raise BracketError("Could not bracket the {} eigenvalue #{} near omega^2 = {:.6g}.".format(parity, index, lower))


def gap_eigenvalues(potential, parity_scan=('even', 'odd'), omega2_range=(0.0, THRESHOLD), bracket_tol=1e-4):
    """All eigenvalues of L with omega^2 inside ``omega2_range`` (default: the gap)."""
    lower, upper = omega2_range
    if not lower < upper:
        raise ConfigurationError("Empty eigenvalue range ({}, {}).".format(lower, upper))
    upper = min(upper, THRESHOLD - 1e-12)
    modes = []
    for parity in parity_scan:
        below = _zero_count(potential, lower, parity)
        total = _zero_count(potential, upper, parity)
        logger.debug("%s parity: %d eigenvalue(s) in (%g, %g)", parity, total - below, lower, upper)
        for index in range(below, total):
            omega2 = _locate(potential, parity, index, lower, upper, bracket_tol)
            modes.append(_build_mode(potential, omega2, parity))
    modes.sort(key=lambda mode: mode.omega2)
    return modes


def critical_radius(n, mode_index, bracket, points=6, kappa_floor=1e-3, fit_points=3):
    """Throat radius at which the mode with ``mode_index`` nodes joins the continuum."""
    lower, upper = bracket
    if not 0 < lower < upper:
        raise ConfigurationError("Critical-radius bracket must satisfy 0 < lo < hi, got {}.".format(bracket))

    def kappa_at(a):
        potential = build_potential(solve_kink(WormholeConfig(a, n)))
        for mode in gap_eigenvalues(potential):
            if mode.node_count == mode_index:
                logger.info("a = %.6f: kappa = %.6g", a, mode.kappa)
                return mode.kappa
        logger.info("a = %.6f: mode %d absent", a, mode_index)
        return None

    samples = []
    absent = None
    for a in np.linspace(upper, lower, points):
        kappa = kappa_at(a)
        if kappa is None:
            absent = a
            break
        samples.append((a, kappa))
    if not samples or absent is None:
        raise BracketError("Mode {} of the {}-kink does not vanish within [{}, {}].".format(mode_index, n, lower, upper))
    present = samples[-1][0]
    for a in np.linspace(present, absent, points + 1)[1:-1]:
        kappa = kappa_at(a)
        if kappa is not None:
            samples.append((a, kappa))
    usable = sorted((s for s in samples if s[1] >= kappa_floor), key=lambda s: s[1])[:fit_points]
    if len(usable) < 2:
        raise BracketError("Too few resolvable points near the threshold of mode {}.".format(mode_index))
    radii, kappas = np.array(usable).T
    slope, intercept = np.polyfit(radii, kappas, 1)
    estimate = -intercept / slope
    if not lower <= estimate <= upper:
        raise BracketError("Extrapolated critical radius {:.6g} lies outside [{}, {}].".format(estimate, lower, upper))
    return float(estimate)


class Scattering(namedtuple('Scattering', ['transmission', 'reflection'])):
    @property
    def transmitted(self):
        return abs(self.transmission) ** 2

    @property
    def reflected(self):
        return abs(self.reflection) ** 2


class JostSolution(object):
    """k(r) = e^{i xi r} m(r), outgoing at +infinity."""

    def __init__(self, xi, sampler, radius, scale):
        self.xi = xi
        self.sampler = sampler
        self.radius = radius
        self.scale = scale

    def _values(self, r):
        r = np.asarray(r, dtype=float)
        m, dm = self.sampler(r)
        phase = np.exp(1j * self.xi * r)
        return self.scale * phase * m, self.scale * phase * (1j * self.xi * m + dm)

    def __call__(self, r):
        return self._values(r)[0]

    def derivative(self, r):
        return self._values(r)[1]

    def left(self, r):
        """The solution outgoing at -infinity, k(-r)."""
        return self(-np.asarray(r, dtype=float))

    def wronskian(self, r):
        k, dk = self._values(r)
        return k * np.conj(dk) - np.conj(k) * dk

    def scattering(self):
        """Amplitudes of k = (e^{i xi r} + R e^{-i xi r}) / T read off at r = -radius."""
        r = -self.radius
        k, dk = self._values(r)
        incoming = 0.5 * (k + dk / (1j * self.xi)) * np.exp(-1j * self.xi * r)
        reflected = 0.5 * (k - dk / (1j * self.xi)) * np.exp(1j * self.xi * r)
        return Scattering(complex(1.0 / incoming), complex(reflected / incoming))


def jost_solution(potential, xi, radius=200.0, check_points=401):
    if not xi > 0:
        raise DomainError("The Jost solution needs xi > 0, got {}.".format(xi))

    def rhs(r, y):
        return [y[1], potential(r) * y[0] - 2j * xi * y[1]]

    correction = 1j * potential.tail_integral(radius) / (2.0 * xi)
    slope = -1j * float(potential(radius)) / (2.0 * xi)
    sampler = integrate_ode_adaptive(rhs, np.array([1.0 + correction, slope], dtype=complex),
                                     (radius, -radius), 1e-12, 1e-14)
    jost = JostSolution(xi, sampler, radius, 1.0)
    drift = (jost.wronskian(radius) / (-2j * xi)).real
    jost.scale = 1.0 / math.sqrt(drift)
    nodes = np.linspace(-radius, radius, check_points)
    deviation = np.max(np.abs(jost.wronskian(nodes) / (-2j * xi) - 1.0))
    if deviation > 1e-6:
        raise ConsistencyError("Jost Wronskian deviates from -2i*xi by {:.3g} (relative).".format(deviation))
    logger.debug("Jost solution xi=%.8g: Wronskian deviation %.3g", xi, deviation)
    return jost


def threshold_index(omega, tol=1e-12):
    """N with N^2 omega^2 < 2 < (N+1)^2 omega^2."""
    if not 0 < omega ** 2 < THRESHOLD:
        raise DomainError("omega^2 = {} is not inside the gap (0, 2).".format(omega ** 2))
    ratio = SQRT2 / omega
    nearest = round(ratio)
    if abs(ratio - nearest) <= tol * ratio:
        raise NongenericThresholdError("{} * omega = sqrt(2) exactly; the nongeneric case is not treated."
                                       .format(int(nearest)))
    return int(math.floor(ratio))


class GammaResult(object):
    def __init__(self, omega, xi, overlap, gamma, scattering=None, gamma_resolvent=None):
        self.omega = omega
        self.xi = xi
        self.overlap = overlap
        self.gamma = gamma
        self.scattering = scattering
        self.gamma_resolvent = gamma_resolvent

    @property
    def inv_sqrt_gamma(self):
        return self.gamma ** -0.5 if self.gamma > 0 else float('inf')

    def describe(self, a=None):
        summary = {
            'a': a,
            'omega': self.omega,
            'xi': self.xi,
            'overlap_re': self.overlap.real,
            'overlap_im': self.overlap.imag,
            'gamma': self.gamma,
            'inv_sqrt_gamma': self.inv_sqrt_gamma,
        }
        if self.scattering is not None:
            summary['transmitted'] = self.scattering.transmitted
            summary['reflected'] = self.scattering.reflected
        if self.gamma_resolvent is not None:
            summary['gamma_resolvent'] = self.gamma_resolvent
        return summary


def quadratic_coupling(kink):
    """Coefficient of u^2 in the expanded nonlinearity: 2 sin(2 phi_1)/sqrt(r^2+a^2)."""
    a2 = kink.config.a ** 2
    return lambda r: 2.0 * np.sin(2.0 * kink.phi(r)) / np.sqrt(np.asarray(r) ** 2 + a2)


def second_harmonic_source(kink, mode):
    """Coefficient of z^2 in the quadratic term, sin(2 phi_1) v^2 / (2 sqrt(r^2+a^2))."""
    coupling = quadratic_coupling(kink)
    return lambda r: 0.25 * coupling(r) * mode(r) ** 2


def outgoing_response(source, jost, grid):
    """Outgoing solution a of (L - 2 - xi^2) a = source on ``grid``.

    Built from k and its mirror image k(-r), which is outgoing at -infinity
    for an even potential, divided by their Wronskian.
    """
    r = grid.points
    f = source(r)
    right = jost(r)
    left = jost.left(r)
    wronskian = 2.0 * jost(0.0) * jost.derivative(0.0)
    below = cumulative_trapezoid(left * f, r, initial=0.0)
    above = cumulative_trapezoid(right * f, r, initial=0.0)
    above = above[-1] - above
    return -(right * below + left * above) / wronskian


def _source_cutoff(kink, mode, jost):
    r = mode.grid.points
    envelope = np.abs(np.sin(2.0 * kink.phi(r)) * mode.values ** 2)
    significant = np.flatnonzero(envelope > 1e-16 * envelope.max())
    return min(abs(r[significant]).max() + 1.0, jost.radius, mode.grid.upper)


def gamma_coefficient(kink, mode, jost, spacing=0.005):
    """Fermi golden rule rate of the internal mode.

    ``gamma`` is the closed form |<k, sin(2 phi_1) v^2/sqrt(r^2+a^2)>|^2/(xi omega),
    which takes conj(k) as the solution outgoing at -infinity. With a reflecting
    potential conj(k) and k(-r) differ; ``gamma_resolvent`` evaluates
    (2/omega) <v, f_110 Im a_20> from the outgoing response itself and equals
    |T|^2 times the closed form.
    """
    omega = mode.omega
    if 4.0 * omega ** 2 <= THRESHOLD:
        raise DomainError("4 omega^2 = {:.6g} <= 2: the N = {} regime has no Fermi golden rule coefficient."
                          .format(4.0 * omega ** 2, threshold_index(omega)))
    a2 = kink.config.a ** 2
    cutoff = _source_cutoff(kink, mode, jost)

    def integrand(x):
        return np.conj(jost(x)) * math.sin(2.0 * float(kink.phi(x))) * float(mode(x)) ** 2 / math.sqrt(x * x + a2)

    overlap = quadrature_adaptive(integrand, -cutoff, cutoff, points=[0.0])
    gamma = abs(overlap) ** 2 / (jost.xi * omega)

    source = second_harmonic_source(kink, mode)
    grid = UniformGrid(-cutoff, cutoff, 2 * int(math.ceil(cutoff / spacing)) + 1)
    response = outgoing_response(source, jost, grid)
    gamma_resolvent = 8.0 / omega * quadrature(source(grid.points) * response.imag, grid)
    scattering = jost.scattering()
    logger.debug("Gamma %.10g, resolvent %.10g, |T|^2 %.10g", gamma, gamma_resolvent, scattering.transmitted)
    return GammaResult(omega, jost.xi, overlap, gamma, scattering=scattering, gamma_resolvent=gamma_resolvent)


def gamma_for_mode(kink, mode, radius=200.0):
    xi = math.sqrt(4.0 * mode.omega2 - THRESHOLD) if 4.0 * mode.omega2 > THRESHOLD else 0.0
    if xi <= 0:
        raise DomainError("4 omega^2 = {:.6g} <= 2: the N = {} regime has no Fermi golden rule coefficient."
                          .format(4.0 * mode.omega2, threshold_index(mode.omega)))
    return gamma_coefficient(kink, mode, jost_solution(build_potential(kink), xi, radius=radius))


def psi_overlap(length=20.0, num_points=4001):
    """4 * integral of sin(2H) psi v0^2, the first-order shift carried by the throat correction."""
    grid = UniformGrid(-length, length, num_points)
    r = grid.points
    return 4.0 * quadrature(np.sin(2.0 * sine_gordon_kink(r)) * solve_psi(grid) * sine_gordon_zero_mode(r) ** 2, grid)


def large_a_eigenvalue_coefficient(length=20.0, num_points=4001):
    """c in omega^2 ~ c/a^2 for the lowest mode of the 1-kink at large throat radius."""
    return 1.0 - psi_overlap(length, num_points)
