__author__ = 'wormhole-tool developers'

import logging

import numpy as np
from scipy import integrate
from scipy.special import comb

from wormhole_tool.exceptions import ConfigurationError, DimensionError

logger = logging.getLogger("wormhole_tool.numerics.grid")

MIN_POINTS = 17


class UniformGrid(object):
    """Equally spaced nodes on [lower, upper].

    Node-centred grids include both endpoints. Cell-centred grids place the
    nodes half a cell away from the endpoints, so the endpoints are never
    sampled.
    """

    def __init__(self, lower, upper, num_points, cell_centered=False):
        if num_points < MIN_POINTS:
            raise DimensionError("A grid needs at least {} points, got {}.".format(MIN_POINTS, num_points))
        if not upper > lower:
            raise ConfigurationError("Grid bounds must satisfy lower < upper (got {}, {}).".format(lower, upper))
        self.lower = float(lower)
        self.upper = float(upper)
        self.num_points = int(num_points)
        self.cell_centered = bool(cell_centered)
        self._points = None

    @property
    def spacing(self):
        if self.cell_centered:
            return (self.upper - self.lower) / self.num_points
        return (self.upper - self.lower) / (self.num_points - 1)

    @property
    def points(self):
        if self._points is None:
            offset = 0.5 if self.cell_centered else 0.0
            self._points = self.lower + (np.arange(self.num_points) + offset) * self.spacing
            self._points.setflags(write=False)
        return self._points

    def __len__(self):
        return self.num_points

    def __repr__(self):
        return "UniformGrid({!r}, {!r}, {!r}, cell_centered={!r})".format(
            self.lower, self.upper, self.num_points, self.cell_centered)

    def describe(self):
        return {
            'lower': self.lower,
            'upper': self.upper,
            'num_points': self.num_points,
            'cell_centered': self.cell_centered,
            'spacing': self.spacing,
        }

    def refined(self, factor=2):
        return UniformGrid(self.lower, self.upper,
                           self.num_points * factor if self.cell_centered else (self.num_points - 1) * factor + 1,
                           cell_centered=self.cell_centered)


def fornberg_weights(z, x, derivative):
    """Finite-difference weights at ``z`` for the given derivative on the nodes ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    c = np.zeros((n, derivative + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, derivative)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, derivative]


class StencilSet(object):
    """Centred interior weights plus one-sided rows for the nodes nearest each edge.

    Weights are in index units; ``fd_derivative`` scales them by the spacing.
    """

    _cache = {}

    def __init__(self, derivative, order, interior_weights, left_weights, right_weights):
        self.derivative = derivative
        self.order = order
        self.interior_weights = interior_weights
        self.left_weights = left_weights
        self.right_weights = right_weights

    @property
    def half_width(self):
        return (len(self.interior_weights) - 1) // 2

    @property
    def width(self):
        return len(self.interior_weights)

    @property
    def boundary_weights(self):
        return list(self.left_weights) + list(self.right_weights)

    @classmethod
    def build(cls, derivative=1, order=8):
        key = (derivative, order)
        if key not in cls._cache:
            if order % 2:
                raise ConfigurationError("Stencil order must be even, got {}.".format(order))
            half = order // 2
            nodes = np.arange(-half, half + 1, dtype=float)
            interior = fornberg_weights(0.0, nodes, derivative)
            support = np.arange(2 * half + 1, dtype=float)
            left = np.array([fornberg_weights(float(i), support, derivative) for i in range(half)])
            right = np.array([fornberg_weights(float(2 * half - i), support, derivative) for i in range(half)])
            for weights in (interior, left, right):
                weights.setflags(write=False)
            cls._cache[key] = cls(derivative, order, interior, left, right)
        return cls._cache[key]


def fd_derivative(values, grid, stencils=None):
    """Discrete derivative of ``values`` sampled on ``grid``."""
    if stencils is None:
        stencils = StencilSet.build(1, 8)
    values = np.asarray(values, dtype=float)
    n = grid.num_points
    if values.shape != (n,):
        raise DimensionError("Expected {} samples, got shape {}.".format(n, values.shape))
    half = stencils.half_width
    width = stencils.width
    result = np.zeros(n)
    interior = result[half:n - half]
    for k, weight in enumerate(stencils.interior_weights):
        if weight != 0.0:
            interior += weight * values[k:n - 2 * half + k]
    head = values[:width]
    tail = values[n - width:]
    for i in range(half):
        result[i] = np.dot(stencils.left_weights[i], head)
        result[n - 1 - i] = np.dot(stencils.right_weights[i], tail)
    return result / grid.spacing ** stencils.derivative


def ko_dissipation(values, sigma, spacing, order=5):
    """Kreiss-Oliger filter of even derivative order 2*order, zero where the stencil does not fit."""
    if sigma < 0:
        raise ConfigurationError("Dissipation coefficient must be non-negative, got {}.".format(sigma))
    values = np.asarray(values, dtype=float)
    n = values.size
    width = 2 * order + 1
    if n < width:
        raise DimensionError("Dissipation needs at least {} samples, got {}.".format(width, n))
    result = np.zeros(n)
    if sigma == 0:
        return result
    difference = np.zeros(n - 2 * order)
    for j in range(width):
        difference += (-1) ** j * comb(2 * order, j, exact=True) * values[j:n - 2 * order + j]
    result[order:n - order] = -sigma * (-1) ** order * difference / (spacing * 2 ** (2 * order))
    return result


def _newton_cotes_blocks():
    weights, _ = integrate.newton_cotes(6, 1)
    return np.asarray(weights, dtype=float)


_NC7 = _newton_cotes_blocks()


def _moment_weights(start, stop):
    # Integrate the interpolant through seven nodes at 0..6 over [start, stop] (index units).
    powers = np.arange(7)
    moments = (stop ** (powers + 1) - start ** (powers + 1)) / (powers + 1)
    vandermonde = np.vander(np.arange(7, dtype=float), 7, increasing=True).T
    return np.linalg.solve(vandermonde, moments)


_HALF_CELL = _moment_weights(-0.5, 0.0)


def _closed_sum(values):
    n = values.size
    blocks = (n - 1) // 6
    remainder = (n - 1) % 6
    total = 0.0
    if blocks:
        panels = np.lib.stride_tricks.as_strided(
            values, shape=(blocks, 7), strides=(6 * values.strides[0], values.strides[0]))
        total = np.sum(panels.dot(_NC7))
    if remainder:
        total += np.dot(_moment_weights(6.0 - remainder, 6.0), values[n - 7:])
    return total


def quadrature(values, grid):
    """Integral of ``values`` over the grid's interval.

    Composite 7-point Newton-Cotes between the first and last node. On a
    cell-centred grid the two half cells outside the nodes are added from the
    interpolant through the seven nodes nearest each end.
    """
    values = np.ascontiguousarray(values)
    n = grid.num_points
    if values.shape != (n,):
        raise DimensionError("Expected {} samples, got shape {}.".format(n, values.shape))
    total = _closed_sum(values)
    if grid.cell_centered:
        total += np.dot(_HALF_CELL, values[:7]) + np.dot(_HALF_CELL, values[:n - 8:-1])
    return grid.spacing * total


def interpolation_weights(grid, x, width=8):
    """Indices and Lagrange weights of the ``width`` nodes around ``x``."""
    points = grid.points
    n = grid.num_points
    position = (x - points[0]) / grid.spacing
    start = int(np.floor(position)) - width // 2 + 1
    start = min(max(start, 0), n - width)
    indices = np.arange(start, start + width)
    return indices, fornberg_weights(x, points[indices], 0)


def quadrature_adaptive(func, lower, upper, points=None, epsabs=1e-14, epsrel=1e-12, limit=400):
    """QUADPACK integral of a real or complex scalar function over [lower, upper]."""
    real, _ = integrate.quad(lambda x: np.real(func(x)), lower, upper, points=points,
                             epsabs=epsabs, epsrel=epsrel, limit=limit)
    imag, _ = integrate.quad(lambda x: np.imag(func(x)), lower, upper, points=points,
                             epsabs=epsabs, epsrel=epsrel, limit=limit)
    return complex(real, imag)
