__author__ = 'wormhole-tool developers'

import logging

import numpy as np
from scipy import optimize
from scipy.integrate import solve_ivp

from wormhole_tool.exceptions import (BracketError, ConfigurationError, NonFiniteStateError,
                                      StepSizeUnderflowError)

logger = logging.getLogger("wormhole_tool.numerics.integrate")


def rk4_step(state, rhs, dt, step_index=None):
    """One classical fourth-order Runge-Kutta step of ``state`` under the autonomous ``rhs``."""
    if not dt > 0:
        raise ConfigurationError("Time step must be positive, got {}.".format(dt))
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * dt * k1)
    k3 = rhs(state + 0.5 * dt * k2)
    k4 = rhs(state + dt * k3)
    result = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    finite = np.isfinite(result)
    if not finite.all():
        index = int(np.flatnonzero(~finite)[0])
        raise NonFiniteStateError("Non-finite state after step {} at component {}.".format(step_index, index),
                                  step=step_index, index=index)
    return result


class OdeSampler(object):
    """Dense output of an adaptive integration, plus where and why it stopped."""

    def __init__(self, result):
        self._solution = result.sol
        self.t = result.t
        self.y = result.y
        self.event = None
        if result.status == 1 and result.t_events is not None:
            for index, times in enumerate(result.t_events):
                if len(times):
                    self.event = index
                    break

    @property
    def span(self):
        return self.t[0], self.t[-1]

    @property
    def t_end(self):
        return self.t[-1]

    @property
    def y_end(self):
        return self.y[:, -1]

    def covers(self, r):
        lo, hi = sorted(self.span)
        r = np.asarray(r)
        return bool(np.all((r >= lo) & (r <= hi)))

    def __call__(self, r):
        return self._solution(r)


def integrate_ode_adaptive(rhs, y0, span, rtol, atol, events=None):
    """Integrate ``y' = rhs(r, y)`` across ``span`` with an embedded 8(5,3) pair and dense output.

    Integration runs backwards when span[1] < span[0]. Terminal events stop the
    integration early; the sampler records which one fired.
    """
    if not (rtol > 0 and atol > 0):
        raise ConfigurationError("Tolerances must be positive (rtol={}, atol={}).".format(rtol, atol))
    r0, r1 = float(span[0]), float(span[1])
    if r0 == r1:
        raise ConfigurationError("Integration span is empty.")
    result = solve_ivp(rhs, (r0, r1), y0, method='DOP853', rtol=rtol, atol=atol,
                       dense_output=True, events=events)
    if result.status == -1:
        location = float(result.t[-1]) if len(result.t) else r0
        raise StepSizeUnderflowError("Integration failed near r = {:.6g}: {}".format(location, result.message),
                                     location=location)
    logger.debug("Integrated %s -> %s in %d steps (%d evaluations)", r0, result.t[-1], len(result.t), result.nfev)
    return OdeSampler(result)


def bisect_root(f, bracket, xtol):
    """A point within ``xtol`` of a sign change of ``f`` inside ``bracket``."""
    lo, hi = float(bracket[0]), float(bracket[1])

    def checked(x):
        value = f(x)
        if not np.isfinite(value):
            raise NonFiniteStateError("Root function is not finite at x = {!r}.".format(x))
        return value

    f_lo = checked(lo)
    f_hi = checked(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError("No sign change in [{!r}, {!r}] (f = {!r}, {!r}).".format(lo, hi, f_lo, f_hi))
    return optimize.bisect(checked, lo, hi, xtol=xtol, maxiter=500)
