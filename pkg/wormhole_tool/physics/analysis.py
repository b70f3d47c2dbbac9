"""Envelope extraction and decay-law fits on run records."""
__author__ = 'wormhole-tool developers'

import logging
import math

import numpy as np
from scipy.signal import find_peaks

from wormhole_tool.exceptions import InsufficientDataError, NumericalError
from wormhole_tool.physics.spectrum import threshold_index

logger = logging.getLogger("wormhole_tool.physics.analysis")

MIN_EXTREMA = 8
DEFAULT_WINDOW_START = 50.0
NO_MODE_EXPONENT = -1.5
TRANSITION_THRESHOLD = math.sqrt(2.0) / 2.0


class ExtremaSeries(object):
    def __init__(self, s, amplitude, sign, signal):
        self.s = np.asarray(s, dtype=float)
        self.amplitude = np.asarray(amplitude, dtype=float)
        self.sign = np.asarray(sign, dtype=int)
        self.signal = signal

    def __len__(self):
        return len(self.s)

    def within(self, window):
        lo, hi = window
        mask = (self.s >= lo) & (self.s <= hi)
        return ExtremaSeries(self.s[mask], self.amplitude[mask], self.sign[mask], self.signal)

    def periods(self):
        """Full periods s_{k+2} - s_k between same-sign extrema, located at their midpoints."""
        same = self.sign[2:] == self.sign[:-2]
        spans = (self.s[2:] - self.s[:-2])[same]
        centres = (0.5 * (self.s[2:] + self.s[:-2]))[same]
        return centres, spans

    def period(self):
        return float(np.mean(self.periods()[1]))


def _refine(s, x, i):
    # Vertex of the parabola through three neighbouring samples.
    offsets = s[i - 1:i + 2] - s[i]
    curvature, slope, value = np.polyfit(offsets, x[i - 1:i + 2], 2)
    if curvature == 0:
        return s[i], x[i]
    shift = -slope / (2.0 * curvature)
    return s[i] + shift, value - slope * slope / (4.0 * curvature)


def extrema_from_signal(s, x, signal='signal', minimum=MIN_EXTREMA):
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    finite = np.isfinite(x)
    s, x = s[finite], x[finite]
    maxima, _ = find_peaks(x)
    minima, _ = find_peaks(-x)
    located = sorted([(i, 1) for i in maxima] + [(i, -1) for i in minima])
    times, amplitudes, signs = [], [], []
    for i, sign in located:
        if 0 < i < len(s) - 1:
            where, value = _refine(s, x, i)
            times.append(where)
            amplitudes.append(abs(value))
            signs.append(sign)
    if len(times) < minimum:
        raise InsufficientDataError("Found {} extrema of {}, need at least {}.".format(len(times), signal, minimum))
    return ExtremaSeries(times, amplitudes, signs, signal)


def extract_extrema(record, signal='u_probe', window=None):
    s = record.column('s')
    x = record.column(signal)
    if window is not None:
        mask = (s >= window[0]) & (s <= window[1])
        s, x = s[mask], x[mask]
    logger.debug("Extracting extrema of %s from %d samples", signal, len(s))
    return extrema_from_signal(s, x, signal)


class DecayFit(object):
    """Power-law envelope A ~ C s^p of an extrema series.

    ``coefficient`` is reported in physical time units: along the worldline at probe_y
    t = a s + const, so C_t = C_s a^{-p} and frequencies divide by a.
    """

    def __init__(self, exponent, coefficient_s, window, residual, count, omega_eff, time_scale=1.0, fixed=False,
                 warnings=None, stability_shift=None):
        self.exponent = exponent
        self.coefficient_s = coefficient_s
        self.window = window
        self.residual = residual
        self.count = count
        self.omega_eff = omega_eff
        self.time_scale = time_scale
        self.fixed = fixed
        self.warnings = warnings or []
        self.stability_shift = stability_shift

    @property
    def coefficient(self):
        return self.coefficient_s * self.time_scale ** -self.exponent

    def omega_eff_late(self):
        if not len(self.omega_eff[1]):
            return None
        return float(self.omega_eff[1][-1])

    def describe(self):
        return {
            'exponent': self.exponent,
            'coefficient': self.coefficient,
            'coefficient_s': self.coefficient_s,
            'window': list(self.window),
            'residual': self.residual,
            'count': self.count,
            'fixed_exponent': self.fixed,
            'time_scale': self.time_scale,
            'omega_eff_late': self.omega_eff_late(),
            'stability_shift': self.stability_shift,
            'warnings': self.warnings,
        }


def default_window(extrema, start=DEFAULT_WINDOW_START, minimum=20):
    hi = float(extrema.s[-1])
    lo = max(start, hi / 10.0)
    if np.count_nonzero(extrema.s >= lo) < minimum and len(extrema) >= minimum:
        lo = float(extrema.s[-minimum])
    return lo, hi


def _line_fit(log_s, log_a, fixed_exponent):
    if fixed_exponent is None:
        exponent, intercept = np.polyfit(log_s, log_a, 1)
    else:
        exponent = float(fixed_exponent)
        intercept = float(np.mean(log_a - exponent * log_s))
    residual = float(np.sqrt(np.mean((log_a - exponent * log_s - intercept) ** 2)))
    return float(exponent), float(intercept), residual


def fit_decay(extrema, window=None, fixed_exponent=None, time_scale=1.0):
    """Least-squares line through (log s, log A) of the extrema inside ``window``."""
    warnings = []
    stability_shift = None
    automatic = window is None
    if automatic:
        window = default_window(extrema)
    lo, hi = window
    if not 0 < lo < hi:
        raise InsufficientDataError("Invalid fit window [{}, {}].".format(lo, hi))
    selected = extrema.within(window)
    if len(selected) < 3:
        raise InsufficientDataError("Only {} extrema inside the window [{:.6g}, {:.6g}].".format(len(selected), lo, hi))
    log_s = np.log(selected.s)
    log_a = np.log(selected.amplitude)
    exponent, intercept, residual = _line_fit(log_s, log_a, fixed_exponent)
    if math.log10(hi / lo) < 0.5:
        warnings.append("fit window spans less than half a decade")
    if automatic and fixed_exponent is None:
        half = extrema.within((max(lo, hi / math.sqrt(10.0)), hi))
        if len(half) >= 3:
            stability_shift = abs(_line_fit(np.log(half.s), np.log(half.amplitude), None)[0] - exponent)
            if stability_shift > 0.02:
                warnings.append("exponent shifts by {:.3g} over the last half decade".format(stability_shift))
    centres, spans = extrema.periods()
    omega_eff = (centres, 2.0 * math.pi / (time_scale * spans))
    for message in warnings:
        logger.warning("Decay fit of %s: %s", extrema.signal, message)
    return DecayFit(exponent, math.exp(intercept), (lo, hi), residual, len(selected), omega_eff,
                    time_scale=time_scale, fixed=fixed_exponent is not None, warnings=warnings,
                    stability_shift=stability_shift)


class DecayPrediction(object):
    def __init__(self, N, exponent, coefficient=None, omega=None):
        self.N = N
        self.exponent = exponent
        self.coefficient = coefficient
        self.omega = omega

    def describe(self):
        return {'N': self.N, 'exponent': self.exponent, 'coefficient': self.coefficient, 'omega': self.omega}


def predict_decay(mode, gamma=None):
    """Predicted decay of the internal mode: t^{-1/(2N)}, with Gamma^{-1/2} as coefficient when N = 1."""
    if mode is None:
        return DecayPrediction(None, NO_MODE_EXPONENT)
    N = threshold_index(mode.omega)
    coefficient = None
    if N == 1 and gamma is not None:
        coefficient = gamma.inv_sqrt_gamma
    return DecayPrediction(N, -1.0 / (2.0 * N), coefficient, mode.omega)


def _upward_crossing(centres, omega, threshold, after):
    above = omega >= threshold
    for k in range(len(omega) - 1, 0, -1):
        if centres[k] < after:
            break
        if above[k] and not above[k - 1]:
            if above[k:].all():
                return float(centres[k])
            break
    return None


def threshold_transition_report(record, mode=None, signal='u_probe', time_scale=None, transient=10.0):
    if time_scale is None:
        time_scale = record.metadata.get('config', {}).get('a', 1.0)
    extrema = extract_extrema(record, signal)
    centres, spans = extrema.periods()
    omega = 2.0 * math.pi / (time_scale * spans)
    crossing = _upward_crossing(centres, omega, TRANSITION_THRESHOLD, transient)
    early = late = None
    if crossing is not None:
        start = max(transient, float(extrema.s[0]))
        for name, window in (('early', (start, crossing)), ('late', (crossing, float(extrema.s[-1])))):
            try:
                fit = fit_decay(extrema, window=window, time_scale=time_scale)
            except InsufficientDataError:
                continue
            if name == 'early':
                early = fit.exponent
            else:
                late = fit.exponent
    report = {
        'threshold': TRANSITION_THRESHOLD,
        'crossed': crossing is not None,
        'crossing_s': crossing,
        'early_exponent': early,
        'late_exponent': late,
        'omega': None if mode is None else mode.omega,
        'omega_eff_late': float(omega[-1]) if len(omega) else None,
    }
    logger.info("Threshold transition: %s", report)
    return report


def radiation_fit(record, mode_value_at_probe, window=None, time_scale=1.0):
    """Envelope fit of the radiation proxy u_probe - alpha_proj * v(probe)."""
    s = record.column('s')
    eta = record.column('u_probe') - record.column('alpha_proj') * mode_value_at_probe
    extrema = extrema_from_signal(s, eta, 'eta_proxy')
    return fit_decay(extrema, window=window, time_scale=time_scale)


def analysis_report(record, mode=None, gamma=None, signal=None, window=None):
    """The JSON report and plot-ready tables for one run."""
    config = record.metadata.get('config', {})
    time_scale = config.get('a', 1.0)
    if signal is None:
        alpha = record.column('alpha_proj')
        signal = 'alpha_proj' if mode is not None and np.all(np.isfinite(alpha)) else 'u_probe'
    prediction = predict_decay(mode, gamma)
    extrema = extract_extrema(record, signal)
    fit = fit_decay(extrema, window=window, time_scale=time_scale)
    fits = {signal: fit.describe()}
    if signal != 'u_probe':
        try:
            fits['u_probe'] = fit_decay(extract_extrema(record, 'u_probe'), window=window,
                                        time_scale=time_scale).describe()
        except NumericalError as e:
            logger.warning("No envelope fit for u_probe: %s", e)
    report = {
        'N': prediction.N,
        'predicted_exponent': prediction.exponent,
        'fitted_exponent': fit.exponent,
        'predicted_coeff': prediction.coefficient,
        'fitted_coeff': fit.coefficient,
        'omega': prediction.omega,
        'omega_eff_late': fit.omega_eff_late(),
        'residuals': {name: item['residual'] for name, item in fits.items()},
        'windows': {name: item['window'] for name, item in fits.items()},
        'signal': signal,
        'fits': fits,
        'warnings': list(record.warnings) + fit.warnings,
    }
    if prediction.N == 1 and prediction.coefficient is not None:
        fixed = fit_decay(extrema, window=fit.window, fixed_exponent=prediction.exponent, time_scale=time_scale)
        report['fitted_coeff_fixed_exponent'] = fixed.coefficient
    if mode is not None and mode.values is not None and signal == 'alpha_proj':
        probe_r = time_scale * math.tan(config.get('probe_y', 0.0))
        try:
            radiation = radiation_fit(record, float(mode(probe_r)), window=window, time_scale=time_scale)
            report['radiation_exponent'] = radiation.exponent
        except NumericalError as e:
            logger.warning("No radiation fit: %s", e)
    try:
        report['transition'] = threshold_transition_report(record, mode, signal=signal, time_scale=time_scale)
    except NumericalError as e:
        logger.warning("No threshold transition report: %s", e)
        report['transition'] = None
    plots = {
        'envelope': (('log_s', 'log_amplitude'), list(zip(np.log(extrema.s), np.log(extrema.amplitude)))),
        'omega_eff': (('s', 'omega_eff'), list(zip(*fit.omega_eff))),
    }
    return report, plots
