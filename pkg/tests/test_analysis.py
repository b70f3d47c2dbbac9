import math

import numpy as np
import pytest

from wormhole_tool.exceptions import InsufficientDataError
from wormhole_tool.physics.analysis import (ExtremaSeries, analysis_report, default_window, extract_extrema,
                                            extrema_from_signal, fit_decay, predict_decay,
                                            threshold_transition_report)
from wormhole_tool.physics.evolve import RunRecord
from wormhole_tool.physics.spectrum import GammaResult, ModeData


def synthetic_record(s, signal, a=1.0):
    record = RunRecord({'config': {'a': a, 'probe_y': 0.0}})
    for time, value in zip(s, signal):
        record.append(time, 0.0, value, value, 0.0, 1)
    return record


def mode_with(omega):
    return ModeData.from_row({'omega2': omega ** 2, 'parity': 'even', 'node_count': 0})


def test_extrema_of_a_cosine():
    s = np.linspace(0.0, 200.0, 20001)
    extrema = extrema_from_signal(s, np.cos(s))
    assert len(extrema) == 63
    assert extrema.period() == pytest.approx(2.0 * math.pi, abs=1e-4)
    assert np.allclose(extrema.amplitude, 1.0, atol=1e-6)
    assert set(extrema.sign) == {-1, 1}


def test_monotone_signal_has_no_extrema():
    s = np.linspace(0.0, 50.0, 501)
    with pytest.raises(InsufficientDataError):
        extrema_from_signal(s, np.exp(-s))


def test_non_finite_samples_are_skipped():
    s = np.linspace(0.0, 100.0, 10001)
    x = np.cos(s)
    x[:50] = np.nan
    assert len(extrema_from_signal(s, x)) == 31


@pytest.mark.parametrize('coefficient', [1.0, 2.79])
def test_fit_recovers_power_law(coefficient):
    s = np.linspace(1.0, 2000.0, 199901)
    extrema = extrema_from_signal(s, coefficient * s ** -0.5 * np.cos(s))
    fit = fit_decay(extrema)
    assert fit.exponent == pytest.approx(-0.5, abs=0.002)
    assert fit.coefficient == pytest.approx(coefficient, abs=0.01)
    assert fit.window[0] == pytest.approx(200.0, abs=1.0)
    assert fit.stability_shift < 0.02
    assert not fit.warnings


def test_fit_converts_coefficient_to_physical_time():
    s = np.linspace(1.0, 1000.0, 99901)
    extrema = extrema_from_signal(s, s ** -0.5 * np.cos(s))
    fit = fit_decay(extrema, time_scale=2.0)
    assert fit.coefficient == pytest.approx(fit.coefficient_s * 2.0 ** -fit.exponent)
    assert fit.exponent == pytest.approx(-0.5, abs=1e-3)
    assert fit.omega_eff_late() == pytest.approx(0.5, abs=1e-3)


def test_fixed_exponent_fit():
    s = np.linspace(1.0, 1000.0, 99901)
    extrema = extrema_from_signal(s, 3.0 * s ** -1.5 * np.cos(s))
    fit = fit_decay(extrema, window=(100.0, 1000.0), fixed_exponent=-1.5)
    assert fit.fixed
    assert fit.exponent == -1.5
    assert fit.coefficient == pytest.approx(3.0, rel=1e-3)


def test_narrow_window_is_flagged():
    s = np.linspace(1.0, 400.0, 39901)
    extrema = extrema_from_signal(s, s ** -0.5 * np.cos(s))
    fit = fit_decay(extrema, window=(100.0, 200.0))
    assert any('half a decade' in message for message in fit.warnings)
    assert fit.describe()['window'] == [100.0, 200.0]


def test_window_with_too_few_extrema():
    s = np.linspace(0.0, 100.0, 10001)
    extrema = extrema_from_signal(s, np.cos(s))
    with pytest.raises(InsufficientDataError):
        fit_decay(extrema, window=(50.0, 55.0))
    with pytest.raises(InsufficientDataError):
        fit_decay(extrema, window=(60.0, 50.0))


def test_default_window_widens_for_short_records():
    s = 2.0 * np.arange(1, 31)
    extrema = ExtremaSeries(s, np.ones(30), (-1) ** np.arange(30), 'u_probe')
    assert default_window(extrema) == (22.0, 60.0)
    s = np.arange(1.0, 1001.0)
    extrema = ExtremaSeries(s, np.ones(1000), (-1) ** np.arange(1000), 'u_probe')
    assert default_window(extrema) == (100.0, 1000.0)


def test_predicted_decay_without_internal_mode():
    prediction = predict_decay(None)
    assert prediction.N is None
    assert prediction.exponent == -1.5


@pytest.mark.parametrize('omega,N,exponent', [(1.0682, 1, -0.5), (0.6345, 2, -0.25), (0.4455, 3, -1.0 / 6.0)])
def test_predicted_decay_follows_threshold_index(omega, N, exponent):
    prediction = predict_decay(mode_with(omega))
    assert prediction.N == N
    assert prediction.exponent == pytest.approx(exponent)
    assert prediction.coefficient is None


def test_predicted_coefficient_comes_from_damping_rate():
    gamma = GammaResult(1.0682, math.sqrt(4 * 1.0682 ** 2 - 2), complex(0.1, 0.2), 2.79 ** -2)
    prediction = predict_decay(mode_with(1.0682), gamma)
    assert prediction.coefficient == pytest.approx(2.79)
    assert predict_decay(mode_with(0.6345), gamma).coefficient is None


def test_threshold_crossing_is_located():
    s = np.linspace(0.0, 600.0, 60001)
    omega = 0.6 + 0.2 * np.tanh((s - 300.0) / 50.0)
    phase = np.concatenate([[0.0], np.cumsum(0.5 * (omega[1:] + omega[:-1]) * np.diff(s))])
    record = synthetic_record(s, (1.0 + s) ** -0.5 * np.cos(phase))
    report = threshold_transition_report(record, signal='u_probe')
    assert report['crossed']
    assert 280.0 < report['crossing_s'] < 380.0
    assert report['omega_eff_late'] == pytest.approx(0.8, abs=0.01)


def test_no_crossing_above_threshold():
    s = np.linspace(0.0, 300.0, 30001)
    record = synthetic_record(s, np.cos(1.0682 * s))
    report = threshold_transition_report(record, mode=mode_with(1.0682), signal='u_probe')
    assert not report['crossed']
    assert report['crossing_s'] is None
    assert report['omega'] == pytest.approx(1.0682)


def test_extract_extrema_honours_window():
    s = np.linspace(0.0, 200.0, 20001)
    record = synthetic_record(s, np.cos(s))
    extrema = extract_extrema(record, 'u_probe', window=(100.0, 200.0))
    assert extrema.s[0] >= 100.0


def test_analysis_report_on_resonant_decay():
    s = np.linspace(0.0, 3000.0, 60001)
    signal = 2.79 * np.maximum(s, 1.0) ** -0.5 * np.cos(1.0682 * s)
    record = synthetic_record(s, signal)
    mode = mode_with(1.0682)
    gamma = GammaResult(1.0682, math.sqrt(4 * 1.0682 ** 2 - 2), complex(0.1, 0.2), 2.79 ** -2)
    report, plots = analysis_report(record, mode=mode, gamma=gamma)
    assert report['signal'] == 'alpha_proj'
    assert report['N'] == 1
    assert report['predicted_exponent'] == -0.5
    assert report['fitted_exponent'] == pytest.approx(-0.5, abs=0.002)
    assert report['fitted_coeff'] == pytest.approx(2.79, abs=0.01)
    assert report['fitted_coeff_fixed_exponent'] == pytest.approx(2.79, abs=0.01)
    assert report['omega_eff_late'] == pytest.approx(1.0682, abs=1e-3)
    assert set(report['fits']) == {'alpha_proj', 'u_probe'}
    assert set(plots) == {'envelope', 'omega_eff'}
    header, rows = plots['envelope']
    assert header == ('log_s', 'log_amplitude')
    assert len(rows) > 100


def test_analysis_report_without_mode_fits_the_pointwise_amplitude():
    s = np.linspace(1.0, 1000.0, 20001)
    record = synthetic_record(s, s ** -1.5 * np.cos(1.2 * s))
    report, _ = analysis_report(record)
    assert report['signal'] == 'u_probe'
    assert report['predicted_exponent'] == -1.5
    assert report['fitted_exponent'] == pytest.approx(-1.5, abs=0.005)
