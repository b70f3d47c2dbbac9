import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from wormhole_tool.exceptions import ConfigurationError, DomainError, NongenericThresholdError
from wormhole_tool.physics.kink import SQRT2, WormholeConfig, solve_kink
from wormhole_tool.physics.spectrum import (ModeData, Potential, build_potential, critical_radius, gamma_coefficient,
                                            gamma_for_mode, gap_eigenvalues, jost_solution,
                                            large_a_eigenvalue_coefficient, sine_gordon_potential,
                                            sine_gordon_zero_mode, threshold_index)

_cache = {}


def spectrum_for(a, n):
    if (a, n) not in _cache:
        kink = solve_kink(WormholeConfig(a, n))
        potential = build_potential(kink)
        _cache[(a, n)] = (kink, potential, gap_eigenvalues(potential))
    return _cache[(a, n)]


def test_potential_at_the_throat():
    _, potential, _ = spectrum_for(1.0, 1)
    assert potential(0.0) == pytest.approx(-3.0, abs=1e-10)
    _, potential, _ = spectrum_for(2.0, 2)
    assert potential(0.0) == pytest.approx(0.25, abs=1e-10)


def test_potential_is_even_and_decays():
    _, potential, _ = spectrum_for(1.0, 1)
    r = np.array([0.3, 1.7, 12.0, 40.0])
    assert np.array_equal(potential(r), potential(-r))
    assert potential(1e3) == pytest.approx(1e-12, rel=1e-3)
    assert potential.minimum() >= -4.0


@pytest.mark.parametrize('a,omega', [(1.0, 1.0682), (2.0, 0.6345), (3.0, 0.4455)])
def test_single_kink_has_one_internal_mode(a, omega):
    _, _, modes = spectrum_for(a, 1)
    assert len(modes) == 1
    assert modes[0].omega == pytest.approx(omega, abs=1e-3)
    assert modes[0].node_count == 0
    assert modes[0].parity == 'even'


def test_mode_quality():
    _, potential, modes = spectrum_for(1.0, 1)
    mode = modes[0]
    assert mode.norm() == pytest.approx(1.0, abs=1e-8)
    assert mode.residual(potential) < 1e-6
    assert mode.expectation(potential) == pytest.approx(mode.omega2, abs=1e-6)
    assert mode(0.0) > 0
    assert not mode.near_threshold


def test_mode_evaluation_from_samples():
    _, _, modes = spectrum_for(1.0, 1)
    mode = modes[0]
    restored = ModeData.from_samples(mode.describe(), mode.grid.points, mode.values)
    assert restored.omega2 == mode.omega2
    assert restored.config == WormholeConfig(1.0, 1)
    assert float(restored(0.37)) == pytest.approx(float(mode(0.37)), abs=1e-12)
    assert abs(float(mode(500.0))) < 1e-20


def test_mode_without_samples_cannot_be_evaluated():
    mode = ModeData.from_row({'omega2': 1.2, 'parity': 'even', 'node_count': 0})
    with pytest.raises(ConfigurationError):
        mode(0.0)


def test_no_negative_eigenvalues():
    _, potential, _ = spectrum_for(1.0, 1)
    assert gap_eigenvalues(potential, omega2_range=(-1.0, 0.0)) == []


def test_no_internal_mode_below_critical_radius():
    _, _, modes = spectrum_for(0.4, 1)
    assert modes == []


def test_double_kink_has_two_internal_modes():
    _, _, modes = spectrum_for(2.0, 2)
    assert [mode.node_count for mode in modes] == [0, 1]
    assert [mode.parity for mode in modes] == ['even', 'odd']
    assert modes[0].omega2 < modes[1].omega2 < 2.0


def test_large_throat_eigenvalue():
    _, _, modes = spectrum_for(10.0, 1)
    assert len(modes) == 1
    assert modes[0].omega2 * 100.0 == pytest.approx(2.0, abs=0.1)
    assert large_a_eigenvalue_coefficient() == pytest.approx(2.0, abs=1e-5)


def test_sine_gordon_limit_has_a_zero_mode():
    potential = Potential.from_function(sine_gordon_potential)
    modes = gap_eigenvalues(potential, omega2_range=(-0.5, 1.9))
    assert len(modes) == 1
    mode = modes[0]
    assert mode.omega2 == pytest.approx(0.0, abs=1e-8)
    assert np.max(np.abs(mode.values - sine_gordon_zero_mode(mode.grid.points))) < 1e-6


def test_near_threshold_mode_is_normalised_over_its_whole_tail():
    # -l(l+1) sech^2 binds sech^l with kappa = l; the decay length 1/kappa = 100 outgrows the sample grid.
    depth = 0.01
    potential = Potential.from_function(lambda r: -depth * (depth + 1.0) / np.cosh(r) ** 2)
    modes = gap_eigenvalues(potential)
    assert len(modes) == 1
    mode = modes[0]
    assert mode.kappa == pytest.approx(depth, rel=1e-4)
    assert mode.grid.upper * mode.kappa < 3.0
    assert mode.tail_norm() > 1e-3
    assert mode.norm() == pytest.approx(1.0, abs=1e-8)
    expected = math.sqrt(math.gamma(depth + 0.5) / (math.sqrt(math.pi) * math.gamma(depth)))
    assert float(mode(0.0)) == pytest.approx(expected, rel=1e-3)


def test_empty_eigenvalue_range_is_rejected():
    potential = Potential.from_function(sine_gordon_potential)
    with pytest.raises(ConfigurationError):
        gap_eigenvalues(potential, omega2_range=(1.0, 1.0))


def test_free_jost_solution():
    potential = Potential.from_function(np.zeros_like)
    xi = 1.3
    jost = jost_solution(potential, xi)
    r = np.linspace(-50.0, 50.0, 201)
    assert np.max(np.abs(jost(r) - np.exp(1j * xi * r))) < 1e-10
    assert np.max(np.abs(np.conj(jost(r)) - jost.left(r))) < 1e-10
    scattering = jost.scattering()
    assert abs(scattering.transmission - 1.0) < 1e-10
    assert abs(scattering.reflection) < 1e-10


def test_jost_wronskian_is_constant():
    _, potential, modes = spectrum_for(1.0, 1)
    xi = math.sqrt(4.0 * modes[0].omega2 - 2.0)
    jost = jost_solution(potential, xi)
    r = np.linspace(-50.0, 50.0, 101)
    assert np.max(np.abs(jost.wronskian(r) / (-2j * xi) - 1.0)) < 1e-8


def test_wormhole_potential_reflects_so_conjugate_is_not_the_mirror_image():
    _, potential, modes = spectrum_for(1.0, 1)
    jost = jost_solution(potential, math.sqrt(4.0 * modes[0].omega2 - 2.0))
    scattering = jost.scattering()
    assert scattering.reflected == pytest.approx(0.0475, abs=1e-3)
    assert scattering.transmitted + scattering.reflected == pytest.approx(1.0, abs=1e-8)
    r = np.linspace(-50.0, 50.0, 201)
    assert np.max(np.abs(np.conj(jost(r)) - jost.left(r))) > 0.1
    # The mirror image is still a solution: its Wronskian with k is -2i xi / T.
    mirror = jost.left(r)
    dmirror = -jost.derivative(-r)
    wronskian = jost(r) * dmirror - jost.derivative(r) * mirror
    assert np.max(np.abs(wronskian * scattering.transmission / (-2j * jost.xi) - 1.0)) < 1e-6


def test_jost_solution_needs_positive_momentum():
    with pytest.raises(DomainError):
        jost_solution(Potential.from_function(np.zeros_like), 0.0)


def test_damping_coefficient():
    kink, _, modes = spectrum_for(1.0, 1)
    result = gamma_for_mode(kink, modes[0])
    assert result.gamma > 0
    assert result.xi == pytest.approx(math.sqrt(4.0 * modes[0].omega2 - 2.0))
    assert result.inv_sqrt_gamma == pytest.approx(3.403, abs=0.01)
    summary = result.describe(a=1.0)
    assert summary['inv_sqrt_gamma'] == result.inv_sqrt_gamma
    assert summary['transmitted'] == pytest.approx(0.9525, abs=1e-3)


def test_resolvent_damping_carries_the_transmission_factor():
    kink, _, modes = spectrum_for(1.0, 1)
    result = gamma_for_mode(kink, modes[0])
    assert result.gamma_resolvent == pytest.approx(result.scattering.transmitted * result.gamma, rel=1e-3)
    assert result.gamma_resolvent ** -0.5 == pytest.approx(3.487, abs=0.01)


def test_resolvent_damping_matches_closed_form_without_reflection():
    # Pure Poeschl-Teller wells are reflectionless.
    potential = Potential.from_function(lambda r: -6.0 / np.cosh(r) ** 2)
    modes = gap_eigenvalues(potential, omega2_range=(-3.0, 1.9), parity_scan=('odd',))
    assert len(modes) == 1
    mode = modes[0]
    assert mode.omega2 == pytest.approx(1.0, abs=1e-8)
    kink = solve_kink(WormholeConfig(1.0, 1))
    jost = jost_solution(potential, math.sqrt(4.0 * mode.omega2 - 2.0))
    assert jost.scattering().reflected < 1e-8
    result = gamma_coefficient(kink, mode, jost)
    assert result.gamma_resolvent == pytest.approx(result.gamma, rel=1e-3)


def test_damping_coefficient_ignores_eigenfunction_sign():
    kink, potential, modes = spectrum_for(1.0, 1)
    mode = modes[0]
    jost = jost_solution(potential, math.sqrt(4.0 * mode.omega2 - 2.0))
    flipped = ModeData(mode.omega2, mode.parity, mode.node_count, grid=mode.grid, values=-mode.values,
                       config=mode.config)
    assert gamma_coefficient(kink, flipped, jost).gamma == pytest.approx(gamma_coefficient(kink, mode, jost).gamma,
                                                                         rel=1e-10)


def test_damping_coefficient_needs_resonant_radiation():
    kink, _, modes = spectrum_for(2.0, 1)
    with pytest.raises(DomainError):
        gamma_for_mode(kink, modes[0])


@pytest.mark.slow
def test_damping_coefficient_is_insensitive_to_outer_radius():
    kink, _, modes = spectrum_for(1.0, 1)
    near = gamma_for_mode(kink, modes[0], radius=200.0)
    far = gamma_for_mode(kink, modes[0], radius=400.0)
    assert far.gamma == pytest.approx(near.gamma, rel=1e-6)


@pytest.mark.parametrize('omega,expected', [(1.0682, 1), (0.6345, 2), (0.4455, 3), (0.7422, 1)])
def test_threshold_index(omega, expected):
    assert threshold_index(omega) == expected


def test_threshold_index_rejects_nongeneric_and_out_of_gap_frequencies():
    with pytest.raises(NongenericThresholdError):
        threshold_index(SQRT2 / 2.0)
    with pytest.raises(DomainError):
        threshold_index(1.5)


@given(st.floats(min_value=0.05, max_value=1.414))
@settings(max_examples=200)
def test_threshold_index_brackets_the_continuum(omega):
    ratio = SQRT2 / omega
    assume(abs(ratio - round(ratio)) > 1e-9 * ratio)
    N = threshold_index(omega)
    assert N >= 1
    assert (N * omega) ** 2 < 2.0 < ((N + 1) * omega) ** 2


@pytest.mark.slow
def test_critical_radius_of_single_kink():
    assert critical_radius(1, 0, (0.4, 0.7)) == pytest.approx(0.536, abs=0.002)


@pytest.mark.slow
def test_critical_radii_of_double_kink_are_ordered():
    first = critical_radius(2, 0, (0.3, 0.6))
    second = critical_radius(2, 1, (0.6, 1.0))
    assert first == pytest.approx(0.39, abs=0.01)
    assert second == pytest.approx(0.81, abs=0.01)
    assert first < second


def test_critical_radius_rejects_bad_brackets():
    with pytest.raises(ConfigurationError):
        critical_radius(1, 0, (0.7, 0.4))
