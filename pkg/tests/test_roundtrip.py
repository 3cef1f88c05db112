import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings as hyp_settings, strategies as st

from casimir.errors import DomainError
from casimir.materials import Pemc, PerfectConductor, ReflectionMatrix, plane_reflection_pemc
from casimir.oracle import roundtrip_suite
from casimir.roundtrip import (
    SingleRoundTrip,
    alpha_coefficients,
    brute_force_roundtrips,
    diffractive_trace,
    generating_function_series,
    h_coefficients,
    p_function,
    roundtrip_tail_bound,
    single_roundtrip,
    sphere_roundtrip,
)
from casimir.spherescatter import ScatteringKinematics

PEC = plane_reflection_pemc(0.0)


def _pemc_roundtrip(delta: float, kappa_l: float) -> SingleRoundTrip:
    return single_roundtrip(PEC, plane_reflection_pemc(delta), kappa_l)


def test_leading_matrices_for_special_pairs():
    w = math.exp(-1.0)

    assert np.allclose(_pemc_roundtrip(0.0, 0.5).a, w * np.eye(2))
    assert np.allclose(_pemc_roundtrip(0.5 * math.pi, 0.5).a, -w * np.eye(2), atol=1e-15)
    assert np.trace(_pemc_roundtrip(0.4, 0.5).a) == pytest.approx(2.0 * math.cos(0.8) * w)


def test_p_function_for_conductors_and_boyer():
    w = math.exp(-0.6)

    assert p_function(_pemc_roundtrip(0.0, 0.3)) == pytest.approx(-2.0 * math.log(1.0 - w), rel=1e-14)
    boyer = p_function(_pemc_roundtrip(0.5 * math.pi, 0.3))
    assert boyer == pytest.approx(-2.0 * math.log(1.0 + w), rel=1e-12)
    assert boyer < 0.0


@pytest.mark.parametrize("delta", np.linspace(0.0, 0.5 * math.pi, 7))
@pytest.mark.parametrize("kappa_l", [1e-6, 0.01, 0.2, 1.0, 5.0])
def test_p_function_matches_pemc_closed_form(delta, kappa_l):
    w = math.exp(-2.0 * kappa_l)

    one_minus_w = -math.expm1(-2.0 * kappa_l)
    expected = -math.log(one_minus_w**2 + 4.0 * w * math.sin(delta) ** 2)

    # rounding of w is amplified by 1 / (2 kappa L) in 1 - lambda
    rtol = max(1e-13, 1e-16 / kappa_l)
    assert p_function(_pemc_roundtrip(delta, kappa_l)) == pytest.approx(expected, rel=rtol, abs=1e-14)


def test_p_function_rejects_non_contracting_roundtrip():
    srt = SingleRoundTrip(np.eye(2), np.zeros((2, 2)), 1.0, PEC, PEC)

    with pytest.raises(DomainError):
        p_function(srt)


def test_single_roundtrip_rejects_bad_input():
    with pytest.raises(DomainError):
        single_roundtrip(PEC, PEC, 0.0)
    with pytest.raises(DomainError):
        single_roundtrip(PEC, PEC, 1.0, radius1=-1.0)


@pytest.mark.parametrize("delta", [0.0, 0.3, 0.25 * math.pi, 1.2])
def test_pemc_alpha_identity(delta):
    kin = ScatteringKinematics(1.7)
    radii = (2.0, 5.0)

    srt = sphere_roundtrip(PerfectConductor(), Pemc(delta), kin, 0.4, *radii)
    alpha0, alpha1 = alpha_coefficients(srt).normalized

    inverse_r_eff = 1.0 / radii[0] + 1.0 / radii[1]
    assert alpha1 == pytest.approx(kin.t * inverse_r_eff, rel=1e-13)
    assert alpha0 == pytest.approx(-math.cos(2.0 * delta) * alpha1, abs=1e-14)


def test_diffractive_trace_at_quarter_turn():
    kin = ScatteringKinematics(1.3)
    srt = sphere_roundtrip(PerfectConductor(), Pemc(0.25 * math.pi), kin, 0.2, 3.0, 3.0)
    alphas = alpha_coefficients(srt)

    assert alphas.alpha0 == pytest.approx(0.0, abs=1e-15)
    assert diffractive_trace(srt) == pytest.approx(alphas.alpha1 / (1.0 + srt.weight**2), rel=1e-13)


def test_diffractive_trace_matches_matrix_inverse():
    kin = ScatteringKinematics(2.2)
    srt = sphere_roundtrip(Pemc(0.1), Pemc(0.9), kin, 0.15, 4.0, 7.0)

    expected = np.trace(np.linalg.solve(np.eye(2) - srt.a, srt.a1))

    assert diffractive_trace(srt) == pytest.approx(expected, rel=1e-12)
    assert p_function(srt, 0.01) == pytest.approx(p_function(srt) + 0.01 * expected, rel=1e-13)


def test_plane_sphere_has_one_diffracting_surface():
    kin = ScatteringKinematics(1.5)
    srt = sphere_roundtrip(PerfectConductor(), PerfectConductor(), kin, 0.3, math.inf, 2.0)

    s = 1.5
    expected = math.exp(-0.6) * np.diag([-1.0 / (2.0 * s**3), (1.0 - 2.0 * s * s) / (2.0 * s**3)]) / 2.0
    assert np.allclose(srt.a1, expected, rtol=1e-14, atol=0.0)


def test_first_two_roundtrips_for_pemc():
    delta, kappa_l = 0.35, 0.25
    w = math.exp(-2.0 * kappa_l)
    srt = _pemc_roundtrip(delta, kappa_l)

    assert brute_force_roundtrips(srt, 1) == pytest.approx(2.0 * w * math.cos(2.0 * delta))
    expected = 2.0 * w * math.cos(2.0 * delta) + w * w * math.cos(4.0 * delta)
    assert brute_force_roundtrips(srt, 2) == pytest.approx(expected, rel=1e-14)
    assert brute_force_roundtrips(srt, 2, method="matrix_power") == pytest.approx(expected, rel=1e-14)


_entries = st.floats(min_value=-0.5, max_value=0.5, allow_nan=False)


@hyp_settings(max_examples=25, deadline=None)
@given(
    st.lists(_entries, min_size=4, max_size=4),
    st.lists(_entries, min_size=4, max_size=4),
    st.floats(min_value=0.01, max_value=2.0),
)
def test_path_enumeration_equals_matrix_powers(e1, e2, kappa_l):
    srt = single_roundtrip(
        ReflectionMatrix(np.reshape(e1, (2, 2))), ReflectionMatrix(np.reshape(e2, (2, 2))), kappa_l
    )

    enumerated = brute_force_roundtrips(srt, 5, method="enumerate")
    powered = brute_force_roundtrips(srt, 5, method="matrix_power")

    assert enumerated == pytest.approx(powered, abs=1e-12)


def test_brute_force_limits():
    srt = _pemc_roundtrip(0.2, 0.5)

    with pytest.raises(DomainError):
        brute_force_roundtrips(srt, 6, method="enumerate")
    with pytest.raises(DomainError):
        brute_force_roundtrips(srt, 31, method="matrix_power")
    with pytest.raises(DomainError):
        brute_force_roundtrips(srt, 3, method="recursion")


def test_truncated_series_respects_tail_bound():
    srt = _pemc_roundtrip(0.7, 0.2)
    radius = srt.spectral_radius

    truncated = brute_force_roundtrips(srt, 30, method="matrix_power")

    assert abs(p_function(srt) - truncated) <= roundtrip_tail_bound(radius, 30)


def test_tail_bound_domain():
    with pytest.raises(DomainError):
        roundtrip_tail_bound(1.0, 5)


def test_roundtrip_oracle_suite_passes():
    result = roundtrip_suite(samples=20)

    assert result.passed, result.measured


def test_generating_function_reproduces_h_coefficients():
    exact = sympy.Matrix([[sympy.Rational(1, 3), sympy.Rational(-1, 4)], [sympy.Rational(1, 5), sympy.Rational(1, 2)]])
    a = np.array(exact.tolist(), dtype=float)
    srt = SingleRoundTrip(a, np.zeros((2, 2)), 1.0, PEC, PEC)

    series = generating_function_series(exact, 5)
    numeric = h_coefficients(srt, 5)

    for r, coefficient in enumerate(series, start=1):
        assert coefficient == exact**r
        assert np.allclose(np.array(coefficient.tolist(), dtype=float), numeric[r - 1], rtol=1e-14, atol=0.0)


def test_h_coefficients_need_positive_order():
    with pytest.raises(DomainError):
        h_coefficients(_pemc_roundtrip(0.1, 0.1), 0)
