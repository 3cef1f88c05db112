import math

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings as hyp_settings, strategies as st
from scipy import special

from casimir.errors import BesselOverflowError, DomainError, UnsupportedOrderError
from casimir.specfun import (
    angular_function_arrays,
    angular_functions,
    bernoulli_poly,
    bessel_half_integer,
    bessel_half_integer_table,
    bessel_k2,
    jonquiere,
    li0_exp,
    log_angular_functions,
    polylog,
    polylog_exp,
    polylog_imag,
)


def test_dilogarithm_at_one_is_zeta_two():
    assert polylog(2, 1.0) == pytest.approx(math.pi**2 / 6.0, abs=1e-14)


def test_dilogarithm_on_unit_circle_at_quarter_turn():
    assert polylog(2, 1.0, 0.5 * math.pi) == pytest.approx(-(math.pi**2) / 48.0, abs=1e-13)


def test_trilogarithm_at_one_half_matches_direct_sum():
    direct = math.fsum(0.5**m / m**3 for m in range(1, 80))
    assert polylog(3, 0.5) == pytest.approx(direct, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("w", [0.05, 0.5, 0.74, 0.76, 0.9, 0.999, 0.99999])
@pytest.mark.parametrize("phase", [0.3, 1.1, 2.5, -2.0])
def test_polylog_matches_mpmath(n, w, phase):
    z = mpmath.mpc(w) * mpmath.expj(phase)
    expected = complex(mpmath.polylog(n, z))
    assert polylog(n, w, phase) == pytest.approx(expected.real, abs=1e-13)
    assert polylog_imag(n, w, phase) == pytest.approx(expected.imag, abs=1e-13)


def test_polylog_negative_modulus_shifts_phase():
    assert polylog(2, -0.5) == pytest.approx(float(mpmath.polylog(2, -0.5)), abs=1e-15)


def test_polylog_zero_modulus_is_zero():
    assert polylog(3, 0.0, 1.0) == 0.0


def test_polylog_accepts_arrays():
    w = np.array([0.1, 0.8, 1.0])
    values = polylog(2, w)
    assert values.shape == (3,)
    assert values[2] == pytest.approx(math.pi**2 / 6.0, abs=1e-14)


def test_polylog_exp_keeps_precision_near_unit_circle():
    a = 1e-20
    value = polylog_exp(2, a, 0.0)
    # Li_2(e^-a) = zeta(2) - a (1 - log a) + O(a^2)
    assert value.real == pytest.approx(math.pi**2 / 6.0 - a * (1.0 - math.log(a)), abs=1e-15)


def test_polylog_rejects_modulus_above_one():
    with pytest.raises(DomainError):
        polylog(2, 1.5)
    with pytest.raises(DomainError):
        polylog_exp(2, -0.1)


def test_polylog_rejects_order_zero_and_branch_point():
    with pytest.raises(UnsupportedOrderError):
        polylog(0, 0.5)
    with pytest.raises(DomainError):
        polylog(1, 1.0, 0.0)


def test_order_one_is_minus_log():
    assert polylog(1, 0.5) == pytest.approx(math.log(2.0), abs=1e-15)


def test_order_zero_member():
    a, phase = 0.4, 0.7
    lam = complex(math.exp(-a) * math.cos(phase), math.exp(-a) * math.sin(phase))
    assert li0_exp(a, phase) == pytest.approx((lam / (1.0 - lam)).real, rel=1e-14)
    with pytest.raises(DomainError):
        li0_exp(0.0, 1.0)


@hyp_settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
def test_jonquiere_relation(z):
    phase = 2.0 * math.pi * z
    assert 2.0 * polylog(2, 1.0, phase) == pytest.approx(jonquiere(2, z).real, abs=1e-12)
    assert 2.0 * polylog_imag(3, 1.0, phase) == pytest.approx(jonquiere(3, z).imag, abs=1e-12)


def test_jonquiere_rejects_outside_unit_interval():
    with pytest.raises(DomainError):
        jonquiere(2, 1.5)


@pytest.mark.parametrize(
    ("n", "z", "expected"),
    [(2, 0.0, 1.0 / 6.0), (2, 0.5, -1.0 / 12.0), (4, 0.0, -1.0 / 30.0), (1, 0.25, -0.25), (3, 0.5, 0.0)],
)
def test_bernoulli_values(n, z, expected):
    assert bernoulli_poly(n, z) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bernoulli_matches_sympy(n):
    x = sympy.Symbol("x")
    poly = sympy.bernoulli(n, x)
    for z in (0.1, 0.37, 0.8):
        assert bernoulli_poly(n, z) == pytest.approx(float(poly.subs(x, z)), abs=1e-14)


def test_bernoulli_rejects_unsupported_order():
    with pytest.raises(UnsupportedOrderError):
        bernoulli_poly(5, 0.2)


def test_bessel_k2_small_argument_limit():
    z = 1e-6
    assert z * z * bessel_k2(z) / 2.0 == pytest.approx(1.0, rel=1e-10)


def test_bessel_k2_against_integral_representation():
    expected = float(mpmath.quad(lambda t: mpmath.exp(-mpmath.cosh(t)) * mpmath.cosh(2 * t), [0, 2, 4, 8]))
    assert bessel_k2(1.0) == pytest.approx(expected, rel=1e-12)


def test_bessel_k2_large_argument_asymptotics():
    z = 400.0
    scaled = bessel_k2(z) * math.exp(z) * math.sqrt(2.0 * z / math.pi)
    assert scaled == pytest.approx(1.0 + 15.0 / (8.0 * z), abs=5.0 / z**2)


def test_bessel_k2_recurrence():
    z = np.linspace(0.05, 30.0, 40)
    assert np.allclose(bessel_k2(z), special.kv(0, z) + (2.0 / z) * special.kv(1, z), rtol=1e-12, atol=0.0)


def test_bessel_k2_rejects_nonpositive():
    with pytest.raises(DomainError):
        bessel_k2(0.0)


def test_half_integer_bessel_closed_forms():
    assert bessel_half_integer("first", 0, 1.0) == pytest.approx(math.sinh(1.0), rel=1e-14)
    assert bessel_half_integer("second", 0, 2.0) == pytest.approx(0.25 * math.pi * math.exp(-2.0), rel=1e-14)


def test_half_integer_bessel_order_five_against_power_series():
    x = mpmath.mpf(10)
    series = mpmath.nsum(
        lambda k: (x**2 / 2) ** k / (mpmath.factorial(k) * mpmath.fac2(2 * k + 11)),
        [0, mpmath.inf],
    )
    expected = float(x**5 * series)
    assert bessel_half_integer("first", 5, 10.0) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("x", [0.1, 1.0, 7.5, 50.0])
def test_half_integer_wronskian(x):
    table = bessel_half_integer_table(41, x)
    i = np.exp(table.log_i)
    k = np.exp(table.log_k)
    lhs = i[:-1] * k[1:] + i[1:] * k[:-1]
    assert np.allclose(lhs, math.pi / (2.0 * x * x), rtol=1e-10, atol=0.0)


def test_half_integer_table_matches_direct_values():
    table = bessel_half_integer_table(12, 3.0)
    for ell in range(13):
        assert math.exp(table.log_i[ell]) == pytest.approx(bessel_half_integer("first", ell, 3.0), rel=1e-10)
        assert math.exp(table.log_k[ell]) == pytest.approx(bessel_half_integer("second", ell, 3.0), rel=1e-10)
    assert table.ell_max == 12
    assert math.isnan(table.ratio_i[0])


def test_half_integer_table_survives_large_size_parameter():
    table = bessel_half_integer_table(20, 1e4)
    assert np.all(np.isfinite(table.log_i))
    assert np.all(np.isfinite(table.log_k))


def test_half_integer_bessel_signals_overflow():
    with pytest.raises(BesselOverflowError):
        bessel_half_integer("first", 3, 1000.0)
    with pytest.raises(BesselOverflowError):
        bessel_half_integer("second", 0, 1000.0)


def test_half_integer_bessel_rejects_bad_arguments():
    with pytest.raises(DomainError):
        bessel_half_integer("first", 1, 0.0)
    with pytest.raises(DomainError):
        bessel_half_integer("third", 1, 1.0)


@pytest.mark.parametrize("mu", [-7.0, -1.0, 0.0, 0.4])
def test_first_angular_functions_are_exact(mu):
    first = angular_functions(1, mu)[0]
    assert first.order == 1
    assert first.pi_l == 1.0
    assert first.tau_l == mu


def test_second_order_angular_functions_at_mu_minus_three():
    second = angular_functions(2, -3.0)[1]
    assert second.pi_l == pytest.approx(-9.0)
    assert second.tau_l == pytest.approx(51.0)


def test_angular_functions_match_exact_legendre_derivatives():
    x = sympy.Symbol("x")
    for mu in (sympy.Rational(-5), sympy.Rational(-3, 2), sympy.Rational(-1), sympy.Rational(1, 3), sympy.Rational(1)):
        pis, taus = angular_function_arrays(10, float(mu))
        for ell in range(1, 11):
            pi_exact = sympy.diff(sympy.legendre(ell, x), x)
            pi_prev = sympy.diff(sympy.legendre(ell - 1, x), x)
            tau_exact = ell * x * pi_exact - (ell + 1) * pi_prev
            assert pis[ell] == pytest.approx(float(pi_exact.subs(x, mu)), rel=1e-12, abs=1e-12)
            assert taus[ell] == pytest.approx(float(tau_exact.subs(x, mu)), rel=1e-12, abs=1e-12)


def test_log_angular_functions_agree_with_direct_recurrence():
    mu = -1.8
    pis, taus = angular_function_arrays(15, mu)
    table = log_angular_functions(15, mu)
    for ell in range(1, 16):
        p = (-1) ** (ell + 1) * pis[ell]
        assert math.exp(table.log_p[ell]) == pytest.approx(p, rel=1e-12)
        assert (-1) ** ell * p * table.bracket[ell] == pytest.approx(taus[ell], rel=1e-12)


def test_log_angular_functions_require_backward_direction():
    with pytest.raises(DomainError):
        log_angular_functions(5, -0.5)
