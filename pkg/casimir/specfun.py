"""Special functions used throughout the library.

Polylogarithms on and inside the unit circle, Bernoulli polynomials of low
order, modified Bessel functions (K_2 and the half-integer families i_l, k_l)
and the Mie angular functions pi_l, tau_l.

Everything here is a pure function of its arguments; numpy arrays are
accepted wherever a real argument is.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import logging
import math
from typing import Literal

import mpmath
import numpy as np
from scipy import special

from casimir.errors import BesselOverflowError, DomainError, UnsupportedOrderError
from config.settings import NumericsSettings, resolve

log = logging.getLogger(__name__)

_UNIT_CIRCLE_TERMS = 64
_SERIES_EPS = 1e-17
_EXP_OVERFLOW = 700.0

# ascending coefficients of B_1 ... B_4
_BERNOULLI = {
    1: (-0.5, 1.0),
    2: (1.0 / 6.0, -1.0, 1.0),
    3: (0.0, 0.5, -1.5, 1.0),
    4: (-1.0 / 30.0, 0.0, 1.0, -2.0, 1.0),
}


@dataclass(frozen=True)
class AngularFunctionPair:
    """Mie angular functions at one order: pi_l = P_l'(mu), tau_l."""

    order: int
    mu: float
    pi_l: float
    tau_l: float


@dataclass(frozen=True)
class HalfIntegerBesselTable:
    """Log-scaled modified spherical Bessel functions for l = 0..l_max.

    ``ratio_i[l] = i_l / i_{l-1}`` and ``ratio_k[l] = k_l / k_{l-1}``;
    index 0 of the ratio arrays is NaN.
    """

    x: float
    log_i: np.ndarray
    log_k: np.ndarray
    ratio_i: np.ndarray
    ratio_k: np.ndarray

    @property
    def ell_max(self) -> int:
        return self.log_i.size - 1


@dataclass(frozen=True)
class LogAngularTable:
    """Angular functions for mu <= -1 in log form.

    With ``p_l = (-1)**(l+1) pi_l > 0`` the table stores ``log_p[l]`` and
    ``bracket[l] = l|mu| - (l+1) p_{l-1}/p_l > 0`` so that
    ``tau_l = (-1)**l p_l bracket[l]``. Index 0 is unused.
    """

    mu: float
    log_p: np.ndarray
    bracket: np.ndarray


def _check_order(n: int) -> None:
    if int(n) != n or n < 1:
        raise UnsupportedOrderError(f"polylogarithm order must be an integer >= 1, got {n}")


@lru_cache(maxsize=16)
def _unit_circle_coefficients(n: int) -> np.ndarray:
    # Li_n(e^mu) = sum_k c_k mu^k - mu^(n-1)/(n-1)! log(-mu), |mu| < 2 pi;
    # c_k = zeta(n-k)/k! except c_{n-1} = H_{n-1}/(n-1)!
    coeffs = np.empty(_UNIT_CIRCLE_TERMS)
    for k in range(_UNIT_CIRCLE_TERMS):
        if k == n - 1:
            coeffs[k] = float(mpmath.harmonic(n - 1) / mpmath.factorial(n - 1))
        else:
            coeffs[k] = float(mpmath.zeta(n - k) / mpmath.factorial(k))
    coeffs.setflags(write=False)
    return coeffs


def _one_minus_modulus_sq(a: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """|1 - e^(-a + i phi)|**2 without cancellation near a = phi = 0."""
    return np.expm1(-a) ** 2 + 4.0 * np.exp(-a) * np.sin(0.5 * phi) ** 2


def _li1(a: np.ndarray, phi: np.ndarray) -> np.ndarray:
    real_part = -np.expm1(-a) + 2.0 * np.exp(-a) * np.sin(0.5 * phi) ** 2
    imag_part = -np.exp(-a) * np.sin(phi)
    return -(0.5 * np.log(_one_minus_modulus_sq(a, phi)) + 1j * np.arctan2(imag_part, real_part))


def _direct_series(n: int, a: np.ndarray, phi: np.ndarray) -> np.ndarray:
    z = np.exp(-a + 1j * phi)
    a_min = float(np.min(a))
    terms = max(1, math.ceil(math.log(_SERIES_EPS) / -a_min)) if a_min > 0 else 1
    total = np.zeros(a.shape, dtype=complex)
    power = np.ones(a.shape, dtype=complex)
    for m in range(1, terms + 1):
        power = power * z
        total += power / float(m) ** n
    return total


def _unit_circle_series(n: int, a: np.ndarray, phi: np.ndarray) -> np.ndarray:
    mu = -a + 1j * phi
    total = np.polynomial.polynomial.polyval(mu, _unit_circle_coefficients(n))
    nonzero = mu != 0
    log_term = np.zeros(mu.shape, dtype=complex)
    log_term[nonzero] = mu[nonzero] ** (n - 1) * np.log(-mu[nonzero]) / math.factorial(n - 1)
    return total - log_term


def polylog_exp(
    n: int,
    a: float | np.ndarray,
    phase: float | np.ndarray = 0.0,
    *,
    settings: NumericsSettings | None = None,
) -> np.ndarray:
    """Complex Li_n(e^(-a + i*phase)) parameterised by the log-modulus ``a >= 0``.

    Passing ``a`` instead of ``w = e^(-a)`` keeps full precision when the
    argument approaches the unit circle (``a`` of order 1e-20 at the lower
    end of the kappa integrals).

    Raises:
        UnsupportedOrderError: for n < 1.
        DomainError: for a < 0, or n = 1 at the branch point a = phase = 0.
    """
    _check_order(n)
    a, phase = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(phase, dtype=float))
    if np.any(a < 0.0) or np.any(np.isnan(a)):
        raise DomainError("polylogarithm argument must satisfy |w| <= 1")
    phi = np.remainder(phase + np.pi, 2.0 * np.pi) - np.pi
    at_pole = (a == 0.0) & (phi == 0.0)
    if n == 1:
        if np.any(at_pole):
            raise DomainError("Li_1 diverges at w = 1")
        return _li1(a, phi)

    cfg = resolve(settings)
    out = np.empty(a.shape, dtype=complex)
    direct = a >= -math.log(cfg.polylog_series_radius)
    if np.any(direct):
        out[direct] = _direct_series(n, a[direct], phi[direct])
    near = ~direct
    if np.any(near):
        out[near] = _unit_circle_series(n, a[near], phi[near])
    return out


def _as_log_modulus(w: float | np.ndarray, phase: float | np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    w, phase = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(phase, dtype=float))
    if np.any(np.abs(w) > 1.0):
        raise DomainError("polylogarithm requires |w| <= 1")
    zero = w == 0.0
    with np.errstate(divide="ignore"):
        a = np.where(zero, 1.0, -np.log(np.abs(w)))
    phase = np.where(w < 0.0, phase + np.pi, phase)
    return a, phase, zero


def _finish(values: np.ndarray, zero: np.ndarray) -> float | np.ndarray:
    values = np.where(zero, 0.0, values)
    return float(values) if values.ndim == 0 else values


def polylog(
    n: int,
    w: float | np.ndarray,
    phase: float | np.ndarray = 0.0,
    *,
    settings: NumericsSettings | None = None,
) -> float | np.ndarray:
    """Re sum_{m>=1} w^m cos(m*phase)/m^n.

    Equals ``(Li_n(w e^{i phase}) + Li_n(w e^{-i phase})) / 2``. ``w = 1`` is
    allowed for n >= 2 (and for n = 1 away from phase = 0).

    Args:
        n: order, n >= 1.
        w: real modulus with |w| <= 1.
        phase: angle in radians.

    Returns:
        float for scalar input, otherwise an array.

    Raises:
        DomainError: if |w| > 1 or the series diverges.
    """
    a, phase, zero = _as_log_modulus(w, phase)
    return _finish(polylog_exp(n, a, phase, settings=settings).real, zero)


def polylog_imag(
    n: int,
    w: float | np.ndarray,
    phase: float | np.ndarray = 0.0,
    *,
    settings: NumericsSettings | None = None,
) -> float | np.ndarray:
    """sum_{m>=1} w^m sin(m*phase)/m^n, the imaginary part of Li_n(w e^{i phase})."""
    a, phase, zero = _as_log_modulus(w, phase)
    return _finish(polylog_exp(n, a, phase, settings=settings).imag, zero)


def li0_exp(a: float | np.ndarray, phase: float | np.ndarray = 0.0) -> float | np.ndarray:
    """Re lambda/(1 - lambda) for lambda = e^(-a + i*phase), a > 0.

    This is the order-zero member of the polylogarithm family,
    sum_m w^m cos(m*phase).
    """
    a, phase = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(phase, dtype=float))
    if np.any(a <= 0.0):
        raise DomainError("order-zero polylogarithm requires |w| < 1")
    half_sin_sq = np.sin(0.5 * phase) ** 2
    numerator = np.exp(-a) * (-np.expm1(-a) - 2.0 * half_sin_sq)
    values = numerator / _one_minus_modulus_sq(a, phase)
    return float(values) if values.ndim == 0 else values


def bernoulli_poly(n: int, z: float | np.ndarray) -> float | np.ndarray:
    """Bernoulli polynomial B_n(z) for n = 1..4."""
    if n not in _BERNOULLI:
        raise UnsupportedOrderError(f"Bernoulli polynomials are available for n = 1..4, got {n}")
    values = np.polynomial.polynomial.polyval(np.asarray(z, dtype=float), _BERNOULLI[n])
    return float(values) if np.ndim(values) == 0 else values


def jonquiere(n: int, z: float) -> complex:
    """Closed form -(2 pi i)^n B_n(z)/n! of Li_n(e^{2 pi i z}) + (-1)^n Li_n(e^{-2 pi i z}).

    For even n the value is real and equals ``2 * polylog(n, 1, 2 pi z)``;
    for odd n it is imaginary and equals ``2j * polylog_imag(n, 1, 2 pi z)``.
    Valid for 0 <= z <= 1 (0 < z < 1 when n = 1).
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"Jonquiere relation holds for 0 <= z <= 1, got {z}")
    return -((2j * math.pi) ** n) * bernoulli_poly(n, z) / math.factorial(n)


def bessel_k2(z: float | np.ndarray) -> float | np.ndarray:
    """Modified Bessel function of the second kind, K_2(z), for z > 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0) or np.any(np.isnan(z)):
        raise DomainError("K_2 requires a positive argument")
    values = special.kv(2, z)
    return float(values) if values.ndim == 0 else values


def bessel_half_integer(kind: Literal["first", "second"], ell: int, x: float) -> float:
    """Modified spherical Bessel function i_l(x) ("first") or k_l(x) ("second").

    Normalisation: i_0(x) = sinh(x)/x, k_0(x) = (pi/2) e^{-x}/x.

    Raises:
        DomainError: x <= 0, negative order or unknown kind.
        BesselOverflowError: value outside the double range; use
            :func:`bessel_half_integer_table` instead.
    """
    if x <= 0.0:
        raise DomainError("half-integer Bessel functions require x > 0")
    if ell < 0 or int(ell) != ell:
        raise DomainError(f"order must be a non-negative integer, got {ell}")
    if kind == "first":
        if x > _EXP_OVERFLOW:
            raise BesselOverflowError(f"i_{ell}({x}) overflows; use the log-scaled table")
        value = float(special.spherical_in(int(ell), x))
    elif kind == "second":
        value = float(special.spherical_kn(int(ell), x))
        if value == 0.0:
            raise BesselOverflowError(f"k_{ell}({x}) underflows; use the log-scaled table")
    else:
        raise DomainError(f"kind must be 'first' or 'second', got {kind!r}")
    if not math.isfinite(value):
        raise BesselOverflowError(f"{kind}-kind value of order {ell} at x={x} is not representable")
    return value


def bessel_half_integer_table(ell_max: int, x: float) -> HalfIntegerBesselTable:
    """Log-scaled i_l(x), k_l(x) for l = 0..ell_max.

    k ratios follow the upward recurrence; i ratios come from the downward
    (Miller) continued fraction started well above max(ell_max, x).
    """
    if x <= 0.0:
        raise DomainError("half-integer Bessel functions require x > 0")
    if ell_max < 0:
        raise DomainError("ell_max must be non-negative")

    ratio_k = np.full(ell_max + 1, np.nan)
    if ell_max >= 1:
        ratio_k[1] = 1.0 + 1.0 / x
    for ell in range(1, ell_max):
        ratio_k[ell + 1] = 1.0 / ratio_k[ell] + (2 * ell + 1) / x

    ratio_i = np.full(ell_max + 1, np.nan)
    start = max(ell_max, math.ceil(x)) + math.ceil(math.sqrt(40.0 * max(x, 1.0))) + 20
    r = 0.0
    for ell in range(start, 0, -1):
        r = 1.0 / ((2 * ell + 1) / x + r)
        if ell <= ell_max:
            ratio_i[ell] = r

    log_i = np.empty(ell_max + 1)
    log_k = np.empty(ell_max + 1)
    log_i[0] = x + math.log(-math.expm1(-2.0 * x)) - math.log(2.0 * x)
    log_k[0] = math.log(0.5 * math.pi) - x - math.log(x)
    if ell_max >= 1:
        log_i[1:] = log_i[0] + np.cumsum(np.log(ratio_i[1:]))
        log_k[1:] = log_k[0] + np.cumsum(np.log(ratio_k[1:]))
    return HalfIntegerBesselTable(x, log_i, log_k, ratio_i, ratio_k)


def angular_function_arrays(ell_max: int, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """pi_l(mu), tau_l(mu) for l = 0..ell_max (index 0 holds zeros)."""
    if ell_max < 1:
        raise DomainError("ell_max must be at least 1")
    pis = np.zeros(ell_max + 1)
    taus = np.zeros(ell_max + 1)
    pis[1] = 1.0
    taus[1] = mu
    for ell in range(2, ell_max + 1):
        pis[ell] = ((2 * ell - 1) / (ell - 1)) * mu * pis[ell - 1] - (ell / (ell - 1)) * pis[ell - 2]
        taus[ell] = ell * mu * pis[ell] - (ell + 1) * pis[ell - 1]
    return pis, taus


def angular_functions(ell_max: int, mu: float) -> list[AngularFunctionPair]:
    """Angular functions pi_l = P_l'(mu) and tau_l for l = 1..ell_max.

    The polynomial recurrences hold for every real mu, including the
    |mu| >= 1 values reached at imaginary frequencies.
    """
    pis, taus = angular_function_arrays(ell_max, mu)
    return [
        AngularFunctionPair(order=ell, mu=mu, pi_l=float(pis[ell]), tau_l=float(taus[ell]))
        for ell in range(1, ell_max + 1)
    ]


def log_angular_functions(ell_max: int, mu: float) -> LogAngularTable:
    """Angular functions for mu <= -1 without overflow (see :class:`LogAngularTable`)."""
    if mu > -1.0:
        raise DomainError(f"log-scaled angular functions need mu <= -1, got {mu}")
    if ell_max < 1:
        raise DomainError("ell_max must be at least 1")
    m = -mu
    rho = np.full(ell_max + 1, np.inf)
    for ell in range(2, ell_max + 1):
        rho[ell] = ((2 * ell - 1) / (ell - 1)) * m - (ell / (ell - 1)) / rho[ell - 1]
    log_p = np.full(ell_max + 1, -np.inf)
    log_p[1] = 0.0
    if ell_max >= 2:
        log_p[2:] = np.cumsum(np.log(rho[2:]))
    ells = np.arange(ell_max + 1)
    bracket = ells * m - (ells + 1) / rho
    bracket[0] = np.nan
    return LogAngularTable(mu=mu, log_p=log_p, bracket=bracket)
