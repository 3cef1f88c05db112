"""Large-sphere asymptotics of the sphere scattering amplitudes.

The WKB amplitude at imaginary frequency is
``S = (xi~/2) exp(2 xi~ s) r~`` with ``r~ = r (1 + s_pp / xi~)``, where
``r`` is the plane reflection coefficient at the specular angle and
``s_pp`` the diffractive correction. The module also provides the
zero-frequency multipole series for PEMC spheres and a direct Mie sum for
PEC spheres that serves as an oracle for the WKB form.

All amplitudes are returned in (log-magnitude, sign) form because
``exp(2 xi~ s)`` leaves the double range for xi~ s above roughly 350.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import logging
import math

import numpy as np
from scipy.special import gammaln, logsumexp

from casimir.errors import ConvergenceError, DomainError
from casimir.materials import (
    Dielectric,
    Material,
    Pemc,
    PerfectConductor,
    Polarization,
    ReflectionMatrix,
    fresnel_coefficients,
    plane_reflection,
)
from casimir.specfun import bessel_half_integer_table, log_angular_functions
from config.settings import NumericsSettings, resolve

log = logging.getLogger(__name__)

TM, TE = Polarization.TM, Polarization.TE


class ExpansionOrder(str, Enum):
    LEADING_ONLY = "leading_only"
    WITH_FIRST_CORRECTION = "with_first_correction"


@dataclass(frozen=True)
class SizeParameter:
    """Dimensionless size parameter xi R / c."""

    xi_tilde: float

    def __post_init__(self) -> None:
        if not self.xi_tilde >= 0.0:
            raise DomainError(f"size parameter must be non-negative, got {self.xi_tilde}")


@dataclass(frozen=True)
class ScatteringKinematics:
    """Backscattering kinematics at imaginary frequency, ``s = sin(Theta/2) >= 1``."""

    s: float

    def __post_init__(self) -> None:
        if not self.s >= 1.0:
            raise DomainError(f"sin(Theta/2) must be at least 1 at imaginary frequency, got {self.s}")

    @property
    def c_sq(self) -> float:
        """cos^2(Theta/2) = 1 - s^2, non-positive."""
        return 1.0 - self.s * self.s

    @property
    def mu(self) -> float:
        """cos(Theta) = 1 - 2 s^2 <= -1."""
        return 1.0 - 2.0 * self.s * self.s

    @property
    def t(self) -> float:
        return 1.0 / self.s

    @classmethod
    def from_t(cls, t: float) -> "ScatteringKinematics":
        if not 0.0 < t <= 1.0:
            raise DomainError(f"t must lie in (0, 1], got {t}")
        return cls(1.0 / t)

    @classmethod
    def from_mu(cls, mu: float) -> "ScatteringKinematics":
        if mu > -1.0:
            raise DomainError(f"cos(Theta) must be <= -1 at imaginary frequency, got {mu}")
        return cls(math.sqrt(0.5 * (1.0 - mu)))

    @classmethod
    def from_wavevectors(
        cls,
        xi_over_c: float,
        k_out: tuple[float, float],
        k_in: tuple[float, float],
    ) -> "ScatteringKinematics":
        """cos(Theta) = -(c/xi)^2 (k_out . k_in + kappa_out kappa_in)."""
        if not xi_over_c > 0.0:
            raise DomainError("xi must be positive")
        kappa_out = math.sqrt(xi_over_c**2 + k_out[0] ** 2 + k_out[1] ** 2)
        kappa_in = math.sqrt(xi_over_c**2 + k_in[0] ** 2 + k_in[1] ** 2)
        dot = k_out[0] * k_in[0] + k_out[1] * k_in[1]
        return cls.from_mu(-(dot + kappa_out * kappa_in) / xi_over_c**2)


@dataclass(frozen=True)
class LogScaled:
    """A real number stored as ``sign * exp(log_abs)``."""

    log_abs: float
    sign: int

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def ratio(self, other: "LogScaled") -> float:
        """self / other without forming either number."""
        if other.sign == 0:
            raise ZeroDivisionError("ratio to a vanishing amplitude")
        return self.sign * other.sign * math.exp(self.log_abs - other.log_abs)


@dataclass(frozen=True)
class AsymptoticReflection:
    """Plane coefficient ``leading`` and absolute first-order coefficient ``first_order``.

    ``r~ = leading + first_order / xi~``; the relative correction
    ``s_pp = first_order / leading`` is exposed as :attr:`correction`.
    """

    leading: float
    first_order: float
    order: ExpansionOrder = ExpansionOrder.WITH_FIRST_CORRECTION

    @property
    def correction(self) -> float:
        if self.leading == 0.0:
            if self.first_order == 0.0:
                return 0.0
            raise DomainError("relative correction undefined where the leading coefficient vanishes")
        return self.first_order / self.leading

    def factor(self, xi_tilde: float) -> float:
        if self.order is ExpansionOrder.LEADING_ONLY:
            return self.leading
        return self.leading + self.first_order / xi_tilde


@dataclass(frozen=True)
class WkbAmplitude:
    log_abs: float
    sign: int
    r_tilde: float

    def as_log_scaled(self) -> LogScaled:
        return LogScaled(self.log_abs, self.sign)


def _pemc_first_order(theta: float, s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    c_sq = 1.0 - s * s
    base = (1.0 - 2.0 * s * s) / (2.0 * s**3)
    cos2, sin2 = math.cos(2.0 * theta), math.sin(2.0 * theta)
    tm = base * cos2 - c_sq / s**3 * math.cos(theta) ** 2
    te = -base * cos2 - c_sq / s**3 * math.sin(theta) ** 2
    cross = sin2 / (2.0 * s)
    return np.stack([np.stack([tm, cross], axis=-1), np.stack([cross, te], axis=-1)], axis=-2)


def _dielectric_corrections(n: float, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(s, dtype=float)
    c2 = 1.0 - s * s
    n2 = n * n
    root = np.sqrt(n2 - c2)
    s_te = (
        (1.0 - 2.0 * s * s) / (2.0 * s**3)
        + 1.0 / (s * (c2 + s * root))
        - (2.0 * n2 - c2) / (2.0 * root**3)
    )
    denom = (n2 * s * s - c2) ** 2
    s_tm = (
        -1.0 / (2.0 * s**3)
        + 1.0 / (s * (c2 - s * root))
        - c2 / s**3 * (2.0 * n2 * n2 * s * s - n2 * c2 * (1.0 + s * s - s**4) + c2**3) / ((n2 - c2) * denom)
        + n2 / (2.0 * root**3) * (2.0 * n2 * n2 - n2 * c2 * (1.0 + c2) - c2 * c2) / denom
    )
    return s_tm, s_te


def leading_reflection(material: Material, kin: ScatteringKinematics) -> ReflectionMatrix:
    """Plane reflection matrix at the specular angle of incidence (pi - Theta)/2."""
    return plane_reflection(material, kin.t)


def leading_reflection_array(material: Material, t: np.ndarray) -> np.ndarray:
    """Leading reflection matrices on a grid of ``t``, shape ``t.shape + (2, 2)``."""
    t = np.asarray(t, dtype=float)
    if isinstance(material, Dielectric):
        r_tm, r_te = fresnel_coefficients(material.n, t)
        zero = np.zeros_like(r_tm)
        return np.stack([np.stack([r_tm, zero], axis=-1), np.stack([zero, r_te], axis=-1)], axis=-2)
    matrix = plane_reflection(material, 1.0).values
    return np.broadcast_to(matrix, t.shape + (2, 2))


def correction_matrix_array(material: Material, t: np.ndarray) -> np.ndarray:
    """Absolute first-order coefficients r s on a grid of ``t``, shape ``t.shape + (2, 2)``."""
    s = 1.0 / np.asarray(t, dtype=float)
    if isinstance(material, PerfectConductor):
        return _pemc_first_order(0.0, s)
    if isinstance(material, Pemc):
        return _pemc_first_order(material.theta, s)
    if isinstance(material, Dielectric):
        r_tm, r_te = fresnel_coefficients(material.n, 1.0 / s)
        s_tm, s_te = _dielectric_corrections(material.n, s)
        zero = np.zeros_like(s)
        return np.stack(
            [np.stack([r_tm * s_tm, zero], axis=-1), np.stack([zero, r_te * s_te], axis=-1)], axis=-2
        )
    raise DomainError(f"unsupported material {material!r}")


def correction_matrix(material: Material, kin: ScatteringKinematics) -> np.ndarray:
    """Absolute first-order coefficients r_pp' s_pp' as a 2x2 (TM, TE) matrix."""
    return correction_matrix_array(material, np.asarray(kin.t))


def asymptotic_reflection(
    p_out: Polarization,
    p_in: Polarization,
    material: Material,
    kin: ScatteringKinematics,
    order: ExpansionOrder = ExpansionOrder.WITH_FIRST_CORRECTION,
) -> AsymptoticReflection:
    leading = leading_reflection(material, kin)[p_out, p_in]
    first = float(correction_matrix(material, kin)[p_out, p_in])
    return AsymptoticReflection(leading=leading, first_order=first, order=order)


def correction_coefficient(
    p_out: Polarization, p_in: Polarization, material: Material, kin: ScatteringKinematics
) -> float:
    """Absolute first-order coefficient r_{p'p} s_{p'p}; finite for every material angle."""
    return float(correction_matrix(material, kin)[p_out, p_in])


def diffractive_correction(
    p_out: Polarization, p_in: Polarization, material: Material, kin: ScatteringKinematics
) -> float:
    """Relative diffractive correction s_{p'p}.

    Dielectric diagonal elements follow the closed forms for a non-magnetic
    sphere; PEC and PEMC values are the absolute coefficients divided by the
    leading plane coefficient.

    Raises:
        DomainError: where the leading coefficient vanishes but the
            correction does not (PEMC at theta = pi/4, diagonal elements).
    """
    if isinstance(material, Dielectric):
        if p_out != p_in:
            return 0.0
        s_tm, s_te = _dielectric_corrections(material.n, np.asarray(kin.s))
        return float(s_tm if p_out == TM else s_te)
    return asymptotic_reflection(p_out, p_in, material, kin).correction


def wkb_amplitude(
    p_out: Polarization,
    p_in: Polarization,
    xi_tilde: SizeParameter | float,
    kin: ScatteringKinematics,
    material: Material,
    order: ExpansionOrder = ExpansionOrder.WITH_FIRST_CORRECTION,
) -> WkbAmplitude:
    """WKB scattering amplitude (xi~/2) exp(2 xi~ s) r~ in log-scaled form."""
    x = xi_tilde.xi_tilde if isinstance(xi_tilde, SizeParameter) else float(xi_tilde)
    if not x > 0.0:
        raise DomainError("WKB amplitude requires a positive size parameter")
    r_tilde = asymptotic_reflection(p_out, p_in, material, kin, order).factor(x)
    if r_tilde == 0.0:
        return WkbAmplitude(-math.inf, 0, 0.0)
    log_abs = math.log(0.5 * x) + 2.0 * x * kin.s + math.log(abs(r_tilde))
    return WkbAmplitude(log_abs, 1 if r_tilde > 0.0 else -1, r_tilde)


def zero_freq_X(
    p_out: Polarization, p_in: Polarization, theta: float, ell: float | np.ndarray
) -> float | np.ndarray:
    """Zero-frequency model parameters X_{p'p}(l) of a PEMC sphere.

    Built from the PEC mode parameters A_l = 1 (TM) and B_l = -l/(l+1) (TE);
    real ``l`` is admitted for the saddle-point value.
    """
    ell = np.asarray(ell, dtype=float)
    if np.any(ell <= 0.0):
        raise DomainError("angular momentum must be positive")
    a_pec = 1.0
    b_pec = -ell / (ell + 1.0)
    if p_out == TE and p_in == TE:
        values = math.sin(theta) ** 2 * a_pec + math.cos(theta) ** 2 * b_pec
    elif p_out == TM and p_in == TM:
        values = math.cos(theta) ** 2 * a_pec + math.sin(theta) ** 2 * b_pec
    else:
        values = -0.5 * math.sin(2.0 * theta) * (a_pec - b_pec)
    values = np.broadcast_to(values, ell.shape)
    return float(values) if values.ndim == 0 else np.array(values)


def zero_freq_amplitude_series(
    p_out: Polarization,
    p_in: Polarization,
    theta: float,
    xi_tilde: float,
    mu: float,
    *,
    settings: NumericsSettings | None = None,
) -> LogScaled:
    """xi~ sum_l X_{p'p}(l) z^l / (2l)! with z = -2 xi~^2 mu, summed in log space.

    Raises:
        DomainError: for mu >= 0 or non-positive xi~.
        ConvergenceError: if the truncation index exceeds ``series_cap``.
    """
    if mu >= 0.0:
        raise DomainError("zero-frequency series requires cos(Theta) < 0")
    if not xi_tilde > 0.0:
        raise DomainError("zero-frequency series requires a positive size parameter")
    cfg = resolve(settings)
    z = -2.0 * xi_tilde * xi_tilde * mu
    peak = 0.5 * math.sqrt(z)
    ell_max = math.ceil(peak + 10.0 * math.sqrt(peak + 1.0) + 20.0)
    if ell_max > cfg.series_cap:
        raise ConvergenceError(f"zero-frequency series needs {ell_max} terms (cap {cfg.series_cap})")

    ells = np.arange(1, ell_max + 1, dtype=float)
    x_values = zero_freq_X(p_out, p_in, theta, ells)
    with np.errstate(divide="ignore"):
        log_terms = ells * math.log(z) - gammaln(2.0 * ells + 1.0) + np.log(np.abs(x_values))
    signs = np.sign(x_values)
    if not np.any(signs):
        return LogScaled(-math.inf, 0)
    if log_terms[-1] - np.max(log_terms[signs != 0]) > math.log(cfg.series_rtol):
        raise ConvergenceError(f"zero-frequency series not converged at l = {ell_max}")
    log_sum, sign = logsumexp(log_terms, b=signs, return_sign=True)
    log.debug("zero-frequency series: z=%.3e, %d terms", z, ell_max)
    return LogScaled(math.log(xi_tilde) + float(log_sum), int(sign))


def mie_oracle_pec(
    p_out: Polarization,
    p_in: Polarization,
    xi_tilde: float,
    mu: float,
    *,
    settings: NumericsSettings | None = None,
) -> LogScaled:
    """Direct Mie sum for a PEC sphere at imaginary frequency, log-scaled.

    Multipole coefficients ``r^MM = (-1)^l (pi/2) i_l/k_l`` and
    ``r^EE = (-1)^l (pi/2) (x i_l)'/(x k_l)'`` at ``x = xi~``; with this
    normalisation the large-xi~ limit is the WKB amplitude with
    ``r_TE,TE = -1`` and ``r_TM,TM = +1``. Cross-polarized amplitudes vanish.

    Raises:
        DomainError: xi~ outside [1, 500] or mu > -1.
        ConvergenceError: if the last retained term is not negligible.
    """
    if p_out != p_in:
        return LogScaled(-math.inf, 0)
    if not 1.0 <= xi_tilde <= 500.0:
        raise DomainError(f"Mie oracle supports 1 <= xi~ <= 500, got {xi_tilde}")
    kin = ScatteringKinematics.from_mu(mu)
    cfg = resolve(settings)
    x = float(xi_tilde)
    ell_max = math.ceil(5.0 * x * kin.s) + 50

    bessel = bessel_half_integer_table(ell_max, x)
    angular = log_angular_functions(ell_max, mu)
    ells = np.arange(1, ell_max + 1, dtype=float)
    log_weight = np.log(2.0 * ells + 1.0) - np.log(ells * (ells + 1.0))
    log_i_over_k = bessel.log_i[1:] - bessel.log_k[1:]
    d_ratio = (x / bessel.ratio_i[1:] - ells) / (x / bessel.ratio_k[1:] + ells)
    bracket = angular.bracket[1:]
    if p_out == TE:
        factor, sign = bracket + d_ratio, -1
    else:
        factor, sign = bracket * d_ratio + 1.0, 1

    log_terms = log_weight + angular.log_p[1:] + math.log(0.5 * math.pi) + log_i_over_k + np.log(factor)
    if log_terms[-1] - np.max(log_terms) > math.log(cfg.series_rtol):
        raise ConvergenceError(f"Mie sum not converged at l_max = {ell_max} (xi~ = {x})")
    log.debug("Mie oracle %s: xi~=%.1f, s=%.3f, l_max=%d", p_out.name, x, kin.s, ell_max)
    return LogScaled(float(logsumexp(log_terms)), sign)
