"""Casimir energies of two spheres: PFA, diffractive and geometric parts.

Internally every integral is dimensionless with lengths in units of the
surface separation L (hbar = c = 1). ``X = xi L / c`` is the reduced
frequency and ``y = kappa L``; the zero-temperature double integrals run over
``t = X / y`` in [0, 1] and ``y`` in [0, inf). Results are reported as

* ``e_pfa`` in units of hbar c R_eff / L^2,
* ``e_diff`` and ``e_geo`` in units of hbar c / L,

so that ``e_diff = beta_diff * e_pfa`` and ``e_geo = beta_geo * e_pfa``.
:func:`pfa_unit` and :func:`correction_unit` convert to joules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.constants import Boltzmann, c as SPEED_OF_LIGHT, hbar

from casimir.errors import ConvergenceError, DomainError
from casimir.materials import Dielectric, Material, Pemc, PemcPair, PerfectConductor
from casimir.quadrature import integrate_half_line, integrate_plane, ordered_map
from casimir.specfun import li0_exp, polylog, polylog_exp
from casimir.spherescatter import correction_matrix_array, leading_reflection_array
from config.settings import NumericsSettings, resolve

log = logging.getLogger(__name__)

HBAR_C = hbar * SPEED_OF_LIGHT

# |E_PFA| for two perfect conductors, hbar c R_eff / L^2 units
_PEC_PFA = math.pi**3 / 720.0
_POLE_RTOL = 1e-10
_MATSUBARA_BLOCK = 4096


@dataclass(frozen=True)
class Geometry:
    """Two spheres of radii ``r1``, ``r2`` at surface separation ``distance``.

    One radius may be infinite (plane-sphere). Lengths are in metres when SI
    conversions or temperatures are involved; otherwise any unit works.
    """

    r1: float
    r2: float
    distance: float

    def __post_init__(self) -> None:
        if not (self.r1 > 0.0 and self.r2 > 0.0):
            raise DomainError(f"radii must be positive, got R1={self.r1}, R2={self.r2}")
        if math.isinf(self.r1) and math.isinf(self.r2):
            raise DomainError("at least one radius must be finite")
        if not (self.distance > 0.0 and math.isfinite(self.distance)):
            raise DomainError(f"surface separation must be positive, got {self.distance}")

    @property
    def r_eff(self) -> float:
        if math.isinf(self.r1):
            return self.r2
        if math.isinf(self.r2):
            return self.r1
        return self.r1 * self.r2 / (self.r1 + self.r2)

    @property
    def u(self) -> float:
        if math.isinf(self.r1) or math.isinf(self.r2):
            return 0.0
        return self.r1 * self.r2 / (self.r1 + self.r2) ** 2

    @property
    def x(self) -> float:
        return self.distance / self.r_eff

    @property
    def reduced_radii(self) -> tuple[float, float]:
        """Radii in units of the surface separation."""
        return self.r1 / self.distance, self.r2 / self.distance

    @classmethod
    def from_aspect(cls, x: float, ratio: float = math.inf, distance: float = 1.0) -> "Geometry":
        """Geometry with ``L / R_eff = x`` and ``R1 / R2 = ratio`` (inf for a plane-sphere)."""
        if not x > 0.0:
            raise DomainError(f"x must be positive, got {x}")
        if not ratio > 0.0:
            raise DomainError(f"radius ratio must be positive, got {ratio}")
        r_eff = distance / x
        if math.isinf(ratio):
            return cls(math.inf, r_eff, distance)
        # R_eff = R2 ratio / (1 + ratio)
        r2 = r_eff * (1.0 + ratio) / ratio
        return cls(ratio * r2, r2, distance)


@dataclass(frozen=True)
class Temperature:
    kelvin: float = 0.0

    def __post_init__(self) -> None:
        if not (self.kelvin >= 0.0 and math.isfinite(self.kelvin)):
            raise DomainError(f"temperature must be finite and non-negative, got {self.kelvin}")

    @property
    def is_zero(self) -> bool:
        return self.kelvin == 0.0

    @property
    def matsubara_spacing(self) -> float:
        """xi_1 = 2 pi k_B T / hbar in rad/s."""
        return 2.0 * math.pi * Boltzmann * self.kelvin / hbar

    def reduced(self, distance: float) -> float:
        """tau = xi_1 L / c = 2 pi k_B T L / (hbar c)."""
        return self.matsubara_spacing * distance / SPEED_OF_LIGHT

    @classmethod
    def from_reduced(cls, tau: float, distance: float) -> "Temperature":
        return cls(tau * HBAR_C / (2.0 * math.pi * Boltzmann * distance))


@dataclass(frozen=True)
class EnergyBreakdown:
    """Zero-temperature energy split into PFA, diffractive and geometric parts."""

    e_pfa: float
    e_diff: float
    e_geo: float
    beta_diff: float | None
    beta_geo: float | None
    x: float
    errors: dict[str, float] = field(default_factory=dict)

    @property
    def beta1(self) -> float | None:
        if self.beta_diff is None or self.beta_geo is None:
            return None
        return self.beta_diff + self.beta_geo

    @property
    def e1(self) -> float:
        """Leading correction E_1 = e_diff + e_geo in units of hbar c / L."""
        return self.e_diff + self.e_geo

    @property
    def total(self) -> float:
        """E_PFA + E_1 in units of hbar c R_eff / L^2."""
        return self.e_pfa + self.x * self.e1

    def to_joules(self, geom: Geometry) -> dict[str, float]:
        return {
            "e_pfa": self.e_pfa * pfa_unit(geom),
            "e_diff": self.e_diff * correction_unit(geom),
            "e_geo": self.e_geo * correction_unit(geom),
        }


@dataclass(frozen=True)
class MatsubaraSum:
    """Free energy (hbar c R_eff / L^2) with its half-weighted n = 0 term and term count."""

    value: float
    zero_term: float
    n_terms: int


def pfa_unit(geom: Geometry) -> float:
    """hbar c R_eff / L^2 in joules (lengths in metres)."""
    return HBAR_C * geom.r_eff / geom.distance**2


def correction_unit(geom: Geometry) -> float:
    """hbar c / L in joules."""
    return HBAR_C / geom.distance


def _check_delta(delta: float) -> None:
    if not 0.0 <= delta <= 0.5 * math.pi + 1e-15:
        raise DomainError(f"delta must lie in [0, pi/2], got {delta}")


def _check_frequency(xi_l: float | np.ndarray, *, strict: bool) -> np.ndarray:
    xi_l = np.asarray(xi_l, dtype=float)
    if np.any(xi_l < 0.0) or (strict and np.any(xi_l == 0.0)):
        bound = "positive" if strict else "non-negative"
        raise DomainError(f"reduced frequency xi L / c must be {bound}")
    return xi_l


def _scalar(values: np.ndarray) -> float | np.ndarray:
    return float(values) if np.ndim(values) == 0 else values


def _pemc_re_polylog(n: int, y: np.ndarray, delta: float, settings: NumericsSettings) -> np.ndarray:
    """Re Li_n(w e^{2 i delta}) with w = e^{-2y}; twice this is the sum over the eigenvalue pair."""
    return polylog_exp(n, 2.0 * y, 2.0 * delta, settings=settings).real


# -- PFA ---------------------------------------------------------------------


def pfa_density(
    delta: float, xi_l: float | np.ndarray, *, settings: NumericsSettings | None = None
) -> float | np.ndarray:
    """PFA free-energy density per unit R_eff / L at reduced frequency ``xi_l``.

    -(1/2) int_X^inf dy [Li_2(lambda1) + Li_2(lambda2)], lambda = e^{-2y +- 2 i delta}.
    """
    _check_delta(delta)
    xi_l = _check_frequency(xi_l, strict=False)
    cfg = resolve(settings)
    result = integrate_half_line(lambda y: _pemc_re_polylog(2, y, delta, cfg), xi_l, settings=cfg)
    return _scalar(-np.asarray(result.value))


def pfa_density_closed(
    delta: float, xi_l: float | np.ndarray, *, settings: NumericsSettings | None = None
) -> float | np.ndarray:
    """Closed form of :func:`pfa_density`: -(1/2) Re Li_3(e^{-2X + 2 i delta})."""
    _check_delta(delta)
    xi_l = _check_frequency(xi_l, strict=False)
    return _scalar(-0.5 * _pemc_re_polylog(3, xi_l, delta, resolve(settings)))


def _pfa_plane_integrand(delta: float, cfg: NumericsSettings):
    def integrand(t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return -y * _pemc_re_polylog(2, y, delta, cfg) / (2.0 * math.pi)

    return integrand


def matsubara_pfa(delta: float, tau: float, *, settings: NumericsSettings | None = None) -> MatsubaraSum:
    """(tau / 2 pi) [f(0)/2 + sum_n f(n tau)] with the closed PFA density f.

    Blocks of Matsubara terms are added until the last term drops below
    ``matsubara_rtol`` of the running total.
    """
    _check_delta(delta)
    if not tau > 0.0:
        raise DomainError(f"reduced temperature must be positive, got {tau}")
    cfg = resolve(settings)
    zero_term = 0.5 * float(pfa_density_closed(delta, 0.0, settings=cfg))
    partials = [zero_term]
    start = 1
    while True:
        n = np.arange(start, start + _MATSUBARA_BLOCK, dtype=float)
        values = np.asarray(pfa_density_closed(delta, n * tau, settings=cfg))
        partials.append(math.fsum(values))
        total = math.fsum(partials)
        scale = max(abs(total), abs(zero_term))
        start += _MATSUBARA_BLOCK
        if abs(values[-1]) <= cfg.matsubara_rtol * scale or scale == 0.0:
            break
        if start > cfg.matsubara_cap:
            raise ConvergenceError(
                f"Matsubara sum not converged after {start - 1} terms (tau = {tau})",
                estimate=tau * total / (2.0 * math.pi),
                error=abs(float(values[-1])),
            )
    log.debug("Matsubara sum: tau=%.3e, %d terms", tau, start - 1)
    prefactor = tau / (2.0 * math.pi)
    return MatsubaraSum(prefactor * total, prefactor * zero_term, start - 1)


def casimir_energy_pfa(
    geom: Geometry,
    pemc: PemcPair,
    temperature: Temperature | None = None,
    *,
    settings: NumericsSettings | None = None,
) -> float:
    """PFA (free) energy in units of hbar c R_eff / L^2.

    At T = 0 the frequency and wavenumber integrals are done on the
    (t, kappa L) plane; at T > 0 the Matsubara sum uses the closed
    per-frequency density, with the n = 0 term at half weight.
    """
    cfg = resolve(settings)
    if temperature is not None and not temperature.is_zero:
        tau = temperature.reduced(geom.distance)
        return matsubara_pfa(pemc.delta, tau, settings=cfg).value
    result = integrate_plane(
        _pfa_plane_integrand(pemc.delta, cfg), settings=cfg, atol=cfg.quad_rtol * _PEC_PFA
    )
    log.debug("E_PFA(delta=%.6f) = %.12e (+- %.1e)", pemc.delta, result.value, result.error)
    return result.value


# -- general materials -------------------------------------------------------


@dataclass(frozen=True)
class _RoundTripGrid:
    """Eigenvalues mu of R1 R2 and the diffractive matrix on a grid of t."""

    mu: tuple[np.ndarray, np.ndarray]
    one_minus_mu: tuple[np.ndarray, np.ndarray]
    degenerate: np.ndarray
    trace_a1: np.ndarray
    alpha1_reduced: np.ndarray


def _roundtrip_grid(
    material1: Material,
    material2: Material,
    t: np.ndarray,
    radii: tuple[float, float],
    cfg: NumericsSettings,
) -> _RoundTripGrid:
    r1 = leading_reflection_array(material1, t)
    r2 = leading_reflection_array(material2, t)
    m = r1 @ r2
    trace = m[..., 0, 0] + m[..., 1, 1]
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    root = np.sqrt((0.25 * trace * trace - det).astype(complex))
    mu1 = 0.5 * trace + root
    mu2 = 0.5 * trace - root
    # recover the small eigenvalue from the determinant
    small = np.abs(mu2) < 0.25 * np.abs(mu1)
    mu2 = np.where(small, det / np.where(mu1 == 0.0, 1.0, mu1), mu2)
    degenerate = np.abs(mu1 - mu2) < cfg.degenerate_rtol * np.abs(mu1)

    a1 = np.zeros(m.shape)
    rho1, rho2 = radii
    if math.isfinite(rho1):
        a1 = a1 + correction_matrix_array(material1, t) @ r2 / rho1
    if math.isfinite(rho2):
        a1 = a1 + r1 @ correction_matrix_array(material2, t) / rho2
    trace_a1 = a1[..., 0, 0] + a1[..., 1, 1]
    ma1 = m @ a1
    alpha1 = ma1[..., 0, 0] + ma1[..., 1, 1] - trace * trace_a1
    return _RoundTripGrid((mu1, mu2), (1.0 - mu1, 1.0 - mu2), degenerate, trace_a1, alpha1)


def _log_one_minus(lam: np.ndarray, one_minus: np.ndarray) -> np.ndarray:
    """Complex log(1 - lambda), accurate both for small lambda and near lambda = 1."""
    with np.errstate(divide="ignore", invalid="ignore"):
        small = 0.5 * np.log1p(np.abs(lam) ** 2 - 2.0 * lam.real) + 1j * np.arctan2(-lam.imag, 1.0 - lam.real)
        large = np.log(one_minus)
    return np.where(np.abs(lam) < 0.5, small, large)


def _phi(grid: _RoundTripGrid, y: np.ndarray) -> np.ndarray:
    """Phi = [(a0 + a1/l1) log(1 - l1) - (a0 + a1/l2) log(1 - l2)] / (l1 - l2).

    With l = mu w, a0 = w tr(A1) and a1 = w^2 alpha1, every power of w cancels
    against the denominators, so Phi stays finite where w underflows.
    """
    w = np.exp(-2.0 * y)
    em1 = -np.expm1(-2.0 * y)
    mu = grid.mu
    lam = [m * w for m in mu]
    one_minus = [em1 + om * w for om in grid.one_minus_mu]
    logs = [_log_one_minus(l, om) for l, om in zip(lam, one_minus)]

    with np.errstate(divide="ignore", invalid="ignore"):
        g1 = (grid.trace_a1 + grid.alpha1_reduced / mu[0]) * logs[0]
        g2 = (grid.trace_a1 + grid.alpha1_reduced / mu[1]) * logs[1]
        regular = (g1 - g2) / (mu[0] - mu[1])
        mu_bar = 0.5 * (mu[0] + mu[1])
        om_bar = 0.5 * (one_minus[0] + one_minus[1])
        log_bar = _log_one_minus(mu_bar * w, om_bar)
        limit = -(grid.alpha1_reduced / mu_bar**2) * log_bar - w * (grid.trace_a1 + grid.alpha1_reduced / mu_bar) / om_bar
    return np.where(grid.degenerate, limit, regular).real


def _re_polylog_pair(n: int, grid: _RoundTripGrid, y: np.ndarray, cfg: NumericsSettings) -> np.ndarray:
    total = np.zeros(np.broadcast_shapes(grid.mu[0].shape, np.shape(y)))
    for mu in grid.mu:
        modulus = np.maximum(np.abs(mu), 1e-300)
        total = total + polylog_exp(n, np.maximum(2.0 * y - np.log(modulus), 0.0), np.angle(mu), settings=cfg).real
    return total


def _check_materials(material1: Material, material2: Material) -> None:
    for material in (material1, material2):
        if not isinstance(material, (PerfectConductor, Pemc, Dielectric)):
            raise DomainError(f"unsupported material {material!r}")


def casimir_energy_pfa_general(
    geom: Geometry,
    material1: Material,
    material2: Material,
    *,
    settings: NumericsSettings | None = None,
) -> float:
    """Zero-temperature PFA energy (hbar c R_eff / L^2) for any pair of supported materials."""
    _check_materials(material1, material2)
    cfg = resolve(settings)
    radii = geom.reduced_radii

    def integrand(t: np.ndarray, y: np.ndarray) -> np.ndarray:
        grid = _roundtrip_grid(material1, material2, t, radii, cfg)
        return -y * _re_polylog_pair(2, grid, y, cfg) / (4.0 * math.pi)

    return integrate_plane(integrand, settings=cfg, atol=cfg.quad_rtol * _PEC_PFA).value


def diff_density_general(
    material1: Material,
    material2: Material,
    geom: Geometry,
    xi_l: float | np.ndarray,
    *,
    settings: NumericsSettings | None = None,
) -> float | np.ndarray:
    """Diffractive density (R_eff / 2 X L) int_X^inf Phi dy for general materials."""
    _check_materials(material1, material2)
    xi_l = _check_frequency(xi_l, strict=True)
    cfg = resolve(settings)
    radii = geom.reduced_radii
    r_bar = geom.r_eff / geom.distance

    def integrand(y: np.ndarray) -> np.ndarray:
        t = xi_l[..., None] / y
        return _phi(_roundtrip_grid(material1, material2, t, radii, cfg), y)

    result = integrate_half_line(integrand, xi_l, settings=cfg)
    return _scalar(r_bar / (2.0 * xi_l) * np.asarray(result.value))


def diffractive_energy_general(
    geom: Geometry,
    material1: Material,
    material2: Material,
    *,
    settings: NumericsSettings | None = None,
) -> float:
    """Zero-temperature diffractive energy in units of hbar c / L for general materials."""
    _check_materials(material1, material2)
    cfg = resolve(settings)
    radii = geom.reduced_radii
    r_bar = geom.r_eff / geom.distance

    def integrand(t: np.ndarray, y: np.ndarray) -> np.ndarray:
        grid = _roundtrip_grid(material1, material2, t, radii, cfg)
        return r_bar * _phi(grid, y) / (4.0 * math.pi * t)

    return integrate_plane(integrand, settings=cfg, atol=cfg.quad_rtol * _PEC_PFA).value


# -- PEMC corrections --------------------------------------------------------


def _log_one_minus_pemc(y: np.ndarray, delta: float) -> np.ndarray:
    """log(1 - 2 w cos 2delta + w^2) = -2 Re Li_1(w e^{2 i delta})."""
    return -2.0 * polylog_exp(1, 2.0 * y, 2.0 * delta).real


def diff_density(
    delta: float, xi_l: float | np.ndarray, *, settings: NumericsSettings | None = None
) -> float | np.ndarray:
    """PEMC diffractive density -(1/4) int_X^inf dy log(1 - 2w cos 2delta + w^2) / y.

    Raises:
        DomainError: for X <= 0, where the density diverges logarithmically.
    """
    _check_delta(delta)
    xi_l = _check_frequency(xi_l, strict=True)
    cfg = resolve(settings)
    result = integrate_half_line(lambda y: _log_one_minus_pemc(y, delta) / y, xi_l, settings=cfg)
    return _scalar(-0.25 * np.asarray(result.value))


def _geo_bracket(t: np.ndarray, y: np.ndarray, delta: float, u: float, cfg: NumericsSettings) -> np.ndarray:
    """y (1 + t^2) [G0 + (3u - 1) S2] + t^2 [S1 + (3u - 1) S3] for the PEMC eigenvalue pair."""
    g0 = 2.0 * li0_exp(2.0 * y, 2.0 * delta)
    s1 = -_log_one_minus_pemc(y, delta)
    s2 = 2.0 * _pemc_re_polylog(2, y, delta, cfg)
    s3 = 2.0 * _pemc_re_polylog(3, y, delta, cfg)
    weight = 3.0 * u - 1.0
    return y * (1.0 + t * t) * (g0 + weight * s2) + t * t * (s1 + weight * s3)


def _check_u(u: float) -> None:
    if not 0.0 <= u <= 0.25:
        raise DomainError(f"u must lie in [0, 1/4], got {u}")


def geo_density(
    delta: float, u: float, xi_l: float | np.ndarray, *, settings: NumericsSettings | None = None
) -> float | np.ndarray:
    """PEMC geometric density (1/12) int_X^inf (dy / y) {bracket} with t = X / y."""
    _check_delta(delta)
    _check_u(u)
    xi_l = _check_frequency(xi_l, strict=True)
    cfg = resolve(settings)

    def integrand(y: np.ndarray) -> np.ndarray:
        return _geo_bracket(xi_l[..., None] / y, y, delta, u, cfg) / y

    result = integrate_half_line(integrand, xi_l, settings=cfg)
    return _scalar(np.asarray(result.value) / 12.0)


def casimir_energy_with_corrections(
    geom: Geometry, pemc: PemcPair, *, settings: NumericsSettings | None = None
) -> EnergyBreakdown:
    """Zero-temperature E_PFA, E_diff and E_geo with the beta coefficients.

    The three plane integrals are independent and run on ``workers``
    threads. Betas are ``None`` where E_PFA vanishes.
    """
    cfg = resolve(settings)
    delta, u = pemc.delta, geom.u
    atol = cfg.quad_rtol * _PEC_PFA
    integrands = {
        "e_pfa": _pfa_plane_integrand(delta, cfg),
        "e_diff": lambda t, y: -_log_one_minus_pemc(y, delta) / (8.0 * math.pi),
        "e_geo": lambda t, y: _geo_bracket(t, y, delta, u, cfg) / (24.0 * math.pi),
    }
    results = dict(
        zip(
            integrands,
            ordered_map(
                lambda f: integrate_plane(f, settings=cfg, atol=atol), integrands.values(), cfg.workers
            ),
        )
    )
    e_pfa, e_diff, e_geo = (results[key].value for key in ("e_pfa", "e_diff", "e_geo"))
    if abs(e_pfa) <= _POLE_RTOL * _PEC_PFA:
        log.warning("E_PFA vanishes at delta=%.9f; beta coefficients are undefined", delta)
        beta_diff = beta_geo = None
    else:
        beta_diff, beta_geo = e_diff / e_pfa, e_geo / e_pfa
    return EnergyBreakdown(
        e_pfa=e_pfa,
        e_diff=e_diff,
        e_geo=e_geo,
        beta_diff=beta_diff,
        beta_geo=beta_geo,
        x=geom.x,
        errors={key: result.error for key, result in results.items()},
    )


# -- plates and forces -------------------------------------------------------


def plate_free_energy(
    pemc: PemcPair,
    temperature: Temperature | None = None,
    distance: float | None = None,
    *,
    settings: NumericsSettings | None = None,
) -> float:
    """Free energy per area of two PEMC plates in units of hbar c / L^3.

    T = 0 gives -C4 / (8 pi^2) with C4 = sum_m cos(2 m delta) / m^4. At finite
    temperature ``distance`` (metres) is required for the reduced spacing.
    """
    _check_delta(pemc.delta)
    cfg = resolve(settings)
    delta = pemc.delta
    if temperature is None or temperature.is_zero:
        return -float(polylog(4, 1.0, 2.0 * delta, settings=cfg)) / (8.0 * math.pi**2)
    if distance is None:
        raise DomainError("finite-temperature plate energy needs the plate distance")
    tau = temperature.reduced(distance)

    def term(x: np.ndarray) -> np.ndarray:
        return x * _pemc_re_polylog(2, x, delta, cfg) + 0.5 * _pemc_re_polylog(3, x, delta, cfg)

    zero = 0.5 * float(term(np.asarray(0.0)))
    partials = [zero]
    start = 1
    while True:
        values = term(np.arange(start, start + _MATSUBARA_BLOCK, dtype=float) * tau)
        partials.append(math.fsum(values))
        start += _MATSUBARA_BLOCK
        if abs(values[-1]) <= cfg.matsubara_rtol * max(abs(math.fsum(partials)), abs(zero)):
            break
        if start > cfg.matsubara_cap:
            raise ConvergenceError(f"plate Matsubara sum not converged (tau = {tau})")
    return -tau * math.fsum(partials) / (4.0 * math.pi**2)


def casimir_force_pfa(
    geom: Geometry,
    pemc: PemcPair,
    temperature: Temperature | None = None,
    *,
    settings: NumericsSettings | None = None,
) -> float:
    """PFA force F = 2 pi R_eff F_PP(L) in units of hbar c R_eff / L^3 (negative is attractive)."""
    return 2.0 * math.pi * plate_free_energy(pemc, temperature, geom.distance, settings=settings)


def pfa_roundtrip_contributions(delta: float, r_max: int) -> np.ndarray:
    """PFA energy of the r-th round trip, -cos(2 r delta) / (8 pi r^4), for r = 1 ... r_max."""
    _check_delta(delta)
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    r = np.arange(1, r_max + 1, dtype=float)
    return -np.cos(2.0 * r * delta) / (8.0 * math.pi * r**4)
