"""Closed-form PEMC coefficients and the resummed diffractive energy.

The first half holds the zero-temperature closed forms in the material-angle
difference ``delta``: E_PFA, beta_diff, beta_geo, E_1 and the angle
``delta_crit`` where E_PFA changes sign.

The second half evaluates the diffractive energy of two perfect conductors
with the diffractive correction kept in the exponent. Each polarization
contributes ``sigma_p * B(sigma_p x)`` with the round-trip sum
``B(z) = sum_r K_2(4 r sqrt(z)) / r^2``; its small-``x`` expansion
``1 - (15/pi^2) x + beta_3/2 x^{3/2}`` is checked against the
numerically integrated form.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.special import kv

from casimir.errors import ConvergenceError, DomainError, PoleError
from casimir.materials import PerfectConductor, Polarization
from casimir.quadrature import gauss_legendre, ordered_map
from casimir.spherescatter import ScatteringKinematics, diffractive_correction
from config.settings import NumericsSettings, resolve

log = logging.getLogger(__name__)

PI = math.pi
EULER_GAMMA = float(np.euler_gamma)

# slope of the x^{3/2} term fitted to the full numerical energy
NUMERICAL_FIT_SLOPE = 2.65
BETA_3_2_ANALYTIC = 15.0 * (10.0 + 3.0 * PI) / (4.0 * PI**3)
TE_SHARE_ANALYTIC = (3.0 * PI / 8.0 + 1.0) / (3.0 * PI / 8.0 + 1.25)
TE_SHARE_REPORTED = 0.90

_BESSEL_TAIL_RTOL = 1e-16
_BESSEL_MAX_TERMS = 10_000_000
_BESSEL_BLOCK = 2048
_POLE_TOL = 1e-12 * PI**4
_NTLO_VALIDITY = 0.1
_LINEAR = {Polarization.TE: -25.0 / (2.0 * PI**2), Polarization.TM: -5.0 / (2.0 * PI**2)}


# -- closed forms ------------------------------------------------------------


def _check_delta(delta: float) -> None:
    if not 0.0 <= delta <= 0.5 * PI + 1e-15:
        raise DomainError(f"delta must lie in [0, pi/2], got {delta}")


def _pfa_polynomial(delta: float) -> float:
    """pi^4 - 30 delta^2 (pi - delta)^2, proportional to -E_PFA."""
    return PI**4 - 30.0 * (delta * (PI - delta)) ** 2


def _diff_polynomial(delta: float) -> float:
    return PI**2 - 6.0 * delta * (PI - delta)


def e_pfa_closed(delta: float) -> float:
    """E_PFA / (hbar c R_eff / L^2) of two PEMC surfaces."""
    _check_delta(delta)
    return -_pfa_polynomial(delta) / (720.0 * PI)


def e1_closed(delta: float, u: float) -> float:
    """Leading correction E_1 / (hbar c / L); finite across delta_crit."""
    _check_delta(delta)
    if not 0.0 <= u <= 0.25:
        raise DomainError(f"u must lie in [0, 1/4], got {u}")
    return (20.0 * _diff_polynomial(delta) - (1.0 / 3.0 - u) * _pfa_polynomial(delta)) / (720.0 * PI)


@dataclass(frozen=True)
class BetaCoefficients:
    """beta_diff, beta_geo and beta_1; ``None`` where E_PFA vanishes (then only ``e1`` is meaningful)."""

    beta_diff: float | None
    beta_geo: float | None
    e1: float
    at_pole: bool = False

    @property
    def beta1(self) -> float | None:
        if self.at_pole:
            return None
        return self.beta_diff + self.beta_geo


def beta_coefficients(delta: float, u: float, *, strict: bool = False) -> BetaCoefficients:
    """Closed-form beta coefficients of the expansion E = E_PFA (1 + beta_1 x).

    Args:
        delta: material-angle difference in [0, pi/2].
        u: radius-ratio parameter R1 R2 / (R1 + R2)^2 in [0, 1/4].
        strict: raise instead of flagging at the pole.

    Raises:
        PoleError: at delta_crit when ``strict`` is set.
    """
    e1 = e1_closed(delta, u)
    denominator = _pfa_polynomial(delta)
    if abs(denominator) < _POLE_TOL:
        if strict:
            raise PoleError(f"beta coefficients diverge at delta = {delta} (E_PFA = 0)")
        log.warning("delta=%.12f is at delta_crit; reporting E_1 = %.12e only", delta, e1)
        return BetaCoefficients(None, None, e1, at_pole=True)
    beta_diff = -15.0 * _diff_polynomial(delta) / denominator
    beta_geo = 1.0 / 3.0 - u + beta_diff / 3.0
    return BetaCoefficients(beta_diff, beta_geo, e1)


def delta_crit(tol: float = 1e-15) -> float:
    """Root of pi^4 = 30 delta^2 (pi - delta)^2 in (0, pi/2) by safeguarded Newton from 0.75."""
    lo, hi = 0.0, 0.5 * PI
    delta = 0.75
    for _ in range(100):
        f = _pfa_polynomial(delta)
        if f > 0.0:
            lo = delta
        else:
            hi = delta
        slope = -60.0 * delta * (PI - delta) * (PI - 2.0 * delta)
        step = f / slope if slope else math.inf
        candidate = delta - step
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - delta) <= tol:
            return candidate
        delta = candidate
    raise ConvergenceError("delta_crit iteration did not converge", estimate=delta)


def delta_crit_radical() -> float:
    """(pi/2) (1 - sqrt(1 - 4/sqrt(30)))."""
    return 0.5 * PI * (1.0 - math.sqrt(1.0 - 4.0 / math.sqrt(30.0)))


# -- round-trip Bessel sum ---------------------------------------------------


@dataclass(frozen=True)
class BesselRoundTripSum:
    z: float
    value: float
    branch: str
    terms: int = 0
    tail_bound: float = 0.0


def bessel_roundtrip_asymptotic(z: float, terms: int = 5) -> float:
    """Small-z expansion of sum_r K_2(4 r sqrt(z)) / r^2.

    Three terms: pi^4/(720 z) - pi^2/12 + (2 pi/3) sqrt(z). Five terms add
    (z/2) log z + (gamma - 3/4 - log pi) z; the remainder is O(z^2 log z).
    """
    if not z > 0.0:
        raise DomainError(f"z must be positive, got {z}")
    if terms not in (3, 5):
        raise DomainError(f"asymptotic expansion supports 3 or 5 terms, got {terms}")
    value = PI**4 / (720.0 * z) - PI**2 / 12.0 + 2.0 * PI / 3.0 * math.sqrt(z)
    if terms == 5:
        value += 0.5 * z * math.log(z) + (EULER_GAMMA - 0.75 - math.log(PI)) * z
    return value


def _bessel_direct(z: float) -> BesselRoundTripSum:
    root = 4.0 * math.sqrt(z)
    ratio_tail = 1.0 / -math.expm1(-root)
    partials: list[float] = []
    start = 1
    while True:
        r = np.arange(start, start + _BESSEL_BLOCK, dtype=float)
        values = kv(2, root * r) / (r * r)
        partials.append(math.fsum(values))
        start += _BESSEL_BLOCK
        total = math.fsum(partials)
        tail = float(values[-1]) * ratio_tail
        if tail <= _BESSEL_TAIL_RTOL * total:
            return BesselRoundTripSum(z, total, "direct", start - 1, tail)
        if start > _BESSEL_MAX_TERMS:
            raise ConvergenceError(
                f"round-trip Bessel sum needs more than {_BESSEL_MAX_TERMS} terms at z = {z}",
                estimate=total,
                error=tail,
            )


def bessel_roundtrip_sum(
    z: float, method: str = "auto", *, settings: NumericsSettings | None = None
) -> BesselRoundTripSum:
    """sum_{r>=1} K_2(4 r sqrt(z)) / r^2.

    ``auto`` sums directly for ``z >= bessel_switch_z`` and uses the
    five-term expansion below it.
    """
    if not z > 0.0:
        raise DomainError(f"z must be positive, got {z}")
    cfg = resolve(settings)
    if method == "auto":
        method = "asymptotic" if z < cfg.bessel_switch_z else "direct"
    if method == "direct":
        return _bessel_direct(z)
    if method == "asymptotic":
        return BesselRoundTripSum(z, bessel_roundtrip_asymptotic(z), "asymptotic")
    raise DomainError(f"unknown method {method!r}")


def branch_overlap(z_grid: np.ndarray | None = None) -> float:
    """Largest relative gap between the direct and five-term values around the switch point."""
    grid = np.geomspace(1e-6, 1e-4, 7) if z_grid is None else np.asarray(z_grid, dtype=float)
    gaps = [
        abs(_bessel_direct(z).value - bessel_roundtrip_asymptotic(z)) / bessel_roundtrip_asymptotic(z)
        for z in grid
    ]
    return max(gaps)


def extrapolate_sqrt_coefficient(z_grid: np.ndarray | None = None) -> float:
    """Coefficient of sqrt(z) in B(z) extracted from direct sums.

    The known pole and constant are removed and the remainder divided by
    sqrt(z) is fitted to ``c + a sqrt(z) log z + b sqrt(z)``; ``c`` tends to
    2 pi / 3.
    """
    grid = np.geomspace(1e-5, 1e-3, 9) if z_grid is None else np.asarray(z_grid, dtype=float)
    if grid.size < 3 or np.any(grid <= 0.0):
        raise DomainError("need at least three positive z values")
    values = np.array([_bessel_direct(z).value for z in grid])
    residual = (values - PI**4 / (720.0 * grid) + PI**2 / 12.0) / np.sqrt(grid)
    basis = np.column_stack([np.ones_like(grid), np.sqrt(grid) * np.log(grid), np.sqrt(grid)])
    coefficients, *_ = np.linalg.lstsq(basis, residual, rcond=None)
    return float(coefficients[0])


# -- resummed diffractive energy ---------------------------------------------


@dataclass(frozen=True)
class SigmaPair:
    """Diffractive exponents sigma_TE = (2 - t^2)/4 and sigma_TM = t^2/4."""

    t: float

    def __post_init__(self) -> None:
        if not 0.0 < self.t <= 1.0:
            raise DomainError(f"t must lie in (0, 1], got {self.t}")

    @property
    def sigma_te(self) -> float:
        return (2.0 - self.t * self.t) / 4.0

    @property
    def sigma_tm(self) -> float:
        return self.t * self.t / 4.0

    def __getitem__(self, polarization: Polarization) -> float:
        return self.sigma_te if polarization == Polarization.TE else self.sigma_tm

    def from_corrections(self) -> tuple[float, float]:
        """(sigma_TE, sigma_TM) recomputed from the PEC diffractive corrections as -s_pp / (2 t)."""
        t = self.t
        kin = ScatteringKinematics.from_t(t)
        te = diffractive_correction(Polarization.TE, Polarization.TE, PerfectConductor(), kin)
        tm = diffractive_correction(Polarization.TM, Polarization.TM, PerfectConductor(), kin)
        return -te / (2.0 * t), -tm / (2.0 * t)


@dataclass(frozen=True)
class NtloEstimate:
    """Resummed diffractive energy of two PEC surfaces at ``x = L / R_eff``.

    ``ratio`` is E / E_PFA for perfect conductors from the numerical t
    integral; ``ratio_te`` and ``ratio_tm`` split it by polarization.
    ``e_lo_spa`` is in units of hbar c R_eff / L^2.
    """

    x: float
    ratio: float
    ratio_te: float
    ratio_tm: float
    e_lo_spa: float
    asymptotic_ratio: float
    beta_3_2_numeric: float
    te_share: float
    share_flag: bool

    @property
    def beta_3_2_analytic(self) -> float:
        return BETA_3_2_ANALYTIC

    @property
    def fraction_of_fit(self) -> float:
        """beta_3/2 relative to the slope fitted to the full numerical energy."""
        return BETA_3_2_ANALYTIC / NUMERICAL_FIT_SLOPE


def _polarization_integrals(x: float, cfg: NumericsSettings) -> tuple[float, float]:
    """(int sigma_TE B(sigma_TE x) dt, int sigma_TM B(sigma_TM x) dt) over [0, 1]."""

    def node_values(t: float) -> tuple[float, float]:
        pair = SigmaPair(t)
        return tuple(
            pair[p] * bessel_roundtrip_sum(pair[p] * x, settings=cfg).value
            for p in (Polarization.TE, Polarization.TM)
        )

    previous = None
    n = 32
    while n <= 1024:
        t, w = gauss_legendre(n)
        values = np.array(ordered_map(node_values, t, cfg.workers))
        estimate = w @ values
        if previous is not None:
            diff = float(np.max(np.abs(estimate - previous)))
            if diff <= cfg.quad_rtol * float(np.sum(estimate)):
                return float(estimate[0]), float(estimate[1])
        previous = estimate
        n *= 2
    raise ConvergenceError(f"resummed diffractive t-integral did not converge at x = {x}")


def ntlo_ratios(x: float, *, settings: NumericsSettings | None = None) -> tuple[float, float]:
    """Per-polarization (TE, TM) contributions to E / E_PFA for perfect conductors."""
    if not x > 0.0:
        raise DomainError(f"x must be positive, got {x}")
    te, tm = _polarization_integrals(x, resolve(settings))
    scale = 360.0 * x / PI**4
    return scale * te, scale * tm


def ntlo_energy(x: float, *, settings: NumericsSettings | None = None) -> NtloEstimate:
    """Resummed diffractive energy with its asymptotic expansion and polarization split."""
    if not x > 0.0:
        raise DomainError(f"x must be positive, got {x}")
    if x > _NTLO_VALIDITY:
        log.warning("x=%.3g is outside the small-distance regime of the expansion", x)
    te, tm = ntlo_ratios(x, settings=settings)
    ratio = te + tm
    x32 = x**1.5
    resid_te = te - 0.5 - _LINEAR[Polarization.TE] * x
    resid_tm = tm - 0.5 - _LINEAR[Polarization.TM] * x
    share = resid_te / (resid_te + resid_tm)
    flag = abs(share - TE_SHARE_REPORTED) > 0.02
    if flag:
        log.warning("TE share of the x^3/2 term is %.4f at x=%.3g, not about %.2f", share, x, TE_SHARE_REPORTED)
    return NtloEstimate(
        x=x,
        ratio=ratio,
        ratio_te=te,
        ratio_tm=tm,
        e_lo_spa=-PI**3 / 720.0 * ratio,
        asymptotic_ratio=1.0 - 15.0 / PI**2 * x + BETA_3_2_ANALYTIC * x32,
        beta_3_2_numeric=(ratio - 1.0 + 15.0 / PI**2 * x) / x32,
        te_share=share,
        share_flag=flag,
    )


@dataclass(frozen=True)
class NtloFit:
    """Least-squares coefficients of E/E_PFA - 1 on [x, x^{3/2}, x^2 log x, x^2]."""

    beta1: float
    beta_3_2: float
    coefficients: np.ndarray
    x_grid: np.ndarray


def fit_ntlo_expansion(
    x_grid: np.ndarray | None = None, *, settings: NumericsSettings | None = None
) -> NtloFit:
    """Fit the linear and x^{3/2} coefficients of the resummed energy on a grid of small x."""
    grid = np.geomspace(1e-5, 1e-3, 9) if x_grid is None else np.asarray(x_grid, dtype=float)
    if grid.size < 4:
        raise DomainError("the expansion fit needs at least four x values")
    ratios = np.array([sum(ntlo_ratios(x, settings=settings)) for x in grid])
    basis = np.column_stack([grid, grid**1.5, grid**2 * np.log(grid), grid**2])
    norms = np.linalg.norm(basis, axis=0)
    scaled, *_ = np.linalg.lstsq(basis / norms, ratios - 1.0, rcond=None)
    coefficients = scaled / norms
    log.info("x-expansion fit: beta1=%.6f beta3/2=%.5f", coefficients[0], coefficients[1])
    return NtloFit(float(coefficients[0]), float(coefficients[1]), coefficients, grid)
