"""Brute-force and closed-form consistency suites run by ``app.py oracle``.

Each suite returns a :class:`SuiteResult` with the measured errors and the
criteria they were held to; a failing suite never raises.
"""

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np

from casimir.asymptotics import (
    BETA_3_2_ANALYTIC,
    NUMERICAL_FIT_SLOPE,
    beta_coefficients,
    bessel_roundtrip_sum,
    e1_closed,
    e_pfa_closed,
    extrapolate_sqrt_coefficient,
    fit_ntlo_expansion,
)
from casimir.energy import Geometry, casimir_energy_pfa, casimir_energy_with_corrections
from casimir.materials import PemcPair, PerfectConductor, Polarization, ReflectionMatrix
from casimir.models import SuiteResult
from casimir.roundtrip import brute_force_roundtrips, p_function, roundtrip_tail_bound, single_roundtrip
from casimir.specfun import jonquiere, polylog, polylog_imag
from casimir.spherescatter import (
    ExpansionOrder,
    ScatteringKinematics,
    mie_oracle_pec,
    wkb_amplitude,
)
from config.settings import NumericsSettings, resolve

log = logging.getLogger(__name__)

DELTAS = (0.0, 0.3, 0.25 * math.pi, 1.2, 0.5 * math.pi)
U_VALUES = (0.0, 0.16, 0.25)
MIE_SIZES = (25.0, 50.0, 100.0, 200.0, 400.0)
MIE_S = 1.25


def roundtrip_suite(samples: int = 100, seed: int = 7, settings: NumericsSettings | None = None) -> SuiteResult:
    """Path enumeration against matrix powers and the closed -log det form."""
    rng = np.random.default_rng(seed)
    worst_paths = 0.0
    worst_tail = 0.0
    for _ in range(samples):
        r1 = ReflectionMatrix(rng.uniform(-0.5, 0.5, (2, 2)))
        r2 = ReflectionMatrix(rng.uniform(-0.5, 0.5, (2, 2)))
        srt = single_roundtrip(r1, r2, rng.uniform(0.01, 2.0))
        enumerated = brute_force_roundtrips(srt, 5, method="enumerate")
        powered = brute_force_roundtrips(srt, 5, method="matrix_power")
        worst_paths = max(worst_paths, abs(enumerated - powered))
        radius = srt.spectral_radius
        if radius < 0.9:
            truncated = brute_force_roundtrips(srt, 30, method="matrix_power")
            excess = abs(p_function(srt) - truncated) - roundtrip_tail_bound(radius, 30)
            worst_tail = max(worst_tail, excess)
    passed = worst_paths <= 1e-12 and worst_tail <= 1e-14
    return SuiteResult(
        name="roundtrip",
        passed=passed,
        measured={"max_path_error": worst_paths, "max_tail_excess": worst_tail},
        criteria={"max_path_error": "<= 1e-12", "max_tail_excess": "<= 1e-14"},
    )


def mie_wkb_deviations(
    sizes: tuple[float, ...] = MIE_SIZES, s: float = MIE_S, settings: NumericsSettings | None = None
) -> dict[Polarization, dict[str, np.ndarray]]:
    """Relative deviation of the WKB amplitude from the Mie sum, with and without the correction."""
    kin = ScatteringKinematics(s)
    cfg = resolve(settings)
    out: dict[Polarization, dict[str, np.ndarray]] = {}
    for p in (Polarization.TM, Polarization.TE):
        rows = {"mie": [], "leading": [], "corrected": []}
        for xi in sizes:
            mie = mie_oracle_pec(p, p, xi, kin.mu, settings=cfg)
            for key, order in (
                ("leading", ExpansionOrder.LEADING_ONLY),
                ("corrected", ExpansionOrder.WITH_FIRST_CORRECTION),
            ):
                wkb = wkb_amplitude(p, p, xi, kin, PerfectConductor(), order).as_log_scaled()
                rows[key].append(abs(wkb.ratio(mie) - 1.0))
            rows["mie"].append(mie.log_abs)
        out[p] = {key: np.array(values) for key, values in rows.items()}
    return out


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def mie_wkb_suite(settings: NumericsSettings | None = None) -> SuiteResult:
    deviations = mie_wkb_deviations(settings=settings)
    sizes = np.array(MIE_SIZES)
    measured = {}
    passed = True
    for p, rows in deviations.items():
        leading = loglog_slope(sizes, rows["leading"])
        corrected = loglog_slope(sizes, rows["corrected"])
        measured[f"slope_leading_{p.name}"] = leading
        measured[f"slope_corrected_{p.name}"] = corrected
        passed &= abs(leading + 1.0) <= 0.15 and abs(corrected + 2.0) <= 0.2
    return SuiteResult(
        name="mie_wkb",
        passed=passed,
        measured=measured,
        criteria={"slope_leading": "-1.0 +- 0.15", "slope_corrected": "-2.0 +- 0.2"},
    )


def pfa_closed_suite(settings: NumericsSettings | None = None) -> SuiteResult:
    geom = Geometry(math.inf, 1.0, 1e-3)
    worst = 0.0
    for delta in DELTAS:
        numeric = casimir_energy_pfa(geom, PemcPair.from_delta(delta), settings=settings)
        exact = e_pfa_closed(delta)
        worst = max(worst, abs(numeric - exact) / abs(exact))
    return SuiteResult(
        name="pfa_closed_form",
        passed=worst <= 1e-7,
        measured={"max_relative_error": worst},
        criteria={"max_relative_error": "<= 1e-7"},
    )


def beta_suite(settings: NumericsSettings | None = None) -> SuiteResult:
    worst_diff = worst_geo = 0.0
    for delta in DELTAS:
        for u in U_VALUES:
            ratio = math.inf if u == 0.0 else _ratio_for_u(u)
            geom = Geometry.from_aspect(1e-3, ratio)
            numeric = casimir_energy_with_corrections(geom, PemcPair.from_delta(delta), settings=settings)
            exact = beta_coefficients(delta, geom.u)
            worst_diff = max(worst_diff, abs(numeric.beta_diff / exact.beta_diff - 1.0))
            worst_geo = max(worst_geo, abs(numeric.beta_geo / exact.beta_geo - 1.0))
    return SuiteResult(
        name="beta_quadrature",
        passed=max(worst_diff, worst_geo) <= 1e-6,
        measured={"beta_diff_relative_error": worst_diff, "beta_geo_relative_error": worst_geo},
        criteria={"beta_diff_relative_error": "<= 1e-6", "beta_geo_relative_error": "<= 1e-6"},
    )


def _ratio_for_u(u: float) -> float:
    """Radius ratio R1/R2 >= 1 with R1 R2 / (R1 + R2)^2 = u."""
    q = 1.0 / u - 2.0
    return 0.5 * (q + math.sqrt(q * q - 4.0))


def bessel_suite(settings: NumericsSettings | None = None) -> SuiteResult:
    z = 1e-6
    value = bessel_roundtrip_sum(z, method="direct", settings=settings).value
    leading = z * (value + math.pi**2 / 12.0)
    leading_error = abs(leading / (math.pi**4 / 720.0) - 1.0)
    coefficient = extrapolate_sqrt_coefficient()
    coefficient_error = abs(coefficient / (2.0 * math.pi / 3.0) - 1.0)
    return SuiteResult(
        name="bessel_roundtrip",
        passed=leading_error <= 5e-3 and coefficient_error <= 3e-2,
        measured={"leading_relative_error": leading_error, "sqrt_coefficient": coefficient},
        criteria={"leading_relative_error": "<= 5e-3", "sqrt_coefficient": "2 pi / 3 within 3%"},
    )


def ntlo_suite(settings: NumericsSettings | None = None) -> SuiteResult:
    fit = fit_ntlo_expansion(settings=settings)
    beta_error = abs(fit.beta_3_2 / BETA_3_2_ANALYTIC - 1.0)
    linear_error = abs(fit.beta1 / (-15.0 / math.pi**2) - 1.0)
    fraction = BETA_3_2_ANALYTIC / NUMERICAL_FIT_SLOPE
    return SuiteResult(
        name="ntlo",
        passed=beta_error <= 0.02 and linear_error <= 1e-3 and 0.87 <= fraction <= 0.90,
        measured={"beta_3_2": fit.beta_3_2, "beta1": fit.beta1, "fraction_of_fit": fraction},
        criteria={"beta_3_2": "within 2%", "beta1": "-15/pi^2 within 0.1%", "fraction_of_fit": "[0.87, 0.90]"},
    )


def identity_suite(samples: int = 50, seed: int = 11, settings: NumericsSettings | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst_jonquiere = 0.0
    for z in rng.uniform(0.0, 1.0, samples):
        phase = 2.0 * math.pi * z
        for n in (2, 3):
            expected = jonquiere(n, z)
            if n % 2 == 0:
                value = 2.0 * polylog(n, 1.0, phase, settings=settings)
                error = abs(value - expected.real)
            else:
                value = 2.0 * polylog_imag(n, 1.0, phase, settings=settings)
                error = abs(value - expected.imag)
            worst_jonquiere = max(worst_jonquiere, error)
    worst_e1 = 0.0
    for delta, u in zip(rng.uniform(0.0, 0.5 * math.pi, 1000), rng.uniform(0.0, 0.25, 1000)):
        betas = beta_coefficients(delta, u)
        if betas.at_pole:
            continue
        product = e_pfa_closed(delta) * betas.beta1
        worst_e1 = max(worst_e1, abs(product - e1_closed(delta, u)) / max(abs(e1_closed(delta, u)), 1e-3))
    return SuiteResult(
        name="identities",
        passed=worst_jonquiere <= 1e-12 and worst_e1 <= 1e-12,
        measured={"jonquiere_max_error": worst_jonquiere, "e1_product_max_error": worst_e1},
        criteria={"jonquiere_max_error": "<= 1e-12", "e1_product_max_error": "<= 1e-12"},
    )


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "roundtrip": roundtrip_suite,
    "mie_wkb": mie_wkb_suite,
    "pfa_closed_form": pfa_closed_suite,
    "beta_quadrature": beta_suite,
    "bessel_roundtrip": bessel_suite,
    "ntlo": ntlo_suite,
    "identities": identity_suite,
}


def run_suites(names: list[str] | None = None, settings: NumericsSettings | None = None) -> list[SuiteResult]:
    results = []
    for name in names or list(SUITES):
        result = SUITES[name](settings=settings)
        log.info("oracle %s: %s", name, "pass" if result.passed else "FAIL")
        results.append(result)
    return results
