"""Command-line front end.

Every command builds a :class:`RunConfig` from flags (and an optional flat
``key=value`` config file given with ``--config``), runs the computation and
writes one CSV or JSON document to stdout or ``--out``. Exit codes: 0 on
success, 2 for invalid input, 3 for numerical failures and failing oracle
suites.
"""

from __future__ import annotations

import csv
import functools
import io
import logging
import math
from pathlib import Path
import time

import click
import numpy as np
from pydantic import ValidationError

from casimir.asymptotics import (
    BETA_3_2_ANALYTIC,
    NUMERICAL_FIT_SLOPE,
    TE_SHARE_ANALYTIC,
    beta_coefficients,
    delta_crit,
    e1_closed,
    e_pfa_closed,
    fit_ntlo_expansion,
    ntlo_energy,
    ntlo_ratios,
)
from casimir.energy import (
    Geometry,
    Temperature,
    casimir_energy_pfa,
    casimir_energy_pfa_general,
    casimir_energy_with_corrections,
    casimir_force_pfa,
    correction_unit,
    diffractive_energy_general,
    pfa_unit,
)
from casimir.errors import CasimirError, DomainError
from casimir.log_setup import setup_logging
from casimir.materials import Dielectric, PemcPair
from casimir.models import OracleReport, Quantity, ResultRecord, RunConfig, config_hash
from casimir.oracle import MIE_S, MIE_SIZES, SUITES, loglog_slope, mie_wkb_deviations, run_suites
from config.settings import LOG_LEVEL, get_settings
from env_config import read_config_file

log = logging.getLogger(__name__)

PFA_UNIT = "hbar*c*R_eff/L^2"
CORRECTION_UNIT = "hbar*c/L"
FORCE_UNIT = "hbar*c*R_eff/L^3"
DIMENSIONLESS = "1"

# config-file keys that differ from parameter names
_KEY_ALIASES = {"l": "distance", "t": "temperature", "format": "fmt"}


class InvalidInput(click.ClickException):
    exit_code = 2


class NumericalFailure(click.ClickException):
    exit_code = 3


def _fmt(value: float) -> str:
    return f"{value:.11e}"


def _csv(header: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def _table(header: list[str], rows: list[list], digest: str) -> str:
    """CSV table with the run's config hash repeated in the last column."""
    return _csv([*header, "config_hash"], [[*row, digest] for row in rows])


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
    else:
        click.echo(text, nl=False)


def _guarded(func):
    """Map library errors to the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (DomainError, ValidationError) as exc:
            raise InvalidInput(str(exc)) from exc
        except CasimirError as exc:
            raise NumericalFailure(str(exc)) from exc

    return wrapper


def _settings(config: RunConfig):
    return get_settings().with_overrides(quad_rtol=config.tol)


def _inputs(config: RunConfig) -> dict[str, Quantity]:
    inputs = {
        "R1": Quantity(value=config.r1, unit="m"),
        "R2": Quantity(value=config.r2, unit="m"),
        "L": Quantity(value=config.distance, unit="m"),
        "theta1": Quantity(value=config.theta1, unit="rad"),
        "theta2": Quantity(value=config.theta2, unit="rad"),
        "T": Quantity(value=config.temperature, unit="K"),
    }
    if config.n is not None:
        inputs["n"] = Quantity(value=config.n, unit=DIMENSIONLESS)
    return inputs


def _record_csv(record: ResultRecord) -> str:
    rows = [["config_hash", record.config_hash, ""]]
    for section in (record.inputs, record.results, record.references):
        for key, quantity in section.items():
            rows.append([key, math.nan if quantity.value is None else float(quantity.value), quantity.unit])
    for flag in record.flags:
        rows.append(["flag", flag, ""])
    if record.timing_s is not None:
        rows.append(["timing", float(record.timing_s), "s"])
    return _csv(["quantity", "value", "unit"], rows)


def _write_record(record: ResultRecord, config: RunConfig, out: str | None) -> None:
    text = record.model_dump_json(indent=2) + "\n" if config.fmt == "json" else _record_csv(record)
    _emit(text, out)


def geometry_options(func):
    options = [
        click.option("--R1", "r1", type=float, default=1.0, show_default=True, help="Radius of sphere 1 (m)."),
        click.option("--R2", "r2", type=float, default=math.inf, show_default=True, help="Radius of sphere 2 (m), inf for a plane."),
        click.option("--L", "distance", type=float, default=1e-3, show_default=True, help="Surface separation (m)."),
        click.option("--theta1", type=float, default=0.0, show_default=True, help="PEMC angle of surface 1 (rad)."),
        click.option("--theta2", type=float, default=0.0, show_default=True, help="PEMC angle of surface 2 (rad)."),
        click.option("--n", "n", type=float, default=None, help="Refractive index of two dielectric spheres."),
        click.option("--T", "temperature", type=float, default=0.0, show_default=True, help="Temperature (K)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def output_options(func):
    options = [
        click.option("--tol", type=float, default=None, help="Relative quadrature tolerance."),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout)."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
        click.option("--timing/--no-timing", default=False, help="Record wall-clock time."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Flat key=value file with option defaults.")
@click.option("--log-level", default=LOG_LEVEL, show_default=True, help="Logging level.")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None, log_level: str) -> None:
    """Casimir energies of spheres in the plane-wave scattering formalism."""
    try:
        setup_logging(log_level)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    if config_path:
        values = {_KEY_ALIASES.get(key, key): value for key, value in read_config_file(config_path).items()}
        ctx.default_map = {name: values for name in cli.commands}


@cli.command()
@geometry_options
@output_options
@_guarded
def compute(r1, r2, distance, theta1, theta2, n, temperature, tol, out, fmt, timing):
    """Energy with PFA, diffractive and geometric parts for one geometry."""
    started = time.perf_counter()
    config = RunConfig(
        command="compute", r1=r1, r2=r2, distance=distance, theta1=theta1, theta2=theta2,
        n=n, temperature=temperature, tol=tol, fmt=fmt,
    )
    settings = _settings(config)
    geom = Geometry(config.r1, config.r2, config.distance)
    log.info("compute: R_eff=%.4g L=%.4g x=%.4g u=%.4f", geom.r_eff, geom.distance, geom.x, geom.u)
    results: dict[str, Quantity] = {
        "x": Quantity(value=geom.x, unit=DIMENSIONLESS),
        "u": Quantity(value=geom.u, unit=DIMENSIONLESS),
    }
    references: dict[str, Quantity] = {}
    errors: dict[str, float] = {}
    flags: list[str] = []

    if config.n is not None:
        flags.extend(_compute_dielectric(geom, config, settings, results))
    else:
        pemc = PemcPair(config.theta1, config.theta2)
        temp = Temperature(config.temperature)
        if temp.is_zero:
            errors, pemc_flags = _compute_pemc(geom, pemc, settings, results, references)
            flags.extend(pemc_flags)
        else:
            e_pfa = casimir_energy_pfa(geom, pemc, temp, settings=settings)
            force = casimir_force_pfa(geom, pemc, temp, settings=settings)
            results["e_pfa"] = Quantity(value=e_pfa, unit=PFA_UNIT)
            results["e_pfa_si"] = Quantity(value=e_pfa * pfa_unit(geom), unit="J")
            results["force_pfa"] = Quantity(value=force, unit=FORCE_UNIT)
            results["tau"] = Quantity(value=temp.reduced(geom.distance), unit=DIMENSIONLESS)
            flags.append("corrections_zero_temperature_only")

    record = ResultRecord(
        command="compute",
        config_hash=config_hash(config),
        inputs=_inputs(config),
        results=results,
        references=references,
        errors=errors,
        flags=flags,
        timing_s=time.perf_counter() - started if timing else None,
    )
    _write_record(record, config, out)


def _compute_pemc(geom, pemc, settings, results, references):
    breakdown = casimir_energy_with_corrections(geom, pemc, settings=settings)
    results["e_pfa"] = Quantity(value=breakdown.e_pfa, unit=PFA_UNIT)
    results["e_diff"] = Quantity(value=breakdown.e_diff, unit=CORRECTION_UNIT)
    results["e_geo"] = Quantity(value=breakdown.e_geo, unit=CORRECTION_UNIT)
    results["e1"] = Quantity(value=breakdown.e1, unit=CORRECTION_UNIT)
    for key, value in breakdown.to_joules(geom).items():
        results[f"{key}_si"] = Quantity(value=value, unit="J")
    results["beta_diff"] = Quantity(value=breakdown.beta_diff, unit=DIMENSIONLESS)
    results["beta_geo"] = Quantity(value=breakdown.beta_geo, unit=DIMENSIONLESS)
    results["beta1"] = Quantity(value=breakdown.beta1, unit=DIMENSIONLESS)
    results["force_pfa"] = Quantity(value=casimir_force_pfa(geom, pemc, settings=settings), unit=FORCE_UNIT)

    betas = beta_coefficients(pemc.delta, geom.u)
    references["e_pfa_closed"] = Quantity(value=e_pfa_closed(pemc.delta), unit=PFA_UNIT)
    references["e1_closed"] = Quantity(value=betas.e1, unit=CORRECTION_UNIT)
    references["beta_diff_closed"] = Quantity(value=betas.beta_diff, unit=DIMENSIONLESS)
    references["beta_geo_closed"] = Quantity(value=betas.beta_geo, unit=DIMENSIONLESS)
    references["beta1_closed"] = Quantity(value=betas.beta1, unit=DIMENSIONLESS)

    flags = []
    if breakdown.beta1 is None:
        log.warning("E_PFA vanishes at delta=%.9f; E_1 is the leading contribution", pemc.delta)
        flags.append("e_pfa_vanishes_e1_dominant")
    if geom.x > 0.1:
        flags.append("x_outside_small_distance_regime")
    return breakdown.errors, flags


def _compute_dielectric(geom, config, settings, results):
    if config.temperature > 0.0:
        raise DomainError("dielectric spheres are supported at T = 0 only")
    material = Dielectric(config.n)
    e_pfa = casimir_energy_pfa_general(geom, material, material, settings=settings)
    e_diff = diffractive_energy_general(geom, material, material, settings=settings)
    results["e_pfa"] = Quantity(value=e_pfa, unit=PFA_UNIT)
    results["e_pfa_si"] = Quantity(value=e_pfa * pfa_unit(geom), unit="J")
    results["e_diff"] = Quantity(value=e_diff, unit=CORRECTION_UNIT)
    results["e_diff_si"] = Quantity(value=e_diff * correction_unit(geom), unit="J")
    results["beta_diff"] = Quantity(value=e_diff / e_pfa, unit=DIMENSIONLESS)
    return ["geometric_correction_pemc_only"]


def _parse_ratios(text: str) -> list[float]:
    try:
        ratios = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise DomainError(f"ratios must be numbers or inf, got {text!r}") from exc
    if not ratios or any(not r > 0.0 for r in ratios):
        raise DomainError("ratios must be positive")
    return ratios


def _u_from_ratio(ratio: float) -> float:
    return 0.0 if math.isinf(ratio) else ratio / (1.0 + ratio) ** 2


@cli.command("sweep-delta")
@click.option("--points", type=click.IntRange(min=2), default=31, show_default=True, help="Grid points on [0, pi/2].")
@click.option("--ratios", default="1,4,10,inf", show_default=True, help="Comma-separated R1/R2 values.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def sweep_delta(points, ratios, out):
    """E_1(delta) curves for several radius ratios; all pass through delta_crit."""
    ratio_list = _parse_ratios(ratios)
    config = RunConfig(command="sweep-delta", parameters={"points": points, "ratios": [str(r) for r in ratio_list]})
    grid = sorted(set(np.linspace(0.0, 0.5 * math.pi, points).tolist()) | {delta_crit()})
    rows = []
    for ratio in ratio_list:
        u = _u_from_ratio(ratio)
        for delta in grid:
            betas = beta_coefficients(delta, u)
            beta1 = "pole" if betas.at_pole else betas.beta1
            rows.append([delta, "inf" if math.isinf(ratio) else float(ratio), u, e1_closed(delta, u), e_pfa_closed(delta), beta1])
    digest = config_hash(config)
    log.info("sweep-delta: %d rows (%s)", len(rows), digest[:12])
    _emit(_table(["delta", "ratio", "u", "e1", "e_pfa", "beta1"], rows, digest), out)


@cli.command("sweep-x")
@click.option("--x-min", type=float, default=1e-5, show_default=True)
@click.option("--x-max", type=float, default=1e-3, show_default=True)
@click.option("--points", type=click.IntRange(min=2), default=9, show_default=True)
@click.option("--tol", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def sweep_x(x_min, x_max, points, tol, out):
    """E/E_PFA - 1 - beta_diff x of the resummed PEC energy on a log grid of x."""
    if not 0.0 < x_min < x_max <= 0.1:
        raise DomainError("x grid must satisfy 0 < x-min < x-max <= 0.1")
    config = RunConfig(command="sweep-x", tol=tol, parameters={"x_min": x_min, "x_max": x_max, "points": points})
    settings = _settings(config)
    beta_diff = -15.0 / math.pi**2
    xs = np.geomspace(x_min, x_max, points)
    rows = []
    corrections = []
    for x in xs:
        ratio = sum(ntlo_ratios(float(x), settings=settings))
        correction = ratio - 1.0 - beta_diff * x
        corrections.append(correction)
        rows.append([float(x), ratio, correction, BETA_3_2_ANALYTIC * x**1.5, NUMERICAL_FIT_SLOPE * x**1.5])
    log.info("sweep-x: log-log slope %.4f", loglog_slope(xs, np.abs(corrections)))
    _emit(_table(["x", "ratio", "correction", "analytic_x32", "fit_x32"], rows, config_hash(config)), out)


@cli.command()
@click.option("--x", "x", type=float, default=1e-4, show_default=True, help="L / R_eff.")
@click.option("--fit/--no-fit", default=False, help="Also fit beta1 and beta_3/2 on x in [1e-5, 1e-3].")
@output_options
@_guarded
def ntlo(x, fit, tol, out, fmt, timing):
    """Resummed diffractive energy of perfect conductors and its x^{3/2} coefficient."""
    started = time.perf_counter()
    config = RunConfig(command="ntlo", tol=tol, fmt=fmt, parameters={"x": x, "fit": str(fit)})
    settings = _settings(config)
    estimate = ntlo_energy(x, settings=settings)
    results = {
        "ratio": Quantity(value=estimate.ratio, unit=DIMENSIONLESS),
        "ratio_te": Quantity(value=estimate.ratio_te, unit=DIMENSIONLESS),
        "ratio_tm": Quantity(value=estimate.ratio_tm, unit=DIMENSIONLESS),
        "e_lo_spa": Quantity(value=estimate.e_lo_spa, unit=PFA_UNIT),
        "asymptotic_ratio": Quantity(value=estimate.asymptotic_ratio, unit=DIMENSIONLESS),
        "beta_3_2_numeric": Quantity(value=estimate.beta_3_2_numeric, unit=DIMENSIONLESS),
        "te_share": Quantity(value=estimate.te_share, unit=DIMENSIONLESS),
    }
    if fit:
        fitted = fit_ntlo_expansion(settings=settings)
        results["beta1_fit"] = Quantity(value=fitted.beta1, unit=DIMENSIONLESS)
        results["beta_3_2_fit"] = Quantity(value=fitted.beta_3_2, unit=DIMENSIONLESS)
    references = {
        "beta_3_2_analytic": Quantity(value=BETA_3_2_ANALYTIC, unit=DIMENSIONLESS),
        "numerical_fit_slope": Quantity(value=NUMERICAL_FIT_SLOPE, unit=DIMENSIONLESS),
        "fraction_of_fit": Quantity(value=estimate.fraction_of_fit, unit=DIMENSIONLESS),
        "te_share_analytic": Quantity(value=TE_SHARE_ANALYTIC, unit=DIMENSIONLESS),
    }
    record = ResultRecord(
        command="ntlo",
        config_hash=config_hash(config),
        inputs={"x": Quantity(value=x, unit=DIMENSIONLESS)},
        results=results,
        references=references,
        flags=["te_share_differs_from_reported"] if estimate.share_flag else [],
        timing_s=time.perf_counter() - started if timing else None,
    )
    _write_record(record, config, out)


@cli.command("mie-check")
@click.option("--s", "s", type=float, default=MIE_S, show_default=True, help="sin(Theta/2) >= 1.")
@click.option("--sizes", default=",".join(str(int(v)) for v in MIE_SIZES), show_default=True,
              help="Comma-separated size parameters in [1, 500].")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def mie_check(s, sizes, out):
    """Deviation of the WKB amplitude from the PEC Mie sum versus size parameter."""
    try:
        size_list = tuple(float(v) for v in sizes.split(",") if v.strip())
    except ValueError as exc:
        raise DomainError(f"sizes must be numbers, got {sizes!r}") from exc
    if len(size_list) < 2:
        raise DomainError("need at least two size parameters")
    config = RunConfig(command="mie-check", parameters={"s": s, "sizes": list(size_list)})
    deviations = mie_wkb_deviations(size_list, s)
    rows = []
    for p, values in deviations.items():
        for xi, leading, corrected in zip(size_list, values["leading"], values["corrected"]):
            rows.append([xi, p.name, float(leading), float(corrected)])
        log.info(
            "mie-check %s: slopes %.3f (leading) %.3f (corrected)",
            p.name,
            loglog_slope(np.array(size_list), values["leading"]),
            loglog_slope(np.array(size_list), values["corrected"]),
        )
    _emit(_table(["xi_tilde", "polarization", "deviation_leading", "deviation_corrected"], rows, config_hash(config)), out)


@cli.command()
@click.option("--suite", "suites", multiple=True, type=click.Choice(sorted(SUITES)),
              help="Suite to run (repeatable); default all.")
@click.option("--tol", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@click.option("--timing/--no-timing", default=False)
@_guarded
def oracle(suites, tol, out, fmt, timing):
    """Brute-force and closed-form consistency suites."""
    started = time.perf_counter()
    names = list(suites) or None
    config = RunConfig(command="oracle", tol=tol, fmt=fmt, parameters={"suites": list(suites)})
    results = run_suites(names, settings=_settings(config))
    report = OracleReport(
        config_hash=config_hash(config),
        suites=results,
        timing_s=time.perf_counter() - started if timing else None,
    )
    if fmt == "json":
        text = report.model_dump_json(indent=2) + "\n"
    else:
        rows = [
            [suite.name, str(suite.passed).lower(), key, float(value)]
            for suite in report.suites
            for key, value in suite.measured.items()
        ]
        text = _table(["suite", "passed", "metric", "value"], rows, report.config_hash)
    _emit(text, out)
    if not report.passed:
        failed = ", ".join(suite.name for suite in report.suites if not suite.passed)
        raise NumericalFailure(f"oracle suites failed: {failed}")
