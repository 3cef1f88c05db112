"""Numerical defaults for the Casimir library.

Every value can be overridden through a ``CASIMIR_*`` environment variable
(``env_config`` loads a ``.env`` file first, so the variables may live there).
Library entry points take an optional ``settings=`` argument; when it is
omitted they use the cached snapshot returned by :func:`get_settings`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
import os

LOG_LEVEL = os.getenv("CASIMIR_LOG_LEVEL", "INFO")


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be a number, got {raw!r}") from exc


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class NumericsSettings:
    """Tolerances, caps and branch switches shared by the numerical modules."""

    quad_rtol: float = 1e-12
    quad_max_level: int = 9
    polylog_series_radius: float = 0.75
    series_rtol: float = 1e-18
    series_cap: int = 200_000
    matsubara_rtol: float = 1e-13
    matsubara_cap: int = 2_000_000
    bessel_switch_z: float = 1e-5
    degenerate_rtol: float = 1e-6
    workers: int = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.quad_rtol < 1.0:
            raise ValueError("quad_rtol must lie in (0, 1)")
        if self.quad_max_level < 1:
            raise ValueError("quad_max_level must be positive")
        if not 0.0 < self.polylog_series_radius < 1.0:
            raise ValueError("polylog_series_radius must lie in (0, 1)")
        if self.series_cap < 1 or self.matsubara_cap < 1:
            raise ValueError("series caps must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @classmethod
    def from_env(cls) -> "NumericsSettings":
        base = cls()
        return cls(
            quad_rtol=_env_float("CASIMIR_QUAD_RTOL", base.quad_rtol),
            quad_max_level=_env_int("CASIMIR_QUAD_MAX_LEVEL", base.quad_max_level),
            polylog_series_radius=_env_float(
                "CASIMIR_POLYLOG_SERIES_RADIUS", base.polylog_series_radius
            ),
            series_rtol=_env_float("CASIMIR_SERIES_RTOL", base.series_rtol),
            series_cap=_env_int("CASIMIR_SERIES_CAP", base.series_cap),
            matsubara_rtol=_env_float("CASIMIR_MATSUBARA_RTOL", base.matsubara_rtol),
            matsubara_cap=_env_int("CASIMIR_MATSUBARA_CAP", base.matsubara_cap),
            bessel_switch_z=_env_float("CASIMIR_BESSEL_SWITCH_Z", base.bessel_switch_z),
            degenerate_rtol=_env_float("CASIMIR_DEGENERATE_RTOL", base.degenerate_rtol),
            workers=_env_int("CASIMIR_WORKERS", base.workers),
        )

    def with_overrides(self, **changes) -> "NumericsSettings":
        """Copy with the given fields replaced; ``None`` values are ignored."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


@lru_cache(maxsize=1)
def get_settings() -> NumericsSettings:
    return NumericsSettings.from_env()


def resolve(settings: NumericsSettings | None) -> NumericsSettings:
    return settings if settings is not None else get_settings()
