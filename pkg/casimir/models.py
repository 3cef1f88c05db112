"""Records exchanged by the command line: run configurations, results and oracle reports."""

from __future__ import annotations

import hashlib
import json
import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, computed_field, field_validator, model_validator

Command = Literal["compute", "sweep-delta", "sweep-x", "ntlo", "mie-check", "oracle"]
OutputFormat = Literal["csv", "json"]

_HALF_PI = 0.5 * math.pi


class RunConfig(BaseModel):
    """Effective inputs of one command after config-file and flag merging."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    command: Command
    r1: float = 1.0
    r2: float = math.inf
    distance: float = 1e-3
    theta1: float = 0.0
    theta2: float = 0.0
    n: float | None = None
    temperature: float = 0.0
    tol: float | None = None
    fmt: OutputFormat = "csv"
    parameters: dict[str, float | int | str | list[float] | list[str]] = {}

    @field_validator("r1", "r2", "distance")
    @classmethod
    def _positive_length(cls, value: float) -> float:
        if not value > 0.0:
            raise ValueError("lengths must be positive")
        return value

    @field_validator("theta1", "theta2")
    @classmethod
    def _material_angle(cls, value: float) -> float:
        if not 0.0 <= value <= _HALF_PI + 1e-15:
            raise ValueError("material angles must lie in [0, pi/2]")
        return value

    @field_validator("temperature")
    @classmethod
    def _temperature(cls, value: float) -> float:
        if not (value >= 0.0 and math.isfinite(value)):
            raise ValueError("temperature must be finite and non-negative")
        return value

    @field_validator("n")
    @classmethod
    def _refractive_index(cls, value: float | None) -> float | None:
        if value is not None and not value > 1.0:
            raise ValueError("refractive index must exceed 1")
        return value

    @field_validator("tol")
    @classmethod
    def _tolerance(cls, value: float | None) -> float | None:
        if value is not None and not 0.0 < value < 1.0:
            raise ValueError("tolerance must lie in (0, 1)")
        return value

    @model_validator(mode="after")
    def _geometry(self) -> "RunConfig":
        if math.isinf(self.r1) and math.isinf(self.r2):
            raise ValueError("at least one radius must be finite")
        if self.theta2 < self.theta1:
            raise ValueError("material angles must be ordered theta1 <= theta2")
        return self


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON form of ``config``.

    Same config, same hash forever: keys are sorted and infinities are
    written as JSON constants.
    """
    canonical = json.dumps(config.model_dump(mode="python"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


class Quantity(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    value: float | None
    unit: str


class ResultRecord(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    command: Command
    config_hash: str
    inputs: dict[str, Quantity]
    results: dict[str, Quantity]
    references: dict[str, Quantity] = {}
    errors: dict[str, float] = {}
    flags: list[str] = []
    timing_s: float | None = None


class SuiteResult(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    name: str
    passed: bool
    measured: dict[str, float]
    criteria: dict[str, str] = {}
    message: str = ""


class OracleReport(BaseModel):
    config_hash: str
    suites: list[SuiteResult]
    timing_s: float | None = None

    @computed_field
    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)
