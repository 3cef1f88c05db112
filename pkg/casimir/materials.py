"""Plane-surface reflection matrices and the planar round-trip matrix.

Matrices are 2x2 in polarization space with the index order (TM, TE).
Kinematics at the saddle point are carried by ``t = xi / (c kappa)`` in
(0, 1]; a :class:`SpectralPoint` converts SI values to ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
import logging
import math
from typing import Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from casimir.errors import DomainError

log = logging.getLogger(__name__)

_HALF_PI = 0.5 * math.pi


class Polarization(IntEnum):
    """Polarization index into the 2x2 matrices."""

    TM = 0
    TE = 1


@dataclass(frozen=True)
class PerfectConductor:
    """Perfect electric conductor (PEMC with theta = 0)."""


@dataclass(frozen=True)
class Pemc:
    """Perfect electromagnetic conductor with material angle ``theta``."""

    theta: float

    def __post_init__(self) -> None:
        _check_angle(self.theta, "theta")


@dataclass(frozen=True)
class Dielectric:
    """Non-magnetic dielectric with a frequency-independent refractive index."""

    n: float

    def __post_init__(self) -> None:
        if not self.n > 1.0:
            raise DomainError(f"refractive index must exceed 1, got {self.n}")


Material = Union[PerfectConductor, Pemc, Dielectric]


def _check_angle(theta: float, name: str) -> None:
    if not 0.0 <= theta <= _HALF_PI + 1e-15:
        raise DomainError(f"{name} must lie in [0, pi/2], got {theta}")


@dataclass(frozen=True)
class PemcPair:
    """Material angles of the two surfaces; ``delta = theta2 - theta1``."""

    theta1: float
    theta2: float

    def __post_init__(self) -> None:
        _check_angle(self.theta1, "theta1")
        _check_angle(self.theta2, "theta2")
        if self.theta2 < self.theta1:
            raise DomainError(
                f"material angles must be ordered theta1 <= theta2, got {self.theta1} > {self.theta2}"
            )

    @classmethod
    def from_delta(cls, delta: float) -> "PemcPair":
        """Pair (0, delta): a PEC surface facing a PEMC surface at angle delta."""
        return cls(0.0, delta)

    @property
    def delta(self) -> float:
        return self.theta2 - self.theta1

    @property
    def is_identical(self) -> bool:
        return self.delta == 0.0

    @property
    def is_boyer(self) -> bool:
        return math.isclose(self.delta, _HALF_PI, rel_tol=0.0, abs_tol=1e-15)


@dataclass(frozen=True)
class SpectralPoint:
    """Imaginary frequency ``xi`` (rad/s) and transverse wavenumber ``k`` (1/m)."""

    xi: float
    k: float

    def __post_init__(self) -> None:
        if self.xi < 0.0 or self.k < 0.0:
            raise DomainError("xi and k must be non-negative")
        if self.xi == 0.0 and self.k == 0.0:
            raise DomainError("xi and k cannot both vanish")

    @property
    def kappa(self) -> float:
        if self.xi == 0.0:
            return self.k
        return math.hypot(self.xi / SPEED_OF_LIGHT, self.k)

    @property
    def t(self) -> float:
        """xi / (c kappa), in [0, 1]."""
        return self.xi / (SPEED_OF_LIGHT * self.kappa)

    @classmethod
    def from_t(cls, t: float, kappa: float) -> "SpectralPoint":
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"t must lie in [0, 1], got {t}")
        return cls(xi=t * kappa * SPEED_OF_LIGHT, k=kappa * math.sqrt(1.0 - t * t))


@dataclass(frozen=True)
class ReflectionMatrix:
    """2x2 reflection matrix indexed by (TM, TE)."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (2, 2):
            raise DomainError(f"reflection matrix must be 2x2, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __getitem__(self, index: tuple[Polarization, Polarization]) -> float:
        return float(self.values[index])

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.values))

    def is_orthogonal(self, atol: float = 1e-14) -> bool:
        return bool(np.allclose(self.values @ self.values.T, np.eye(2), rtol=0.0, atol=atol))


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalues of a real 2x2 matrix as (modulus, phase) pairs.

    A complex-conjugate pair has equal moduli and phases +phi, -phi; a real
    pair has phases 0 (positive) or pi (negative).
    """

    moduli: tuple[float, float]
    phases: tuple[float, float]
    conjugate: bool

    def as_complex(self) -> np.ndarray:
        return np.array([m * np.exp(1j * p) for m, p in zip(self.moduli, self.phases)])

    @property
    def spectral_radius(self) -> float:
        return max(self.moduli)


def eigen_pair(matrix: np.ndarray) -> EigenPair:
    """Eigenvalues of a real 2x2 matrix from its trace and determinant."""
    trace = float(matrix[0, 0] + matrix[1, 1])
    det = float(matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0])
    disc = 0.25 * trace * trace - det
    if disc < 0.0:
        modulus = math.sqrt(det)
        phase = math.atan2(math.sqrt(-disc), 0.5 * trace)
        return EigenPair((modulus, modulus), (phase, -phase), conjugate=True)
    root = math.sqrt(disc)
    lam1 = 0.5 * trace + root
    lam2 = 0.5 * trace - root
    if lam1 != 0.0 and abs(lam2) < 0.25 * abs(lam1):
        lam2 = det / lam1
    return EigenPair(
        (abs(lam1), abs(lam2)),
        (0.0 if lam1 >= 0.0 else math.pi, 0.0 if lam2 >= 0.0 else math.pi),
        conjugate=False,
    )


@dataclass(frozen=True)
class RoundTripMatrix:
    """Planar round-trip matrix A0 = R1 R2 e^{-2 kappa L}."""

    matrix: np.ndarray = field(repr=False)
    weight: float
    eigenvalues: EigenPair

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))


def plane_reflection_pemc(theta: float) -> ReflectionMatrix:
    """Leading-order reflection matrix of a plane PEMC surface.

    ``theta = 0`` is a perfect electric conductor, ``theta = pi/2`` a perfect
    magnetic conductor; the matrix is orthogonal with determinant -1.
    """
    _check_angle(theta, "theta")
    cos2, sin2 = math.cos(2.0 * theta), math.sin(2.0 * theta)
    return ReflectionMatrix(np.array([[cos2, -sin2], [-sin2, -cos2]]))


def fresnel_coefficients(n: float, t: float | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fresnel coefficients (r_TM, r_TE) at imaginary frequency for ``t = xi/(c kappa)``.

    With ``kappa_n / kappa = sqrt(1 + (n^2 - 1) t^2)`` inside the medium,
    ``r_TM = (n^2 - q) / (n^2 + q)`` and ``r_TE = (1 - q) / (1 + q)``.
    """
    if not n > 1.0:
        raise DomainError(f"refractive index must exceed 1, got {n}")
    t = np.asarray(t, dtype=float)
    q = np.sqrt(1.0 + (n * n - 1.0) * t * t)
    n2 = n * n
    return (n2 - q) / (n2 + q), (1.0 - q) / (1.0 + q)


def plane_reflection_dielectric(n: float, sp: SpectralPoint) -> ReflectionMatrix:
    """Diagonal Fresnel matrix at the kinematics of ``sp`` (requires xi > 0)."""
    if sp.xi <= 0.0:
        raise DomainError("dielectric reflection requires xi > 0")
    r_tm, r_te = fresnel_coefficients(n, sp.t)
    return ReflectionMatrix(np.diag([float(r_tm), float(r_te)]))


def plane_reflection(material: Material, t: float) -> ReflectionMatrix:
    """Leading plane reflection matrix for any supported material."""
    if isinstance(material, PerfectConductor):
        return plane_reflection_pemc(0.0)
    if isinstance(material, Pemc):
        return plane_reflection_pemc(material.theta)
    if isinstance(material, Dielectric):
        r_tm, r_te = fresnel_coefficients(material.n, t)
        return ReflectionMatrix(np.diag([float(r_tm), float(r_te)]))
    raise DomainError(f"unsupported material {material!r}")


def roundtrip_matrix(r1m: ReflectionMatrix, r2m: ReflectionMatrix, kappa_l: float) -> RoundTripMatrix:
    """A0 = R1 R2 e^{-2 kappa L} with its eigenvalues in (modulus, phase) form."""
    if not kappa_l > 0.0:
        raise DomainError(f"kappa L must be positive, got {kappa_l}")
    weight = math.exp(-2.0 * kappa_l)
    matrix = r1m.values @ r2m.values * weight
    matrix.setflags(write=False)
    return RoundTripMatrix(matrix=matrix, weight=weight, eigenvalues=eigen_pair(matrix))
