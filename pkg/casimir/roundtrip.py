"""Polarization round-trip algebra at the specular saddle point.

A single round trip between the two spheres is the 2x2 matrix
``A = A0 + (c/xi) A1`` in (TM, TE) space. The leading part
``A0 = R1 R2 e^{-2 kappa L}`` is the planar round trip; ``A1`` collects the
diffractive corrections of both spheres. Summing the round-trip series gives
``P = -log det(I - A)``, expanded here to first order in ``c/xi``.

Lengths (radii and ``c/xi``) only need to share one unit; the energy module
works in units of the surface separation L.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
import logging
import math

import numpy as np
import sympy

from casimir.errors import DomainError
from casimir.materials import EigenPair, Material, ReflectionMatrix, eigen_pair
from casimir.spherescatter import ScatteringKinematics, correction_matrix, leading_reflection

log = logging.getLogger(__name__)

_MAX_ENUMERATION = 5
_MAX_MATRIX_POWER = 30


@dataclass(frozen=True)
class SingleRoundTrip:
    """Leading round-trip matrix ``a``, diffractive matrix ``a1`` and weight e^{-2 kappa L}."""

    a: np.ndarray = field(repr=False)
    a1: np.ndarray = field(repr=False)
    weight: float
    r1: ReflectionMatrix = field(repr=False)
    r2: ReflectionMatrix = field(repr=False)

    @property
    def eigenvalues(self) -> EigenPair:
        return eigen_pair(self.a)

    @property
    def spectral_radius(self) -> float:
        return self.eigenvalues.spectral_radius


@dataclass(frozen=True)
class AlphaCoefficients:
    """Expansion coefficients of ``tr[(I - A0)^-1 A1] = (alpha0 + alpha1) / det(I - A0)``.

    ``alpha0 = tr A1`` and ``alpha1 = tr(A0 A1) - tr A0 tr A1``. They scale
    like ``weight`` and ``weight**2``; the normalized pair strips that.
    """

    alpha0: float
    alpha1: float
    weight: float

    @property
    def normalized(self) -> tuple[float, float]:
        return self.alpha0 / self.weight, self.alpha1 / self.weight**2


def _readonly(matrix: np.ndarray) -> np.ndarray:
    matrix = np.array(matrix, dtype=float)
    matrix.setflags(write=False)
    return matrix


def single_roundtrip(
    r1m: ReflectionMatrix,
    r2m: ReflectionMatrix,
    kappa_l: float,
    *,
    s1: np.ndarray | None = None,
    s2: np.ndarray | None = None,
    radius1: float = math.inf,
    radius2: float = math.inf,
) -> SingleRoundTrip:
    """Single round trip from the two leading reflection matrices.

    Args:
        r1m, r2m: leading reflection matrices of sphere 1 and sphere 2.
        kappa_l: kappa L at the saddle point.
        s1, s2: absolute first-order coefficient matrices ``r s`` of the two
            spheres; omitted spheres contribute no diffractive correction.
        radius1, radius2: sphere radii (``inf`` for a plane).

    Raises:
        DomainError: for non-positive ``kappa_l`` or radii.
    """
    if not kappa_l > 0.0:
        raise DomainError(f"kappa L must be positive, got {kappa_l}")
    if not (radius1 > 0.0 and radius2 > 0.0):
        raise DomainError("radii must be positive")
    weight = math.exp(-2.0 * kappa_l)
    a = r1m.values @ r2m.values * weight
    a1 = np.zeros((2, 2))
    if s1 is not None and math.isfinite(radius1):
        a1 += np.asarray(s1, dtype=float) @ r2m.values / radius1
    if s2 is not None and math.isfinite(radius2):
        a1 += r1m.values @ np.asarray(s2, dtype=float) / radius2
    return SingleRoundTrip(_readonly(a), _readonly(a1 * weight), weight, r1m, r2m)


def sphere_roundtrip(
    material1: Material,
    material2: Material,
    kin: ScatteringKinematics,
    kappa_l: float,
    radius1: float,
    radius2: float,
) -> SingleRoundTrip:
    """Round trip between two spheres with reflection data taken from the WKB asymptotics."""
    return single_roundtrip(
        leading_reflection(material1, kin),
        leading_reflection(material2, kin),
        kappa_l,
        s1=correction_matrix(material1, kin),
        s2=correction_matrix(material2, kin),
        radius1=radius1,
        radius2=radius2,
    )


def alpha_coefficients(srt: SingleRoundTrip) -> AlphaCoefficients:
    alpha0 = float(np.trace(srt.a1))
    alpha1 = float(np.trace(srt.a @ srt.a1) - np.trace(srt.a) * alpha0)
    return AlphaCoefficients(alpha0, alpha1, srt.weight)


def _one_minus_determinant(pair: EigenPair) -> float:
    """det(I - A0) = (1 - lambda1)(1 - lambda2) in real arithmetic."""
    if pair.conjugate:
        m, phi = pair.moduli[0], pair.phases[0]
        # (1 - m)^2 + 4 m sin^2(phi/2) avoids cancellation near lambda = 1
        return (1.0 - m) ** 2 + 4.0 * m * math.sin(0.5 * phi) ** 2
    result = 1.0
    for m, phase in zip(pair.moduli, pair.phases):
        result *= 1.0 - m if phase == 0.0 else 1.0 + m
    return result


def _check_radius(pair: EigenPair) -> None:
    if pair.spectral_radius >= 1.0:
        raise DomainError(f"round-trip spectral radius {pair.spectral_radius} is not below 1")


def p_function(srt: SingleRoundTrip, inverse_xi: float = 0.0) -> float:
    """P = -log det(I - A0), plus ``inverse_xi * tr[(I - A0)^-1 A1]`` when requested.

    ``inverse_xi`` is ``c/xi`` in the length unit of the radii.

    Raises:
        DomainError: if the spectral radius of A0 is not below 1.
    """
    pair = srt.eigenvalues
    _check_radius(pair)
    if pair.conjugate:
        m, phi = pair.moduli[0], pair.phases[0]
        value = -math.log1p(m * m - 2.0 * m * math.cos(phi)) if m < 0.5 else -math.log(_one_minus_determinant(pair))
    else:
        value = -math.fsum(
            math.log1p(-m) if phase == 0.0 else math.log1p(m) for m, phase in zip(pair.moduli, pair.phases)
        )
    if inverse_xi:
        value += inverse_xi * diffractive_trace(srt)
    return value


def diffractive_trace(srt: SingleRoundTrip) -> float:
    """tr[(I - A0)^-1 A1] = (alpha0 + alpha1) / ((1 - lambda1)(1 - lambda2))."""
    pair = srt.eigenvalues
    _check_radius(pair)
    alphas = alpha_coefficients(srt)
    return (alphas.alpha0 + alphas.alpha1) / _one_minus_determinant(pair)


def brute_force_roundtrips(srt: SingleRoundTrip, r_max: int, method: str = "enumerate") -> float:
    """sum_{r <= r_max} tr(A0^r) / r, either by explicit polarization paths or by matrix powers.

    ``"enumerate"`` walks all 2^(2r) polarization sequences p1 ... p2r and
    multiplies the reflection coefficients along each closed path;
    ``"matrix_power"`` takes traces of powers of the round-trip matrix.
    """
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    if method == "enumerate":
        if r_max > _MAX_ENUMERATION:
            raise DomainError(f"path enumeration supports r_max <= {_MAX_ENUMERATION}, got {r_max}")
        r1, r2 = srt.r1.values, srt.r2.values
        terms = []
        for r in range(1, r_max + 1):
            paths = []
            for seq in product((0, 1), repeat=2 * r):
                amplitude = 1.0
                for j in range(r):
                    p, q, nxt = seq[2 * j], seq[2 * j + 1], seq[(2 * j + 2) % (2 * r)]
                    amplitude *= r1[p, q] * r2[q, nxt]
                paths.append(amplitude)
            terms.append(math.fsum(paths) * srt.weight**r / r)
        return math.fsum(terms)
    if method == "matrix_power":
        if r_max > _MAX_MATRIX_POWER:
            raise DomainError(f"matrix-power oracle supports r_max <= {_MAX_MATRIX_POWER}, got {r_max}")
        return math.fsum(
            float(np.trace(np.linalg.matrix_power(srt.a, r))) / r for r in range(1, r_max + 1)
        )
    raise DomainError(f"unknown method {method!r}")


def h_coefficients(srt: SingleRoundTrip, r_max: int) -> np.ndarray:
    """h_r^{p'p} for r = 1 ... r_max: the matrix elements of A0^r, shape (r_max, 2, 2)."""
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    out = np.empty((r_max, 2, 2))
    out[0] = srt.a
    for r in range(1, r_max):
        out[r] = srt.a @ out[r - 1]
    return out


def roundtrip_tail_bound(spectral_radius: float, r_max: int) -> float:
    """Bound on |P - sum_{r <= r_max} tr(A0^r)/r| for a diagonalizable A0."""
    if not 0.0 <= spectral_radius < 1.0:
        raise DomainError("tail bound needs a spectral radius in [0, 1)")
    return 2.0 * spectral_radius ** (r_max + 1) / ((r_max + 1) * (1.0 - spectral_radius))


def generating_function(matrix) -> tuple[sympy.Matrix, sympy.Symbol]:
    """H(tau) = tau A (I - tau A)^-1, whose Taylor coefficients are the h_r."""
    tau = sympy.Symbol("tau")
    a = sympy.Matrix(matrix)
    return sympy.simplify(tau * a * (sympy.eye(2) - tau * a).inv()), tau


def generating_function_series(matrix, r_max: int) -> list[sympy.Matrix]:
    """Taylor coefficients of H(tau) up to tau^r_max as exact sympy matrices."""
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    h, tau = generating_function(matrix)
    expanded = h.applyfunc(lambda entry: sympy.series(entry, tau, 0, r_max + 1).removeO())
    return [expanded.applyfunc(lambda entry, r=r: sympy.expand(entry).coeff(tau, r)) for r in range(1, r_max + 1)]
