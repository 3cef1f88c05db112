import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.constants import c as SPEED_OF_LIGHT

from casimir.errors import DomainError
from casimir.materials import (
    Dielectric,
    Pemc,
    PemcPair,
    PerfectConductor,
    Polarization,
    ReflectionMatrix,
    SpectralPoint,
    eigen_pair,
    fresnel_coefficients,
    plane_reflection,
    plane_reflection_dielectric,
    plane_reflection_pemc,
    roundtrip_matrix,
)

TM, TE = Polarization.TM, Polarization.TE


def test_pemc_limits():
    assert np.allclose(plane_reflection_pemc(0.0).values, np.diag([1.0, -1.0]))
    assert np.allclose(plane_reflection_pemc(0.5 * math.pi).values, np.diag([-1.0, 1.0]), atol=1e-15)
    assert np.allclose(plane_reflection_pemc(0.25 * math.pi).values, [[0.0, -1.0], [-1.0, 0.0]], atol=1e-15)


@given(st.floats(min_value=0.0, max_value=0.5 * math.pi))
def test_pemc_matrix_is_a_reflection(theta):
    r = plane_reflection_pemc(theta)

    assert r.is_orthogonal()
    assert r.determinant == pytest.approx(-1.0, abs=1e-14)
    assert r[TE, TM] == r[TM, TE] == pytest.approx(-math.sin(2.0 * theta), abs=1e-15)


def test_pemc_angle_out_of_range():
    with pytest.raises(DomainError):
        plane_reflection_pemc(2.0)
    with pytest.raises(DomainError):
        Pemc(-0.1)


def test_pemc_pair_ordering_and_flags():
    pair = PemcPair(0.2, 0.2)
    assert pair.is_identical
    assert PemcPair.from_delta(0.5 * math.pi).is_boyer
    assert PemcPair(0.1, 0.4).delta == pytest.approx(0.3)
    with pytest.raises(DomainError):
        PemcPair(0.4, 0.1)


def test_spectral_point_kinematics():
    sp = SpectralPoint.from_t(0.6, 2.0e6)

    assert sp.kappa == pytest.approx(2.0e6, rel=1e-14)
    assert sp.t == pytest.approx(0.6, rel=1e-14)
    assert sp.kappa >= max(sp.xi / SPEED_OF_LIGHT, sp.k)
    assert SpectralPoint(xi=0.0, k=3.0).kappa == 3.0


def test_spectral_point_rejects_negative_values():
    with pytest.raises(DomainError):
        SpectralPoint(xi=-1.0, k=0.0)
    with pytest.raises(DomainError):
        SpectralPoint.from_t(1.5, 1.0)


def test_dielectric_normal_incidence():
    n = 3.0
    sp = SpectralPoint(xi=1e15, k=0.0)

    r = plane_reflection_dielectric(n, sp)

    assert r[TM, TM] == pytest.approx((n - 1.0) / (n + 1.0), rel=1e-14)
    assert r[TE, TE] == pytest.approx(-(n - 1.0) / (n + 1.0), rel=1e-14)
    assert r[TM, TE] == 0.0


def test_dielectric_against_wavevector_form():
    n = 2.0
    sp = SpectralPoint.from_t(0.6, 1.0e7)
    kappa = math.hypot(sp.xi / SPEED_OF_LIGHT, sp.k)
    kappa_n = math.sqrt((n * sp.xi / SPEED_OF_LIGHT) ** 2 + sp.k**2)

    r = plane_reflection_dielectric(n, sp)

    assert r[TM, TM] == pytest.approx((n * n * kappa - kappa_n) / (n * n * kappa + kappa_n), rel=1e-13)
    assert r[TE, TE] == pytest.approx((kappa - kappa_n) / (kappa + kappa_n), rel=1e-13)
    assert -1.0 < r[TE, TE] < 0.0 < r[TM, TM] < 1.0


def test_dielectric_approaches_perfect_conductor():
    gaps = []
    for n in (10.0, 1e2, 1e4):
        r_tm, r_te = fresnel_coefficients(n, 0.7)
        gaps.append(max(1.0 - float(r_tm), 1.0 + float(r_te)))

    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


def test_dielectric_requires_positive_frequency_and_index():
    with pytest.raises(DomainError):
        plane_reflection_dielectric(2.0, SpectralPoint(xi=0.0, k=1.0))
    with pytest.raises(DomainError):
        Dielectric(0.9)


def test_plane_reflection_dispatch():
    assert np.allclose(plane_reflection(PerfectConductor(), 0.5).values, np.diag([1.0, -1.0]))
    assert np.allclose(plane_reflection(Pemc(0.3), 0.5).values, plane_reflection_pemc(0.3).values)
    r_tm, r_te = fresnel_coefficients(4.0, 0.5)
    assert np.allclose(plane_reflection(Dielectric(4.0), 0.5).values, np.diag([r_tm, r_te]))


@pytest.mark.parametrize("delta", [0.0, 0.3, 0.25 * math.pi, 1.2, 0.5 * math.pi])
def test_two_pemc_roundtrip_eigenvalues(delta):
    kappa_l = 0.7
    w = math.exp(-2.0 * kappa_l)

    a0 = roundtrip_matrix(plane_reflection_pemc(0.0), plane_reflection_pemc(delta), kappa_l)

    assert a0.weight == pytest.approx(w, rel=1e-15)
    assert a0.trace == pytest.approx(2.0 * math.cos(2.0 * delta) * w, abs=1e-15)
    assert a0.determinant == pytest.approx(w * w, rel=1e-14)
    expected = np.sort_complex(np.array([w * np.exp(2j * delta), w * np.exp(-2j * delta)]))
    assert np.allclose(np.sort_complex(a0.eigenvalues.as_complex()), expected, atol=1e-7 * w)
    assert a0.eigenvalues.spectral_radius == pytest.approx(w, rel=1e-12)


def test_two_conductors_have_double_eigenvalue():
    a0 = roundtrip_matrix(plane_reflection_pemc(0.0), plane_reflection_pemc(0.0), 0.25)

    assert not a0.eigenvalues.conjugate
    assert a0.eigenvalues.phases == (0.0, 0.0)
    assert a0.eigenvalues.moduli == pytest.approx((math.exp(-0.5), math.exp(-0.5)), rel=1e-15)


@given(st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=4, max_size=4))
def test_eigen_pair_matches_direct_decomposition(entries):
    matrix = np.array(entries).reshape(2, 2)

    got = np.sort_complex(eigen_pair(matrix).as_complex())
    expected = np.sort_complex(np.linalg.eigvals(matrix).astype(complex))

    assert np.allclose(got, expected, atol=1e-7)


def test_roundtrip_rejects_nonpositive_distance():
    r = plane_reflection_pemc(0.0)
    with pytest.raises(DomainError):
        roundtrip_matrix(r, r, 0.0)


def test_reflection_matrix_shape_and_immutability():
    with pytest.raises(DomainError):
        ReflectionMatrix(np.eye(3))
    r = ReflectionMatrix(np.eye(2))
    with pytest.raises(ValueError):
        r.values[0, 0] = 3.0
