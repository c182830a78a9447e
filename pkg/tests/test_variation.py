import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plateau_lab.errors import DeformationDegenerateError, DomainError
from plateau_lab.mesh import make_disc_mesh
from plateau_lab.plmap import affine_map, identity_map
from plateau_lab.seminorm import NormDescriptor, Seminorm2, compose, q_factor
from plateau_lab.solve import LocalDeformation, john_map, variation_test
from plateau_lab.solve.variation import StarConformalMap, triangle_disc_overlap
from plateau_lab.target import EuclideanSpace, NormedPlane


def sl2(a, ang):
    c, s = math.cos(ang), math.sin(ang)
    R = np.array([[c, -s], [s, c]])
    return R @ np.diag([a, 1 / a]) @ R.T


@given(st.floats(1.0, 3.0), st.floats(0, math.pi), st.floats(0.05, 0.4))
def test_local_deformation_inverse_and_seam(a, ang, r):
    rho = LocalDeformation((0.1, -0.2), r, sl2(a, ang))
    rng = np.random.default_rng(0)
    Z = rng.uniform(-1, 1, size=(200, 2))
    np.testing.assert_allclose(rho.inverse(rho(Z)), Z, atol=1e-9)
    # inner and outer formulas agree on the circle
    th = np.linspace(0, 2 * np.pi, 50)
    circ = np.array([0.1, -0.2]) + r * np.stack([np.cos(th), np.sin(th)], axis=1)
    inner = np.array([0.1, -0.2]) + (circ - np.array([0.1, -0.2])) @ np.linalg.inv(sl2(a, ang)).T
    np.testing.assert_allclose(rho(circ * (1 + 1e-12) - np.array([0.1, -0.2]) * 1e-12), inner, atol=1e-8)


def test_local_deformation_rejects_bad_T():
    with pytest.raises(DeformationDegenerateError):
        LocalDeformation((0, 0), 0.2, np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        LocalDeformation((0, 0), 0.2, np.diag([2.0, 2.0]))


def test_john_map_conformalises_euclidean_seminorms(rng):
    for _ in range(5):
        s = Seminorm2(rng.normal(size=(2, 2)))
        T = john_map(s)
        assert np.linalg.det(T) == pytest.approx(1.0)
        assert q_factor(compose(s, T)) == pytest.approx(1.0, abs=1e-9)


def test_john_map_of_square_is_a_rotation():
    T = john_map(Seminorm2.identity(NormDescriptor.linf()))
    np.testing.assert_allclose(T.T @ T, np.eye(2), atol=1e-6)


def test_triangle_disc_overlap_sums_to_disc_area():
    m = make_disc_mesh(4)
    P = m.vertices[m.triangles]
    total = triangle_disc_overlap(P, (0.2, -0.1), 0.35).sum()
    assert total == pytest.approx(math.pi * 0.35**2, rel=1e-12)
    # triangle fully inside
    tri = np.array([[[0.0, 0.0], [0.1, 0.0], [0.0, 0.1]]])
    assert triangle_disc_overlap(tri, (0, 0), 1.0)[0] == pytest.approx(0.005)


def test_affine_variation_exact_value():
    # E_+ density drops from 4 to 1 on the ball when T undoes diag(2, 1/2)
    L = np.diag([2.0, 0.5])
    u = affine_map(make_disc_mesh(4), EuclideanSpace(2), L)
    T = john_map(Seminorm2(L))
    rep = variation_test(u, (0.0, 0.0), 0.3, T, direct=False)
    assert rep["delta_energy_plus"] == pytest.approx(-3 * math.pi * 0.09, rel=1e-9)
    assert rep["injective"]
    assert rep["outside_conformal"]


def test_affine_variation_direct_route_agrees():
    L = np.diag([2.0, 0.5])
    u = affine_map(make_disc_mesh(4), EuclideanSpace(2), L)
    rep = variation_test(u, (0.0, 0.0), 0.3, john_map(Seminorm2(L)))
    assert rep["delta_direct"] < 0
    assert rep["delta_direct"] == pytest.approx(rep["delta_energy_plus"], rel=0.05)


def test_conformal_map_is_stationary():
    u = identity_map(make_disc_mesh(4), EuclideanSpace(2))
    for T in (sl2(1.3, 0.0), sl2(1.1, 1.0)):
        assert variation_test(u, (0.2, 0.1), 0.3, T, direct=False)["delta_energy_plus"] > 0


def test_ball_must_fit_inside_disc():
    u = identity_map(make_disc_mesh(2), NormedPlane(NormDescriptor.linf()))
    with pytest.raises(DomainError):
        variation_test(u, (0.8, 0.0), 0.3, np.eye(2), direct=False)


def test_theodorsen_map_of_an_offset_disc():
    # the conformal radius of the unit disc seen from a point at distance d is 1 - d^2
    d = 0.3

    def bd(s):
        return np.stack([d + np.cos(s), np.sin(s)], axis=1)

    phi = StarConformalMap(bd, np.zeros(2))
    assert phi.boundary_residual(bd) < 1e-6
    h = 1e-5
    grad = (phi(np.array([[h, 0.0]])) - phi(np.array([[-h, 0.0]])))[0] / (2 * h)
    assert np.hypot(*grad) == pytest.approx(1 - d * d, rel=1e-6)
