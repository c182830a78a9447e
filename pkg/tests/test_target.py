import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plateau_lab.errors import ChartStraddleError, DomainError, InfeasibleBoundaryError
from plateau_lab.seminorm import NormDescriptor
from plateau_lab.target import (
    BiDisc,
    EuclideanCone,
    EuclideanSpace,
    JordanBoundary,
    NormedPlane,
    target_from_dict,
)


def test_normed_plane_distance():
    X = NormedPlane(NormDescriptor.linf())
    assert X.distance(np.array([0.0, 0.0]), np.array([1.0, -3.0])) == pytest.approx(3.0)
    assert X.chart_dim == 2


def test_cone_parameter_window():
    with pytest.raises(ValueError):
        EuclideanCone(1.5)
    with pytest.raises(ValueError):
        EuclideanCone(0.0)


def test_cone_distance_by_hand():
    cone = EuclideanCone(0.5)
    # quarter turn of the unrolled sector: chord of a right angle
    assert cone.distance(np.array([1.0, 0.0]), np.array([1.0, math.pi / 2])) == pytest.approx(math.sqrt(2))
    # the angle wraps around the seam at 2 pi r = pi
    assert cone.distance(np.array([1.0, 0.1]), np.array([1.0, math.pi - 0.1])) == pytest.approx(2 * math.sin(0.1))
    assert cone.distance(np.array([0.0, 0.0]), np.array([2.0, 1.0])) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        cone.distance(np.array([1.0, 4.0]), np.array([1.0, 0.0]))


@given(st.floats(0.2, 1.0), st.floats(0.05, 1.0), st.floats(-math.pi, math.pi))
def test_cone_embedding(r, t, ang):
    cone = EuclideanCone(r)
    w = np.array([[t * math.cos(ang), t * math.sin(ang)]])
    # ambient points sit at distance t from the apex
    assert np.linalg.norm(cone.ambient(w)[0]) == pytest.approx(t, rel=1e-12)
    J = cone.ambient_jacobian(w)[0]
    assert np.linalg.det(J.T @ J) == pytest.approx(r * r, rel=1e-9)
    h = 1e-6
    fd = np.stack([(cone.ambient(w + h * e) - cone.ambient(w - h * e))[0] / (2 * h) for e in np.eye(2)], axis=1)
    np.testing.assert_allclose(J, fd, atol=1e-6)


@given(st.floats(0.2, 1.0), st.floats(0.1, 2.0), st.floats(0, 2 * math.pi - 1e-6))
def test_cone_chart_round_trip(r, t, phi_frac):
    cone = EuclideanCone(r)
    tp = np.array([t, phi_frac * r])
    back = cone.from_chart(cone.to_chart(tp))
    assert back[0] == pytest.approx(t)
    d = abs(back[1] - tp[1])
    assert min(d, 2 * math.pi * r - d) == pytest.approx(0.0, abs=1e-9)


def test_cone_circle_length():
    cone = EuclideanCone(0.75)
    c = JordanBoundary.cone_circle(cone, 1.0, n=2048)
    assert c.length == pytest.approx(2 * math.pi * 0.75, rel=1e-5)


def test_bidisc_distances():
    X = BiDisc(NormDescriptor.linf(), 0.95)
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([0.0, 0.0, 2.0])
    # cross the gluing circle where the sup norm is smallest: |g|_inf = 1 / sqrt 2
    assert X.distance(a, b) == pytest.approx(1 / math.sqrt(2) + 0.95, rel=1e-9)
    assert X.distance(a, np.array([0.5, 0.25, 1.0])) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        X.check_domain(np.array([0.0, 0.0, 3.0]))
    with pytest.raises(DomainError):
        X.check_domain(np.array([2.0, 0.0, 1.0]))


def test_bidisc_straddle():
    X = BiDisc(NormDescriptor.linf(), 0.95)
    tri = np.array([[0.0, 0.0, 1.0], [0.5, 0.0, 2.0], [0.0, 0.5, 1.0]])
    with pytest.raises(ChartStraddleError):
        X.triangle_labels(tri)
    # circle points belong to both discs
    tri = np.array([[1.0, 0.0, 1.0], [0.5, 0.0, 2.0], [0.0, 1.0, 1.0]])
    assert X.triangle_labels(tri) == 2


@pytest.mark.parametrize("X", [NormedPlane(NormDescriptor.l1()), EuclideanSpace(3), EuclideanCone(0.5),
                               BiDisc(NormDescriptor.linf(), 0.9)])
def test_descriptor_round_trip(X):
    assert target_from_dict(X.descriptor()).descriptor() == X.descriptor()


def test_jordan_square_and_circle():
    sq = JordanBoundary.square()
    assert sq.length == pytest.approx(8.0)
    circ = JordanBoundary.circle(n=4096)
    assert circ.length == pytest.approx(2 * math.pi, rel=1e-6)
    # constant speed: equal parameter steps cover equal lengths
    t = np.linspace(0, 2 * math.pi, 81)[:-1]
    P = sq.point(t)
    steps = np.max(np.abs(np.roll(P, -1, axis=0) - P), axis=1)
    np.testing.assert_allclose(steps, 8.0 / 80, rtol=1e-9)


def test_jordan_rejects_bad_curves():
    with pytest.raises(InfeasibleBoundaryError):
        JordanBoundary(EuclideanSpace(2), [[0, 0], [1, 1], [1, 0], [0, 1]])
    with pytest.raises(InfeasibleBoundaryError):
        JordanBoundary(EuclideanSpace(2), [[0, 0], [1, 0]])
    with pytest.raises(InfeasibleBoundaryError):
        JordanBoundary(EuclideanSpace(2), [[0, 0], [1, 0], [1, 0], [0, 1]])
