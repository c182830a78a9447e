import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from plateau_lab.errors import DegenerateSeminormError
from plateau_lab.seminorm import NormDescriptor, Seminorm2, convex_hull, dual_points
from plateau_lab.volume import (
    ALL_VOLUMES,
    ConvexBody2,
    Ellipse2,
    VolumeDefinition,
    exact_ball,
    inscribed_ellipse_jacobian_dual,
    jacobian,
    jacobian_batch,
    jacobian_of_ball,
    max_inscribed_ellipse,
    min_circum_parallelogram,
    norm_constant,
    polar_body,
    quasi_convexity_test,
    unit_ball,
)

B, HT, MS, IE = (VolumeDefinition.BUSEMANN, VolumeDefinition.HOLMES_THOMPSON, VolumeDefinition.MASS_STAR,
                 VolumeDefinition.INSCRIBED_ELLIPSE)
HEX = NormDescriptor.polygon([(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)])


def random_symmetric_polygon(rng, pairs):
    ang = np.sort(rng.uniform(0, np.pi, pairs))
    r = rng.uniform(0.5, 2.0, pairs)
    half = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    return convex_hull(np.concatenate([half, -half]))


def brute_parallelogram(K, n=720):
    """Minimum of 4 h(a) h(b) / |det(a, b)| over side-normal angle pairs.

    Grid search, then a Nelder-Mead polish from the best grid pair.
    """
    th = np.pi * np.arange(n) / n
    U = np.stack([np.cos(th), np.sin(th)], axis=1)
    h = K.support(U)
    det = np.abs(np.sin(th[:, None] - th[None, :]))
    with np.errstate(divide="ignore"):
        areas = np.where(det > 1e-9, 4 * h[:, None] * h[None, :] / np.maximum(det, 1e-300), np.inf)
    i, j = np.unravel_index(np.argmin(areas), areas.shape)

    def area(t):
        u = np.array([[math.cos(t[0]), math.sin(t[0])], [math.cos(t[1]), math.sin(t[1])]])
        return float(4 * np.prod(K.support(u)) / abs(math.sin(t[0] - t[1])))

    res = minimize(area, [th[i], th[j]], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    return min(res.fun, float(areas[i, j]))


def optimize_inscribed_ellipse(K):
    """Largest centred ellipse L(disc) in K by SLSQP on the factor L."""
    N = K.edge_functionals()

    def neg_logdet(x):
        return -math.log(max(x[0] * x[2], 1e-300))

    cons = {"type": "ineq", "fun": lambda x: 1.0 - np.sum((N @ np.array([[x[0], 0.0], [x[1], x[2]]])) ** 2, axis=1)}
    r = 0.5 / np.abs(N).max()
    res = minimize(neg_logdet, [r, 0.0, r], constraints=[cons], method="SLSQP",
                   options={"ftol": 1e-14, "maxiter": 2000})
    return math.pi * res.x[0] * res.x[2]


def test_sup_and_taxicab_constants():
    # values stated for the sup and taxicab planes
    expected = {
        "linf": {B: math.pi / 4, HT: 2 / math.pi, MS: 1.0, IE: 1.0},
        "l1": {B: math.pi / 2, HT: 4 / math.pi, MS: 2.0, IE: 2.0},
    }
    for name, base in (("linf", NormDescriptor.linf()), ("l1", NormDescriptor.l1())):
        for mu, val in expected[name].items():
            assert norm_constant(mu, base) == pytest.approx(val, abs=1e-12)
            # sampled ball route
            assert jacobian(mu, Seminorm2.identity(base), n_verts=4096) == pytest.approx(val, abs=1e-3)


def test_euclidean_jacobians_are_one():
    s = Seminorm2.identity()
    for mu in ALL_VOLUMES:
        assert jacobian(mu, s, n_verts=4096) == pytest.approx(1.0, abs=1e-6)


def test_regular_hexagon_values():
    # circumradius-1 hexagon: area 3 sqrt3 / 2, polar area 2 sqrt3, best
    # parallelogram 2 sqrt3, inscribed disc radius sqrt3 / 2
    assert norm_constant(B, HEX) == pytest.approx(math.pi / (1.5 * math.sqrt(3)), rel=1e-12)
    assert norm_constant(HT, HEX) == pytest.approx(2 * math.sqrt(3) / math.pi, rel=1e-12)
    assert norm_constant(MS, HEX) == pytest.approx(2 / math.sqrt(3), rel=1e-12)
    assert norm_constant(IE, HEX) == pytest.approx(4 / 3, rel=1e-8)


def test_busemann_exceeds_mass_star_on_hexagon():
    # with the 4 / parallelogram normalisation the two are not ordered
    assert norm_constant(B, HEX) > norm_constant(MS, HEX)
    assert norm_constant(B, NormDescriptor.linf()) < norm_constant(MS, NormDescriptor.linf())
    K = exact_ball(Seminorm2.identity(HEX))
    assert brute_parallelogram(K) == pytest.approx(2 * math.sqrt(3), rel=1e-9)


def test_parallelogram_against_brute_force(rng):
    for _ in range(10):
        K = ConvexBody2(random_symmetric_polygon(rng, int(rng.integers(2, 7))))
        area, V = min_circum_parallelogram(K)
        brute = brute_parallelogram(K)
        assert area <= brute * (1 + 1e-9)
        assert area == pytest.approx(brute, rel=1e-7)
        # K lies inside the returned parallelogram
        P = ConvexBody2(V)
        assert np.all(P.gauge(K.vertices) <= 1 + 1e-9)


def test_inscribed_ellipse_against_slsqp(rng):
    for _ in range(8):
        K = ConvexBody2(random_symmetric_polygon(rng, int(rng.integers(2, 7))))
        E = max_inscribed_ellipse(K)
        assert E.area == pytest.approx(optimize_inscribed_ellipse(K), rel=1e-5)
        u = np.stack([np.cos(np.linspace(0, 2 * np.pi, 500)), np.sin(np.linspace(0, 2 * np.pi, 500))], axis=1)
        assert np.all(E.support(u) <= K.support(u) + 1e-9)


def test_polar_of_square_is_diamond():
    K = ConvexBody2([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    assert polar_body(K).area == pytest.approx(2.0)
    assert polar_body(polar_body(K)).area == pytest.approx(4.0)


def test_ellipse_requires_positive_definite():
    with pytest.raises(ValueError):
        Ellipse2([[1.0, 0.0], [0.0, -1.0]])


def test_degenerate_jacobian_is_zero_and_ball_raises():
    s = Seminorm2(np.array([[1.0, 2.0], [0.5, 1.0]]), NormDescriptor.linf())
    for mu in ALL_VOLUMES:
        assert jacobian(mu, s) == 0.0
    with pytest.raises(DegenerateSeminormError):
        unit_ball(s)


def test_parse_names():
    assert VolumeDefinition.parse("busemann") is B
    assert VolumeDefinition.parse("holmes-thompson") is HT
    with pytest.raises(ValueError):
        VolumeDefinition.parse("lebesgue")


@pytest.mark.parametrize("base", [NormDescriptor.linf(), NormDescriptor.pnorm(3.0), HEX], ids=lambda b: b.label)
def test_ball_route_matches_scaling_route(base, rng):
    for _ in range(5):
        A = rng.normal(size=(2, 2))
        s = Seminorm2(A, base)
        K = exact_ball(s) if base.category == "polyhedral" else unit_ball(s, 4096)
        for mu in ALL_VOLUMES:
            assert jacobian_of_ball(mu, K) == pytest.approx(jacobian(mu, s), rel=1e-5)


def test_sampled_polyhedral_ball_converges(rng):
    # corners cut by the inscribed sample cost first-order accuracy in the polar
    s = Seminorm2(rng.normal(size=(2, 2)), NormDescriptor.linf())
    exact = jacobian(HT, s)
    errs = [abs(jacobian(HT, s, n_verts=n) / exact - 1) for n in (512, 4096)]
    assert errs[1] < errs[0] < 1e-2
    assert errs[1] < 2e-3


def test_dual_ellipse_formula_matches_ball_route(rng):
    base = NormDescriptor.linf(3)
    for _ in range(10):
        A = rng.normal(size=(3, 2))
        dual = inscribed_ellipse_jacobian_dual(dual_points(base, A[None]))[0]
        via_ball = jacobian_of_ball(IE, exact_ball(Seminorm2(A, base)))
        assert dual == pytest.approx(via_ball, rel=1e-9)


def test_rectangular_euclidean_is_gram_root(rng):
    A = rng.normal(size=(6, 3, 2))
    expected = np.sqrt(np.linalg.det(np.einsum("nki,nkj->nij", A, A)))
    for mu in ALL_VOLUMES:
        np.testing.assert_allclose(jacobian_batch(mu, NormDescriptor.euclidean(3), A), expected, rtol=1e-12)


@given(st.integers(0, 10_000))
def test_factor_two_and_santalo_on_random_polygons(seed):
    rng = np.random.default_rng(seed)
    base = NormDescriptor.polygon(random_symmetric_polygon(rng, int(rng.integers(2, 7))))
    vals = {mu: norm_constant(mu, base) for mu in ALL_VOLUMES}
    assert max(vals.values()) <= 2 * min(vals.values()) * (1 + 1e-9)
    assert vals[HT] <= vals[B] * (1 + 1e-9)


@given(st.integers(0, 10_000), st.sampled_from(ALL_VOLUMES))
def test_scaling_equivariance(seed, mu):
    rng = np.random.default_rng(seed)
    base = NormDescriptor.pnorm(float(rng.uniform(1.5, 4.0)))
    A, T = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    lhs = jacobian(mu, Seminorm2(A @ T, base), n_verts=4096)
    rhs = abs(np.linalg.det(T)) * jacobian(mu, Seminorm2(A, base), n_verts=4096)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_quasi_convexity_no_violations():
    for mu in ALL_VOLUMES:
        rep = quasi_convexity_test(mu, np.array([[1.0, 0.2], [0.1, 0.8], [0.3, -0.5]]),
                                   NormDescriptor.linf(3), trials=10)
        assert rep["violations"] == []
        rep = quasi_convexity_test(mu, Seminorm2(np.diag([2.0, 0.5]), NormDescriptor.l1()), trials=10)
        assert rep["violations"] == []
