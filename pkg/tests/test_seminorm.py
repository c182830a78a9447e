import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize_scalar

from plateau_lab.seminorm import (
    NormDescriptor,
    Seminorm2,
    compose,
    convex_hull,
    degenerate_mask,
    dual_points,
    i_avg,
    i_avg_batch,
    i_plus,
    i_plus_batch,
    q_factor,
    q_factor_batch,
    seminorm_distance,
)

HEX = [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]
BASES = [
    NormDescriptor.euclidean(),
    NormDescriptor.linf(),
    NormDescriptor.l1(),
    NormDescriptor.pnorm(3.0),
    NormDescriptor.polygon(HEX),
    NormDescriptor.ellipse([[2.0, 0.3], [0.3, 1.0]]),
]

matrices = arrays(np.float64, (2, 2), elements=st.floats(-3, 3, allow_nan=False))


def dense_oracle(base, A, n=1 << 15):
    """Brute-force extremes and average of s^2 on the unit circle.

    Extremes are polished with a bounded scalar search around the best grid
    angle, since minima of polyhedral seminorms sit on kinks.
    """
    A = np.asarray(A)

    def s(t):
        return float(base(np.array([math.cos(t), math.sin(t)]) @ A.T))

    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    v = base(np.stack([np.cos(th), np.sin(th)], axis=1) @ A.T)
    h = 2 * np.pi / n
    t_hi, t_lo = th[np.argmax(v)], th[np.argmin(v)]
    vmax = -minimize_scalar(lambda t: -s(t), bounds=(t_hi - 2 * h, t_hi + 2 * h), method="bounded",
                            options={"xatol": 1e-13}).fun
    vmin = minimize_scalar(s, bounds=(t_lo - 2 * h, t_lo + 2 * h), method="bounded", options={"xatol": 1e-13}).fun
    return vmax**2, 2 * np.mean(v**2), vmax / vmin


def test_norm_values():
    x = np.array([[3.0, -4.0]])
    assert NormDescriptor.euclidean()(x)[0] == pytest.approx(5.0)
    assert NormDescriptor.linf()(x)[0] == pytest.approx(4.0)
    assert NormDescriptor.l1()(x)[0] == pytest.approx(7.0)
    assert NormDescriptor.pnorm(3.0)(x)[0] == pytest.approx((27 + 64) ** (1 / 3))
    assert NormDescriptor.square()(x)[0] == pytest.approx(4.0)


def test_polygon_must_be_symmetric():
    with pytest.raises(ValueError):
        NormDescriptor.polygon([(1, 0), (0, 1), (-1, 0.5), (0, -1)])


def test_identity_and_zero():
    assert i_plus(Seminorm2.identity()) == pytest.approx(1.0)
    assert i_avg(Seminorm2.identity()) == pytest.approx(2.0)
    assert Seminorm2.zero().is_degenerate
    assert not Seminorm2.identity().is_degenerate


@pytest.mark.parametrize("base", BASES, ids=lambda b: b.label)
def test_batch_against_dense_grid(base, rng):
    A = rng.normal(size=(5, base.dim, 2))
    ip = i_plus_batch(base, A)
    ia = i_avg_batch(base, A)
    q = q_factor_batch(base, A)
    for k in range(5):
        op, oa, oq = dense_oracle(base, A[k])
        assert ip[k] == pytest.approx(op, rel=1e-6)
        assert ia[k] == pytest.approx(oa, rel=1e-4)
        assert q[k] == pytest.approx(oq, rel=1e-7)


def test_euclidean_closed_forms(rng):
    A = rng.normal(size=(20, 2, 2))
    sv = np.linalg.svd(A, compute_uv=False)
    base = NormDescriptor.euclidean()
    np.testing.assert_allclose(i_plus_batch(base, A), sv[:, 0] ** 2, rtol=1e-10)
    np.testing.assert_allclose(i_avg_batch(base, A), np.sum(A * A, axis=(1, 2)), rtol=1e-10)
    np.testing.assert_allclose(q_factor_batch(base, A), sv[:, 0] / sv[:, 1], rtol=1e-8)


def test_linf_i_plus_is_largest_row(rng):
    A = rng.normal(size=(20, 2, 2))
    expected = np.max(np.sum(A * A, axis=2), axis=1)
    np.testing.assert_allclose(i_plus_batch(NormDescriptor.linf(), A), expected, rtol=1e-12)


def test_linf_identity_q_is_sqrt2():
    assert q_factor(Seminorm2.identity(NormDescriptor.linf())) == pytest.approx(math.sqrt(2))


def test_degenerate_detection():
    A = np.array([[[1.0, 2.0], [2.0, 4.0]], [[1.0, 0.0], [0.0, 1.0]]])
    np.testing.assert_array_equal(degenerate_mask(A), [True, False])
    assert q_factor(Seminorm2(A[0])) == math.inf
    assert q_factor(Seminorm2.zero()) == 1.0


@given(matrices)
def test_sandwich_property(A):
    for base in BASES:
        if base.dim != 2:
            continue
        ip = i_plus_batch(base, A[None])[0]
        ia = i_avg_batch(base, A[None])[0]
        scale = max(ia, 1e-12)
        assert 0.5 * ia <= ip + 1e-9 * scale
        assert ip <= ia + 1e-9 * scale


@given(matrices, st.floats(0.1, 5.0))
def test_homogeneity(A, t):
    base = NormDescriptor.linf()
    a = i_plus_batch(base, A[None])[0]
    assert i_plus_batch(base, (t * A)[None])[0] == pytest.approx(t * t * a, rel=1e-9, abs=1e-12)


@given(matrices, st.floats(0, 2 * math.pi))
def test_rotation_invariance_of_euclidean_quantities(A, ang):
    R = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    base = NormDescriptor.euclidean()
    for f in (i_plus_batch, i_avg_batch):
        assert f(base, (A @ R)[None])[0] == pytest.approx(f(base, A[None])[0], rel=1e-9, abs=1e-9)


def test_compose_and_distance(rng):
    s = Seminorm2(rng.normal(size=(2, 2)), NormDescriptor.l1())
    T = rng.normal(size=(2, 2))
    v = rng.normal(size=(10, 2))
    np.testing.assert_allclose(compose(s, T)(v), s(v @ T.T))
    assert seminorm_distance(s, s) == pytest.approx(0.0, abs=1e-12)
    assert seminorm_distance(s, compose(s, 2 * np.eye(2))) > 0


def test_dual_points_are_transposed_facets(rng):
    base = NormDescriptor.linf()
    A = rng.normal(size=(1, 2, 2))
    g = dual_points(base, A)[0]
    expected = np.concatenate([A[0].T, -A[0].T], axis=1).T
    assert sorted(map(tuple, np.round(g, 12))) == sorted(map(tuple, np.round(expected, 12)))


def test_convex_hull_square():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [0.2, 0.7]])
    H = convex_hull(pts)
    assert len(H) == 4
    x, y = H[:, 0], H[:, 1]
    assert 0.5 * (x @ np.roll(y, -1) - y @ np.roll(x, -1)) == pytest.approx(1.0)
