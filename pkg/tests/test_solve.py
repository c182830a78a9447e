import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plateau_lab.errors import ParameterOutOfWindowError, ZeroLengthError
from plateau_lab.seminorm import NormDescriptor
from plateau_lab.solve import (
    PlateauProblem,
    SolverConfig,
    bidisc_scenario,
    bidisc_window,
    fill_injective,
    fill_report,
    minimize_area,
    minimize_energy,
)
from plateau_lab.solve.fill import constant_speed, disc_to_hemisphere, random_loop
from plateau_lab.target import BiDisc, EuclideanCone, EuclideanSpace, JordanBoundary, NormedPlane


@pytest.fixture(scope="module")
def circle_energy():
    b = JordanBoundary.circle(EuclideanSpace(2), n=256)
    return minimize_energy(PlateauProblem(EuclideanSpace(2), b, 3, "energy_plus"))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(backtrack=1.5)
    with pytest.raises(ValueError):
        SolverConfig(init="random")
    assert SolverConfig(eps0=0.0).eps_schedule() == [0.0]
    assert SolverConfig(eps0=0.1, eps_ratio=0.5, eps_stages=3).eps_schedule() == [0.1, 0.05, 0.025]


def test_problem_validation():
    b = JordanBoundary.circle()
    with pytest.raises(ValueError):
        PlateauProblem(EuclideanSpace(2), b, 3, "volume")
    with pytest.raises(ValueError):
        PlateauProblem(EuclideanSpace(2), b, 3, pins=(0.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        PlateauProblem(BiDisc(), JordanBoundary.circle(BiDisc()), 3)


def test_circle_energy_minimiser_is_conformal(circle_energy):
    res = circle_energy
    mesh_area = res.map.mesh.area
    assert res.values["energy_plus"] == pytest.approx(mesh_area, rel=0.02)
    assert res.values["area_busemann"] == pytest.approx(mesh_area, rel=0.02)
    assert res.qc["max"] < 1.15
    f = [v for _, v in res.trace]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(f, f[1:]))


def test_boundary_stays_on_curve_and_pins_hold(circle_energy):
    u = circle_energy.map
    P = u.images[u.mesh.boundary]
    np.testing.assert_allclose(np.hypot(P[:, 0], P[:, 1]), 1.0, atol=2e-4)
    # the three pinned boundary vertices sit on the pinned curve points
    curve = JordanBoundary.circle(EuclideanSpace(2), n=256)
    for t in (0.0, 2 * math.pi / 3, 4 * math.pi / 3):
        target = curve.point(t)
        assert np.min(np.linalg.norm(P - target, axis=1)) < 1e-9


def test_area_minimiser_matches_energy_minimiser(circle_energy):
    b = JordanBoundary.circle(EuclideanSpace(2), n=256)
    res = minimize_area(PlateauProblem(EuclideanSpace(2), b, 3), "busemann", SolverConfig(eps_stages=4))
    assert res.values["area_busemann"] == pytest.approx(circle_energy.values["area_busemann"], rel=0.01)
    assert len(res.stages) == 4
    assert [s["eps"] for s in res.stages] == SolverConfig(eps_stages=4).eps_schedule()


def test_cone_area_converges_at_first_order():
    cone = EuclideanCone(0.5)
    errs = []
    for level in (3, 4):
        res = minimize_area(PlateauProblem(cone, JordanBoundary.cone_circle(cone), level), "busemann",
                            SolverConfig(eps_stages=4))
        errs.append(abs(res.values["area_busemann"] / (math.pi * 0.5) - 1))
    assert errs[1] < errs[0] / 1.7
    assert errs[1] < 0.03


# -- fillings -------------------------------------------------------------------


def test_constant_speed_and_zero_length():
    c, length = constant_speed([[0, 0], [2, 0], [2, 1], [0, 1]], NormDescriptor.linf())
    assert length == pytest.approx(6.0)
    assert np.allclose(c(np.array([0.0, 2 * math.pi / 3])), [[0, 0], [2, 0]])
    with pytest.raises(ZeroLengthError):
        constant_speed([[1, 1], [1, 1], [1, 1]], NormDescriptor.linf())


def test_hemisphere_chart_is_equidistant_on_radii():
    z = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
    X = disc_to_hemisphere(z)
    np.testing.assert_allclose(np.linalg.norm(X, axis=1), 1.0)
    np.testing.assert_allclose(np.arccos(X[:, 2]), [0.0, math.pi / 4, math.pi / 2])


def test_square_fill_values():
    rep = fill_report(JordanBoundary.square(), mesh_level=4)
    assert rep["length"] == pytest.approx(8.0)
    assert rep["pass"]
    assert rep["bound"] == pytest.approx(1.05 * 64 / (2 * math.pi))


def test_back_and_forth_curve_has_zero_area():
    rep = fill_report(np.array([[0.0, 0.0], [1.0, 0.5]]), mesh_level=3)
    assert max(rep["areas"].values()) == pytest.approx(0.0, abs=1e-12)


def test_fill_rejects_other_norms():
    with pytest.raises(ValueError):
        fill_injective(JordanBoundary.square(), 3, norm=NormDescriptor.l1())


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_fill_is_lipschitz_and_within_bound(seed):
    rng = np.random.default_rng(seed)
    loop = random_loop(rng)
    _, length = constant_speed(loop, NormDescriptor.linf())
    u = fill_injective(loop, mesh_level=3)
    # every edge stretches by at most l / 2 pi against the hemisphere distance
    X = disc_to_hemisphere(u.mesh.vertices)
    e = u.mesh.edges
    d_dom = np.arccos(np.clip(np.sum(X[e[:, 0]] * X[e[:, 1]], axis=1), -1, 1))
    d_img = np.max(np.abs(u.images[e[:, 0]] - u.images[e[:, 1]]), axis=1)
    assert np.all(d_img <= length / (2 * math.pi) * d_dom * (1 + 1e-6) + 1e-9)
    assert all(a <= length**2 / (2 * math.pi) * 1.05 for a in
               (u.area_mu(m) for m in ("busemann", "holmes-thompson", "mass-star", "inscribed-ellipse")))


# -- bi-disc ---------------------------------------------------------------------


def test_bidisc_window_and_values():
    lo, hi = bidisc_window(NormDescriptor.linf(), ("busemann", "mass-star"))
    assert (lo, hi) == pytest.approx((math.pi / 4, 1.0))
    rep = bidisc_scenario(lam=0.95, level=4)
    assert rep["argmin"] == {"busemann": "u1", "mass-star": "u2"}
    assert rep["differ"]
    area = rep["mesh_area"]
    assert rep["areas"]["busemann"]["u1"] == pytest.approx(math.pi / 4 * area, rel=1e-12)
    assert rep["areas"]["mass-star"]["u2"] == pytest.approx(0.9025 * area, rel=1e-12)


def test_bidisc_outside_window():
    with pytest.raises(ParameterOutOfWindowError):
        bidisc_scenario(lam=0.5, level=2)
    with pytest.raises(ValueError):
        bidisc_scenario(mus=("busemann", "busemann"), level=2)
