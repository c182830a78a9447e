"""Definitions of volume on normed planes and the Jacobians they induce.

Each definition assigns a Haar measure to every 2-dimensional normed space.
The Jacobian of a seminorm ``s`` is the measure of the unit square in
``(R^2, s)``, which for ``s = base o A`` with A invertible factors as
``|det A| * normConstant(mu, base)``.  The constants themselves are computed
from the unit ball B of the norm:

* Busemann: ``pi / area(B)``
* Holmes-Thompson: ``area(B polar) / pi``
* mass*: ``4 / area(smallest symmetric parallelogram containing B)``
* inscribed ellipse: ``pi / area(largest centred ellipse inside B)``

All four give 1 for Euclidean norms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateSeminormError, NonConvergenceError
from .seminorm import (
    NormDescriptor,
    Seminorm2,
    convex_hull,
    degenerate_mask,
    dual_points,
    effective_gram,
)

DEFAULT_BALL_VERTICES = 4096


class VolumeDefinition(str, enum.Enum):
    BUSEMANN = "busemann"
    HOLMES_THOMPSON = "holmes-thompson"
    MASS_STAR = "mass-star"
    INSCRIBED_ELLIPSE = "inscribed-ellipse"

    @classmethod
    def parse(cls, name) -> "VolumeDefinition":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        aliases = {"b": "busemann", "ht": "holmes-thompson", "m*": "mass-star",
                   "mass*": "mass-star", "massstar": "mass-star", "i": "inscribed-ellipse",
                   "holmesthompson": "holmes-thompson", "inscribedellipse": "inscribed-ellipse"}
        key = aliases.get(key, key)
        return cls(key)


ALL_VOLUMES = tuple(VolumeDefinition)


def polygon_area(P) -> float:
    P = np.asarray(P, dtype=float)
    if len(P) < 3:
        return 0.0
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass(frozen=True, eq=False)
class ConvexBody2:
    """A centrally symmetric convex polygon, vertices counterclockwise."""

    vertices: np.ndarray

    def __post_init__(self):
        P = np.array(self.vertices, dtype=float)
        if P.ndim != 2 or P.shape[1] != 2 or len(P) < 4:
            raise ValueError("body needs at least four planar vertices")
        scale = np.abs(P).max()
        # central symmetry up to vertex order
        if not np.allclose(np.sort(P, axis=0), np.sort(-P, axis=0), atol=1e-9 * scale):
            raise ValueError("body must be centrally symmetric")
        d1 = np.roll(P, -1, axis=0) - P
        d2 = np.roll(d1, -1, axis=0)
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        if np.any(cross < -1e-12 * scale**2):
            raise ValueError("vertices must be in convex counterclockwise position")
        if polygon_area(P) <= 0:
            raise ValueError("body must have positive area")
        P.setflags(write=False)
        object.__setattr__(self, "vertices", P)

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    def edge_functionals(self) -> np.ndarray:
        """``n_i`` with ``<n_i, x> = 1`` on edge i; near-collinear edges merged."""
        P = self.vertices
        Q = np.roll(P, -1, axis=0)
        det = P[:, 0] * Q[:, 1] - P[:, 1] * Q[:, 0]
        keep = det > 1e-15 * np.abs(P).max() ** 2
        P, Q, det = P[keep], Q[keep], det[keep]
        n = np.stack([(Q[:, 1] - P[:, 1]) / det, (P[:, 0] - Q[:, 0]) / det], axis=1)
        # consecutive edges on one line give the same functional
        diff = np.linalg.norm(n - np.roll(n, 1, axis=0), axis=1)
        keep = diff > 1e-10 * np.abs(n).max()
        if not np.any(keep):
            keep[0] = True
        return n[keep]

    def support(self, u) -> np.ndarray:
        return np.max(np.asarray(u, dtype=float) @ self.vertices.T, axis=-1)

    def gauge(self, x) -> np.ndarray:
        return np.maximum(np.max(np.asarray(x, dtype=float) @ self.edge_functionals().T, axis=-1), 0.0)


@dataclass(frozen=True, eq=False)
class Ellipse2:
    """The ellipse ``{v : v^T G v <= 1}``."""

    G: np.ndarray

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        if G.shape != (2, 2) or not np.allclose(G, G.T) or np.linalg.eigvalsh(G).min() <= 0:
            raise ValueError("ellipse needs a symmetric positive-definite 2x2 matrix")
        G.setflags(write=False)
        object.__setattr__(self, "G", G)

    @property
    def area(self) -> float:
        return math.pi / math.sqrt(np.linalg.det(self.G))

    def support(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        P = np.linalg.inv(self.G)
        return np.sqrt(np.einsum("...i,ij,...j->...", u, P, u))


# -- convex-body operations ------------------------------------------------


def unit_ball(s: Seminorm2, n_verts: int = DEFAULT_BALL_VERTICES) -> ConvexBody2:
    """Polygon inscribed in ``{s <= 1}``.

    Rays are equally spaced after whitening by ``(A^T A)^{-1/2}``, so long thin
    balls are sampled as finely as round ones.
    """
    if s.is_degenerate:
        raise DegenerateSeminormError("degenerate seminorm has an unbounded unit ball")
    if n_verts < 4 or n_verts % 2:
        raise ValueError("n_verts must be even and at least 4")
    theta = 2.0 * np.pi * np.arange(n_verts) / n_verts
    w, U = np.linalg.eigh(s.A.T @ s.A)
    W = (U / np.sqrt(w)) @ U.T
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1) @ W.T
    r = 1.0 / np.asarray(s(u))
    P = u * r[:, None]
    half = n_verts // 2
    P[half:] = -P[:half]  # exact symmetry against rounding
    return ConvexBody2(P)


def polar_body(K: ConvexBody2) -> ConvexBody2:
    """``{w : <w, v> <= 1 for all v in K}``; its vertices are K's edge functionals."""
    return ConvexBody2(K.edge_functionals())


def min_circum_parallelogram(K: ConvexBody2):
    """Smallest-area origin-symmetric parallelogram containing K.

    For a unit side normal ``a`` the best conjugate normal gives area
    ``4 h_K(a) / g_K(a_perp)`` (support function over gauge), and that
    expression is minimised at a normal of an edge of K.

    Returns
    -------
    area : float
    vertices : (4, 2) array, counterclockwise
    """
    N = K.edge_functionals()
    a = N / np.linalg.norm(N, axis=1, keepdims=True)
    h = 1.0 / np.linalg.norm(N, axis=1)
    aperp = np.stack([-a[:, 1], a[:, 0]], axis=1)
    vals = aperp @ N.T
    j = np.argmax(vals, axis=1)
    g = vals[np.arange(len(N)), j]
    areas = 4.0 * h / g
    i = int(np.argmin(areas))
    # sides <N_i, x> = +-1 and <N_j, x> = +-1
    M = np.stack([N[i], N[j[i]]])
    corners = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)
    V = np.linalg.solve(M, corners.T).T
    if polygon_area(V) < 0:
        V = V[::-1]
    return float(areas[i]), V


def max_inscribed_ellipse(K: ConvexBody2, max_iter: int = 5000) -> Ellipse2:
    """Largest-area centred ellipse inside K.

    Writes the ellipse as ``P^{1/2}`` applied to the unit disc, so containment
    is ``n_i^T P n_i <= 1`` for every edge functional ``n_i`` and the area is
    ``pi sqrt(det P)``.  Maximises ``log det P`` with a log-barrier and damped
    Newton steps in the three entries of P.

    Raises
    ------
    NonConvergenceError
        If the barrier path does not reach a duality gap of 1e-13.
    """
    N = K.edge_functionals()
    # symmetric bodies repeat every constraint with -n_i; keep one of each pair
    N = N[: max(len(N) // 2, 1)] if len(N) % 2 == 0 else N
    # affine normalisation: solve for a nearly round body, map P back at the end
    w, U = np.linalg.eigh(N.T @ N / len(N))
    B = (U / np.sqrt(w)) @ U.T
    N = N @ B.T
    C = np.stack([N[:, 0] ** 2, 2 * N[:, 0] * N[:, 1], N[:, 1] ** 2], axis=1)
    m = len(C)
    x = np.array([1.0, 0.0, 1.0]) * 0.5 / np.max(C[:, 0] + C[:, 2])
    M = np.array([[0.0, 0.0, 1.0], [0.0, -2.0, 0.0], [1.0, 0.0, 0.0]])

    def parts(x, mu):
        d = x[0] * x[2] - x[1] ** 2
        slack = 1.0 - C @ x
        gld = np.array([x[2], -2 * x[1], x[0]]) / d
        f = -math.log(d) - mu * np.sum(np.log(slack))
        grad = -gld + mu * (C.T @ (1.0 / slack))
        H = np.outer(gld, gld) - M / d + mu * (C.T * (1.0 / slack**2)) @ C
        return f, grad, H

    def feasible(x):
        return x[0] > 0 and x[0] * x[2] - x[1] ** 2 > 0 and np.all(C @ x < 1.0)

    mu = 1.0
    iters = 0
    stuck = False
    while m * mu > 1e-13 and not stuck:
        for _ in range(100):
            iters += 1
            if iters > max_iter:
                raise NonConvergenceError("inscribed ellipse barrier did not converge")
            f, g, H = parts(x, mu)
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                # barrier Hessian overflowed at the last digits: x is already feasible
                stuck = True
                break
            dec = float(-g @ step)
            if dec < 1e-14:
                break
            t = 1.0
            while not feasible(x + t * step) or parts(x + t * step, mu)[0] > f - 0.25 * t * dec:
                t *= 0.5
                if t < 1e-14:
                    t = 0.0
                    break
            if t == 0.0:
                break
            x = x + t * step
        mu *= 0.1
    if np.max(C @ x) > 1.0 + 1e-8:
        raise NonConvergenceError("inscribed ellipse violates containment")
    P = B.T @ np.array([[x[0], x[1]], [x[1], x[2]]]) @ B
    return Ellipse2(np.linalg.inv(0.5 * (P + P.T)))


# -- Jacobians -------------------------------------------------------------


def jacobian_of_ball(mu: VolumeDefinition, K: ConvexBody2) -> float:
    """Jacobian of the norm whose unit ball is K."""
    mu = VolumeDefinition.parse(mu)
    if mu is VolumeDefinition.BUSEMANN:
        return math.pi / K.area
    if mu is VolumeDefinition.HOLMES_THOMPSON:
        return polar_body(K).area / math.pi
    if mu is VolumeDefinition.MASS_STAR:
        return 4.0 / min_circum_parallelogram(K)[0]
    return math.pi / max_inscribed_ellipse(K).area


def exact_ball(s: Seminorm2) -> ConvexBody2:
    """The exact unit ball of a polyhedral seminorm (non-degenerate)."""
    g = convex_hull(dual_points(s.base, s.A)[0])
    return polar_body(ConvexBody2(g))


@lru_cache(maxsize=None)
def norm_constant(mu: VolumeDefinition, base: NormDescriptor, n_verts: int = DEFAULT_BALL_VERTICES) -> float:
    """``jacobian(mu, identity seminorm of base)``, memoised."""
    mu = VolumeDefinition.parse(mu)
    if base.kind == "euclidean":
        return 1.0
    if base.kind == "ellipse":
        return math.sqrt(float(np.linalg.det(base.gram_matrix)))
    s = Seminorm2.identity(base)
    if base.category == "polyhedral":
        return jacobian_of_ball(mu, exact_ball(s))
    return jacobian_of_ball(mu, unit_ball(s, n_verts))


def jacobian(mu, s: Seminorm2, n_verts: int | None = None) -> float:
    """μ-Jacobian of the seminorm s; zero when s is degenerate.

    With ``n_verts`` set, the unit ball is sampled with that many vertices and
    the convex-geometry constructions are applied directly.  Otherwise the
    value is ``|det A| * norm_constant`` for square A, and an exact or sampled
    ball for rectangular A.
    """
    mu = VolumeDefinition.parse(mu)
    if s.is_degenerate:
        return 0.0
    if n_verts is not None:
        return jacobian_of_ball(mu, unit_ball(s, n_verts))
    return float(jacobian_batch(mu, s.base, s.A[None])[0])


def inscribed_ellipse_jacobian_dual(g) -> np.ndarray:
    """Inscribed-ellipse Jacobian of ``v -> max_i |<g_i, v>|`` from its dual points.

    The largest ellipse in the unit ball is polar to the smallest centred
    ellipse around the points ``g_i``, and the two areas multiply to pi^2, so
    J = area(smallest enclosing ellipse) / pi.  That ellipse touches two point
    pairs (then it is the image of the unit disc under [g_i g_j]) or three
    (then it is fixed by three linear equations); all candidates are
    enumerated and the smallest one containing every point wins.
    """
    g = np.asarray(g, dtype=float)
    n, m, _ = g.shape
    scale = np.max(np.abs(g), axis=(1, 2))[:, None, None]
    g = g / scale
    best = np.full(n, np.inf)
    slack = 1.0 + 1e-9
    for i in range(m):
        for j in range(i + 1, m):
            det = g[:, i, 0] * g[:, j, 1] - g[:, i, 1] * g[:, j, 0]
            okd = np.abs(det) > 1e-12
            sd = np.where(okd, det, 1.0)
            # coordinates of every point in the basis (g_i, g_j)
            c0 = (g[..., 0] * g[:, j, None, 1] - g[..., 1] * g[:, j, None, 0]) / sd[:, None]
            c1 = (g[:, i, None, 0] * g[..., 1] - g[:, i, None, 1] * g[..., 0]) / sd[:, None]
            inside = np.all(c0**2 + c1**2 <= slack, axis=1)
            area = np.abs(det)
            best = np.where(okd & inside, np.minimum(best, area), best)
            for k in range(j + 1, m):
                P = g[:, [i, j, k]]
                C = np.stack([P[..., 0] ** 2, 2 * P[..., 0] * P[..., 1], P[..., 1] ** 2], axis=-1)
                detC = np.linalg.det(C)
                okc = np.abs(detC) > 1e-12
                Cs = np.where(okc[:, None, None], C, np.eye(3))
                x = np.linalg.solve(Cs, np.ones((n, 3, 1)))[..., 0]
                dM = x[:, 0] * x[:, 2] - x[:, 1] ** 2
                pd = okc & (x[:, 0] > 0) & (dM > 0)
                q = x[:, None, 0] * g[..., 0] ** 2 + 2 * x[:, None, 1] * g[..., 0] * g[..., 1] + x[:, None, 2] * g[..., 1] ** 2
                inside = np.all(q <= slack, axis=1)
                area = 1.0 / np.sqrt(np.where(pd, dM, 1.0))
                best = np.where(pd & inside, np.minimum(best, area), best)
    return best * scale[:, 0, 0] ** 2


def jacobian_batch(mu, base: NormDescriptor, A) -> np.ndarray:
    """μ-Jacobians of ``base o A`` for a batch of k x 2 matrices."""
    mu = VolumeDefinition.parse(mu)
    A = np.asarray(A, dtype=float)
    out = np.zeros(len(A))
    deg = degenerate_mask(A)
    if base.kind == "euclidean" or base.kind == "ellipse":
        G = effective_gram(base, A)
        det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
        out = np.sqrt(np.maximum(det, 0.0))
    elif base.dim == 2:
        det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
        out = np.abs(det) * norm_constant(mu, base)
    elif base.category == "polyhedral" and mu is VolumeDefinition.INSCRIBED_ELLIPSE:
        ok = ~deg
        if np.any(ok):
            out[ok] = inscribed_ellipse_jacobian_dual(dual_points(base, A[ok]))
    else:
        for i in np.nonzero(~deg)[0]:
            s = Seminorm2(A[i], base)
            if base.category == "polyhedral":
                out[i] = jacobian_of_ball(mu, exact_ball(s))
            else:
                out[i] = jacobian_of_ball(mu, unit_ball(s, DEFAULT_BALL_VERTICES))
    return np.where(deg, 0.0, out)


# -- quasi-convexity -------------------------------------------------------


def quasi_convexity_test(mu, L, base: NormDescriptor | None = None, trials: int = 200,
                         mesh_res: int = 3, seed: int = 0, amplitude: float = 0.3,
                         rel_tol: float = 1e-3) -> dict:
    """Compare the μ-volume of L with boundary-fixing PL perturbations of L.

    ``L`` is either a Seminorm2 (its matrix and base are used) or a k x 2
    matrix together with ``base``.  Each trial displaces the interior vertices
    of a disc mesh by a random smooth field plus vertex noise, keeping the
    boundary fixed.  A violation is a trial with
    ``Vol(psi) < Vol(L) - rel_tol * Vol(L)``.
    """
    from .mesh import make_disc_mesh

    mu = VolumeDefinition.parse(mu)
    if isinstance(L, Seminorm2):
        base, Lm = L.base, L.A
    else:
        Lm = np.asarray(L, dtype=float)
        base = base or NormDescriptor.euclidean(Lm.shape[0])
    if degenerate_mask(Lm[None])[0]:
        raise ValueError("L must be injective")
    mesh = make_disc_mesh(mesh_res)
    Z = mesh.vertices
    tri = mesh.triangles
    interior = mesh.interior_mask
    k = Lm.shape[0]
    Y0 = Z @ Lm.T
    scale = float(np.linalg.norm(Lm, 2))
    D = mesh.gradient_operators()  # (T, 2, 3) maps vertex values to gradient

    def volume(Y):
        A = np.einsum("tvk,tjv->tkj", Y[tri], D)
        return float(np.sum(mesh.triangle_areas * jacobian_batch(mu, base, A)))

    vol_L = volume(Y0)
    rng = np.random.default_rng(seed)
    bump = 1.0 - np.sum(Z * Z, axis=1)
    margins = []
    for _ in range(trials):
        n_modes = 4
        W = np.zeros_like(Y0)
        freq = rng.integers(1, 4, size=(n_modes, 2))
        phase = rng.uniform(0, 2 * np.pi, size=(n_modes, k))
        amp = rng.normal(size=(n_modes, k))
        for f, ph, a in zip(freq, phase, amp):
            W += np.sin(np.pi * (Z @ f)[:, None] + ph) * a
        W *= bump[:, None]
        W += 0.3 * rng.normal(size=W.shape) * rng.uniform(0.0, 1.0)
        W[~interior] = 0.0
        W *= amplitude * scale * rng.uniform(0.1, 1.0) / max(np.abs(W).max(), 1e-300)
        margins.append(volume(Y0 + W) - vol_L)
    margins = np.array(margins)
    tol = rel_tol * vol_L
    violations = np.nonzero(margins < -tol)[0]
    return {
        "mu": mu.value,
        "base": base.label,
        "trials": trials,
        "mesh_res": mesh_res,
        "vol_L": vol_L,
        "min_margin": float(margins.min()) if trials else 0.0,
        "tol": tol,
        "violations": violations.tolist(),
    }
