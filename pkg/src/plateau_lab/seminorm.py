"""Seminorms on the plane and the integrands built from them.

A seminorm is stored as ``s(v) = base(A @ v)`` where ``base`` is a norm on
R^k and ``A`` is a k x 2 matrix.  Everything that can be done in closed form
is done in closed form:

* quadratic bases (Euclidean, ellipse) reduce to the 2 x 2 Gram matrix;
* polyhedral bases (symmetric polygons, l1, l-infinity) reduce to the finite
  set of dual vectors ``g_i = A^T f_i`` with ``s(v) = max_i <g_i, v>``;
* any other p-norm falls back to a uniform direction grid, with a
  golden-section polish for extrema.  The trapezoid rule on the grid has
  O(K^-2) error for Lipschitz integrands.

Batched variants take ``A`` of shape ``(n, k, 2)`` and return arrays of
length ``n``; the scalar functions wrap them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

ORACLE_DIRECTIONS = 2**16
DEFAULT_DIRECTIONS = 256
DEGENERACY_TOL = 1e-12

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class NormDescriptor:
    """A norm on R^dim, described by its unit ball.

    ``kind`` is one of ``"euclidean"``, ``"pnorm"``, ``"polygon"``,
    ``"ellipse"``.  Polygons are given by counterclockwise vertices of a
    centrally symmetric convex polygon containing the origin; ellipses by a
    symmetric positive-definite ``gram`` with ball ``{v : v^T G v <= 1}``.
    """

    kind: str
    p: float = 2.0
    vertices: tuple = ()
    gram: tuple = ()
    dim: int = 2

    def __post_init__(self):
        if self.kind not in ("euclidean", "pnorm", "polygon", "ellipse"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.kind == "pnorm" and not self.p >= 1.0:
            raise ValueError("p-norm needs p >= 1")
        if self.kind == "polygon":
            _validate_symmetric_polygon(np.asarray(self.vertices, dtype=float))
            if self.dim != 2:
                raise ValueError("polygon norms live on R^2")
        if self.kind == "ellipse":
            G = np.asarray(self.gram, dtype=float)
            if G.shape != (2, 2) or not np.allclose(G, G.T):
                raise ValueError("ellipse gram must be a symmetric 2x2 matrix")
            if np.linalg.eigvalsh(G).min() <= 0:
                raise ValueError("ellipse gram must be positive definite")
            if self.dim != 2:
                raise ValueError("ellipse norms live on R^2")

    # -- constructors -----------------------------------------------------

    @classmethod
    def euclidean(cls, dim: int = 2) -> "NormDescriptor":
        return cls("euclidean", dim=dim)

    @classmethod
    def pnorm(cls, p: float, dim: int = 2) -> "NormDescriptor":
        if p == 2:
            return cls.euclidean(dim)
        return cls("pnorm", p=float(p), dim=dim)

    @classmethod
    def linf(cls, dim: int = 2) -> "NormDescriptor":
        return cls.pnorm(math.inf, dim)

    @classmethod
    def l1(cls, dim: int = 2) -> "NormDescriptor":
        return cls.pnorm(1.0, dim)

    @classmethod
    def polygon(cls, vertices) -> "NormDescriptor":
        verts = tuple(tuple(float(c) for c in v) for v in np.asarray(vertices, dtype=float))
        return cls("polygon", vertices=verts)

    @classmethod
    def square(cls) -> "NormDescriptor":
        """The l-infinity norm written as a polygon ball."""
        return cls.polygon([(1, 1), (-1, 1), (-1, -1), (1, -1)])

    @classmethod
    def ellipse(cls, G) -> "NormDescriptor":
        G = np.asarray(G, dtype=float)
        return cls("ellipse", gram=tuple(tuple(float(c) for c in row) for row in G))

    # -- classification ---------------------------------------------------

    @property
    def category(self) -> str:
        if self.kind in ("euclidean", "ellipse"):
            return "quadratic"
        if self.kind == "polygon":
            return "polyhedral"
        if self.p in (1.0, math.inf):
            return "polyhedral"
        return "generic"

    @property
    def label(self) -> str:
        if self.kind == "euclidean":
            return "euclidean" if self.dim == 2 else f"euclidean{self.dim}"
        if self.kind == "pnorm":
            p = "inf" if self.p == math.inf else f"{self.p:g}"
            return f"l{p}" if self.dim == 2 else f"l{p}^{self.dim}"
        if self.kind == "ellipse":
            return "ellipse"
        return f"polygon{len(self.vertices)}"

    @cached_property
    def gram_matrix(self) -> np.ndarray:
        if self.kind == "ellipse":
            return np.asarray(self.gram, dtype=float)
        return np.eye(self.dim)

    @cached_property
    def facets(self) -> np.ndarray:
        """Dual vectors ``f_i`` with ``norm(x) = max_i <f_i, x>``.

        For dim == 2 they are returned in counterclockwise order, so they are
        the vertices of the polar body.
        """
        if self.category != "polyhedral":
            raise ValueError(f"{self.label} is not polyhedral")
        if self.kind == "polygon":
            P = np.asarray(self.vertices, dtype=float)
            Q = np.roll(P, -1, axis=0)
            det = P[:, 0] * Q[:, 1] - P[:, 1] * Q[:, 0]
            # solve [p; q] n = [1, 1]
            n = np.stack([(Q[:, 1] - P[:, 1]) / det, (P[:, 0] - Q[:, 0]) / det], axis=1)
            return n
        k = self.dim
        if self.p == math.inf:
            if k == 2:
                return np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
            eye = np.eye(k)
            return np.concatenate([eye, -eye])
        if k == 2:
            return np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
        signs = np.array(np.meshgrid(*[[1.0, -1.0]] * k, indexing="ij")).reshape(k, -1).T
        return signs

    # -- evaluation -------------------------------------------------------

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return np.sqrt(np.sum(x * x, axis=-1))
        if self.kind == "ellipse":
            G = self.gram_matrix
            return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", x, G, x), 0.0))
        if self.kind == "polygon":
            return np.maximum(np.max(x @ self.facets.T, axis=-1), 0.0)
        if self.p == math.inf:
            return np.max(np.abs(x), axis=-1)
        if self.p == 1.0:
            return np.sum(np.abs(x), axis=-1)
        ax = np.abs(x)
        scale = np.max(ax, axis=-1, keepdims=True)
        safe = np.where(scale > 0, scale, 1.0)
        return scale[..., 0] * np.sum((ax / safe) ** self.p, axis=-1) ** (1.0 / self.p)

    def gradient(self, x) -> np.ndarray:
        """A subgradient of the norm at each row of ``x`` (zero at the origin)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            n = np.sqrt(np.sum(x * x, axis=-1, keepdims=True))
            return np.where(n > 0, x / np.where(n > 0, n, 1.0), 0.0)
        if self.kind == "ellipse":
            Gx = x @ self.gram_matrix
            n = np.sqrt(np.maximum(np.sum(x * Gx, axis=-1, keepdims=True), 0.0))
            return np.where(n > 0, Gx / np.where(n > 0, n, 1.0), 0.0)
        if self.category == "polyhedral":
            F = self.facets
            idx = np.argmax(x @ F.T, axis=-1)
            g = F[idx]
            zero = ~np.any(x != 0, axis=-1, keepdims=True)
            return np.where(zero, 0.0, g)
        ax = np.abs(x)
        n = self(x)[..., None]
        safe = np.where(n > 0, n, 1.0)
        g = np.sign(x) * (ax / safe) ** (self.p - 1.0)
        return np.where(n > 0, g, 0.0)


def _validate_symmetric_polygon(P: np.ndarray) -> None:
    if P.ndim != 2 or P.shape[1] != 2 or len(P) < 4 or len(P) % 2:
        raise ValueError("symmetric polygon needs an even number (>= 4) of planar vertices")
    scale = np.abs(P).max()
    m = len(P) // 2
    if not np.allclose(P[m:], -P[:m], atol=1e-9 * scale):
        raise ValueError("polygon vertices must be centrally symmetric (v_{i+m} = -v_i)")
    d1 = np.roll(P, -1, axis=0) - P
    d2 = np.roll(d1, -1, axis=0)
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.any(cross <= 1e-14 * scale**2):
        raise ValueError("polygon vertices must be in strictly convex counterclockwise order")


EUCLIDEAN = NormDescriptor.euclidean()


@dataclass(frozen=True, eq=False)
class Seminorm2:
    """The seminorm ``v -> base(A v)`` on R^2."""

    A: np.ndarray
    base: NormDescriptor = EUCLIDEAN

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[1] != 2:
            raise ValueError("A must have shape (k, 2)")
        if A.shape[0] != self.base.dim:
            raise ValueError(f"A has {A.shape[0]} rows but base lives on R^{self.base.dim}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @classmethod
    def identity(cls, base: NormDescriptor = EUCLIDEAN) -> "Seminorm2":
        if base.dim != 2:
            raise ValueError("identity seminorm needs a planar base norm")
        return cls(np.eye(2), base)

    @classmethod
    def zero(cls, base: NormDescriptor = EUCLIDEAN) -> "Seminorm2":
        return cls(np.zeros((base.dim, 2)), base)

    def __call__(self, v) -> np.ndarray:
        return evaluate(self, v)

    @property
    def is_degenerate(self) -> bool:
        return bool(degenerate_mask(self.A[None])[0])

    @property
    def is_zero(self) -> bool:
        return not np.any(self.A)

    def __repr__(self):
        return f"Seminorm2(A={self.A.tolist()}, base={self.base.label})"


# -- direction grids ------------------------------------------------------


def half_circle_grid(n_dirs: int) -> np.ndarray:
    """Unit vectors at angles pi*k/n for k < n (enough by symmetry)."""
    theta = np.pi * np.arange(n_dirs) / n_dirs
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def _values_on_angles(base: NormDescriptor, A: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """``s(u_theta)`` for A of shape (n, k, 2) and theta of shape (n, m) or (m,)."""
    c, s = np.cos(theta), np.sin(theta)
    if theta.ndim == 1:
        x = A[:, None, :, 0] * c[None, :, None] + A[:, None, :, 1] * s[None, :, None]
    else:
        x = A[:, None, :, 0] * c[:, :, None] + A[:, None, :, 1] * s[:, :, None]
    return base(x)


def _grid_extremum(base, A, n_dirs, sign):
    """Max (sign=+1) or min (sign=-1) of s over the circle, polished."""
    theta = np.pi * np.arange(n_dirs) / n_dirs
    vals = sign * _values_on_angles(base, A, theta)
    k = np.argmax(vals, axis=1)
    h = np.pi / n_dirs
    lo = theta[k] - h
    hi = theta[k] + h
    # vectorised golden-section search on each bracket
    a, b = lo.copy(), hi.copy()
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = sign * _values_on_angles(base, A, c[:, None])[:, 0]
    fd = sign * _values_on_angles(base, A, d[:, None])[:, 0]
    for _ in range(60):
        left = fc > fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - _GOLDEN * (b - a)
        new_d = a + _GOLDEN * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        f_eval = sign * _values_on_angles(base, A, np.where(left, new_c, new_d)[:, None])[:, 0]
        fd_next = np.where(left, fc, f_eval)
        fc_next = np.where(left, f_eval, fd)
        c, d, fc, fd = c_next, d_next, fc_next, fd_next
    best = np.maximum(np.maximum(fc, fd), vals[np.arange(len(k)), k])
    return sign * best


# -- structural helpers ---------------------------------------------------


def _as_batch(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 2:
        A = A[None]
    return A


def degenerate_mask(A, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """True where the k x 2 matrix has rank < 2 (relative tolerance)."""
    A = _as_batch(A)
    # Cauchy-Binet: det(A^T A) is the sum of squared 2 x 2 minors, which
    # avoids the cancellation of forming the Gram determinant
    minors = A[:, :, None, 0] * A[:, None, :, 1] - A[:, :, None, 1] * A[:, None, :, 0]
    det = 0.5 * np.sum(minors**2, axis=(1, 2))
    fro2 = np.sum(A * A, axis=(1, 2))
    return det <= (tol * fro2) ** 2


def effective_gram(base: NormDescriptor, A) -> np.ndarray:
    """2 x 2 Gram matrices with ``s(v)^2 = v^T G v`` for quadratic bases."""
    A = _as_batch(A)
    if base.kind == "euclidean":
        return np.einsum("nki,nkj->nij", A, A)
    return np.einsum("nki,kl,nlj->nij", A, base.gram_matrix, A)


def _sym_eig2(G):
    a, b, c = G[:, 0, 0], G[:, 0, 1], G[:, 1, 1]
    mean = 0.5 * (a + c)
    rad = np.sqrt((0.5 * (a - c)) ** 2 + b * b)
    return mean + rad, np.maximum(mean - rad, 0.0)


def dual_points(base: NormDescriptor, A) -> np.ndarray:
    """``g_i = A^T f_i`` so that ``s(v) = max_i <g_i, v>`` (polyhedral bases)."""
    A = _as_batch(A)
    return np.einsum("nkj,mk->nmj", A, base.facets)


def dual_polygons(base: NormDescriptor, A) -> list:
    """Counterclockwise convex hull of the dual points, one array per row.

    Degenerate rows give a 2-point segment or a single point.
    """
    A = _as_batch(A)
    g = dual_points(base, A)
    deg = degenerate_mask(A)
    out = []
    for i in range(len(g)):
        if base.dim == 2 and not deg[i]:
            detA = A[i, 0, 0] * A[i, 1, 1] - A[i, 0, 1] * A[i, 1, 0]
            out.append(g[i] if detA > 0 else g[i][::-1].copy())
        else:
            out.append(convex_hull(g[i]))
    return out


def convex_hull(points) -> np.ndarray:
    """Counterclockwise hull by the monotone chain; collinear points dropped."""
    pts = np.unique(np.round(np.asarray(points, dtype=float), 15), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    scale = max(np.abs(pts).max(), 1e-300)
    eps = 1e-14 * scale * scale
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= eps:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= eps:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    return hull


def _support_square_integral(P: np.ndarray) -> float:
    """Integral over the circle of h_P(theta)^2 for a polygon P around 0."""
    if len(P) == 1:
        return 0.0
    if len(P) == 2:
        g = P[np.argmax(np.sum(P * P, axis=1))]
        # h = |<g, u>| when P = [-g, g]; for a one-sided segment this is an upper bound only
        return float(np.pi * np.dot(g, g))
    return float(_support_square_integral_ordered(P[None])[0])


def _support_square_integral_ordered(G: np.ndarray) -> np.ndarray:
    """Same as above for a batch of ccw polygons of equal size (n, m, 2)."""
    E = np.roll(G, -1, axis=1) - G
    # outward normal angle of edge i (from g_i to g_{i+1})
    psi = np.arctan2(-E[..., 0], E[..., 1])
    beta = psi
    alpha = np.roll(psi, 1, axis=1)
    width = np.mod(beta - alpha, 2 * np.pi)
    alpha = beta - width
    phi = np.arctan2(G[..., 1], G[..., 0])
    r2 = np.sum(G * G, axis=-1)
    term = width + 0.5 * (np.sin(2 * (beta - phi)) - np.sin(2 * (alpha - phi)))
    return np.sum(0.5 * r2 * term, axis=1)


# -- batched integrands ---------------------------------------------------


def i_plus_batch(base: NormDescriptor, A, p: float = 2.0, n_dirs: int = 4096) -> np.ndarray:
    """max over the unit circle of s(v)^p, one value per row of A."""
    A = _as_batch(A)
    cat = base.category
    if cat == "quadratic":
        lmax, _ = _sym_eig2(effective_gram(base, A))
        return lmax ** (p / 2.0)
    if cat == "polyhedral":
        g = dual_points(base, A)
        return np.max(np.sum(g * g, axis=-1), axis=1) ** (p / 2.0)
    return _grid_extremum(base, A, n_dirs, +1.0) ** p


def i_avg_batch(base: NormDescriptor, A, p: float = 2.0, n_dirs: int | None = None) -> np.ndarray:
    """(1/pi) * integral over the unit circle of s(v)^p, one value per row.

    Exact for p = 2 with quadratic or polyhedral bases; otherwise the
    trapezoid rule on ``n_dirs`` directions (default 256).
    """
    A = _as_batch(A)
    cat = base.category
    if p == 2.0 and n_dirs is None:
        if cat == "quadratic":
            G = effective_gram(base, A)
            return G[:, 0, 0] + G[:, 1, 1]
        if cat == "polyhedral":
            return _polyhedral_avg2(base, A)
    K = n_dirs or DEFAULT_DIRECTIONS
    theta = np.pi * np.arange(K) / K
    vals = _values_on_angles(base, A, theta)
    return (2.0 / K) * np.sum(vals**p, axis=1)


def _polyhedral_avg2(base, A) -> np.ndarray:
    n = len(A)
    out = np.empty(n)
    deg = degenerate_mask(A)
    if base.dim == 2:
        ok = ~deg
        if np.any(ok):
            g = dual_points(base, A[ok])
            detA = A[ok, 0, 0] * A[ok, 1, 1] - A[ok, 0, 1] * A[ok, 1, 0]
            g = np.where((detA > 0)[:, None, None], g, g[:, ::-1])
            out[ok] = _support_square_integral_ordered(g) / np.pi
        rest = np.nonzero(deg)[0]
    else:
        rest = np.arange(n)
    for i in rest:
        g = dual_points(base, A[i : i + 1])[0]
        if deg[i]:
            # s(v) = |<g*, v>| for the longest dual vector g*
            out[i] = np.max(np.sum(g * g, axis=1))
        else:
            out[i] = _support_square_integral(convex_hull(g)) / np.pi
    return out


def _inradius(P: np.ndarray) -> np.ndarray:
    """Distance from the origin to the nearest edge line (batch of ccw polygons)."""
    Q = np.roll(P, -1, axis=1)
    E = Q - P
    cross = P[..., 0] * Q[..., 1] - P[..., 1] * Q[..., 0]
    return np.min(cross / np.sqrt(np.sum(E * E, axis=-1)), axis=1)


def circle_extrema_batch(base: NormDescriptor, A, n_dirs: int = 4096):
    """(max, min) of s over the unit circle, one pair per row."""
    A = _as_batch(A)
    cat = base.category
    if cat == "quadratic":
        lmax, lmin = _sym_eig2(effective_gram(base, A))
        return np.sqrt(lmax), np.sqrt(lmin)
    if cat == "polyhedral":
        g = dual_points(base, A)
        smax = np.sqrt(np.max(np.sum(g * g, axis=-1), axis=1))
        smin = np.zeros(len(A))
        deg = degenerate_mask(A)
        if base.dim == 2:
            ok = ~deg
            if np.any(ok):
                detA = A[ok, 0, 0] * A[ok, 1, 1] - A[ok, 0, 1] * A[ok, 1, 0]
                gg = np.where((detA > 0)[:, None, None], g[ok], g[ok][:, ::-1])
                smin[ok] = _inradius(gg)
        else:
            for i in np.nonzero(~deg)[0]:
                smin[i] = _inradius(convex_hull(g[i])[None])[0]
        return smax, smin
    return _grid_extremum(base, A, n_dirs, +1.0), _grid_extremum(base, A, n_dirs, -1.0)


def q_factor_batch(base: NormDescriptor, A, n_dirs: int = 4096) -> np.ndarray:
    """max/min ratio of s on the circle; 1 for s == 0, inf if degenerate."""
    A = _as_batch(A)
    smax, smin = circle_extrema_batch(base, A, n_dirs)
    deg = degenerate_mask(A)
    zero = ~np.any(A.reshape(len(A), -1) != 0, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = smax / smin
    q = np.where(deg, np.inf, q)
    q = np.where(zero, 1.0, q)
    return np.maximum(q, 1.0)


# -- scalar API ------------------------------------------------------------


def evaluate(s: Seminorm2, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    out = s.base(v @ s.A.T)
    return float(out) if out.ndim == 0 else out


def i_plus(s: Seminorm2, p: float = 2.0) -> float:
    return float(i_plus_batch(s.base, s.A, p)[0])


def i_avg(s: Seminorm2, p: float = 2.0, n_dirs: int | None = None) -> float:
    return float(i_avg_batch(s.base, s.A, p, n_dirs)[0])


def q_factor(s: Seminorm2) -> float:
    return float(q_factor_batch(s.base, s.A)[0])


def compose(s: Seminorm2, T) -> Seminorm2:
    """The seminorm ``v -> s(T v)``."""
    return Seminorm2(s.A @ np.asarray(T, dtype=float), s.base)


def seminorm_distance(s1: Seminorm2, s2: Seminorm2, n_dirs: int = 4096) -> float:
    """Sup-distance of the two seminorms over the unit circle."""
    theta = np.pi * np.arange(n_dirs) / n_dirs

    def gap(t):
        u = np.stack([np.cos(t), np.sin(t)], axis=-1)
        return np.abs(evaluate(s1, u) - evaluate(s2, u))

    vals = gap(theta)
    best = float(vals.max())
    h = np.pi / n_dirs
    for k in np.argsort(vals)[-4:]:
        a, b = theta[k] - h, theta[k] + h
        for _ in range(60):
            c = b - _GOLDEN * (b - a)
            d = a + _GOLDEN * (b - a)
            if gap(np.array(c)) > gap(np.array(d)):
                b = d
            else:
                a = c
        best = max(best, float(gap(np.array(0.5 * (a + b)))))
    return best
