"""Metric target spaces and Jordan boundary curves.

A target stores points in chart coordinates (the arrays a PL map carries per
vertex) and knows how to turn a triangle of chart points into a linear map
into some normed space.  That linear map composed with the domain triangle
gives the per-triangle derivative seminorm.

* ``NormedPlane``: chart = the plane itself.
* ``EuclideanSpace``: chart = R^N.
* ``EuclideanCone``: chart ``w`` in R^2 stands for the cone point with
  ``t = |w|`` and angle ``phi = r * arg(w)``.  The cone sits isometrically in
  R^3 as ``(r w1, r w2, sqrt(1 - r^2) |w|)``; triangles use secants there.
* ``BiDisc``: chart = ``(x, y, label)`` with ``|(x, y)| <= 1`` and label 1
  or 2.  Points on the unit circle are shared by both discs.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ChartStraddleError, DomainError, InfeasibleBoundaryError
from .seminorm import EUCLIDEAN, NormDescriptor, Seminorm2

CIRCLE_TOL = 1e-9


def _affine_part(domain_tri, images_tri):
    """Matrix L with L (z_i - z_0) = x_i - x_0 for i = 1, 2."""
    Z = np.asarray(domain_tri, dtype=float)
    X = np.asarray(images_tri, dtype=float)
    E = np.stack([Z[1] - Z[0], Z[2] - Z[0]], axis=1)
    if abs(np.linalg.det(E)) < 1e-15:
        raise ValueError("domain triangle is degenerate")
    F = np.stack([X[1] - X[0], X[2] - X[0]], axis=1)
    return F @ np.linalg.inv(E)


class TargetSpace:
    """Common interface; see the concrete classes below."""

    chart_dim = 2

    def check_domain(self, x) -> None:
        pass

    def chart_distance(self, x, y) -> np.ndarray:
        return self.distance(x, y)

    def ambient(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def ambient_jacobian(self, x) -> np.ndarray:
        """d ambient / d chart at each point, shape (n, k, chart_dim)."""
        x = np.asarray(x, dtype=float)
        k = self.ambient(x[:1]).shape[1]
        return np.broadcast_to(np.eye(k, x.shape[1]), (len(x), k, x.shape[1]))

    @property
    def base(self) -> NormDescriptor:
        raise NotImplementedError

    def derivative_groups(self, images, triangles, D):
        """Per-triangle linear maps grouped by base norm.

        ``D`` has shape (T, 2, 3) and maps vertex values to domain gradients.
        Returns a list of ``(base, A, idx)`` with ``A`` of shape (len(idx), k, 2).
        """
        Y = self.ambient(images)
        A = np.einsum("tvk,tjv->tkj", Y[triangles], D)
        return [(self.base, A, np.arange(len(triangles)))]

    def triangle_seminorm(self, domain_tri, images_tri) -> Seminorm2:
        Y = self.ambient(np.asarray(images_tri, dtype=float))
        return Seminorm2(_affine_part(domain_tri, Y), self.base)

    def chart_midpoint(self, x, y) -> np.ndarray:
        return 0.5 * (np.asarray(x, dtype=float) + np.asarray(y, dtype=float))

    def lift(self, P, chart: int = 1) -> np.ndarray:
        """Planar points as chart coordinates (zero-padded for higher charts)."""
        P = np.asarray(P, dtype=float)
        pad = self.chart_dim - P.shape[1]
        return np.concatenate([P, np.zeros((len(P), pad))], axis=1) if pad > 0 else P

    def descriptor(self) -> dict:
        raise NotImplementedError


def norm_descriptor_dict(n: NormDescriptor) -> dict:
    d = {"kind": n.kind, "dim": n.dim}
    if n.kind == "pnorm":
        d["p"] = "inf" if n.p == math.inf else n.p
    if n.kind == "polygon":
        d["vertices"] = [list(v) for v in n.vertices]
    if n.kind == "ellipse":
        d["gram"] = [list(r) for r in n.gram]
    return d


def norm_from_dict(d) -> NormDescriptor:
    if isinstance(d, str):
        key = d.lower()
        named = {"euclidean": NormDescriptor.euclidean(), "l2": NormDescriptor.euclidean(),
                 "linf": NormDescriptor.linf(), "l1": NormDescriptor.l1(),
                 "square": NormDescriptor.square()}
        if key in named:
            return named[key]
        if key.startswith("l"):
            return NormDescriptor.pnorm(float(key[1:]))
        raise ValueError(f"unknown norm {d!r}")
    kind = d["kind"]
    dim = int(d.get("dim", 2))
    if kind == "euclidean":
        return NormDescriptor.euclidean(dim)
    if kind == "pnorm":
        p = d["p"]
        return NormDescriptor.pnorm(math.inf if p in ("inf", math.inf) else float(p), dim)
    if kind == "polygon":
        return NormDescriptor.polygon(d["vertices"])
    if kind == "ellipse":
        return NormDescriptor.ellipse(d["gram"])
    raise ValueError(f"unknown norm kind {kind!r}")


@dataclass(frozen=True)
class NormedPlane(TargetSpace):
    norm: NormDescriptor = EUCLIDEAN

    def __post_init__(self):
        if self.norm.dim < 2:
            raise ValueError("normed target needs dimension >= 2")

    @property
    def chart_dim(self):
        return self.norm.dim

    @property
    def base(self):
        return self.norm

    def distance(self, x, y):
        return self.norm(np.asarray(y, dtype=float) - np.asarray(x, dtype=float))

    def descriptor(self):
        return {"type": "normed", "norm": norm_descriptor_dict(self.norm)}


@dataclass(frozen=True)
class EuclideanSpace(TargetSpace):
    N: int = 2

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")

    @property
    def chart_dim(self):
        return self.N

    @property
    def base(self):
        return NormDescriptor.euclidean(self.N)

    def distance(self, x, y):
        d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        return np.sqrt(np.sum(d * d, axis=-1))

    def descriptor(self):
        return {"type": "euclidean", "N": self.N}


@dataclass(frozen=True)
class EuclideanCone(TargetSpace):
    """Cone over a circle of radius r in the unit sphere (total angle 2 pi r)."""

    r: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError("cone parameter r must lie in (0, 1]")

    @property
    def base(self):
        return NormDescriptor.euclidean(3)

    @property
    def height(self) -> float:
        return math.sqrt(max(1.0 - self.r * self.r, 0.0))

    # coordinates (t, phi) <-> chart w
    def to_chart(self, tp) -> np.ndarray:
        tp = np.asarray(tp, dtype=float)
        t, phi = tp[..., 0], tp[..., 1]
        theta = phi / self.r
        return np.stack([t * np.cos(theta), t * np.sin(theta)], axis=-1)

    def from_chart(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        t = np.hypot(w[..., 0], w[..., 1])
        phi = np.mod(self.r * np.arctan2(w[..., 1], w[..., 0]), 2 * np.pi * self.r)
        return np.stack([t, phi], axis=-1)

    def check_coords(self, tp):
        tp = np.asarray(tp, dtype=float)
        if np.any(tp[..., 0] < 0) or np.any(tp[..., 1] < 0) or np.any(tp[..., 1] >= 2 * np.pi * self.r + 1e-12):
            raise DomainError("cone points need t >= 0 and 0 <= phi < 2 pi r")

    def distance(self, x, y):
        """Intrinsic distance between cone points given as (t, phi)."""
        self.check_coords(x)
        self.check_coords(y)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t1, t2 = x[..., 0], y[..., 0]
        gap = np.abs(x[..., 1] - y[..., 1])
        delta = np.minimum(gap, 2 * np.pi * self.r - gap)
        sq = np.maximum(t1 * t1 + t2 * t2 - 2 * t1 * t2 * np.cos(np.minimum(delta, np.pi)), 0.0)
        return np.where(delta <= np.pi, np.sqrt(sq), t1 + t2)

    def chart_distance(self, x, y):
        return self.distance(self.from_chart(x), self.from_chart(y))

    def ambient(self, w):
        w = np.asarray(w, dtype=float)
        t = np.hypot(w[..., 0], w[..., 1])
        return np.stack([self.r * w[..., 0], self.r * w[..., 1], self.height * t], axis=-1)

    def ambient_jacobian(self, w):
        w = np.asarray(w, dtype=float)
        t = np.hypot(w[:, 0], w[:, 1])
        safe = np.where(t > 0, t, 1.0)
        J = np.zeros((len(w), 3, 2))
        J[:, 0, 0] = self.r
        J[:, 1, 1] = self.r
        J[:, 2, 0] = np.where(t > 0, self.height * w[:, 0] / safe, 0.0)
        J[:, 2, 1] = np.where(t > 0, self.height * w[:, 1] / safe, 0.0)
        return J

    def descriptor(self):
        return {"type": "cone", "r": self.r}


@dataclass(frozen=True)
class BiDisc(TargetSpace):
    """Two unit discs glued along the boundary circle.

    Disc 1 carries the norm V, disc 2 carries lambda times the Euclidean norm.
    Points are ``(x, y, label)``.
    """

    V: NormDescriptor = field(default_factory=NormDescriptor.linf)
    lam: float = 1.0
    n_gluing: int = 256

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.V.dim != 2:
            raise ValueError("disc 1 needs a planar norm")

    chart_dim = 3

    @cached_property
    def chart_norms(self):
        return {1: self.V, 2: NormDescriptor.ellipse(np.eye(2) * self.lam**2)}

    def check_domain(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 3:
            raise DomainError("bi-disc points are (x, y, label)")
        if not np.all(np.isin(x[..., 2], (1.0, 2.0))):
            raise DomainError("bi-disc chart label must be 1 or 2")
        if np.any(np.hypot(x[..., 0], x[..., 1]) > 1.0 + CIRCLE_TOL):
            raise DomainError("bi-disc points must lie in the closed unit disc")

    def on_circle(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.abs(np.hypot(x[..., 0], x[..., 1]) - 1.0) <= CIRCLE_TOL

    def _chart_metric(self, label, a, b):
        return self.chart_norms[int(label)](np.asarray(b) - np.asarray(a))

    @cached_property
    def _gluing(self):
        th = 2 * np.pi * np.arange(self.n_gluing) / self.n_gluing
        return np.stack([np.cos(th), np.sin(th)], axis=1)

    def _single_distance(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        lp = {1, 2} if self.on_circle(p) else {int(p[2])}
        lq = {1, 2} if self.on_circle(q) else {int(q[2])}
        best = math.inf
        for lab in lp & lq:
            best = min(best, float(self._chart_metric(lab, p[:2], q[:2])))
        # relaxation through sampled gluing points (convex charts: one gluing point
        # per chart change suffices, but allow a second via Dijkstra)
        G = self._gluing
        n = len(G)
        start = np.full(n, np.inf)
        for lab in lp:
            start = np.minimum(start, self._chart_metric(lab, p[:2], G))
        end = np.full(n, np.inf)
        for lab in lq:
            end = np.minimum(end, self._chart_metric(lab, G, q[:2]))
        W = self._gluing_graph
        dist = start.copy()
        heap = [(d, i) for i, d in enumerate(dist) if np.isfinite(d)]
        heapq.heapify(heap)
        done = np.zeros(n, bool)
        while heap:
            d, i = heapq.heappop(heap)
            if done[i]:
                continue
            done[i] = True
            nd = d + W[i]
            better = nd < dist
            if np.any(better):
                dist[better] = nd[better]
                for j in np.nonzero(better)[0]:
                    heapq.heappush(heap, (dist[j], j))
        return min(best, float(np.min(dist + end)))

    @cached_property
    def _gluing_graph(self):
        G = self._gluing
        diff = G[None, :, :] - G[:, None, :]
        return np.minimum(self.V(diff), self.lam * np.sqrt(np.sum(diff * diff, axis=-1)))

    def distance(self, x, y):
        """Quotient distance (diagnostic grade: paths through sampled gluing points)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self.check_domain(x)
        self.check_domain(y)
        xb, yb = np.broadcast_arrays(x, y)
        flat_x = xb.reshape(-1, 3)
        flat_y = yb.reshape(-1, 3)
        out = np.array([self._single_distance(a, b) for a, b in zip(flat_x, flat_y)])
        return out.reshape(xb.shape[:-1]) if xb.ndim > 1 else float(out[0])

    def triangle_labels(self, images_tri) -> int:
        X = np.asarray(images_tri, dtype=float)
        free = ~self.on_circle(X)
        labels = set(X[free, 2].astype(int).tolist())
        if len(labels) > 1:
            raise ChartStraddleError("triangle images lie in different discs")
        if labels:
            return labels.pop()
        return int(X[0, 2])

    def triangle_seminorm(self, domain_tri, images_tri):
        lab = self.triangle_labels(images_tri)
        L = _affine_part(domain_tri, np.asarray(images_tri, dtype=float)[:, :2])
        return Seminorm2(L, self.chart_norms[lab])

    def derivative_groups(self, images, triangles, D):
        images = np.asarray(images, dtype=float)
        self.check_domain(images)
        Xt = images[triangles]
        free = ~self.on_circle(Xt)
        lab = np.where(free, Xt[..., 2], 0.0)
        has1 = np.any(lab == 1.0, axis=1)
        has2 = np.any(lab == 2.0, axis=1)
        if np.any(has1 & has2):
            raise ChartStraddleError("triangle images lie in different discs")
        tri_label = np.where(has2, 2, np.where(has1, 1, Xt[:, 0, 2].astype(int)))
        A = np.einsum("tvk,tjv->tkj", Xt[..., :2], D)
        groups = []
        for lab_value in (1, 2):
            idx = np.nonzero(tri_label == lab_value)[0]
            if len(idx):
                groups.append((self.chart_norms[lab_value], A[idx], idx))
        return groups

    def lift(self, P, chart: int = 1):
        P = np.asarray(P, dtype=float)
        return np.concatenate([P[:, :2], np.full((len(P), 1), float(chart))], axis=1)

    def chart_midpoint(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        m = 0.5 * (x + y)
        m[..., 2] = np.where(self.on_circle(x), y[..., 2], x[..., 2])
        return m

    def descriptor(self):
        return {"type": "bidisc", "V": norm_descriptor_dict(self.V), "lambda": self.lam}


def target_from_dict(d: dict) -> TargetSpace:
    kind = d.get("type")
    if kind == "normed":
        return NormedPlane(norm_from_dict(d.get("norm", "euclidean")))
    if kind == "euclidean":
        return EuclideanSpace(int(d.get("N", 2)))
    if kind == "cone":
        return EuclideanCone(float(d["r"]))
    if kind == "bidisc":
        return BiDisc(norm_from_dict(d.get("V", "linf")), float(d.get("lambda", 1.0)))
    raise ValueError(f"unknown target type {kind!r}")


# -- boundary curves --------------------------------------------------------


def _segments_cross(P: np.ndarray) -> bool:
    """True if two non-adjacent edges of the closed planar polyline meet."""
    n = len(P)
    A = P
    B = np.roll(P, -1, axis=0)

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    scale = max(np.abs(P).max(), 1e-300)
    eps = 1e-13 * scale * scale
    for start in range(0, n, 256):
        i = np.arange(start, min(start + 256, n))[:, None]
        j = np.arange(n)[None, :]
        a, b = A[i], B[i]
        c, d = A[j], B[j]
        o1 = orient(a, b, c)
        o2 = orient(a, b, d)
        o3 = orient(c, d, a)
        o4 = orient(c, d, b)
        hit = (o1 * o2 < -eps * eps) & (o3 * o4 < -eps * eps)
        adjacent = (np.abs(i - j) <= 1) | (np.abs(i - j) == n - 1)
        if np.any(hit & ~adjacent):
            return True
    return False


class JordanBoundary:
    """Closed polyline in a target chart with its constant-speed parametrization.

    ``point(t)`` for ``t`` in [0, 2 pi) travels at speed ``length / (2 pi)``
    in the target metric (exactly for straight chart segments in normed and
    Euclidean targets, to polyline accuracy on the cone).
    """

    def __init__(self, target: TargetSpace, points, check: bool = True):
        P = np.asarray(points, dtype=float)
        if P.ndim != 2 or len(P) < 3:
            raise InfeasibleBoundaryError("boundary needs at least three vertices")
        if np.allclose(P[0], P[-1]):
            P = P[:-1]
        self.target = target
        self.points = P
        seg = np.asarray(target.chart_distance(P, np.roll(P, -1, axis=0)), dtype=float)
        if np.any(seg <= 0):
            raise InfeasibleBoundaryError("boundary polyline repeats a vertex")
        if check:
            key = np.round(P, 12)
            if len(np.unique(key, axis=0)) < len(P):
                raise InfeasibleBoundaryError("boundary polyline is not injective")
            if P.shape[1] >= 2 and _segments_cross(P[:, :2]):
                raise InfeasibleBoundaryError("boundary polyline crosses itself")
        self.segment_lengths = seg
        self.cumulative = np.concatenate([[0.0], np.cumsum(seg)])
        self.length = float(self.cumulative[-1])

    def vertex_params(self) -> np.ndarray:
        return 2 * np.pi * self.cumulative[:-1] / self.length

    def point(self, t) -> np.ndarray:
        t = np.mod(np.asarray(t, dtype=float), 2 * np.pi)
        s = t / (2 * np.pi) * self.length
        i = np.clip(np.searchsorted(self.cumulative, s, side="right") - 1, 0, len(self.points) - 1)
        frac = (s - self.cumulative[i]) / self.segment_lengths[i]
        a = self.points[i]
        b = self.points[(i + 1) % len(self.points)]
        return a + frac[..., None] * (b - a)

    def tangent(self, t) -> np.ndarray:
        """d point / d t (chart coordinates), piecewise constant."""
        t = np.mod(np.asarray(t, dtype=float), 2 * np.pi)
        s = t / (2 * np.pi) * self.length
        i = np.clip(np.searchsorted(self.cumulative, s, side="right") - 1, 0, len(self.points) - 1)
        a = self.points[i]
        b = self.points[(i + 1) % len(self.points)]
        return (b - a) * (self.length / (2 * np.pi) / self.segment_lengths[i])[..., None]

    # constructors
    @classmethod
    def circle(cls, target: TargetSpace | None = None, radius: float = 1.0, n: int = 512):
        target = target or EuclideanSpace(2)
        th = 2 * np.pi * np.arange(n) / n
        P = radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        if target.chart_dim > 2:
            P = np.concatenate([P, np.zeros((n, target.chart_dim - 2))], axis=1)
        return cls(target, P)

    @classmethod
    def ellipse(cls, target: TargetSpace | None = None, a: float = 2.0, b: float = 1.0, n: int = 512):
        target = target or EuclideanSpace(2)
        th = 2 * np.pi * np.arange(n) / n
        return cls(target, np.stack([a * np.cos(th), b * np.sin(th)], axis=1))

    @classmethod
    def square(cls, target: TargetSpace | None = None, half_side: float = 1.0):
        """Boundary of the l-infinity ball, starting at (1, 0)."""
        target = target or NormedPlane(NormDescriptor.linf())
        h = half_side
        P = np.array([[h, 0.0], [h, h], [-h, h], [-h, -h], [h, -h]])
        return cls(target, P)

    @classmethod
    def cone_circle(cls, cone: EuclideanCone, t: float = 1.0, n: int = 1024):
        """The circle at distance t from the apex (length 2 pi r t)."""
        th = 2 * np.pi * np.arange(n) / n
        return cls(cone, t * np.stack([np.cos(th), np.sin(th)], axis=1))
