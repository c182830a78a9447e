"""Piecewise-linear maps from a triangulated disc into a target space.

Every discrete functional is a weighted sum over triangles,
``sum_T |T| * f(s_T)``, where ``s_T`` is the derivative seminorm on T:

* ``energy_plus``: f = I_+ (max squared stretch)
* ``energy_ks``:   f = I_avg (circle-averaged squared stretch)
* ``area_mu``:     f = mu-Jacobian
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .mesh import DiscMesh, off_text, read_off, refine_with_parents
from .seminorm import (
    Seminorm2,
    degenerate_mask,
    i_avg_batch,
    i_plus_batch,
    q_factor_batch,
)
from .target import TargetSpace, target_from_dict
from .volume import ALL_VOLUMES, VolumeDefinition, jacobian_batch

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PLMap:
    mesh: DiscMesh
    target: TargetSpace
    images: np.ndarray

    def __post_init__(self):
        Y = np.array(self.images, dtype=float)
        if Y.ndim != 2 or len(Y) != self.mesh.n_vertices:
            raise ValueError("need one image per mesh vertex")
        if Y.shape[1] != self.target.chart_dim:
            raise ValueError(f"images need {self.target.chart_dim} chart coordinates")
        self.target.check_domain(Y)
        Y.setflags(write=False)
        object.__setattr__(self, "images", Y)

    def with_images(self, images) -> "PLMap":
        return PLMap(self.mesh, self.target, images)

    @cached_property
    def groups(self):
        """List of (base, A, triangle indices); A has shape (n, k, 2)."""
        return self.target.derivative_groups(self.images, self.mesh.triangles, self.mesh.gradient_operators())

    def triangle_seminorm(self, t: int) -> Seminorm2:
        for base, A, idx in self.groups:
            pos = np.searchsorted(idx, t)
            if pos < len(idx) and idx[pos] == t:
                return Seminorm2(A[pos], base)
        raise IndexError(t)

    def per_triangle(self, fn) -> np.ndarray:
        """Evaluate ``fn(base, A)`` per group and scatter back to triangle order."""
        out = np.empty(len(self.mesh.triangles))
        for base, A, idx in self.groups:
            out[idx] = fn(base, A)
        return out

    def _integrate(self, values) -> float:
        # fixed summation order for bit-stable results
        return float(np.sum(self.mesh.triangle_areas * values))

    @cached_property
    def i_plus_values(self):
        return self.per_triangle(lambda b, A: i_plus_batch(b, A))

    @cached_property
    def i_avg_values(self):
        return self.per_triangle(lambda b, A: i_avg_batch(b, A))

    def jacobian_values(self, mu) -> np.ndarray:
        mu = VolumeDefinition.parse(mu)
        return self.per_triangle(lambda b, A: jacobian_batch(mu, b, A))

    def q_values(self) -> np.ndarray:
        return self.per_triangle(lambda b, A: q_factor_batch(b, A))

    def degenerate_values(self) -> np.ndarray:
        return self.per_triangle(lambda b, A: degenerate_mask(A, DEGENERATE_TOL)).astype(bool)

    def energy_plus(self) -> float:
        return self._integrate(self.i_plus_values)

    def energy_ks(self) -> float:
        return self._integrate(self.i_avg_values)

    def area_mu(self, mu) -> float:
        return self._integrate(self.jacobian_values(mu))

    def functionals(self) -> dict:
        out = {"energy_plus": self.energy_plus(), "energy_ks": self.energy_ks()}
        for mu in ALL_VOLUMES:
            out[f"area_{mu.value}"] = self.area_mu(mu)
        return out

    def qc_report(self, quantiles=(0.05, 0.25, 0.5, 0.75, 0.95)) -> dict:
        return qc_report(self, quantiles)

    def trace_curve(self):
        """Boundary polyline (chart coordinates) and its length in the target."""
        P = self.images[self.mesh.boundary]
        seg = self.target.chart_distance(P, np.roll(P, -1, axis=0))
        return P, float(np.sum(seg))

    def refine(self) -> "PLMap":
        mesh, parents = refine_with_parents(self.mesh)
        Y = self.target.chart_midpoint(self.images[parents[:, 0]], self.images[parents[:, 1]])
        return PLMap(mesh, self.target, Y)

    @cached_property
    def _interpolator(self):
        import matplotlib.tri as mtri

        V = self.mesh.vertices
        tri = mtri.Triangulation(V[:, 0], V[:, 1], self.mesh.triangles)
        return tri, tri.get_trifinder()

    def evaluate(self, z) -> np.ndarray:
        """Chart coordinates of the PL map at arbitrary points of the closed disc.

        Points just outside the inscribed polygon are pulled inward slightly.
        """
        z = np.atleast_2d(np.asarray(z, dtype=float))
        tri, finder = self._interpolator
        idx = finder(z[:, 0], z[:, 1])
        if np.any(idx < 0):
            z = z.copy()
            z[idx < 0] = self._onto_polygon(z[idx < 0])
            idx = finder(z[:, 0], z[:, 1])
        shrink = 1.0
        while np.any(idx < 0) and shrink > 0.5:
            shrink *= 1.0 - 1e-3
            bad = idx < 0
            zz = z[bad] * shrink
            idx[bad] = finder(zz[:, 0], zz[:, 1])
            z = z.copy()
            z[bad] = zz
        if np.any(idx < 0):
            raise ValueError("points outside the mesh")
        T = self.mesh.triangles[idx]
        P = self.mesh.vertices[T]
        E = np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]], axis=2)
        lam = np.linalg.solve(E, (z - P[:, 0])[..., None])[..., 0]
        w = np.stack([1 - lam[:, 0] - lam[:, 1], lam[:, 0], lam[:, 1]], axis=1)
        return np.einsum("nv,nvk->nk", w, self.images[T])

    def _onto_polygon(self, z) -> np.ndarray:
        """Pull points radially onto the boundary polygon (star-shaped about 0)."""
        B = self.mesh.vertices[self.mesh.boundary]
        ang = np.arctan2(B[:, 1], B[:, 0])
        order = np.argsort(ang)
        B, ang = B[order], ang[order]
        th = np.arctan2(z[:, 1], z[:, 0])
        k = (np.searchsorted(ang, th, side="right") - 1) % len(B)
        a, b = B[k], B[(k + 1) % len(B)]
        e = b - a
        u = np.stack([np.cos(th), np.sin(th)], axis=1)
        den = u[:, 0] * e[:, 1] - u[:, 1] * e[:, 0]
        t = (a[:, 0] * e[:, 1] - a[:, 1] * e[:, 0]) / np.where(den != 0, den, 1.0)
        rad = np.minimum(np.hypot(z[:, 0], z[:, 1]), t * (1.0 - 1e-12))
        return u * rad[:, None]

    # serialisation
    def to_json(self) -> str:
        return json.dumps({
            "mesh": off_text(self.mesh),
            "target": self.target.descriptor(),
            "images": self.images.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "PLMap":
        d = json.loads(text)
        return cls(read_off(d["mesh"]), target_from_dict(d["target"]), np.array(d["images"]))


def identity_map(mesh: DiscMesh, target: TargetSpace, scale: float = 1.0, chart: int = 1) -> PLMap:
    return PLMap(mesh, target, target.lift(scale * mesh.vertices, chart))


def affine_map(mesh: DiscMesh, target: TargetSpace, L, offset=None) -> PLMap:
    L = np.asarray(L, dtype=float)
    Y = mesh.vertices @ L.T
    if offset is not None:
        Y = Y + np.asarray(offset, dtype=float)
    return PLMap(mesh, target, Y)


def map_from_function(mesh: DiscMesh, target: TargetSpace, fn) -> PLMap:
    return PLMap(mesh, target, np.asarray(fn(mesh.vertices), dtype=float))


def _weighted_quantiles(values, weights, qs):
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = np.cumsum(weights[order])
    w = w / w[-1]
    return [float(v[min(np.searchsorted(w, q), len(v) - 1)]) for q in qs]


def qc_report(u: PLMap, quantiles=(0.05, 0.25, 0.5, 0.75, 0.95)) -> dict:
    """Per-triangle Q summary; degenerate triangles are excluded and counted."""
    Q = u.q_values()
    deg = u.degenerate_values() | ~np.isfinite(Q)
    areas = u.mesh.triangle_areas
    good = ~deg
    out = {
        "per_triangle": Q,
        "degenerate_fraction": float(np.sum(areas[deg]) / np.sum(areas)),
        "degenerate_count": int(np.sum(deg)),
    }
    if np.any(good):
        qs = _weighted_quantiles(Q[good], areas[good], quantiles)
        out["max"] = float(np.max(Q[good]))
        out["quantiles"] = {f"{q:g}": v for q, v in zip(quantiles, qs)}
        out["median"] = _weighted_quantiles(Q[good], areas[good], [0.5])[0]
    else:
        out["max"] = float("nan")
        out["quantiles"] = {}
        out["median"] = float("nan")
    return out
