"""Explicit fillings of loops in the sup-norm plane and isoperimetric probes.

A closed curve of length l in the l-infinity plane, parametrised at constant
speed on the circle, is (l / 2 pi)-Lipschitz for the arc-length metric.
The circle is the equator of the unit hemisphere, whose intrinsic metric
restricts to the arc-length metric there.  Each coordinate is extended by
the mean of McShane's upper and lower extensions, using that coordinate's
own Lipschitz constant (at most l / 2 pi).  For the sup norm the result is
(l / 2 pi)-Lipschitz on the hemisphere, hence a filling of μ-area at most
(l / 2 pi)^2 * 2 pi = l^2 / 2 pi.  The extension commutes with affine
changes of a single coordinate, so a curve inside a line is filled inside
that line.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ZeroLengthError
from ..mesh import make_disc_mesh
from ..plmap import PLMap
from ..seminorm import NormDescriptor
from ..target import JordanBoundary, NormedPlane, TargetSpace
from ..volume import ALL_VOLUMES, VolumeDefinition


def constant_speed(points, norm: NormDescriptor):
    """Closed polyline -> (c(theta) evaluator, length) with constant speed."""
    P = np.asarray(points, dtype=float)
    if len(P) > 1 and np.allclose(P[0], P[-1]):
        P = P[:-1]
    seg = norm(np.roll(P, -1, axis=0) - P)
    length = float(np.sum(seg))
    if not length > 0:
        raise ZeroLengthError("curve has zero length")
    cum = np.concatenate([[0.0], np.cumsum(seg)])

    def c(theta):
        s = np.mod(np.asarray(theta, dtype=float), 2 * np.pi) / (2 * np.pi) * length
        i = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(P) - 1)
        # zero-length segments never get selected strictly inside
        frac = np.where(seg[i] > 0, (s - cum[i]) / np.where(seg[i] > 0, seg[i], 1.0), 0.0)
        return P[i] + frac[..., None] * (np.roll(P, -1, axis=0)[i] - P[i])

    return c, length


def disc_to_hemisphere(z) -> np.ndarray:
    """Azimuthal equidistant chart: |z| = 1 goes to the equator."""
    z = np.asarray(z, dtype=float)
    rho = np.hypot(z[:, 0], z[:, 1])
    polar = 0.5 * np.pi * np.minimum(rho, 1.0)
    safe = np.where(rho > 0, rho, 1.0)
    s = np.sin(polar) / safe
    return np.stack([z[:, 0] * s, z[:, 1] * s, np.cos(polar)], axis=1)


def _sphere_distance(X, Y):
    dots = np.clip(X @ Y.T, -1.0, 1.0)
    return np.arccos(dots)


def _is_sup_norm(norm: NormDescriptor) -> bool:
    if norm.kind == "pnorm":
        return norm.p == math.inf and norm.dim == 2
    return norm == NormDescriptor.square()


def fill_injective(curve, mesh_level: int = 4, n_samples: int = 4096, norm: NormDescriptor | None = None) -> PLMap:
    """Lipschitz filling of a closed curve in the sup-norm plane.

    ``curve`` is a JordanBoundary or an array of polyline vertices (need not
    be injective).  Returns a PLMap on the level-``mesh_level`` disc mesh.

    Raises
    ------
    ZeroLengthError
        If the curve has length zero.
    """
    norm = norm or NormDescriptor.linf()
    if not _is_sup_norm(norm):
        raise ValueError("coordinatewise extension is norm-preserving only for the sup norm")
    pts = curve.points if isinstance(curve, JordanBoundary) else curve
    c, length = constant_speed(pts, norm)
    P = np.asarray(pts, dtype=float)
    step = np.roll(P, -1, axis=0) - P
    seg = norm(step)
    # speed of coordinate k along the constant-speed parametrisation
    lip = length / (2 * np.pi) * np.max(np.abs(step[seg > 0]) / seg[seg > 0, None], axis=0)
    mesh = make_disc_mesh(mesh_level)
    # boundary samples: the mesh's own boundary angles plus a dense grid
    zb = mesh.vertices[mesh.boundary]
    th = np.concatenate([np.arctan2(zb[:, 1], zb[:, 0]), 2 * np.pi * np.arange(n_samples) / n_samples])
    E = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=1)
    vals = c(th)
    X = disc_to_hemisphere(mesh.vertices)
    images = np.empty((mesh.n_vertices, 2))
    for lo in range(0, mesh.n_vertices, 2048):
        d = _sphere_distance(X[lo : lo + 2048], E)
        for k in range(2):
            upper = np.min(vals[None, :, k] + lip[k] * d, axis=1)
            lower = np.max(vals[None, :, k] - lip[k] * d, axis=1)
            images[lo : lo + 2048, k] = 0.5 * (upper + lower)
    # boundary vertices take their exact curve values
    images[mesh.boundary] = c(th[: len(zb)])
    return PLMap(mesh, NormedPlane(norm), images)


def fill_report(curve, mesh_level: int = 4, slack: float = 0.05) -> dict:
    """Areas of ``fill_injective`` for every μ against (1 + slack) l^2 / 2 pi."""
    pts = curve.points if isinstance(curve, JordanBoundary) else curve
    _, length = constant_speed(pts, NormDescriptor.linf())
    u = fill_injective(curve, mesh_level)
    bound = (1.0 + slack) * length**2 / (2 * np.pi)
    areas = {mu.value: u.area_mu(mu) for mu in ALL_VOLUMES}
    return {
        "length": length,
        "bound": bound,
        "areas": areas,
        "pass": bool(all(a <= bound for a in areas.values())),
    }


def random_loop(rng, n_min: int = 3, n_max: int = 12, scale: float = 1.0) -> np.ndarray:
    """Random closed polyline (possibly self-intersecting) for fill tests."""
    n = int(rng.integers(n_min, n_max + 1))
    return scale * rng.normal(size=(n, 2))


def isoperimetric_probe(target: TargetSpace, curves, mu=VolumeDefinition.BUSEMANN, cfg=None,
                        mesh_level: int = 4) -> dict:
    """Area-minimise each boundary curve and report C = Area_mu / l^2."""
    from .plateau import PlateauProblem, minimize_area

    mu = VolumeDefinition.parse(mu)
    rows = []
    for curve in curves:
        res = minimize_area(PlateauProblem(target, curve, mesh_level, "area_regularized", mu), mu, cfg)
        area = res.values[f"area_{mu.value}"]
        rows.append({"length": curve.length, "area": area, "C_hat": area / curve.length**2,
                     "termination": res.termination})
    C = [r["C_hat"] for r in rows]
    return {"mu": mu.value, "curves": rows, "max": float(max(C)) if C else math.nan}
