"""Regularity diagnostics for PL maps: short circles and Hölder exponents."""

from __future__ import annotations

import math

import numpy as np

from .errors import InsufficientSamplesError
from .plmap import PLMap


def circle_arc_length(u: PLMap, z0, r: float, n_samples: int = 2048) -> float:
    """Length of u along the part of the circle |z - z0| = r inside the disc.

    Uses chord sums between consecutive samples that both lie in the closed
    disc, measured in the target metric.
    """
    th = 2 * np.pi * np.arange(n_samples) / n_samples
    z = np.asarray(z0, dtype=float) + r * np.stack([np.cos(th), np.sin(th)], axis=1)
    inside = np.hypot(z[:, 0], z[:, 1]) <= 1.0
    if not np.any(inside):
        return 0.0
    x = np.full((n_samples, u.target.chart_dim), np.nan)
    x[inside] = u.evaluate(z[inside])
    nxt = np.roll(np.arange(n_samples), -1)
    both = inside & inside[nxt]
    if not np.any(both):
        return 0.0
    return float(np.sum(u.target.chart_distance(x[both], x[nxt][both])))


def courant_lebesgue(u: PLMap, z0, delta: float, n_radii: int = 64, n_samples: int = 2048) -> dict:
    """Search radii in (delta, sqrt(delta)) for a short image of a circle.

    The bound is ``pi * sqrt(2 E / |log delta|)`` with E the averaged
    (Korevaar-Schoen) energy of u.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    lo, hi = math.log(delta), 0.5 * math.log(delta)
    # open interval: skip the endpoints
    radii = np.exp(np.linspace(lo, hi, n_radii + 2)[1:-1])
    lengths = np.array([circle_arc_length(u, z0, r, n_samples) for r in radii])
    k = int(np.argmin(lengths))
    energy = u.energy_ks()
    bound = math.pi * math.sqrt(2.0 * energy / abs(math.log(delta)))
    return {
        "r_star": float(radii[k]),
        "arc_length": float(lengths[k]),
        "bound": bound,
        "pass": bool(lengths[k] <= bound),
    }


def _random_in_ball(rng, center, radius, n):
    rad = radius * np.sqrt(rng.uniform(size=n))
    ang = rng.uniform(0, 2 * np.pi, size=n)
    return np.asarray(center, dtype=float) + rad[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def mesh_size(u: PLMap) -> float:
    V = u.mesh.vertices
    e = u.mesh.edges
    return float(np.max(np.linalg.norm(V[e[:, 0]] - V[e[:, 1]], axis=1)))


def holder_fit(u: PLMap, center=(0.0, 0.0), radius: float = 0.5, samples_per_bin: int = 4000,
               min_separation: float | None = None, seed: int = 0, quantile: float = 0.95) -> dict:
    """Estimate a Hölder exponent of u on the ball B(center, radius).

    Pairs at dyadic separations h are drawn uniformly in the ball and, in equal
    number, with the first point in B(center, h), so that the behaviour at
    the centre is always represented.  For each separation the larger of the
    two ``quantile`` values (uniform pairs, centred pairs) is regressed on h
    in log-log scale.  Separations go down to ``min_separation``, by default
    the longest mesh edge.

    Returns
    -------
    dict with ``alpha`` (slope), ``constant`` (exp of the intercept),
    ``rmse`` of the log fit and the per-bin data.
    """
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=float)
    h_min = min_separation if min_separation is not None else mesh_size(u)
    seps = []
    h = radius / 2.0
    while h >= h_min * (1 - 1e-12):
        seps.append(h)
        h /= 2.0
    rows = []
    for h in seps:
        q = 0.0
        n_used = 0
        for ball in (radius, h):
            z1 = _random_in_ball(rng, center, ball, samples_per_bin)
            ang = rng.uniform(0, 2 * np.pi, size=len(z1))
            z2 = z1 + h * np.stack([np.cos(ang), np.sin(ang)], axis=1)
            ok = (np.linalg.norm(z1 - center, axis=1) <= radius) & (np.linalg.norm(z2 - center, axis=1) <= radius)
            ok &= (np.hypot(z1[:, 0], z1[:, 1]) <= 1.0) & (np.hypot(z2[:, 0], z2[:, 1]) <= 1.0)
            if np.sum(ok) < 20:
                continue
            d = u.target.chart_distance(u.evaluate(z1[ok]), u.evaluate(z2[ok]))
            q = max(q, float(np.quantile(d, quantile)))
            n_used += int(np.sum(ok))
        if q > 0:
            rows.append((h, q, n_used))
    if len(rows) < 3:
        raise InsufficientSamplesError(f"only {len(rows)} usable separation bins (need 3)")
    H = np.log([r[0] for r in rows])
    D = np.log([r[1] for r in rows])
    alpha, intercept = np.polyfit(H, D, 1)
    resid = D - (alpha * H + intercept)
    return {
        "alpha": float(alpha),
        "constant": float(math.exp(intercept)),
        "rmse": float(np.sqrt(np.mean(resid**2))),
        "bins": [{"h": h, "q": q, "n": n} for h, q, n in rows],
    }


def preimage_point(u: PLMap, w) -> np.ndarray:
    """A domain point mapped to the chart point ``w`` (first two coordinates).

    Searches the image triangles for one containing w and inverts its
    barycentric coordinates; falls back to the vertex with the closest image.
    """
    w = np.asarray(w, dtype=float)[:2]
    X = u.images[:, :2][u.mesh.triangles]
    e1 = X[:, 1] - X[:, 0]
    e2 = X[:, 2] - X[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    ok = np.abs(det) > 1e-300
    d = w - X[:, 0]
    safe = np.where(ok, det, 1.0)
    b1 = (d[:, 0] * e2[:, 1] - d[:, 1] * e2[:, 0]) / safe
    b2 = (e1[:, 0] * d[:, 1] - e1[:, 1] * d[:, 0]) / safe
    b0 = 1.0 - b1 - b2
    slack = np.minimum(np.minimum(b0, b1), b2)
    slack = np.where(ok, slack, -np.inf)
    t = int(np.argmax(slack))
    if slack[t] < -1e-9:
        k = int(np.argmin(np.linalg.norm(u.images[:, :2] - w, axis=1)))
        return u.mesh.vertices[k].copy()
    Z = u.mesh.vertices[u.mesh.triangles[t]]
    return b0[t] * Z[0] + b1[t] * Z[1] + b2[t] * Z[2]
