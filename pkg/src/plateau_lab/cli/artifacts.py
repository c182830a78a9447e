"""Deterministic writers: JSON payloads, CSV tables and SVG map plots."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from ..plmap import PLMap
from ..seminorm import NormDescriptor
from ..volume import ALL_VOLUMES, norm_constant

PACKAGE_ROOT = Path(__file__).resolve().parents[1]


def plain(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(payload) -> str:
    return json.dumps(plain(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def code_hash() -> str:
    """sha256 over the package sources, in sorted path order."""
    h = hashlib.sha256()
    for path in sorted(PACKAGE_ROOT.rglob("*.py")):
        h.update(path.relative_to(PACKAGE_ROOT).as_posix().encode())
        h.update(path.read_bytes())
    return h.hexdigest()


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# -- Jacobian table -----------------------------------------------------------

NAMED_NORMS = {
    "euclidean": NormDescriptor.euclidean,
    "linf": NormDescriptor.linf,
    "l1": NormDescriptor.l1,
    "l3": lambda: NormDescriptor.pnorm(3.0),
    "l1.5": lambda: NormDescriptor.pnorm(1.5),
    "hexagon": lambda: NormDescriptor.polygon(
        [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]),
}


def jacobian_rows(norms, mus=ALL_VOLUMES) -> list:
    """One row per norm: the μ constants plus ordering and factor-2 flags."""
    rows = []
    for name, base in norms:
        vals = {mu.value: norm_constant(mu, base) for mu in mus}
        row = {"norm": name, **vals}
        allv = [norm_constant(mu, base) for mu in ALL_VOLUMES]
        b, ht, ms = (norm_constant(m, base) for m in ("busemann", "holmes-thompson", "mass-star"))
        tol = 1e-9
        row["ht_le_busemann"] = ht <= b * (1 + tol)
        row["busemann_le_mass_star"] = b <= ms * (1 + tol)
        row["max_over_min"] = max(allv) / min(allv)
        row["factor_2"] = row["max_over_min"] <= 2.0 + tol
        rows.append(row)
    return rows


def rows_to_csv(rows) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    fields = list(rows[0].keys())
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\r\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


# -- SVG ----------------------------------------------------------------------


def _q_color(q, q_lo=1.0, q_hi=3.0) -> str:
    """Blue (conformal) to red (Q >= q_hi) on a log scale."""
    t = (math.log(q) - math.log(q_lo)) / (math.log(q_hi) - math.log(q_lo))
    t = min(max(t, 0.0), 1.0)
    r = int(round(40 + 215 * t))
    g = int(round(90 + 80 * (1 - abs(2 * t - 1)) - 40 * t))
    b = int(round(230 * (1 - t) + 25))
    return f"#{r:02x}{g:02x}{b:02x}"


def _fmt(x) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".")


def plot_map_svg(u: PLMap, title: str = "", size: int = 360, q_hi: float = 3.0) -> str:
    """Domain mesh coloured by per-triangle Q next to the image of the boundary.

    Degenerate triangles get a hatch pattern instead of a colour.
    """
    Q = u.q_values()
    deg = u.degenerate_values() | ~np.isfinite(Q)
    pad = 20
    W = 2 * size + 3 * pad
    H = size + 2 * pad + 30
    half = size / 2

    def dom(p):
        return pad + half + half * p[0], pad + 30 + half - half * p[1]

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        "<defs>",
        '<pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6">',
        '<rect width="6" height="6" fill="#ffffff"/>',
        '<path d="M0,6 L6,0" stroke="#000000" stroke-width="1"/>',
        "</pattern>",
        "</defs>",
        f'<rect width="{W}" height="{H}" fill="#ffffff"/>',
        f'<text x="{pad}" y="{pad + 8}" font-family="monospace" font-size="13">{title}</text>',
    ]
    V = u.mesh.vertices
    for t, (i, j, k) in enumerate(u.mesh.triangles):
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (dom(V[i]), dom(V[j]), dom(V[k])))
        fill = "url(#hatch)" if deg[t] else _q_color(float(Q[t]), 1.0, q_hi)
        out.append(f'<polygon points="{pts}" fill="{fill}" stroke="#333333" stroke-width="0.2"/>')
    # image of the boundary trace, first two chart coordinates, fitted into the right panel
    P = u.images[u.mesh.boundary][:, :2]
    lo, hi = P.min(axis=0), P.max(axis=0)
    scale = size / max(float(np.max(hi - lo)), 1e-12)
    x0 = 2 * pad + size
    y0 = pad + 30
    pts = " ".join(
        f"{_fmt(x0 + (p[0] - lo[0]) * scale)},{_fmt(y0 + size - (p[1] - lo[1]) * scale)}" for p in P)
    out.append(f'<polygon points="{pts}" fill="none" stroke="#000000" stroke-width="1.2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
