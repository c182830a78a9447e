"""Triangulated unit discs.

``make_disc_mesh(level)`` builds ``R = 2**level`` concentric rings; ring j
has radius ``j / R`` and ``8 j`` equally spaced vertices starting at angle 0.
Neighbouring rings are stitched by merging their angle sequences, which gives
``1 + 4 R (R + 1)`` vertices, ``8 R^2`` triangles and ``8 R`` boundary
vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True, eq=False)
class DiscMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    level: int = 0
    rings: int = 0  # 0 when the mesh is not concentric

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        T = np.array(self.triangles, dtype=np.int64)
        B = np.array(self.boundary, dtype=np.int64)
        for a in (V, T, B):
            a.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "triangles", T)
        object.__setattr__(self, "boundary", B)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @cached_property
    def signed_areas(self) -> np.ndarray:
        P = self.vertices[self.triangles]
        e1 = P[:, 1] - P[:, 0]
        e2 = P[:, 2] - P[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def triangle_areas(self) -> np.ndarray:
        return np.abs(self.signed_areas)

    @property
    def area(self) -> float:
        return float(np.sum(self.triangle_areas))

    @cached_property
    def interior_mask(self) -> np.ndarray:
        m = np.ones(self.n_vertices, bool)
        m[self.boundary] = False
        return m

    @cached_property
    def edge_matrices(self) -> np.ndarray:
        """``E_t = [z1 - z0, z2 - z0]`` as columns, shape (T, 2, 2)."""
        P = self.vertices[self.triangles]
        return np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]], axis=2)

    def gradient_operators(self) -> np.ndarray:
        """(T, 2, 3) arrays mapping the three vertex values to the gradient."""
        return self._gradient_operators

    @cached_property
    def _gradient_operators(self):
        Einv = np.linalg.inv(self.edge_matrices)
        S = np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
        return np.einsum("tij,jv->tiv", np.transpose(Einv, (0, 2, 1)), S)

    @cached_property
    def edges(self) -> np.ndarray:
        T = self.triangles
        e = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
        e = np.sort(e, axis=1)
        return np.unique(e, axis=0)

    def validate(self) -> None:
        """Raise ValueError if a structural invariant fails."""
        V = self.vertices
        r = np.hypot(V[:, 0], V[:, 1])
        if np.any(r > 1.0 + 1e-12):
            raise ValueError("vertices outside the closed disc")
        if np.any(np.abs(r[self.boundary] - 1.0) > 1e-12):
            raise ValueError("boundary vertices off the unit circle")
        if np.any(self.signed_areas < 1e-12):
            raise ValueError("degenerate or clockwise triangle")
        # boundary edges (used by one triangle) must form exactly the cycle
        T = self.triangles
        e = np.sort(np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        bd_edges = {tuple(x) for x in uniq[counts == 1]}
        B = self.boundary
        cycle = {tuple(sorted((int(B[i]), int(B[(i + 1) % len(B)])))) for i in range(len(B))}
        if bd_edges != cycle or len(set(B.tolist())) != len(B):
            raise ValueError("boundary cycle does not match the mesh boundary")

    def refine(self) -> "DiscMesh":
        """Split each triangle into four; new boundary vertices go onto the circle."""
        mesh, _ = refine_with_parents(self)
        return mesh


def make_disc_mesh(level: int) -> DiscMesh:
    if level < 0:
        raise ValueError("level must be non-negative")
    R = 2**level
    verts = [np.zeros(2)]
    start = [0]
    for j in range(1, R + 1):
        n = 8 * j
        th = 2 * np.pi * np.arange(n) / n
        start.append(len(verts))
        verts.extend(np.stack([np.cos(th), np.sin(th)], axis=1) * (j / R))
    V = np.array(verts)
    tris = []
    for j in range(1, R + 1):
        n_out = 8 * j
        o = start[j]
        if j == 1:
            for i in range(n_out):
                tris.append((0, o + i, o + (i + 1) % n_out))
            continue
        n_in = 8 * (j - 1)
        s = start[j - 1]
        a = b = 0
        # merge the angle sequences; ties resolved towards the outer ring
        while a < n_in or b < n_out:
            next_in = (a + 1) / n_in
            next_out = (b + 1) / n_out
            if b < n_out and (a == n_in or next_out <= next_in):
                tris.append((s + a % n_in, o + b, o + (b + 1) % n_out))
                b += 1
            else:
                tris.append((s + a % n_in, o + (b % n_out), s + (a + 1) % n_in))
                a += 1
    T = np.array(tris, dtype=np.int64)
    P = V[T]
    sa = (P[:, 1, 0] - P[:, 0, 0]) * (P[:, 2, 1] - P[:, 0, 1]) - (P[:, 1, 1] - P[:, 0, 1]) * (P[:, 2, 0] - P[:, 0, 0])
    T[sa < 0] = T[sa < 0][:, [0, 2, 1]]
    boundary = np.arange(start[R], start[R] + 8 * R)
    return DiscMesh(V, T, boundary, level=level, rings=R)


def refine_with_parents(mesh: DiscMesh):
    """1 -> 4 midpoint subdivision.

    Returns the new mesh and an (n_new, 2) array of parent vertex indices
    (both equal for old vertices) so that vertex data can be carried over.
    """
    V = mesh.vertices
    T = mesh.triangles
    edges = mesh.edges
    n = len(V)
    key = edges[:, 0] * n + edges[:, 1]
    order = np.argsort(key)
    key_sorted = key[order]

    def mid_index(a, b):
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        pos = np.searchsorted(key_sorted, lo * n + hi)
        return n + order[pos]

    M = 0.5 * (V[edges[:, 0]] + V[edges[:, 1]])
    B = mesh.boundary
    bd_edge_idx = mid_index(B, np.roll(B, -1)) - n
    M[bd_edge_idx] /= np.linalg.norm(M[bd_edge_idx], axis=1, keepdims=True)
    newV = np.concatenate([V, M])
    a, b, c = T[:, 0], T[:, 1], T[:, 2]
    ab, bc, ca = mid_index(a, b), mid_index(b, c), mid_index(c, a)
    newT = np.concatenate([
        np.stack([a, ab, ca], 1),
        np.stack([ab, b, bc], 1),
        np.stack([ca, bc, c], 1),
        np.stack([ab, bc, ca], 1),
    ])
    newB = np.empty(2 * len(B), dtype=np.int64)
    newB[0::2] = B
    newB[1::2] = bd_edge_idx + n
    parents = np.concatenate([np.stack([np.arange(n), np.arange(n)], 1), edges])
    return DiscMesh(newV, newT, newB, level=mesh.level + 1, rings=0), parents


def write_off(mesh: DiscMesh, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(off_text(mesh))


def off_text(mesh: DiscMesh) -> str:
    lines = ["OFF", f"{mesh.n_vertices} {len(mesh.triangles)} 0"]
    lines += [f"{float(x)!r} {float(y)!r} 0.0" for x, y in mesh.vertices]
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    return "\n".join(lines) + "\n"


def read_off(path_or_text) -> DiscMesh:
    """Parse an ASCII OFF mesh of the disc; boundary recovered from free edges."""
    text = str(path_or_text)
    if "\n" not in text:
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    tokens = [ln.split("#")[0].split() for ln in text.splitlines()]
    tokens = [t for t in tokens if t]
    if tokens[0][0] != "OFF":
        raise ValueError("not an OFF file")
    nv, nf = int(tokens[1][0]), int(tokens[1][1])
    V = np.array([[float(t[0]), float(t[1])] for t in tokens[2 : 2 + nv]])
    faces = []
    for t in tokens[2 + nv : 2 + nv + nf]:
        if int(t[0]) != 3:
            raise ValueError("only triangular faces are supported")
        faces.append([int(x) for x in t[1:4]])
    T = np.array(faces, dtype=np.int64)
    return DiscMesh(V, T, boundary_cycle(T, len(V)))


def boundary_cycle(T: np.ndarray, n: int) -> np.ndarray:
    """Counterclockwise boundary vertex cycle from the free edges."""
    e = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
    key = np.minimum(e[:, 0], e[:, 1]) * n + np.maximum(e[:, 0], e[:, 1])
    uniq, counts = np.unique(key, return_counts=True)
    free = set(uniq[counts == 1].tolist())
    nxt = {}
    for a, b in e:
        k = min(a, b) * n + max(a, b)
        if k in free:
            nxt[int(a)] = int(b)
    start = min(nxt)
    cycle = [start]
    while True:
        v = nxt[cycle[-1]]
        if v == start:
            break
        cycle.append(v)
    return np.array(cycle, dtype=np.int64)
