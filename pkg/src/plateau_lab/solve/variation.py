"""Inner variations by local affine deformations of the domain.

A deformation ``rho`` equals ``z0 + T^{-1}(z - z0)`` on the ball B(z0, r) and
is the conformal map ``c zeta + d / zeta`` (in rotated, rescaled coordinates)
outside it.  Composing with a conformal map ``phi: D -> rho(D)`` gives a
homeomorphism ``psi = rho^{-1} o phi`` of the disc, and by conformal
invariance of the energy

    E_+(u o psi) - E_+(u) = int_B  I_+(du o T) - I_+(du)  dz.

For a PL map the right-hand side is a finite sum over triangles weighted by
their overlap with the ball, which is what ``variation_test`` reports.  The
left-hand side is also computed directly (``phi`` by Theodorsen's method, the
composition interpolated on a refined mesh) as an independent check.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DeformationDegenerateError, DomainError, NonConvergenceError
from ..mesh import make_disc_mesh
from ..plmap import PLMap
from ..seminorm import EUCLIDEAN, Seminorm2, effective_gram, i_plus_batch, q_factor_batch
from ..volume import exact_ball, max_inscribed_ellipse, unit_ball


# -- the local deformation ---------------------------------------------------


class LocalDeformation:
    """``rho`` for a ball B(z0, r) and T in SL(2).

    With the singular value decomposition ``T^{-1} = K diag(a, b) L`` (K, L
    rotations) and ``zeta = L (z - z0) / r``, the map is
    ``z0 + r K h(zeta)`` where ``h`` is ``diag(a, b)`` on the closed unit disc
    and ``c zeta + d / zeta`` outside, ``c = (a + b) / 2``, ``d = (a - b) / 2``.
    """

    def __init__(self, z0, r: float, T):
        T = np.asarray(T, dtype=float)
        det = float(np.linalg.det(T))
        if not np.all(np.isfinite(T)) or det <= 0:
            raise DeformationDegenerateError("T must be an orientation-preserving invertible map")
        if abs(det - 1.0) > 1e-8:
            raise ValueError(f"T must have determinant 1, got {det!r}")
        self.z0 = np.asarray(z0, dtype=float)
        self.r = float(r)
        self.T = T
        U, S, Vt = np.linalg.svd(np.linalg.inv(T))
        if np.linalg.det(U) < 0:
            # both factors are reflections; S commutes with diag(1, -1)
            U = U @ np.diag([1.0, -1.0])
            Vt = np.diag([1.0, -1.0]) @ Vt
        self.K, self.L = U, Vt
        self.a, self.b = float(S[0]), float(S[1])
        self.c = 0.5 * (self.a + self.b)
        self.d = 0.5 * (self.a - self.b)
        if abs(self.d) >= self.c:
            raise DeformationDegenerateError("|d| >= c: the outer map is not injective")

    def _to_zeta(self, z):
        w = (np.asarray(z, dtype=float) - self.z0) @ self.L.T / self.r
        return w[..., 0] + 1j * w[..., 1]

    def _from_omega(self, om):
        w = np.stack([om.real, om.imag], axis=-1) @ self.K.T
        return self.z0 + self.r * w

    def __call__(self, z) -> np.ndarray:
        zeta = self._to_zeta(z)
        inside = np.abs(zeta) <= 1.0
        safe = np.where(inside, 1.0, zeta)
        om = np.where(inside, self.a * zeta.real + 1j * self.b * zeta.imag, self.c * zeta + self.d / safe)
        return self._from_omega(om)

    def inverse(self, w) -> np.ndarray:
        om = (np.asarray(w, dtype=float) - self.z0) @ self.K / self.r
        om = om[..., 0] + 1j * om[..., 1]
        inside = (om.real / self.a) ** 2 + (om.imag / self.b) ** 2 <= 1.0
        # c zeta^2 - om zeta + d = 0, root of modulus >= 1
        disc = np.sqrt(om * om - 4.0 * self.c * self.d + 0j)
        z1 = (om + disc) / (2.0 * self.c)
        z2 = (om - disc) / (2.0 * self.c)
        outer = np.where(np.abs(z1) >= np.abs(z2), z1, z2)
        zeta = np.where(inside, om.real / self.a + 1j * om.imag / self.b, outer)
        v = np.stack([zeta.real, zeta.imag], axis=-1) @ self.L
        return self.z0 + self.r * v


# -- conformal map of the disc onto a star-shaped domain --------------------


def _conjugate(f):
    """Harmonic conjugate of periodic samples (zero mean), via the FFT."""
    F = np.fft.fft(f)
    k = np.fft.fftfreq(len(f), d=1.0 / len(f))
    return np.real(np.fft.ifft(-1j * np.sign(k) * F))


class StarConformalMap:
    """Conformal map ``phi`` of the unit disc onto a domain star-shaped about w0.

    The boundary is ``w0 + rho(theta) e^{i theta}``.  Theodorsen's iteration
    solves ``theta(t) - t = K[log rho(theta(t))]`` for the boundary
    correspondence; then ``phi(z) = w0 + z exp(F(z))`` with F holomorphic
    and boundary values ``log rho(theta) + i (theta - t)``.  Normalised by
    ``phi(0) = w0`` and ``phi'(0) > 0``.
    """

    def __init__(self, boundary_fn, w0, n: int = 1024, tol: float = 1e-12, max_iter: int = 500):
        self.w0 = complex(w0[0], w0[1])
        # tabulate rho(theta) on a fine, strictly increasing angle grid
        s = 2 * np.pi * np.arange(8 * n) / (8 * n)
        P = np.asarray(boundary_fn(s))
        q = P[:, 0] + 1j * P[:, 1] - self.w0
        ang = np.unwrap(np.angle(q))
        if ang[-1] < ang[0]:
            raise ValueError("boundary must be positively oriented")
        if np.any(np.diff(ang) <= 0):
            raise DomainError("domain is not star-shaped about the chosen centre")
        self._ang = ang - ang[0]
        self._ang0 = ang[0]
        self._logrho = np.log(np.abs(q))
        t = 2 * np.pi * np.arange(n) / n
        theta = t.copy()
        for it in range(max_iter):
            lr = self.log_rho(theta)
            new = t + _conjugate(lr - np.mean(lr))
            err = float(np.max(np.abs(new - theta)))
            theta = new
            if err < tol:
                break
        else:
            raise NonConvergenceError("Theodorsen iteration did not converge")
        self.iterations = it + 1
        self.theta = theta
        self.coef = np.fft.fft(self.log_rho(theta)) / n
        self.n = n

    def log_rho(self, theta):
        # angle measured from the tabulation start, periodic
        x = np.mod(theta - self._ang0, 2 * np.pi)
        xp = np.concatenate([self._ang, [2 * np.pi]])
        fp = np.concatenate([self._logrho, [self._logrho[0]]])
        return np.interp(x, xp, fp)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        zc = z[..., 0] + 1j * z[..., 1]
        # F = U + i K[U] with U = log rho(theta(t)) on the circle
        c = 2.0 * self.coef[: self.n // 2]
        c[0] = self.coef[0].real
        w = self.w0 + zc * np.exp(np.polynomial.polynomial.polyval(zc, c))
        return np.stack([w.real, w.imag], axis=-1)

    def boundary_residual(self, boundary_fn, n_check: int = 512) -> float:
        """Distance of phi(e^{it}) from the target boundary curve."""
        t = 2 * np.pi * np.arange(n_check) / n_check
        P = self(np.stack([np.cos(t), np.sin(t)], axis=1))
        q = P[:, 0] + 1j * P[:, 1] - self.w0
        return float(np.max(np.abs(np.log(np.abs(q)) - self.log_rho(np.angle(q)))))


# -- John-optimal deformation ------------------------------------------------


def john_map(s: Seminorm2) -> np.ndarray:
    """T in SL(2) minimising I_+(s o T).

    T maps the unit disc onto a rescaled copy of the largest ellipse inside
    the unit ball of s.
    """
    if s.base.category == "quadratic":
        # the unit ball is itself the ellipse v^T G v <= 1
        G = effective_gram(s.base, s.A)[0]
    else:
        K = exact_ball(s) if s.base.category == "polyhedral" and s.A.shape == (2, 2) else unit_ball(s, 4096)
        G = max_inscribed_ellipse(K).G
    w, V = np.linalg.eigh(G)
    L = V @ np.diag(w**-0.5) @ V.T
    return L / math.sqrt(np.linalg.det(L))


# -- overlap of triangles with a disc --------------------------------------


def _edge_disc_area(p, q, r):
    """Signed area of triangle (0, p, q) intersected with the disc of radius r."""
    d = q - p
    A = d @ d
    B = 2 * (p @ d)
    C = p @ p - r * r
    cuts = [0.0, 1.0]
    disc = B * B - 4 * A * C
    if A > 0 and disc > 0:
        sq = math.sqrt(disc)
        for s in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
            if 0.0 < s < 1.0:
                cuts.append(s)
    cuts.sort()
    total = 0.0
    for s0, s1 in zip(cuts[:-1], cuts[1:]):
        a = p + s0 * d
        b = p + s1 * d
        m = p + 0.5 * (s0 + s1) * d
        cr = a[0] * b[1] - a[1] * b[0]
        if m @ m <= r * r:
            total += 0.5 * cr
        else:
            total += 0.5 * r * r * math.atan2(cr, a @ b)
    return total


def triangle_disc_overlap(P, center, r: float) -> np.ndarray:
    """Areas of triangles ``P`` (n, 3, 2) inside the disc B(center, r)."""
    P = np.asarray(P, dtype=float) - np.asarray(center, dtype=float)
    out = np.zeros(len(P))
    near = np.min(np.linalg.norm(P, axis=2), axis=1) <= r + np.max(
        np.linalg.norm(P - np.roll(P, 1, axis=1), axis=2), axis=1)
    for i in np.nonzero(near)[0]:
        tri = P[i]
        out[i] = abs(sum(_edge_disc_area(tri[k], tri[(k + 1) % 3], r) for k in range(3)))
    return out


# -- the test ---------------------------------------------------------------


def _energy_plus_per_triangle(u: PLMap, T=None) -> np.ndarray:
    out = np.zeros(len(u.mesh.triangles))
    for base, A, idx in u.groups:
        B = A if T is None else A @ T
        out[idx] = i_plus_batch(base, B)
    return out


def variation_test(u: PLMap, z0, r: float, T, direct: bool = True, direct_refine: int = 1,
                   conformal_level: int = 7, conformal_tol: float = 0.05) -> dict:
    """Energy change of u under the inner variation built from (z0, r, T).

    Returns
    -------
    dict with ``delta_energy_plus`` (exact, via the conformal-invariance
    identity), ``delta_direct`` (E_+ of the interpolated composition minus
    E_+ of u on the same refined mesh, when ``direct``), the outer-map
    constants ``c``, ``d`` and the checks ``injective`` and
    ``outside_q_max`` / ``outside_conformal``.

    Raises
    ------
    DeformationDegenerateError
        If T is singular or reverses orientation.
    DomainError
        If the closed ball is not inside the unit disc.
    """
    z0 = np.asarray(z0, dtype=float)
    if r <= 0 or np.hypot(*z0) + r >= 1.0:
        raise DomainError("the closed ball B(z0, r) must lie inside the open unit disc")
    rho = LocalDeformation(z0, r, T)

    # exact route
    V = u.mesh.vertices
    overlap = triangle_disc_overlap(V[u.mesh.triangles], z0, r)
    base_vals = _energy_plus_per_triangle(u)
    moved = _energy_plus_per_triangle(u, rho.T)
    delta = float(np.sum(overlap * (moved - base_vals)))
    energy = float(np.sum(u.mesh.triangle_areas * base_vals))

    # injectivity on samples: rho has an exact left inverse
    rng = np.random.default_rng(0)
    Z = rng.uniform(-1.0, 1.0, size=(4000, 2))
    back = rho.inverse(rho(Z))
    injective = bool(np.max(np.linalg.norm(back - Z, axis=1)) < 1e-9)

    # conformality of the discretised outer map
    mesh = make_disc_mesh(conformal_level)
    P = mesh.vertices[mesh.triangles]
    outside = np.min(np.linalg.norm(P - z0, axis=2), axis=1) > r
    Y = rho(mesh.vertices)
    D = mesh.gradient_operators()[outside]
    A = np.einsum("tvk,tjv->tkj", Y[mesh.triangles[outside]], D)
    q_out = float(np.max(q_factor_batch(EUCLIDEAN, A))) if len(A) else 1.0

    out = {
        "z0": z0.tolist(),
        "r": float(r),
        "T": rho.T.tolist(),
        "c": rho.c,
        "d": rho.d,
        "energy_plus": energy,
        "delta_energy_plus": delta,
        "injective": injective,
        "outside_q_max": q_out,
        "outside_conformal": bool(q_out <= 1.0 + conformal_tol),
    }
    if direct:
        out.update(_direct_delta(u, rho, direct_refine))
    return out


def _direct_delta(u: PLMap, rho: LocalDeformation, refine: int) -> dict:
    def bd(s):
        return rho(np.stack([np.cos(s), np.sin(s)], axis=1))

    phi = None
    for center in (np.zeros(2), rho.z0):
        try:
            phi = StarConformalMap(bd, center)
            break
        except DomainError:
            continue
    if phi is None:
        raise DomainError("deformed disc is not star-shaped about the origin or z0")
    ref = u
    for _ in range(refine):
        ref = ref.refine()
    Z = ref.mesh.vertices
    W = rho.inverse(phi(Z))
    # the composition fixes the boundary circle as a set
    nrm = np.hypot(W[:, 0], W[:, 1])
    W = W / np.maximum(nrm, 1.0)[:, None]
    comp = ref.with_images(u.evaluate(W))
    # same sampling for the reference so that boundary pull-in cancels
    e0 = ref.with_images(u.evaluate(Z)).energy_plus()
    e1 = comp.energy_plus()
    return {
        "delta_direct": e1 - e0,
        "conformal_map_residual": phi.boundary_residual(bd),
        "theodorsen_iterations": phi.iterations,
    }


def default_variation_grid():
    """Fixed (z0, r, T) grid used for stationarity checks of minimizers."""
    grid = []
    for z0 in ((0.0, 0.0), (0.3, 0.2), (-0.25, 0.3), (0.1, -0.4)):
        for r in (0.15, 0.3):
            for a in (1.1, 1.3):
                for ang in (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4):
                    c, s = math.cos(ang), math.sin(ang)
                    R = np.array([[c, -s], [s, c]])
                    grid.append((z0, r, R @ np.diag([a, 1.0 / a]) @ R.T))
    return grid


def stationarity_scan(u: PLMap, grid=None) -> dict:
    """Run the exact variation test over a grid and report the smallest delta."""
    grid = grid if grid is not None else default_variation_grid()
    deltas = [variation_test(u, z0, r, T, direct=False)["delta_energy_plus"] for z0, r, T in grid]
    energy = u.energy_plus()
    k = int(np.argmin(deltas))
    return {
        "energy_plus": energy,
        "min_delta": float(deltas[k]),
        "min_relative": float(deltas[k] / energy) if energy > 0 else 0.0,
        "worst": {"z0": list(grid[k][0]), "r": grid[k][1], "T": np.asarray(grid[k][2]).tolist()},
        "count": len(deltas),
    }
