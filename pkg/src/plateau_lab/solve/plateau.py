"""Energy and area minimisation with a Jordan boundary and a 3-point condition.

Unknowns are the chart coordinates of the interior vertices and one curve
parameter per boundary vertex.  Three boundary vertices (at domain angles
near 0, 2 pi/3, 4 pi/3) are pinned to the curve parameters 0, 2 pi/3 and
4 pi/3.  The parameters of the remaining boundary vertices must stay weakly
increasing between consecutive pins; after each step they are projected
back by isotonic regression followed by clipping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.optimize import isotonic_regression
from scipy.sparse.linalg import splu, spsolve

from ..errors import InfeasibleBoundaryError
from ..integrands import jacobian_and_grad, smooth_i_avg, smooth_i_plus
from ..mesh import DiscMesh, make_disc_mesh
from ..plmap import PLMap, qc_report
from ..target import BiDisc, EuclideanCone, EuclideanSpace, JordanBoundary, NormedPlane, TargetSpace
from ..volume import VolumeDefinition, norm_constant
from .optimizer import minimize_lbfgs

FUNCTIONALS = ("energy_plus", "energy_ks", "area", "area_regularized")
PIN_PARAMS = (0.0, 2 * math.pi / 3, 4 * math.pi / 3)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 2000
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    n_dirs: int = 64
    beta: float = 32.0
    avg_dirs: int = 256
    eps0: float = 0.1
    eps_ratio: float = 0.5
    eps_stages: int = 8
    tol: float = 1e-9
    window: int = 10
    memory: int = 10
    refresh_every: int = 50
    init: str = "harmonic"
    seed: int = 0

    def __post_init__(self):
        for name in ("armijo", "tol", "beta", "eps_ratio"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must lie in (0, 1)")
        if self.eps0 < 0 or self.eps_stages < 0:
            raise ValueError("eps schedule must be non-negative")
        if self.init not in ("harmonic", "constant"):
            raise ValueError("init must be 'harmonic' or 'constant'")

    def with_(self, **kw) -> "SolverConfig":
        d = asdict(self)
        d.update(kw)
        return SolverConfig(**d)

    def eps_schedule(self) -> list:
        if self.eps0 == 0 or self.eps_stages == 0:
            return [0.0]
        return [self.eps0 * self.eps_ratio**k for k in range(self.eps_stages)]


@dataclass(frozen=True, eq=False)
class PlateauProblem:
    target: TargetSpace
    boundary: JordanBoundary
    mesh_level: int = 4
    functional: str = "energy_plus"
    mu: VolumeDefinition | None = None
    pins: tuple = PIN_PARAMS

    def __post_init__(self):
        if self.functional not in FUNCTIONALS:
            raise ValueError(f"functional must be one of {FUNCTIONALS}")
        if isinstance(self.target, BiDisc):
            raise ValueError("the solver does not handle glued targets")
        if not self.boundary.length > 0:
            raise InfeasibleBoundaryError("boundary has zero length")
        p = np.asarray(self.pins, dtype=float)
        if len(p) != 3 or not (0 <= p[0] < p[1] < p[2] < 2 * math.pi):
            raise ValueError("pins must be three increasing parameters in [0, 2 pi)")
        if self.mu is not None:
            object.__setattr__(self, "mu", VolumeDefinition.parse(self.mu))

    @cached_property
    def mesh(self) -> DiscMesh:
        return make_disc_mesh(self.mesh_level)


@dataclass
class SolveResult:
    map: PLMap
    values: dict
    qc: dict
    trace: list
    termination: str
    stages: list = field(default_factory=list)
    iterations: int = 0

    def summary(self) -> dict:
        qc = {k: v for k, v in self.qc.items() if k != "per_triangle"}
        return {"values": self.values, "qc": qc, "termination": self.termination,
                "iterations": self.iterations, "stages": self.stages}


class Discretization:
    """Variable layout, projection, objective and metric for one problem."""

    def __init__(self, problem: PlateauProblem, mesh: DiscMesh | None = None):
        self.problem = problem
        self.target = problem.target
        self.curve = problem.boundary
        self.mesh = mesh or problem.mesh
        m = self.mesh
        self.d = self.target.chart_dim
        self.n = m.n_vertices
        self.B = m.boundary
        nB = len(self.B)
        self.interior = np.nonzero(m.interior_mask)[0]
        self.pin_pos = np.array([int(round(k * nB / 3)) % nB for k in range(3)])
        if len(set(self.pin_pos.tolist())) < 3:
            raise ValueError("mesh boundary too coarse for three pins")
        self.pin_params = np.asarray(problem.pins, dtype=float)
        # boundary positions per arc between consecutive pins
        self.arcs = []
        bounds = list(self.pin_params) + [self.pin_params[0] + 2 * math.pi]
        for a in range(3):
            p0, p1 = self.pin_pos[a], self.pin_pos[(a + 1) % 3]
            span = (p1 - p0) % nB
            pos = (p0 + np.arange(1, span)) % nB
            self.arcs.append((pos, bounds[a], bounds[a + 1], span))
        self.free_pos = np.concatenate([a[0] for a in self.arcs])
        self.n_int = len(self.interior)
        self.n_var = self.n_int * self.d + len(self.free_pos)
        self.D = m.gradient_operators()
        self.areas = m.triangle_areas
        self.tri = m.triangles

    # -- layout --------------------------------------------------------------
    def initial_params(self) -> np.ndarray:
        t = np.empty(len(self.B))
        t[self.pin_pos] = self.pin_params
        for pos, lo, hi, span in self.arcs:
            t[pos] = lo + (hi - lo) * np.arange(1, span) / span
        return t

    def all_params(self, x) -> np.ndarray:
        t = np.empty(len(self.B))
        t[self.pin_pos] = self.pin_params
        t[self.free_pos] = x[self.n_int * self.d :]
        return t

    def pack(self, X, t) -> np.ndarray:
        return np.concatenate([X[self.interior].ravel(), t[self.free_pos]])

    def images(self, x) -> np.ndarray:
        X = np.empty((self.n, self.d))
        X[self.interior] = x[: self.n_int * self.d].reshape(self.n_int, self.d)
        X[self.B] = self.curve.point(self.all_params(x))
        return X

    def project(self, x) -> np.ndarray:
        x = x.copy()
        off = self.n_int * self.d
        k = 0
        for pos, lo, hi, _ in self.arcs:
            seg = x[off + k : off + k + len(pos)]
            if len(seg):
                seg = isotonic_regression(seg).x
                x[off + k : off + k + len(pos)] = np.clip(seg, lo, hi)
            k += len(pos)
        return x

    # -- initial maps ----------------------------------------------------------
    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        K_loc = self.areas[:, None, None] * np.einsum("tjv,tjw->tvw", self.D, self.D)
        rows = np.repeat(self.tri, 3, axis=1).ravel()
        cols = np.tile(self.tri, (1, 3)).ravel()
        return sp.csr_matrix((K_loc.ravel(), (rows, cols)), shape=(self.n, self.n))

    def initial_x(self, init: str = "harmonic") -> np.ndarray:
        t = self.initial_params()
        Xb = self.curve.point(t)
        X = np.zeros((self.n, self.d))
        X[self.B] = Xb
        if init == "constant":
            X[self.interior] = np.mean(Xb, axis=0)
        else:
            K = self.stiffness.tocsc()
            I = self.interior
            KII = K[I][:, I]
            KIB = K[I][:, self.B]
            X[I] = np.column_stack([spsolve(KII, -KIB @ Xb[:, c]) for c in range(self.d)])
        return self.pack(X, t)

    # -- objective -------------------------------------------------------------
    def objective(self, integrand, chord_weight: float = 0.0):
        """Wrap ``integrand(base, A) -> (values, dA)`` into f(x) -> (F, grad).

        With ``chord_weight`` > 0 the area between the boundary chords and the
        curve (in the chart, times the weight) is added; see ``chord_gap``.
        """
        target = self.target
        base = target.base
        D, tri, areas, n = self.D, self.tri, self.areas, self.n

        def scatter(contrib):
            g = np.zeros((n, contrib.shape[2]))
            for v in range(3):
                for c in range(contrib.shape[2]):
                    g[:, c] += np.bincount(tri[:, v], weights=contrib[:, v, c], minlength=n)
            return g

        def fun(x):
            X = self.images(x)
            if isinstance(target, EuclideanCone):
                A, back = _cone_derivatives(target, X, tri, D)
            else:
                Yamb = target.ambient(X)
                A = np.einsum("tvk,tjv->tkj", Yamb[tri], D)
                back = None
            val, gA = integrand(base, A)
            F = float(np.sum(areas * val))
            GA = areas[:, None, None] * gA
            if back is None:
                gY = scatter(np.einsum("tkj,tjv->tvk", GA, D))
                gX = np.einsum("nk,nkd->nd", gY, target.ambient_jacobian(X))
            else:
                gX = scatter(back(GA))
            if chord_weight:
                gap, gP = self.chord_gap(X)
                F += chord_weight * gap
                gX[self.B] += chord_weight * gP
            t = self.all_params(x)[self.free_pos]
            tang = self.curve.tangent(t)
            gt = np.sum(gX[self.B[self.free_pos]] * tang, axis=1)
            return F, np.concatenate([gX[self.interior].ravel(), gt])

        return fun

    @cached_property
    def curve_area(self) -> float:
        P = self.curve.points[:, :2]
        return 0.5 * float(np.sum(P[:, 0] * np.roll(P[:, 1], -1) - P[:, 1] * np.roll(P[:, 0], -1)))

    def chord_gap(self, X):
        """Chart area between the curve and the polygon of boundary images.

        Equals the curve's enclosed area minus the (shoelace) area of the
        boundary polygon, so it is additive over boundary edges.  Without it
        an area functional gains by bunching boundary vertices together and
        letting long chords cut off pieces of the region.
        """
        P = X[self.B][:, :2]
        Pn = np.roll(P, -1, axis=0)
        Pp = np.roll(P, 1, axis=0)
        poly = 0.5 * float(np.sum(P[:, 0] * Pn[:, 1] - P[:, 1] * Pn[:, 0]))
        grad = -0.5 * np.stack([Pn[:, 1] - Pp[:, 1], Pp[:, 0] - Pn[:, 0]], axis=1)
        return self.curve_area - poly, grad

    def preconditioner(self, x):
        """``M^{-1}`` for the stiffness metric pulled back to the unknowns."""
        d = self.d
        K = self.stiffness
        Kd = sp.kron(K, sp.identity(d), format="csr")
        rows = []
        cols = []
        vals = []
        for c in range(d):
            rows.append(self.interior * d + c)
            cols.append(np.arange(self.n_int) * d + c)
            vals.append(np.ones(self.n_int))
        t = self.all_params(x)[self.free_pos]
        tang = self.curve.tangent(t)
        vb = self.B[self.free_pos]
        for c in range(d):
            rows.append(vb * d + c)
            cols.append(self.n_int * d + np.arange(len(vb)))
            vals.append(tang[:, c])
        C = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(self.n * d, self.n_var))
        M = (C.T @ Kd @ C).tocsc()
        diag = M.diagonal()
        M = M + sp.diags(1e-10 * np.mean(diag) + 1e-12 * np.maximum(diag, 0.0))
        lu = splu(M.tocsc())
        return lu.solve

    def to_map(self, x) -> PLMap:
        return PLMap(self.mesh, self.target, self.images(x))


def _cone_derivatives(cone: EuclideanCone, X, tri, D):
    """Per-triangle derivatives in the cone metric frozen at the chart centroid.

    The cone metric in the chart is ``J(w)^T J(w)`` with J the Jacobian of
    the embedding; its determinant is r^2 everywhere, so areas are exact
    for chart-linear triangles.  Secant derivatives of the embedding would
    let triangles around the apex cut through the inside of the cone.
    Returns A = J(c) L and a function mapping dF/dA to per-vertex chart
    gradients of shape (T, 3, 2).
    """
    P = X[tri]
    L = np.einsum("tvd,tjv->tdj", P, D)
    c = P.mean(axis=1)
    norm = np.hypot(c[:, 0], c[:, 1])
    safe = np.where(norm > 0, norm, 1.0)
    w = np.where(norm[:, None] > 0, c / safe[:, None], 0.0)
    h = cone.height
    J = np.zeros((len(tri), 3, 2))
    J[:, 0, 0] = J[:, 1, 1] = cone.r
    J[:, 2] = h * w
    A = np.einsum("tkd,tdj->tkj", J, L)

    def back(GA):
        gL = np.einsum("tkd,tkj->tdj", J, GA)
        per_vertex = np.einsum("tdj,tjv->tvd", gL, D)
        gw = h * np.einsum("tkj,tj->tk", L, GA[:, 2])
        gc = (gw - np.sum(gw * w, axis=1, keepdims=True) * w) / safe[:, None]
        gc = np.where(norm[:, None] > 0, gc, 0.0)
        return per_vertex + gc[:, None, :] / 3.0

    return A, back


def _integrand(problem: PlateauProblem, cfg: SolverConfig, kind: str, eps: float = 0.0):
    if kind == "energy_plus":
        return lambda b, A: smooth_i_plus(b, A, cfg.beta, cfg.n_dirs)
    if kind == "energy_ks":
        return lambda b, A: smooth_i_avg(b, A, cfg.avg_dirs)
    mu = problem.mu or VolumeDefinition.BUSEMANN

    def area(b, A):
        J, gJ = jacobian_and_grad(mu, b, A)
        if eps == 0:
            return J, gJ
        E, gE = smooth_i_plus(b, A, cfg.beta, cfg.n_dirs)
        return J + eps * E, gJ + eps * gE

    return area


def chart_area_density(target: TargetSpace, mu) -> float:
    """Constant ratio of μ-area to chart area, or 0 if the ratio is not constant."""
    if isinstance(target, NormedPlane) and target.norm.dim == 2:
        return norm_constant(VolumeDefinition.parse(mu), target.norm)
    if isinstance(target, EuclideanSpace) and target.N == 2:
        return 1.0
    if isinstance(target, EuclideanCone):
        return target.r
    return 0.0


def _run(disc: Discretization, integrand, x0, cfg: SolverConfig, strict: bool = True,
         chord_weight: float = 0.0):
    return minimize_lbfgs(
        disc.objective(integrand, chord_weight), x0, project=disc.project, precond=disc.preconditioner,
        max_iters=cfg.max_iters, memory=cfg.memory, armijo=cfg.armijo, backtrack=cfg.backtrack,
        max_backtracks=cfg.max_backtracks, tol=cfg.tol, window=cfg.window,
        refresh_every=cfg.refresh_every, strict=strict,
    )


def _result(disc: Discretization, x, trace, reason, stages=(), iterations=0) -> SolveResult:
    u = disc.to_map(x)
    return SolveResult(map=u, values=u.functionals(), qc=qc_report(u), trace=list(trace),
                       termination=reason, stages=list(stages), iterations=iterations)


def minimize_energy(problem: PlateauProblem, cfg: SolverConfig | None = None, x0=None) -> SolveResult:
    """Minimise the max-stretch or averaged energy over maps with the given boundary.

    The max-stretch energy uses the power-mean surrogate during descent; the
    returned values are exact re-evaluations of the final map.
    """
    cfg = cfg or SolverConfig()
    kind = problem.functional if problem.functional in ("energy_plus", "energy_ks") else "energy_plus"
    disc = Discretization(problem)
    x = disc.initial_x(cfg.init) if x0 is None else x0
    res = _run(disc, _integrand(problem, cfg, kind), x, cfg, strict=x0 is None)
    return _result(disc, res.x, res.trace, res.reason, iterations=res.iterations)


def minimize_area(problem: PlateauProblem, mu=None, cfg: SolverConfig | None = None, x0=None) -> SolveResult:
    """Minimise μ-area, regularised by ``eps * E_+`` along a decreasing eps schedule.

    Each stage is warm-started from the previous one.  With ``eps0 = 0`` a
    single unregularised stage is run.
    """
    cfg = cfg or SolverConfig()
    mu = VolumeDefinition.parse(mu or problem.mu or VolumeDefinition.BUSEMANN)
    problem = PlateauProblem(problem.target, problem.boundary, problem.mesh_level,
                             "area_regularized" if cfg.eps0 > 0 else "area", mu, problem.pins)
    disc = Discretization(problem)
    x = disc.initial_x(cfg.init) if x0 is None else x0
    trace = []
    stages = []
    total = 0
    reason = ""
    for k, eps in enumerate(cfg.eps_schedule()):
        res = _run(disc, _integrand(problem, cfg, "area", eps), x, cfg, strict=k == 0,
                   chord_weight=chart_area_density(problem.target, mu))
        x = res.x
        trace.extend((total + i, f) for i, f in res.trace)
        total += res.iterations
        u = disc.to_map(x)
        stages.append({"eps": eps, "area": u.area_mu(mu), "energy_plus": u.energy_plus(),
                       "iterations": res.iterations, "termination": res.reason})
        reason = res.reason
    return _result(disc, x, trace, reason, stages, total)
