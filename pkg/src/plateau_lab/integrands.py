"""Smooth surrogates of the energy integrands, with gradients in the matrix A.

The solver works with ``F = sum_T |T| phi(A_T)``; each function here returns
``phi`` for a batch of k x 2 matrices and ``d phi / d A`` of the same shape.

The max-stretch integrand ``I_+`` is not differentiable where two directions
tie for the maximum.  It is replaced by a power mean that never exceeds it:

* Euclidean/ellipse base: ``((l1^b + l2^b) / 2)^(1/b)`` over the eigenvalues
  of the Gram matrix;
* polyhedral base: ``(mean_i |A^T f_i|^(2b))^(1/b)`` over the dual vectors;
* other p-norms: ``(mean_k s(u_k)^(2b))^(1/b)`` over a direction grid.

For Euclidean bases and for the l-infinity square the surrogate is at least
``|det A|`` with equality exactly for similarities, so maps that are
conformal in the Euclidean sense remain exact minimisers.
"""

from __future__ import annotations

import numpy as np

from .seminorm import NormDescriptor, effective_gram, half_circle_grid
from .volume import VolumeDefinition, norm_constant


def _power_mean(x, beta):
    """(mean_i x_i^beta)^(1/beta) along the last axis and its partials."""
    m = np.max(x, axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    r = x / safe
    rb = r**beta
    mean = np.mean(rb, axis=-1, keepdims=True)
    mean = np.where(m > 0, mean, 1.0)  # all-zero rows are masked below
    val = safe * mean ** (1.0 / beta)
    # d val / d x_i = (1/n) r_i^(beta-1) mean^(1/beta - 1)
    dval = rb / np.where(r > 0, r, 1.0) * mean ** (1.0 / beta - 1.0) / x.shape[-1]
    val = np.where(m > 0, val, 0.0)[..., 0]
    dval = np.where(m > 0, dval, 0.0)
    return val, dval


def smooth_i_plus(base: NormDescriptor, A, beta: float = 32.0, n_dirs: int = 64):
    A = np.asarray(A, dtype=float)
    cat = base.category
    if cat == "quadratic":
        Gb = base.gram_matrix if base.kind == "ellipse" else np.eye(base.dim)
        G = effective_gram(base, A)
        lam, vec = np.linalg.eigh(G)
        lam = np.maximum(lam, 0.0)
        val, dval = _power_mean(lam, beta)
        # d lambda_i / d A = 2 Gb A v_i v_i^T
        W = np.einsum("ni,nai,nbi->nab", dval, vec, vec)
        grad = 2.0 * np.einsum("kl,nlj,nja->nka", Gb, A, W)
        return val, grad
    if cat == "polyhedral":
        F = base.facets
        g = np.einsum("nkj,mk->nmj", A, F)
        sq = np.sum(g * g, axis=-1)
        val, dval = _power_mean(sq, beta)
        # d |g_i|^2 / d A = 2 f_i g_i^T
        grad = 2.0 * np.einsum("nm,mk,nmj->nkj", dval, F, g)
        return val, grad
    U = half_circle_grid(n_dirs)
    x = np.einsum("nkj,mj->nmk", A, U)
    s = base(x)
    val, dval = _power_mean(s * s, beta)
    gs = base.gradient(x)
    grad = 2.0 * np.einsum("nm,nm,nmk,mj->nkj", dval, s, gs, U)
    return val, grad


def smooth_i_avg(base: NormDescriptor, A, n_dirs: int = 256):
    """Averaged squared stretch; exact for quadratic bases, trapezoid otherwise."""
    A = np.asarray(A, dtype=float)
    if base.category == "quadratic":
        Gb = base.gram_matrix if base.kind == "ellipse" else np.eye(base.dim)
        G = effective_gram(base, A)
        return G[:, 0, 0] + G[:, 1, 1], 2.0 * np.einsum("kl,nlj->nkj", Gb, A)
    U = half_circle_grid(n_dirs)
    x = np.einsum("nkj,mj->nmk", A, U)
    s = base(x)
    gs = base.gradient(x)
    val = (2.0 / n_dirs) * np.sum(s * s, axis=1)
    grad = (4.0 / n_dirs) * np.einsum("nm,nmk,mj->nkj", s, gs, U)
    return val, grad


def jacobian_and_grad(mu, base: NormDescriptor, A):
    """μ-Jacobian and a (sub)gradient for square A or Euclidean-type bases."""
    A = np.asarray(A, dtype=float)
    mu = VolumeDefinition.parse(mu)
    if base.category == "quadratic":
        G = effective_gram(base, A)
        det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
        J = np.sqrt(np.maximum(det, 0.0))
        # J * G^{-1} = adj(G) / J; zero subgradient on collapsed triangles
        adj = np.stack([np.stack([G[:, 1, 1], -G[:, 0, 1]], -1), np.stack([-G[:, 1, 0], G[:, 0, 0]], -1)], 1)
        scale = np.where(J > 1e-300, 1.0 / np.where(J > 1e-300, J, 1.0), 0.0)
        Gb = base.gram_matrix if base.kind == "ellipse" else np.eye(base.dim)
        grad = np.einsum("kl,nlj,nja->nka", Gb, A, adj * scale[:, None, None])
        return J, grad
    if base.dim != 2:
        raise NotImplementedError("area gradients need a planar base or a Euclidean-type base")
    c = norm_constant(mu, base)
    det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
    cof = np.stack([np.stack([A[:, 1, 1], -A[:, 1, 0]], -1), np.stack([-A[:, 0, 1], A[:, 0, 0]], -1)], 1)
    return c * np.abs(det), c * np.sign(det)[:, None, None] * cof
