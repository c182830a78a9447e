"""Projected, preconditioned L-BFGS with Armijo backtracking.

The inverse-Hessian seed of the two-loop recursion is ``gamma * M^{-1}`` for
a user-supplied SPD metric M (here a Sobolev/stiffness metric), which makes
the iteration count nearly independent of the mesh size.  After every step
the iterate is projected back onto the feasible set; the Armijo test is
applied along the projected path.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonDecreaseError


@dataclass
class OptimizeResult:
    x: np.ndarray
    f: float
    trace: list = field(default_factory=list)
    reason: str = ""
    iterations: int = 0


def minimize_lbfgs(fun, x0, project=None, precond=None, max_iters=1000, memory=10,
                   armijo=1e-4, backtrack=0.5, max_backtracks=40, tol=1e-10,
                   window=10, refresh_every=50, grad_tol=1e-13, strict=True) -> OptimizeResult:
    """Minimise ``fun`` (returning value and gradient) from ``x0``.

    ``project(x)`` maps onto the feasible set; ``precond(x)`` returns a
    function applying ``M^{-1}`` at x.  Terminates when the value decreased
    by less than ``tol`` (relative) over the last ``window`` iterations, when
    the preconditioned gradient norm drops below ``grad_tol`` (relative), or
    after ``max_iters``.  With ``strict=False`` (warm starts) a failed first
    line search is reported as ``line_search_stalled`` instead of raising.

    Raises
    ------
    NonDecreaseError
        If not even the first step decreases the value although the gradient
        is not negligible.
    """
    project = project or (lambda x: x)
    x = project(np.asarray(x0, dtype=float).copy())
    f, g = fun(x)
    solve = precond(x) if precond is not None else (lambda v: v)
    trace = [(0, float(f))]
    S, Y, RHO = deque(maxlen=memory), deque(maxlen=memory), deque(maxlen=memory)
    gamma = 1.0
    reason = "max_iters"
    it = 0

    def direction(g):
        q = g.copy()
        alphas = []
        for s, y, rho in reversed(list(zip(S, Y, RHO))):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        r = gamma * solve(q)
        for (s, y, rho), a in zip(zip(S, Y, RHO), reversed(alphas)):
            b = rho * (y @ r)
            r += (a - b) * s
        return -r

    g0_norm = None
    for it in range(1, max_iters + 1):
        pg = solve(g)
        gnorm = float(np.sqrt(max(g @ pg, 0.0)))
        if g0_norm is None:
            g0_norm = max(gnorm, 1e-300)
        if gnorm <= grad_tol * max(abs(f), 1.0):
            reason = "stationary"
            it -= 1
            break
        accepted = False
        for attempt in range(2):
            d = direction(g) if (attempt == 0 and S) else -pg
            alpha = 1.0
            for _ in range(max_backtracks):
                xn = project(x + alpha * d)
                step = xn - x
                slope = float(g @ step)
                if slope >= 0:
                    alpha *= backtrack
                    continue
                fn, gn = fun(xn)
                if fn <= f + armijo * slope:
                    accepted = True
                    break
                alpha *= backtrack
            if accepted or not S:
                break
            S.clear(), Y.clear(), RHO.clear()
            gamma = 1.0
        if not accepted:
            if strict and it == 1 and gnorm > 1e-8 * max(abs(f), 1.0):
                raise NonDecreaseError("line search found no decrease", trace)
            reason = "line_search_stalled"
            it -= 1
            break
        s = xn - x
        y = gn - g
        sy = float(s @ y)
        if sy > 1e-12 * float(np.sqrt((s @ s) * (y @ y))):
            S.append(s)
            Y.append(y)
            RHO.append(1.0 / sy)
            gamma = sy / float(y @ solve(y))
        x, f, g = xn, fn, gn
        trace.append((it, float(f)))
        if len(trace) > window:
            old = trace[-window - 1][1]
            if old - f <= tol * max(abs(f), 1e-300):
                reason = "tolerance"
                break
        if precond is not None and refresh_every and it % refresh_every == 0:
            solve = precond(x)
            S.clear(), Y.clear(), RHO.clear()
            gamma = 1.0
    return OptimizeResult(x=x, f=float(f), trace=trace, reason=reason, iterations=it)
