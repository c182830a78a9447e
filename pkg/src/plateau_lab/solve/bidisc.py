"""Two canonical fillings of the gluing circle in a bi-disc, compared per volume."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterOutOfWindowError
from ..mesh import make_disc_mesh
from ..plmap import identity_map
from ..seminorm import NormDescriptor
from ..target import BiDisc
from ..volume import VolumeDefinition, norm_constant

TIE_MARGIN = 1e-9


def bidisc_window(V: NormDescriptor, mus) -> tuple:
    """Open interval of lambda^2 in which the two volumes disagree."""
    lo, hi = sorted(norm_constant(VolumeDefinition.parse(m), V) for m in mus)
    return lo, hi


def bidisc_scenario(V: NormDescriptor | None = None, lam: float = 0.95,
                    mus=(VolumeDefinition.BUSEMANN, VolumeDefinition.MASS_STAR), level: int = 5) -> dict:
    """Areas of the chart-1 and chart-2 identity fillings under two volumes.

    Disc 1 has μ-area normConstant(μ, V)·π, disc 2 has λ²π for every μ, so
    the argmins differ exactly when λ² lies strictly between the constants.

    Raises
    ------
    ParameterOutOfWindowError
        If λ² is not strictly inside the window.
    """
    V = V or NormDescriptor.linf()
    mus = tuple(VolumeDefinition.parse(m) for m in mus)
    if len(mus) != 2 or mus[0] == mus[1]:
        raise ValueError("need two distinct volume definitions")
    lo, hi = bidisc_window(V, mus)
    if not lo < lam**2 < hi:
        raise ParameterOutOfWindowError(f"lambda^2 = {lam**2:.6g} not in ({lo:.6g}, {hi:.6g})")
    target = BiDisc(V, lam)
    mesh = make_disc_mesh(level)
    fills = {"u1": identity_map(mesh, target, chart=1), "u2": identity_map(mesh, target, chart=2)}
    areas = {mu.value: {name: u.area_mu(mu) for name, u in fills.items()} for mu in mus}
    argmin = {}
    for mu, row in areas.items():
        gap = row["u1"] - row["u2"]
        argmin[mu] = "tie" if abs(gap) <= TIE_MARGIN else ("u1" if gap < 0 else "u2")
    picks = list(argmin.values())
    return {
        "V": V.label,
        "lambda": lam,
        "window": [lo, hi],
        "mesh_area": mesh.area,
        "areas": areas,
        "areas_exact_disc": {mu.value: {"u1": norm_constant(mu, V) * np.pi, "u2": lam**2 * np.pi}
                             for mu in mus},
        "argmin": argmin,
        "differ": "tie" not in picks and picks[0] != picks[1],
    }
