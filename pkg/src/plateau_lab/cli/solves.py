"""Memoised minimisers shared by the scenarios (the "shipped minimisers")."""

from __future__ import annotations

from functools import lru_cache

from ..seminorm import NormDescriptor
from ..solve import PlateauProblem, SolverConfig, minimize_area, minimize_energy
from ..target import EuclideanCone, EuclideanSpace, JordanBoundary, NormedPlane
from ..volume import VolumeDefinition


def _problem(kind: str, level: int, r: float = 0.5, functional: str = "energy_plus"):
    if kind == "euclidean-circle":
        target = EuclideanSpace(2)
        return PlateauProblem(target, JordanBoundary.circle(target), level, functional)
    if kind == "linf-square":
        target = NormedPlane(NormDescriptor.linf())
        return PlateauProblem(target, JordanBoundary.square(target), level, functional)
    if kind == "cone":
        cone = EuclideanCone(r)
        return PlateauProblem(cone, JordanBoundary.cone_circle(cone), level, functional)
    raise ValueError(f"unknown problem {kind!r}")


@lru_cache(maxsize=None)
def energy_minimizer(kind: str, level: int, r: float = 0.5, functional: str = "energy_plus",
                     cfg: SolverConfig | None = None):
    return minimize_energy(_problem(kind, level, r, functional), cfg or SolverConfig())


@lru_cache(maxsize=None)
def area_minimizer(kind: str, level: int, mu: VolumeDefinition = VolumeDefinition.BUSEMANN,
                   r: float = 0.5, cfg: SolverConfig | None = None):
    return minimize_area(_problem(kind, level, r, "area_regularized"), mu, cfg or SolverConfig())


def clear():
    energy_minimizer.cache_clear()
    area_minimizer.cache_clear()
