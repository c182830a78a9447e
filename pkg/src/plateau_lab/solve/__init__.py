"""Minimisation of discrete energies and areas, inner variations and fillings."""

from .bidisc import bidisc_scenario, bidisc_window
from .fill import fill_injective, fill_report, isoperimetric_probe
from .plateau import (
    Discretization,
    PlateauProblem,
    SolveResult,
    SolverConfig,
    minimize_area,
    minimize_energy,
)
from .variation import LocalDeformation, john_map, stationarity_scan, variation_test
