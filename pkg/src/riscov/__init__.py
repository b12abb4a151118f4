"""Coverage area and placement optimization for a BS assisted by one RIS."""

from .channel import RadioConfig, RisPanel
from .coverage import CellModel, CoverageBoundary, SolverConfig, coverage_area, coverage_profile
from .geometry import SiteGeometry, UePolar
from .placement import PlacementSolution, cma

__all__ = [
    "CellModel",
    "CoverageBoundary",
    "PlacementSolution",
    "RadioConfig",
    "RisPanel",
    "SiteGeometry",
    "SolverConfig",
    "UePolar",
    "cma",
    "coverage_area",
    "coverage_profile",
]
