"""RIS placement: orientation, horizontal distance and the two baselines.

The orientation is fixed in closed form (broadside to the BS, ``psi = pi/2``).
The horizontal distance is optimized as a nested 1-D problem: for each
candidate ``D_h`` the crossover angles and arc radii are resolved by root
finding and the area evaluated, then a coarse scan picks the best bracket and
golden-section search refines it.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .channel import RadioConfig, RisPanel
from .coverage import CellModel, CoverageError, SolverConfig, feasibility_check, feasibility_limit
from .geometry import SiteGeometry
from .montecarlo import make_rng

MIN_DISTANCE = 1.0
RANDOM_PSI_MARGIN = 0.05 * math.pi
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class PlacementError(RuntimeError):
    pass


@dataclass(frozen=True)
class PlacementSolution:
    D_h_star: float
    psi_star: float
    area_star: float
    evaluations: int
    bracket: tuple[float, float]
    scan: tuple[tuple[float, float], ...] = ()


def optimal_orientation() -> float:
    return math.pi / 2


def clip_bounds(
    radio: RadioConfig, site: SiteGeometry, bounds: tuple[float, float] | None
) -> tuple[float, float]:
    """Intersect ``bounds`` with the direct-link feasible interval."""
    limit = feasibility_limit(radio, site)
    if limit <= 0.0:
        raise PlacementError("no horizontal distance satisfies the direct-link condition")
    lo, hi = (MIN_DISTANCE, limit) if bounds is None else bounds
    hi = min(hi, limit)
    if not 0.0 < lo <= hi:
        raise PlacementError(f"empty feasible interval: bounds {bounds!r}, limit {limit:.6g} m")
    return lo, hi


def area_at(
    radio: RadioConfig,
    panel: RisPanel | None,
    site: SiteGeometry,
    D_h: float,
    psi: float,
    cfg: SolverConfig | None = None,
) -> float:
    return CellModel(radio, panel, replace(site, D_h=D_h, psi=psi), cfg).area()


def _parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def orientation_sweep(
    radio: RadioConfig,
    panel: RisPanel | None,
    geo_base: SiteGeometry,
    psi_grid: Iterable[float],
    cfg: SolverConfig | None = None,
    threads: int = 1,
) -> list[tuple[float, float]]:
    """Area for each orientation at the base horizontal distance, sorted by ``psi``."""
    grid = sorted(float(p) for p in psi_grid)
    areas = _parallel_map(lambda p: area_at(radio, panel, geo_base, geo_base.D_h, p, cfg), grid, threads)
    return list(zip(grid, areas))


class _Objective:
    """Area as a function of ``D_h`` with a thread-safe evaluation counter."""

    def __init__(self, radio, panel, site, cfg):
        self.radio, self.panel, self.site, self.cfg = radio, panel, site, cfg
        self.count = 0
        self._lock = threading.Lock()

    def __call__(self, D_h: float) -> float:
        with self._lock:
            self.count += 1
        try:
            return area_at(self.radio, self.panel, self.site, D_h, self.site.psi, self.cfg)
        except CoverageError:
            return -math.inf


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, rtol: float = 1e-4
) -> tuple[float, float, float, float]:
    """Maximize ``f`` on ``[a, b]``; returns ``(x_best, f_best, a_final, b_final)``.

    Stops once the bracket is narrower than ``rtol`` times its midpoint.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > rtol * 0.5 * abs(a + b):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc, a, b) if fc >= fd else (d, fd, a, b)


def optimize_horizontal_distance(
    radio: RadioConfig,
    panel: RisPanel | None,
    site: SiteGeometry,
    cfg: SolverConfig | None = None,
    bounds: tuple[float, float] | None = None,
    n_scan: int = 64,
    rtol: float = 1e-4,
    threads: int = 1,
) -> PlacementSolution:
    """Best ``D_h`` at the orientation carried by ``site`` (its ``D_h`` is ignored).

    A coarse scan over the clipped bounds locates the best node, golden-section
    search refines the interval between its neighbours, and the best point
    seen (scan nodes included) is returned.
    """
    lo, hi = clip_bounds(radio, site, bounds)
    objective = _Objective(radio, panel, site, cfg)
    xs = np.linspace(lo, hi, n_scan).tolist() if hi > lo else [lo]
    ys = _parallel_map(objective, xs, threads)
    if not any(math.isfinite(y) for y in ys):
        raise PlacementError("the area could not be evaluated at any scan node")
    i = int(np.argmax(ys))
    best_x, best_y = xs[i], ys[i]
    bracket = (xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)])
    if bracket[1] > bracket[0]:
        x, y, a, b = golden_section_max(objective, bracket[0], bracket[1], rtol)
        if y > best_y:
            best_x, best_y = x, y
        bracket = (min(a, best_x), max(b, best_x))
    if not feasibility_check(radio, replace(site, D_h=best_x)):
        raise PlacementError(f"optimizer returned an infeasible distance {best_x!r}")
    return PlacementSolution(
        D_h_star=best_x,
        psi_star=site.psi,
        area_star=best_y,
        evaluations=objective.count,
        bracket=bracket,
        scan=tuple(zip(xs, ys)),
    )


def cma(
    radio: RadioConfig,
    panel: RisPanel | None,
    site: SiteGeometry,
    cfg: SolverConfig | None = None,
    bounds: tuple[float, float] | None = None,
    n_scan: int = 64,
    threads: int = 1,
) -> PlacementSolution:
    """Coverage maximization: broadside orientation, then the distance search."""
    oriented = replace(site, psi=optimal_orientation())
    return optimize_horizontal_distance(radio, panel, oriented, cfg, bounds, n_scan=n_scan, threads=threads)


def baseline_random(
    bounds: tuple[float, float], seed: int = 0, rng: np.random.Generator | None = None
) -> tuple[float, float]:
    """Uniform ``D_h`` in ``bounds`` and uniform orientation away from the degenerate ends."""
    lo, hi = bounds
    if not 0.0 < lo <= hi:
        raise PlacementError(f"invalid bounds {bounds!r}")
    if rng is None:
        rng = make_rng(seed)
    D_h = float(rng.uniform(lo, hi))
    psi = float(rng.uniform(RANDOM_PSI_MARGIN, math.pi - RANDOM_PSI_MARGIN))
    return D_h, psi


def baseline_bss(radio: RadioConfig, panel: RisPanel) -> tuple[float, float]:
    """RIS next to the BS at the Fraunhofer distance of its diagonal aperture."""
    far_field = 2.0 * panel.aperture**2 / radio.wavelength
    return max(far_field, MIN_DISTANCE), math.pi / 2
