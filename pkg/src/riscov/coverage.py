"""Cell coverage of one BS assisted by one RIS.

In azimuth ``phi`` the cell extends to ``c(phi) = min(d_th(phi), l(phi))``
where ``d_th`` is the horizontal distance at which the optimal-phase SNR
drops to the threshold and ``l`` is the distance to the RIS plane (the UE
must stay on the BS side). The two azimuths where ``d_th == l`` split the
boundary into an SNR-limited arc and two straight pieces along the RIS
plane, which gives the area in closed form up to one 1-D integral.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .channel import (
    EtaCoefficients,
    RadioConfig,
    RisPanel,
    direct_eta,
    eta_coefficients,
)
from .geometry import (
    TWO_PI,
    SiteGeometry,
    bs_ris_distance,
    boundary_ray_length,
    in_boundary_domain,
    incidence_angle,
    wrap_angle,
)

# relative slack when comparing the direct-link SNR at D_h with the threshold
FEASIBILITY_RTOL = 1e-12
# floor on the horizontal BS-UE distance when H_B == H_U would make the
# direct term singular
MIN_HORIZONTAL_DISTANCE = 0.1
BRACKET_CAP = 2**20


class CoverageError(RuntimeError):
    """Base class for coverage solver failures."""


class InfeasibleError(CoverageError):
    """The direct link alone does not reach the threshold at the RIS distance."""


class SolverError(CoverageError):
    """A root bracket could not be built or the residual check failed."""


class SignStructureError(SolverError):
    """``d_th - l`` does not change sign where the crossover must lie."""


class SignStructureWarning(RuntimeWarning):
    """More than one crossover detected on one side of the RIS plane."""


@dataclass(frozen=True)
class SolverConfig:
    K: int = 50
    tol_root: float = 1e-9
    d_max: float = 1000.0
    n_phi: int = 360

    def __post_init__(self) -> None:
        if int(self.K) != self.K or self.K < 2:
            raise ValueError(f"K must be an integer >= 2, got {self.K!r}")
        if not 0.0 < self.tol_root <= 1e-3:
            raise ValueError(f"tol_root must lie in (0, 1e-3], got {self.tol_root!r}")
        if not self.d_max > 0.0:
            raise ValueError(f"d_max must be positive, got {self.d_max!r}")
        if int(self.n_phi) != self.n_phi or self.n_phi < 8:
            raise ValueError(f"n_phi must be an integer >= 8, got {self.n_phi!r}")


@dataclass(frozen=True)
class CoverageBoundary:
    phi_l: float
    phi_u: float
    phi: np.ndarray
    c: np.ndarray
    branch: tuple[str, ...]
    area: float
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.phi.tolist(), self.c.tolist()))


def feasibility_limit(radio: RadioConfig, geo: SiteGeometry) -> float:
    """Largest ``D_h`` for which the direct link still meets the threshold at the RIS.

    Returns 0 when no horizontal distance is feasible at these heights.
    """
    sq = direct_eta(radio) / radio.gamma_th - (geo.H_B - geo.H_U) ** 2
    return math.sqrt(sq) if sq > 0.0 else 0.0


def feasibility_check(radio: RadioConfig, geo: SiteGeometry) -> bool:
    direct = direct_eta(radio) / (geo.D_h**2 + (geo.H_B - geo.H_U) ** 2)
    return direct >= radio.gamma_th * (1.0 - FEASIBILITY_RTOL)


class CellModel:
    """Closed-form SNR field of one placement with its coverage solvers.

    Holds the per-placement constants so repeated root solves only pay for
    the scalar arithmetic. ``panel=None`` models the direct link alone.
    """

    def __init__(
        self,
        radio: RadioConfig,
        panel: RisPanel | None,
        geo: SiteGeometry,
        cfg: SolverConfig | None = None,
    ) -> None:
        self.radio = radio
        self.panel = panel
        self.geo = geo
        self.cfg = cfg or SolverConfig()
        self.eta: EtaCoefficients = eta_coefficients(radio, panel or RisPanel(), incidence_angle(geo))
        self.mn = panel.n_elements if panel is not None else 0
        self.D = bs_ris_distance(geo)
        self._dh_bu2 = (geo.H_B - geo.H_U) ** 2
        self._dh_ru2 = (geo.H_R - geo.H_U) ** 2
        self._ris_const = radio.G * self.D ** (-radio.alpha)

    def g(self, phi: float, d_BU_h: float) -> float:
        """Optimal-phase SNR at azimuth ``phi`` and horizontal BS distance ``d_BU_h``."""
        D_h = self.geo.D_h
        d_bu2 = d_BU_h * d_BU_h + self._dh_bu2
        if d_bu2 <= 0.0:
            raise ValueError("UE coincides with the BS (d_BU_h = 0 and H_B == H_U)")
        direct = self.eta.eta_D / d_bu2
        if self.mn == 0:
            return direct
        d2 = D_h * D_h + d_BU_h * d_BU_h - 2.0 * D_h * d_BU_h * math.cos(phi) + self._dh_ru2
        pl = self._ris_const * d2 ** (-0.5 * self.radio.alpha)
        mn = self.mn
        return (
            self.eta.eta_R * mn * mn * pl
            + direct
            + self.eta.eta_X * mn * math.sqrt(pl) / math.sqrt(d_bu2)
        )

    def feasible(self) -> bool:
        return feasibility_check(self.radio, self.geo)

    def require_feasible(self) -> None:
        if not self.feasible():
            raise InfeasibleError(
                f"D_h={self.geo.D_h:.6g} m exceeds the direct-link limit "
                f"{feasibility_limit(self.radio, self.geo):.6g} m"
            )

    def d_th(self, phi: float) -> float:
        """Horizontal distance beyond ``D_h`` where the SNR meets the threshold."""
        gth = self.radio.gamma_th
        lo = self.geo.D_h
        if self.g(phi, lo) <= gth:
            # boundary equality case: the threshold is met exactly at D_h
            return lo
        hi = max(self.cfg.d_max, 2.0 * lo)
        cap = BRACKET_CAP * lo
        while self.g(phi, hi) >= gth:
            if hi >= cap:
                raise SolverError(f"no threshold crossing below {cap:.6g} m at phi={phi!r}")
            hi = min(2.0 * hi, cap)
        root = brentq(lambda d: self.g(phi, d) - gth, lo, hi, xtol=1e-12 * lo, rtol=1e-15, maxiter=200)
        if abs(self.g(phi, root) - gth) > self.cfg.tol_root * gth:
            raise SolverError(f"coverage radius residual above tolerance at phi={phi!r}")
        return root

    def _gap(self, phi: float) -> float:
        # atan-compactified d_th - l, scaled by D_h; l -> inf maps to pi/2
        psi = self.geo.psi
        return math.atan(self.d_th(phi) / self.geo.D_h) - math.atan2(
            math.sin(psi), math.sin(psi - phi)
        )

    def crossovers(self, n_scan: int | None = None) -> tuple[float, float, tuple[str, ...]]:
        """Lower and upper crossover azimuths plus any diagnostics raised on the way."""
        psi = self.geo.psi
        if n_scan is None:
            n_scan = max(8, self.cfg.n_phi // 16)
        notes: list[str] = []
        # h(0) > 0 and h(psi) < 0; h(psi + pi) < 0 and h(2 pi) > 0
        phi_l = self._bracketed_crossover(0.0, psi, n_scan, "lower", notes)
        phi_u = self._bracketed_crossover(psi + math.pi, TWO_PI, n_scan, "upper", notes)
        return phi_l, phi_u, tuple(notes)

    def _bracketed_crossover(self, a: float, b: float, n_scan: int, side: str, notes: list[str]) -> float:
        grid = np.linspace(a, b, n_scan + 1)
        vals = [self._gap(float(p)) for p in grid]
        tol = 1e-12
        outer = 0 if side == "lower" else n_scan
        if vals[outer] <= tol:
            if vals[outer] < -1e-9:
                raise SignStructureError(f"d_th < l at phi={grid[outer]!r}; the {side} crossover is not bracketed")
            return float(grid[outer])
        inner = n_scan if side == "lower" else 0
        if vals[inner] >= 0.0:
            raise SignStructureError(f"d_th >= l next to the RIS plane on the {side} side")
        # zero counts as non-positive so a root on a scan node is one change, not two
        pos = np.asarray(vals) > 0.0
        changes = [i for i in range(n_scan) if pos[i] != pos[i + 1]]
        if len(changes) > 1:
            msg = f"{len(changes)} sign changes of d_th - l on the {side} side; using the outermost"
            notes.append(msg)
            warnings.warn(msg, SignStructureWarning, stacklevel=3)
        i = changes[0] if side == "lower" else changes[-1]
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i + 1] == 0.0:
            return float(grid[i + 1])
        return brentq(self._gap, float(grid[i]), float(grid[i + 1]), xtol=1e-13, rtol=1e-15, maxiter=200)

    def l(self, phi: float) -> float:
        return boundary_ray_length(self.geo, phi)

    def area_from_crossovers(self, phi_l: float, phi_u: float) -> float:
        K = int(self.cfg.K)
        nodes = np.linspace(phi_l, phi_u, K + 1)
        y = np.array([self.d_th(float(p)) for p in nodes])
        delta = (phi_u - phi_l) / K
        arc = 0.5 * delta * (0.5 * y[0] ** 2 + np.sum(y[1:-1] ** 2) + 0.5 * y[-1] ** 2)
        triangle = 0.5 * math.sin(phi_l - phi_u) * self.l(phi_l) * self.l(phi_u)
        return float(arc + triangle)

    def area(self) -> float:
        self.require_feasible()
        phi_l, phi_u, _ = self.crossovers()
        return self.area_from_crossovers(phi_l, phi_u)

    def profile(self) -> CoverageBoundary:
        self.require_feasible()
        phi_l, phi_u, notes = self.crossovers()
        n = int(self.cfg.n_phi)
        phi = TWO_PI * np.arange(n) / n
        c = np.empty(n)
        branch = []
        for k, p in enumerate(phi):
            p = float(p)
            if p <= phi_l or p >= phi_u:
                c[k] = self.l(p)
                branch.append("l")
            else:
                c[k] = self.d_th(p)
                branch.append("dth")
        return CoverageBoundary(
            phi_l=phi_l,
            phi_u=phi_u,
            phi=phi,
            c=c,
            branch=tuple(branch),
            area=self.area_from_crossovers(phi_l, phi_u),
            diagnostics=notes,
        )


def snr_field(radio: RadioConfig, panel: RisPanel | None, geo: SiteGeometry, phi: float, d_BU_h: float) -> float:
    return CellModel(radio, panel, geo).g(wrap_angle(phi), d_BU_h)


def coverage_radius(
    radio: RadioConfig, panel: RisPanel | None, geo: SiteGeometry, phi: float, cfg: SolverConfig | None = None
) -> float:
    model = CellModel(radio, panel, geo, cfg)
    model.require_feasible()
    return model.d_th(wrap_angle(phi))


def crossover_angles(
    radio: RadioConfig, panel: RisPanel | None, geo: SiteGeometry, cfg: SolverConfig | None = None
) -> tuple[float, float]:
    model = CellModel(radio, panel, geo, cfg)
    model.require_feasible()
    phi_l, phi_u, _ = model.crossovers()
    return phi_l, phi_u


def coverage_profile(
    radio: RadioConfig, panel: RisPanel | None, geo: SiteGeometry, cfg: SolverConfig | None = None
) -> CoverageBoundary:
    return CellModel(radio, panel, geo, cfg).profile()


def coverage_area(
    radio: RadioConfig, panel: RisPanel | None, geo: SiteGeometry, cfg: SolverConfig | None = None
) -> float:
    """Cell area in m^2 (trapezoid rule on ``K + 1`` equally spaced arc nodes)."""
    return CellModel(radio, panel, geo, cfg).area()


def boundary_antiderivative(geo: SiteGeometry, phi: float) -> float:
    """Antiderivative of ``l(phi)^2 / 2`` on the boundary-ray domain."""
    return 0.5 * geo.D_h**2 * math.sin(phi) / (math.cos(phi) - math.sin(phi) / math.tan(geo.psi))


__all__ = [
    "BRACKET_CAP",
    "CellModel",
    "CoverageBoundary",
    "CoverageError",
    "InfeasibleError",
    "MIN_HORIZONTAL_DISTANCE",
    "SignStructureError",
    "SignStructureWarning",
    "SolverConfig",
    "SolverError",
    "boundary_antiderivative",
    "coverage_area",
    "coverage_profile",
    "coverage_radius",
    "crossover_angles",
    "feasibility_check",
    "feasibility_limit",
    "in_boundary_domain",
    "snr_field",
]
