"""Site geometry of a single-BS, single-RIS cell.

Horizontal frame: the BS foot is the origin and the RIS centre sits at
``(D_h, 0)``. A UE is located by its azimuth ``phi`` (measured from the
BS->RIS direction) and its horizontal distance ``d_BU_h`` from the BS.
The RIS is a vertical panel whose horizontal trace passes through the RIS
centre with direction ``(cos psi, sin psi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

INCIDENCE_MODES = ("3d", "horizontal")


class GeometryError(ValueError):
    """Raised for invalid geometry or a query outside an operation's domain."""


def wrap_angle(phi: float) -> float:
    """Normalize an azimuth into ``[0, 2*pi)``."""
    w = math.fmod(phi, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    return 0.0 if w >= TWO_PI else w


@dataclass(frozen=True)
class SiteGeometry:
    """Heights and RIS placement.

    ``incidence_mode`` selects how the incidence angle is derived: ``"3d"``
    includes the BS elevation seen from the RIS, ``"horizontal"`` ignores it.
    """

    H_B: float = 35.0
    H_U: float = 1.5
    H_R: float = 2.0
    D_h: float = 100.0
    psi: float = math.pi / 2
    incidence_mode: str = "3d"

    def __post_init__(self) -> None:
        for name in ("H_B", "H_U", "H_R", "D_h"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise GeometryError(f"{name} must be positive and finite, got {value!r}")
        if not 0.0 < self.psi < math.pi:
            raise GeometryError(f"psi must lie in (0, pi), got {self.psi!r}")
        if self.incidence_mode not in INCIDENCE_MODES:
            raise GeometryError(
                f"incidence_mode must be one of {INCIDENCE_MODES}, got {self.incidence_mode!r}"
            )


@dataclass(frozen=True)
class UePolar:
    """UE position in BS-centred polar coordinates; ``phi`` is wrapped on entry."""

    phi: float
    d_BU_h: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi):
            raise GeometryError(f"phi must be finite, got {self.phi!r}")
        if not (math.isfinite(self.d_BU_h) and self.d_BU_h >= 0.0):
            raise GeometryError(f"d_BU_h must be non-negative, got {self.d_BU_h!r}")
        object.__setattr__(self, "phi", wrap_angle(self.phi))

    def xy(self) -> tuple[float, float]:
        return self.d_BU_h * math.cos(self.phi), self.d_BU_h * math.sin(self.phi)


def horizontal_ue_ris_distance(geo: SiteGeometry, ue: UePolar) -> float:
    """Horizontal UE-RIS distance (law of cosines)."""
    sq = geo.D_h**2 + ue.d_BU_h**2 - 2.0 * geo.D_h * ue.d_BU_h * math.cos(ue.phi)
    return math.sqrt(max(sq, 0.0))


def bs_ue_distance(geo: SiteGeometry, ue: UePolar) -> float:
    return math.hypot(ue.d_BU_h, geo.H_B - geo.H_U)


def ue_ris_distance(geo: SiteGeometry, ue: UePolar) -> float:
    return math.hypot(horizontal_ue_ris_distance(geo, ue), geo.H_R - geo.H_U)


def bs_ris_distance(geo: SiteGeometry) -> float:
    """3-D distance from the BS to the RIS centre."""
    return math.hypot(geo.D_h, geo.H_B - geo.H_R)


def in_boundary_domain(psi: float, phi: float) -> bool:
    """True when the ray from the BS in direction ``phi`` crosses the RIS plane."""
    phi = wrap_angle(phi)
    return phi < psi or phi > psi + math.pi


def boundary_ray_length(geo: SiteGeometry, phi: float) -> float:
    """Distance from the BS to the RIS plane along azimuth ``phi``.

    Only defined on ``[0, psi) U (psi + pi, 2 pi)``; elsewhere the ray never
    meets the plane and :class:`GeometryError` is raised.
    """
    phi = wrap_angle(phi)
    if not in_boundary_domain(geo.psi, phi):
        raise GeometryError(
            f"phi={phi!r} outside the boundary-ray domain for psi={geo.psi!r}"
        )
    # cos(phi) - sin(phi) cot(psi) == sin(psi - phi) / sin(psi), positive on the domain
    return geo.D_h * math.sin(geo.psi) / math.sin(geo.psi - phi)


def incidence_angle(geo: SiteGeometry) -> float:
    """Incidence angle of the BS->RIS ray on the vertical panel, in ``[0, pi/2)``.

    ``cos(theta_i) = cos(elev) * sin(psi)`` where ``elev`` is the BS elevation
    seen from the RIS centre (forced to zero in ``"horizontal"`` mode).
    """
    if geo.incidence_mode == "horizontal":
        cos_elev = 1.0
    else:
        cos_elev = geo.D_h / bs_ris_distance(geo)
    return math.acos(min(1.0, cos_elev * math.sin(geo.psi)))


def ris_axes(geo: SiteGeometry) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Unit vectors of the panel: horizontal (along the RIS trace) and vertical."""
    return (math.cos(geo.psi), math.sin(geo.psi), 0.0), (0.0, 0.0, 1.0)


def same_side_margin(geo: SiteGeometry, x, y):
    """Signed offset of horizontal point(s) from the RIS plane, positive on the BS side.

    Works on scalars and numpy arrays alike.
    """
    return math.cos(geo.psi) * y - math.sin(geo.psi) * (x - geo.D_h)
