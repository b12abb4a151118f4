"""Link model: per-element and direct channel gains, SNR, optimal RIS phases
and the closed-form maximum SNR.

All arithmetic is linear (W, ratios); use :func:`db_to_linear` and
:func:`dbm_to_watts` at the boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import (
    TWO_PI,
    SiteGeometry,
    UePolar,
    bs_ris_distance,
    bs_ue_distance,
    incidence_angle,
    ris_axes,
    ue_ris_distance,
)

MODES = ("common_pathloss", "exact_elementwise")

# 0.01 dB tolerance on an explicitly supplied threshold
THRESHOLD_TOL_DB = 0.01


class ChannelError(ValueError):
    pass


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class RadioConfig:
    """Transmit/receive parameters.

    ``gamma_th`` is derived as ``gamma_s * L_mar`` when omitted; an explicit
    value must agree with that product to within 0.01 dB.
    """

    P: float
    sigma2: float
    wavelength: float
    G: float
    alpha: float
    gamma_s: float
    L_mar: float
    gamma_th: float | None = None

    def __post_init__(self) -> None:
        for name in ("P", "sigma2", "wavelength", "G", "alpha", "gamma_s", "L_mar"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ChannelError(f"{name} must be positive and finite, got {value!r}")
        derived = self.gamma_s * self.L_mar
        if self.gamma_th is None:
            object.__setattr__(self, "gamma_th", derived)
        else:
            if not self.gamma_th > 0.0:
                raise ChannelError(f"gamma_th must be positive, got {self.gamma_th!r}")
            gap = abs(linear_to_db(self.gamma_th) - linear_to_db(derived))
            if gap > THRESHOLD_TOL_DB:
                raise ChannelError(
                    f"gamma_th={linear_to_db(self.gamma_th):.4f} dB disagrees with "
                    f"gamma_s*L_mar={linear_to_db(derived):.4f} dB"
                )

    @classmethod
    def from_db(
        cls,
        power_w: float = 2.0,
        noise_dbm: float = -96.0,
        wavelength_m: float = 0.1,
        gain: float = 1.0,
        pathloss_exponent: float = 2.0,
        sensitivity_db: float = 8.0,
        margin_db: float = 28.0,
        threshold_db: float | None = None,
    ) -> "RadioConfig":
        """Build from the mixed dB/dBm units of a link budget table.

        Defaults reproduce the reference scenario (P defaults to 2 W).
        """
        return cls(
            P=power_w,
            sigma2=dbm_to_watts(noise_dbm),
            wavelength=wavelength_m,
            G=gain,
            alpha=pathloss_exponent,
            gamma_s=db_to_linear(sensitivity_db),
            L_mar=db_to_linear(margin_db),
            gamma_th=None if threshold_db is None else db_to_linear(threshold_db),
        )

    @property
    def snr_scale(self) -> float:
        return self.P / self.sigma2


@dataclass(frozen=True)
class RisPanel:
    """An ``M x N`` grid of ``s_M x s_N`` elements (m index horizontal, n vertical)."""

    M: int = 25
    N: int = 25
    s_M: float = 0.04
    s_N: float = 0.04

    def __post_init__(self) -> None:
        if int(self.M) != self.M or int(self.N) != self.N or self.M < 1 or self.N < 1:
            raise ChannelError(f"element counts must be integers >= 1, got M={self.M!r}, N={self.N!r}")
        if not (self.s_M > 0.0 and self.s_N > 0.0):
            raise ChannelError("element dimensions must be positive")

    @property
    def n_elements(self) -> int:
        return self.M * self.N

    @property
    def aperture(self) -> float:
        """Diagonal aperture of the whole surface."""
        return math.hypot(self.M * self.s_M, self.N * self.s_N)

    def check_subwavelength(self, wavelength: float) -> bool:
        ok = self.s_M <= wavelength and self.s_N <= wavelength
        if not ok:
            warnings.warn(
                f"RIS elements ({self.s_M} x {self.s_N} m) exceed the wavelength {wavelength} m",
                stacklevel=2,
            )
        return ok


@dataclass(frozen=True)
class EtaCoefficients:
    eta_R: float
    eta_D: float
    eta_X: float


def reflection_amplitude(geo: SiteGeometry) -> float:
    """Per-panel amplitude ``Gamma = cos(theta_i)``, clamped to ``[0, 1]``."""
    return min(1.0, max(0.0, math.cos(incidence_angle(geo))))


def element_positions(panel: RisPanel, geo: SiteGeometry) -> np.ndarray:
    """3-D element centres, shape ``(M, N, 3)``, panel centred at ``(D_h, 0, H_R)``."""
    (ux, uy, _), _ = ris_axes(geo)
    u = (np.arange(1, panel.M + 1) - (panel.M + 1) / 2.0) * panel.s_M
    v = (np.arange(1, panel.N + 1) - (panel.N + 1) / 2.0) * panel.s_N
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pos = np.empty((panel.M, panel.N, 3))
    pos[..., 0] = geo.D_h + uu * ux
    pos[..., 1] = uu * uy
    pos[..., 2] = geo.H_R + vv
    return pos


def element_distances(panel: RisPanel, geo: SiteGeometry, ue: UePolar) -> tuple[np.ndarray, np.ndarray]:
    """Per-element BS->element and element->UE distances, each ``(M, N)``."""
    pos = element_positions(panel, geo)
    bs = np.array([0.0, 0.0, geo.H_B])
    x, y = ue.xy()
    ue_pt = np.array([x, y, geo.H_U])
    D_mn = np.linalg.norm(pos - bs, axis=-1)
    d_mn = np.linalg.norm(pos - ue_pt, axis=-1)
    return D_mn, d_mn


def element_channel_gain(radio: RadioConfig, panel: RisPanel, D_mn, d_mn):
    """Complex gain of the path BS -> element (m, n) -> UE. Accepts arrays."""
    D_mn = np.asarray(D_mn, dtype=float)
    d_mn = np.asarray(d_mn, dtype=float)
    if np.any(D_mn <= 0.0) or np.any(d_mn <= 0.0):
        raise ChannelError("element distances must be positive")
    lam = radio.wavelength
    mag = lam * math.sqrt(radio.G * panel.s_M * panel.s_N) / (
        (4.0 * math.pi) ** 1.5 * np.sqrt(D_mn**radio.alpha * d_mn**radio.alpha)
    )
    h = mag * np.exp(-1j * (TWO_PI / lam) * (D_mn + d_mn))
    return h[()] if h.ndim == 0 else h


def direct_channel_gain(radio: RadioConfig, d_BU):
    d_BU = np.asarray(d_BU, dtype=float)
    if np.any(d_BU <= 0.0):
        raise ChannelError("BS-UE distance must be positive")
    lam = radio.wavelength
    h = lam * math.sqrt(radio.G) / (4.0 * math.pi * d_BU) * np.exp(-1j * (TWO_PI / lam) * d_BU)
    return h[()] if h.ndim == 0 else h


def optimal_phases(radio: RadioConfig, panel: RisPanel, geo: SiteGeometry, ue: UePolar) -> np.ndarray:
    """Phase matrix co-phasing every reflected path with the direct path."""
    D_mn, d_mn = element_distances(panel, geo, ue)
    k = TWO_PI / radio.wavelength
    return np.mod(k * bs_ue_distance(geo, ue) - k * (D_mn + d_mn), TWO_PI)


def composite_channel(
    radio: RadioConfig,
    panel: RisPanel | None,
    geo: SiteGeometry,
    ue: UePolar,
    phases: np.ndarray | None = None,
    mode: str = "common_pathloss",
    gamma: float | None = None,
) -> complex:
    """Coherent sum of the reflected paths and the direct path.

    ``phases`` defaults to all zeros. In ``common_pathloss`` mode every element
    uses the centre distances for its magnitude but its own distances for the
    phase; ``exact_elementwise`` uses per-element distances throughout.
    ``gamma`` overrides the reflection amplitude; ``panel=None`` gives the
    direct link alone.
    """
    if mode not in MODES:
        raise ChannelError(f"mode must be one of {MODES}, got {mode!r}")
    h_D = complex(direct_channel_gain(radio, bs_ue_distance(geo, ue)))
    if panel is None:
        return h_D
    if phases is None:
        phases = np.zeros((panel.M, panel.N))
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (panel.M, panel.N):
        raise ChannelError(f"phase matrix shape {phases.shape} != ({panel.M}, {panel.N})")
    amp = reflection_amplitude(geo) if gamma is None else min(1.0, max(0.0, gamma))

    D_mn, d_mn = element_distances(panel, geo, ue)
    h_mn = element_channel_gain(radio, panel, D_mn, d_mn)
    if mode == "common_pathloss":
        common = abs(element_channel_gain(radio, panel, bs_ris_distance(geo), ue_ris_distance(geo, ue)))
        h_mn = common * np.exp(1j * np.angle(h_mn))
    return complex(np.sum(amp * np.exp(-1j * phases) * h_mn)) + h_D


def snr(radio: RadioConfig, h: complex) -> float:
    return radio.snr_scale * abs(h) ** 2


def eta_coefficients(radio: RadioConfig, panel: RisPanel, theta_i: float) -> EtaCoefficients:
    cos_t = min(1.0, max(0.0, math.cos(theta_i)))
    scale = radio.snr_scale * radio.wavelength**2
    area = panel.s_M * panel.s_N
    four_pi = 4.0 * math.pi
    return EtaCoefficients(
        eta_R=scale / four_pi**3 * cos_t**2 * area,
        eta_D=scale * radio.G / four_pi**2,
        eta_X=2.0 * scale * math.sqrt(radio.G) / four_pi**2.5 * cos_t * math.sqrt(area),
    )


def direct_eta(radio: RadioConfig) -> float:
    """``eta_D`` alone; it does not depend on the panel or the incidence angle."""
    return radio.snr_scale * radio.wavelength**2 * radio.G / (4.0 * math.pi) ** 2


def ris_pathloss(radio: RadioConfig, geo: SiteGeometry, ue: UePolar) -> float:
    """Common cascaded pathloss ``G * D^-alpha * d^-alpha`` through the RIS centre."""
    return radio.G * (bs_ris_distance(geo) * ue_ris_distance(geo, ue)) ** (-radio.alpha)


def max_snr_closed_form(eta: EtaCoefficients, panel: RisPanel | None, PL_R: float, d_BU: float) -> float:
    """SNR reached with optimal phases; ``panel=None`` drops the reflected terms."""
    if PL_R < 0.0 or d_BU <= 0.0:
        raise ChannelError("PL_R must be >= 0 and d_BU > 0")
    direct = eta.eta_D / d_BU**2
    if panel is None:
        return direct
    mn = panel.n_elements
    return eta.eta_R * mn**2 * PL_R + direct + eta.eta_X * mn * math.sqrt(PL_R) / d_BU
