"""Monte Carlo estimate of the covered area from the full coherent channel sum.

UE positions are drawn uniformly over the part of a BS-centred disk that lies
on the BS side of the RIS plane. A position is covered when the SNR of the
element-by-element channel sum, with every element co-phased, reaches the
threshold. The analytic coverage pipeline is never used except to size the
sampling disk.

Random numbers come from numpy's Philox (a counter-based generator). Block
``b`` of a run draws from the substream keyed by ``(seed, b)``, so splitting
blocks across workers does not change the estimate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import (
    MODES,
    ChannelError,
    RadioConfig,
    RisPanel,
    composite_channel,
    element_positions,
    optimal_phases,
    reflection_amplitude,
    snr,
)
from .coverage import MIN_HORIZONTAL_DISTANCE, CellModel, SolverConfig
from .geometry import TWO_PI, SiteGeometry, UePolar, bs_ris_distance, same_side_margin

RNG_ALGORITHM = "numpy.Philox4x64-10+SeedSequence(seed,block)"
DEFAULT_BLOCK = 4096
SAMPLING_MARGIN = 1.5


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


@dataclass(frozen=True)
class McEstimate:
    area: float
    stderr: float
    n_samples: int
    n_inside: int
    seed: int
    region_area: float = 0.0
    radius: float = 0.0
    mode: str = "exact_elementwise"
    rng: str = RNG_ALGORITHM


def mc_snr_at(
    radio: RadioConfig,
    panel: RisPanel | None,
    geo: SiteGeometry,
    ue: UePolar,
    mode: str = "exact_elementwise",
    gamma: float | None = None,
) -> float:
    """SNR at one position with the optimal phase matrix applied."""
    phases = None if panel is None else optimal_phases(radio, panel, geo, ue)
    return snr(radio, composite_channel(radio, panel, geo, ue, phases, mode=mode, gamma=gamma))


def snr_batch(
    radio: RadioConfig,
    panel: RisPanel | None,
    geo: SiteGeometry,
    x: np.ndarray,
    y: np.ndarray,
    mode: str = "exact_elementwise",
) -> np.ndarray:
    """Vectorised :func:`mc_snr_at` over horizontal UE coordinates."""
    if mode not in MODES:
        raise ChannelError(f"mode must be one of {MODES}, got {mode!r}")
    lam = radio.wavelength
    k = TWO_PI / lam
    d_bu_h = np.hypot(x, y)
    if geo.H_B == geo.H_U:
        d_bu_h = np.maximum(d_bu_h, MIN_HORIZONTAL_DISTANCE)
    d_bu = np.hypot(d_bu_h, geo.H_B - geo.H_U)
    h = lam * math.sqrt(radio.G) / (4.0 * math.pi * d_bu) * np.exp(-1j * k * d_bu)
    if panel is None:
        return radio.snr_scale * np.abs(h) ** 2

    pos = element_positions(panel, geo).reshape(-1, 3)
    D_mn = np.linalg.norm(pos - np.array([0.0, 0.0, geo.H_B]), axis=1)
    d_mn = np.sqrt(
        (pos[None, :, 0] - x[:, None]) ** 2
        + (pos[None, :, 1] - y[:, None]) ** 2
        + (pos[None, :, 2] - geo.H_U) ** 2
    )
    path = D_mn[None, :] + d_mn
    amp_const = lam * math.sqrt(radio.G * panel.s_M * panel.s_N) / (4.0 * math.pi) ** 1.5
    if mode == "exact_elementwise":
        mag = amp_const * (D_mn[None, :] * d_mn) ** (-radio.alpha / 2.0)
    else:
        d_c = np.sqrt((x - geo.D_h) ** 2 + y**2 + (geo.H_R - geo.H_U) ** 2)
        mag = (amp_const * (bs_ris_distance(geo) * d_c) ** (-radio.alpha / 2.0))[:, None]
    phases = np.mod(k * d_bu[:, None] - k * path, TWO_PI)
    terms = mag * np.exp(-1j * (k * path + phases))
    h = h + reflection_amplitude(geo) * terms.sum(axis=1)
    return radio.snr_scale * np.abs(h) ** 2


def sampling_region_area(geo: SiteGeometry, radius: float) -> float:
    """Area of the BS-centred disk on the BS side of the RIS plane."""
    h0 = geo.D_h * math.sin(geo.psi)
    if h0 >= radius:
        return math.pi * radius**2
    segment = radius**2 * math.acos(h0 / radius) - h0 * math.sqrt(radius**2 - h0**2)
    return math.pi * radius**2 - segment


def _sample_block(geo: SiteGeometry, radius: float, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    xs, ys = [], []
    have = 0
    while have < n:
        m = 2 * (n - have) + 16
        r = radius * np.sqrt(rng.random(m))
        t = TWO_PI * rng.random(m)
        x, y = r * np.cos(t), r * np.sin(t)
        keep = same_side_margin(geo, x, y) > 0.0
        xs.append(x[keep])
        ys.append(y[keep])
        have += int(keep.sum())
    return np.concatenate(xs)[:n], np.concatenate(ys)[:n]


def mc_coverage_area(
    radio: RadioConfig,
    panel: RisPanel | None,
    geo: SiteGeometry,
    cfg: SolverConfig | None = None,
    n_samples: int = 100_000,
    seed: int = 0,
    mode: str = "exact_elementwise",
    threads: int = 1,
    radius: float | None = None,
    block_size: int = DEFAULT_BLOCK,
) -> McEstimate:
    """Rejection estimate of the covered area.

    ``radius`` defaults to 1.5 times the largest analytic boundary radius,
    which requires the placement to satisfy the direct-link condition.
    """
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    if radius is None:
        radius = SAMPLING_MARGIN * float(np.max(CellModel(radio, panel, geo, cfg).profile().c))
    region = sampling_region_area(geo, radius)
    sizes = [block_size] * (n_samples // block_size)
    if n_samples % block_size:
        sizes.append(n_samples % block_size)

    def run(block: int) -> int:
        x, y = _sample_block(geo, radius, sizes[block], make_rng(seed, block))
        covered = (snr_batch(radio, panel, geo, x, y, mode) >= radio.gamma_th) & (
            same_side_margin(geo, x, y) > 0.0
        )
        return int(covered.sum())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(run, range(len(sizes))))
    else:
        counts = [run(b) for b in range(len(sizes))]
    n_inside = sum(counts)
    p = n_inside / n_samples
    return McEstimate(
        area=region * p,
        stderr=region * math.sqrt(p * (1.0 - p) / n_samples),
        n_samples=n_samples,
        n_inside=n_inside,
        seed=seed,
        region_area=region,
        radius=radius,
        mode=mode,
    )
