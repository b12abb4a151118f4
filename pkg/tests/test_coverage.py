import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from riscov.channel import RadioConfig, RisPanel
from riscov.coverage import (
    CellModel,
    InfeasibleError,
    SolverConfig,
    boundary_antiderivative,
    coverage_area,
    coverage_profile,
    coverage_radius,
    crossover_angles,
    feasibility_check,
    feasibility_limit,
    snr_field,
)
from riscov.geometry import SiteGeometry, boundary_ray_length

from conftest import SIGMA2_W, direct_radius


def snr_by_hand(P, M, N, D_h, phi, d, H_B=35.0, H_U=1.5, H_R=2.0, lam=0.1, G=1.0, alpha=2.0, s=0.04):
    """Literal transcription of the SNR field, written independently of the package."""
    snr0 = P / SIGMA2_W
    D = math.sqrt(D_h**2 + (H_B - H_R) ** 2)
    cos_t = D_h / D  # psi = pi/2
    eta_R = snr0 * lam**2 / (4 * math.pi) ** 3 * cos_t**2 * s * s
    eta_D = snr0 * lam**2 * G / (4 * math.pi) ** 2
    eta_X = 2 * snr0 * lam**2 * math.sqrt(G) / (4 * math.pi) ** 2.5 * cos_t * s
    PL = G * D**-alpha * ((D_h - d * math.cos(phi)) ** 2 + (d * math.sin(phi)) ** 2 + (H_R - H_U) ** 2) ** (-alpha / 2)
    d_bu = math.sqrt(d**2 + (H_B - H_U) ** 2)
    return eta_R * (M * N) ** 2 * PL + eta_D / d_bu**2 + eta_X * M * N * math.sqrt(PL) / d_bu


def test_snr_field_matches_hand_evaluation(radio, panel, site):
    # UE at the RIS foot and a few other positions
    for phi, d in [(0.0, 100.0), (0.3, 80.0), (2.0, 250.0), (math.pi, 10.0)]:
        assert_allclose(snr_field(radio, panel, site, phi, d), snr_by_hand(2.0, 25, 25, 100.0, phi, d), rtol=1e-12)


def test_snr_field_symmetry_and_direct_limit(radio, panel, site):
    for phi in (0.2, 1.0, 2.5):
        assert_allclose(snr_field(radio, panel, site, phi, 150.0), snr_field(radio, panel, site, 2 * math.pi - phi, 150.0))
    eta_D = radio.P / radio.sigma2 * radio.wavelength**2 / (4 * math.pi) ** 2
    assert_allclose(snr_field(radio, None, site, 0.7, 120.0), eta_D / (120.0**2 + 33.5**2), rtol=1e-12)
    with pytest.raises(ValueError):
        snr_field(radio, panel, SiteGeometry(H_B=1.5, H_U=1.5), 0.0, 0.0)


def test_feasibility(radio, site):
    assert feasibility_check(radio, SiteGeometry(D_h=1e-6))
    lim = feasibility_limit(radio, site)
    assert_allclose(lim, 354.3010, atol=1e-3)
    assert feasibility_check(radio, SiteGeometry(D_h=lim))
    assert not feasibility_check(radio, SiteGeometry(D_h=lim * 1.001))
    huge = RadioConfig.from_db(sensitivity_db=100.0, margin_db=100.0)
    assert not feasibility_check(huge, site)
    assert feasibility_limit(huge, site) == 0.0


def test_coverage_radius_direct_only(radio, site):
    r = direct_radius(radio)
    for phi in (0.0, 1.0, math.pi, 5.0):
        assert_allclose(coverage_radius(radio, None, site, phi), r, rtol=1e-10)


def test_coverage_radius_round_trip_and_monotone(radio, panel, site, solver):
    for phi in np.linspace(0.0, 2 * math.pi, 13):
        d = coverage_radius(radio, panel, site, phi, solver)
        assert d > site.D_h
        assert abs(snr_field(radio, panel, site, phi, d) - radio.gamma_th) <= solver.tol_root * radio.gamma_th
    assert coverage_radius(radio, panel, site, math.pi) <= coverage_radius(radio, panel, site, 0.0)


def test_coverage_radius_infeasible(radio, panel):
    with pytest.raises(InfeasibleError):
        coverage_radius(radio, panel, SiteGeometry(D_h=400.0), 0.0)


def test_crossover_angles_defining_equation(radio, panel, site):
    model = CellModel(radio, panel, site)
    phi_l, phi_u = crossover_angles(radio, panel, site)
    assert 0.0 <= phi_l < site.psi
    assert site.psi + math.pi < phi_u < 2 * math.pi
    for p in (phi_l, phi_u):
        assert_allclose(model.d_th(p), boundary_ray_length(site, p), rtol=1e-9)
    # broadside: mirror symmetric
    assert_allclose(phi_u, 2 * math.pi - phi_l, rtol=1e-10)


def test_crossover_direct_only_closed_form(radio):
    # the crossover falls exactly on a scan node here; no spurious diagnostics
    r = direct_radius(radio)
    g = SiteGeometry(D_h=r / math.sqrt(2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        phi_l, phi_u = crossover_angles(radio, None, g)
    assert_allclose(phi_l, math.pi / 4, rtol=1e-9)
    assert_allclose(phi_u, 7 * math.pi / 4, rtol=1e-9)


def test_crossover_oblique_orientation(radio, panel):
    g = SiteGeometry(D_h=150.0, psi=1.0)
    model = CellModel(radio, panel, g)
    phi_l, phi_u = crossover_angles(radio, panel, g)
    assert 0.0 <= phi_l < 1.0 and 1.0 + math.pi < phi_u < 2 * math.pi
    for p in (phi_l, phi_u):
        assert_allclose(model.d_th(p), boundary_ray_length(g, p), rtol=1e-9)


def test_profile_branches(radio, panel, site):
    prof = coverage_profile(radio, panel, site, SolverConfig(n_phi=720))
    model = CellModel(radio, panel, site)
    assert len(prof.phi) == 720 and np.all(prof.c > 0.0)
    for p, c, b in zip(prof.phi, prof.c, prof.branch):
        outside = p <= prof.phi_l or p >= prof.phi_u
        assert b == ("l" if outside else "dth")
        if outside:
            assert_allclose(c, boundary_ray_length(site, p))
            # d_th exceeds l strictly away from the crossovers
            if min(abs(p - prof.phi_l), abs(p - prof.phi_u)) > 1e-6:
                assert model.d_th(p) > boundary_ray_length(site, p)
        else:
            assert_allclose(c, model.d_th(p))
            if site.psi > p or p > site.psi + math.pi:
                assert model.d_th(p) <= boundary_ray_length(site, p) * (1 + 1e-9)
    # mirror symmetry under broadside orientation
    c = prof.c
    assert_allclose(c[1:], c[1:][::-1], rtol=1e-9)
    # continuity at the crossovers
    assert_allclose(model.d_th(prof.phi_l), boundary_ray_length(site, prof.phi_l), rtol=1e-9)


def test_area_degenerate_circle(radio):
    r = direct_radius(radio)
    g = SiteGeometry(D_h=r)
    phi_l, phi_u = crossover_angles(radio, None, g)
    assert phi_l == pytest.approx(0.0, abs=1e-6)
    assert phi_u == pytest.approx(2 * math.pi, abs=1e-6)
    assert_allclose(coverage_area(radio, None, g), math.pi * r * r, rtol=1e-9)


def test_area_direct_only_half_plane_cut(radio):
    # direct-only disk of radius r cut by the line x = D_h: circle minus segment
    r = direct_radius(radio)
    D_h = 150.0
    segment = r * r * math.acos(D_h / r) - D_h * math.sqrt(r * r - D_h * D_h)
    assert_allclose(coverage_area(radio, None, SiteGeometry(D_h=D_h)), math.pi * r * r - segment, rtol=1e-9)


def test_area_mirror_orientation(radio, panel):
    for psi in (0.6, 1.2):
        a = coverage_area(radio, panel, SiteGeometry(D_h=120.0, psi=psi))
        b = coverage_area(radio, panel, SiteGeometry(D_h=120.0, psi=math.pi - psi))
        assert_allclose(a, b, rtol=1e-9)


def polar_area_oracle(radio, panel, geo, n=20000):
    """Integrate c(phi)^2 / 2 over the full circle directly, c = min(d_th, l)."""
    model = CellModel(radio, panel, geo)
    phi = np.linspace(0.0, 2 * math.pi, n + 1)
    c = []
    for p in phi:
        d = model.d_th(float(p))
        psi = geo.psi
        if float(p) < psi or float(p) > psi + math.pi:
            d = min(d, boundary_ray_length(geo, float(p) % (2 * math.pi)))
        c.append(d)
    c = np.asarray(c)
    return float(np.sum(0.5 * (c[1:] ** 2 + c[:-1] ** 2) / 2 * np.diff(phi)))


@pytest.mark.parametrize("D_h, psi", [(100.0, math.pi / 2), (200.0, 1.1), (60.0, 2.3)])
def test_area_matches_polar_oracle(radio, panel, D_h, psi):
    g = SiteGeometry(D_h=D_h, psi=psi)
    assert_allclose(coverage_area(radio, panel, g), polar_area_oracle(radio, panel, g, 4000), rtol=1e-3)


def test_area_refinement(radio, panel, site):
    a = coverage_area(radio, panel, site, SolverConfig(K=50))
    b = coverage_area(radio, panel, site, SolverConfig(K=100))
    assert abs(a - b) / b < 1e-3


def test_antiderivative_identity():
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(50):
        psi = float(rng.uniform(0.2, math.pi - 0.2))
        g = SiteGeometry(D_h=float(rng.uniform(10.0, 300.0)), psi=psi)
        phi = float(rng.uniform(0.0, psi - 0.1))
        fd = (boundary_antiderivative(g, phi + h) - boundary_antiderivative(g, phi - h)) / (2 * h)
        assert_allclose(fd, boundary_ray_length(g, phi) ** 2 / 2, rtol=1e-6)


def test_solver_config_validation():
    for kw in ({"K": 1}, {"tol_root": 0.0}, {"tol_root": 0.1}, {"d_max": -1.0}, {"n_phi": 4}):
        with pytest.raises(ValueError):
            SolverConfig(**kw)


def test_no_sign_structure_warning_at_reference(radio, panel, site):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert coverage_profile(radio, panel, site).diagnostics == ()


@settings(max_examples=40, deadline=None)
@given(
    P=st.floats(0.5, 5.0),
    M=st.integers(1, 40),
    frac=st.floats(0.02, 0.99),
    phi=st.floats(0.0, 2 * math.pi, exclude_max=True),
    t1=st.floats(1.0, 3.0),
    dt=st.floats(1e-3, 2.0),
)
def test_monotone_tail(P, M, frac, phi, t1, dt):
    radio = RadioConfig.from_db(power_w=P)
    base = SiteGeometry()
    g = SiteGeometry(D_h=frac * feasibility_limit(radio, base))
    model = CellModel(radio, RisPanel(M, M), g)
    d1 = g.D_h * t1
    d2 = d1 + g.D_h * dt
    assert model.g(phi, d2) < model.g(phi, d1)
