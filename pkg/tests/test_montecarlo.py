import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from riscov.channel import (
    RadioConfig,
    RisPanel,
    direct_channel_gain,
    eta_coefficients,
    max_snr_closed_form,
    ris_pathloss,
    snr,
)
from riscov.coverage import coverage_area, coverage_profile
from riscov.geometry import SiteGeometry, UePolar, bs_ue_distance, incidence_angle, same_side_margin
from riscov.montecarlo import (
    _sample_block,
    make_rng,
    mc_coverage_area,
    mc_snr_at,
    sampling_region_area,
    snr_batch,
)

from conftest import direct_radius


def closed_form(radio, panel, geo, ue):
    eta = eta_coefficients(radio, panel, incidence_angle(geo))
    return max_snr_closed_form(eta, panel, ris_pathloss(radio, geo, ue), bs_ue_distance(geo, ue))


def test_common_mode_equals_closed_form(radio, panel):
    rng = np.random.default_rng(1)
    for _ in range(20):
        g = SiteGeometry(D_h=float(rng.uniform(5.0, 300.0)), psi=float(rng.uniform(0.2, 2.9)))
        ue = UePolar(float(rng.uniform(0.0, 2 * math.pi)), float(rng.uniform(0.0, 400.0)))
        assert_allclose(mc_snr_at(radio, panel, g, ue, mode="common_pathloss"), closed_form(radio, panel, g, ue), rtol=1e-12)


def test_exact_mode_far_field(radio, panel, site):
    for ue in (UePolar(0.5, 250.0), UePolar(3.0, 60.0), UePolar(5.5, 180.0)):
        assert_allclose(mc_snr_at(radio, panel, site, ue), closed_form(radio, panel, site, ue), rtol=0.01)


def test_zero_reflection_is_direct_only(radio, panel, site):
    ue = UePolar(2.0, 80.0)
    direct = snr(radio, direct_channel_gain(radio, bs_ue_distance(site, ue)))
    assert_allclose(mc_snr_at(radio, panel, site, ue, gamma=0.0), direct, rtol=1e-12)
    assert_allclose(mc_snr_at(radio, None, site, ue), direct, rtol=1e-12)


@pytest.mark.parametrize("mode", ["common_pathloss", "exact_elementwise"])
def test_batch_matches_pointwise(radio, mode):
    panel = RisPanel(6, 5)
    g = SiteGeometry(D_h=70.0, psi=1.1)
    rng = make_rng(2)
    x, y = _sample_block(g, 200.0, 30, rng)
    batch = snr_batch(radio, panel, g, x, y, mode)
    for xi, yi, b in zip(x, y, batch):
        ue = UePolar(math.atan2(yi, xi), math.hypot(xi, yi))
        assert_allclose(b, mc_snr_at(radio, panel, g, ue, mode=mode), rtol=1e-9)


def test_sampling_region_area():
    g = SiteGeometry(D_h=100.0)
    assert_allclose(sampling_region_area(g, 50.0), math.pi * 2500.0)
    # half disk when the plane passes through the centre in the limit D_h -> 0
    assert_allclose(sampling_region_area(SiteGeometry(D_h=1e-9), 10.0), 50.0 * math.pi, rtol=1e-9)
    # empirical check of the segment formula
    rng = make_rng(5)
    r = 300.0
    pts = r * np.sqrt(rng.random(200_000))
    t = 2 * math.pi * rng.random(200_000)
    frac = np.mean(same_side_margin(g, pts * np.cos(t), pts * np.sin(t)) > 0)
    assert_allclose(sampling_region_area(g, r), frac * math.pi * r * r, rtol=0.01)


def test_samples_on_bs_side():
    g = SiteGeometry(D_h=40.0, psi=0.7)
    x, y = _sample_block(g, 500.0, 5000, make_rng(0))
    assert len(x) == 5000
    assert np.all(same_side_margin(g, x, y) > 0.0)
    assert np.all(np.hypot(x, y) <= 500.0)


def test_unreachable_threshold_gives_zero(panel, site):
    radio = RadioConfig.from_db(sensitivity_db=100.0, margin_db=100.0)
    est = mc_coverage_area(radio, panel, site, n_samples=2000, radius=300.0)
    assert est.area == 0.0 and est.n_inside == 0 and est.stderr == 0.0


def test_degenerate_circle(radio):
    r = direct_radius(radio)
    g = SiteGeometry(D_h=r)
    est = mc_coverage_area(radio, None, g, n_samples=50_000, seed=3)
    assert abs(est.area - math.pi * r * r) <= 3 * est.stderr


def test_stderr_scaling_and_determinism(radio):
    panel = RisPanel(5, 5)
    a = mc_coverage_area(radio, panel, SiteGeometry(D_h=100.0), n_samples=4000, seed=9)
    b = mc_coverage_area(radio, panel, SiteGeometry(D_h=100.0), n_samples=16000, seed=9)
    assert 1.6 <= a.stderr / b.stderr <= 2.5
    assert a == mc_coverage_area(radio, panel, SiteGeometry(D_h=100.0), n_samples=4000, seed=9)
    assert a != mc_coverage_area(radio, panel, SiteGeometry(D_h=100.0), n_samples=4000, seed=10)
    assert 0 <= a.n_inside <= a.n_samples
    assert_allclose(a.area, a.region_area * a.n_inside / a.n_samples)


def test_threads_do_not_change_estimate(radio):
    panel = RisPanel(4, 4)
    g = SiteGeometry(D_h=80.0, psi=1.3)
    serial = mc_coverage_area(radio, panel, g, n_samples=10_000, seed=4)
    assert mc_coverage_area(radio, panel, g, n_samples=10_000, seed=4, threads=3) == serial


def test_small_panel_matches_analytic(radio):
    panel = RisPanel(10, 10)
    g = SiteGeometry(D_h=120.0)
    est = mc_coverage_area(radio, panel, g, n_samples=20_000, seed=1, mode="common_pathloss")
    assert abs(est.area - coverage_area(radio, panel, g)) <= 4 * est.stderr


def test_default_radius_from_profile(radio, panel, site):
    est = mc_coverage_area(radio, panel, site, n_samples=1000, seed=0, mode="common_pathloss")
    assert_allclose(est.radius, 1.5 * coverage_profile(radio, panel, site).c.max())


def test_minimum_samples(radio, panel, site):
    with pytest.raises(ValueError):
        mc_coverage_area(radio, panel, site, n_samples=999)


def test_rng_streams():
    a = make_rng(1, 0).random(4)
    assert np.array_equal(a, make_rng(1, 0).random(4))
    assert not np.array_equal(a, make_rng(1, 1).random(4))
    assert isinstance(make_rng(0).bit_generator, np.random.Philox)
