import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from poisson_outage.analytic import CancellationPolicy, density_bound, outage
from poisson_outage.filtering import (
    FilterModel, apply_filter, cospower_mean_gain_power, filtered_density_bound, filtered_outage, load_table,
    mean_gain_power, q_factor,
)
from poisson_outage.pointfield import DensityModel


def test_isotropic():
    assert q_factor(FilterModel.isotropic(), 2, 4.0) == 1.0


@pytest.mark.parametrize("m,nu", [(2, 4.0), (2, 2.0), (3, 3.5)])
def test_sector_q(m, nu):
    assert q_factor(FilterModel.sector(0.1, 0.0), m, nu) == 10.0


def test_sector_backlobe_closed_form():
    q = q_factor(FilterModel.sector(0.2, 0.01), 2, 4.0)
    assert q == pytest.approx(1 / (0.2 + 0.8 * 0.1), rel=1e-14)


@pytest.mark.parametrize("n", [0.5, 2.0, 7.0])
@pytest.mark.parametrize("s", [0.25, 0.5, 1.0])
def test_cospower_quadrature_vs_closed_form(n, s):
    assert mean_gain_power(FilterModel.cospower(n), s) == pytest.approx(cospower_mean_gain_power(n, s), rel=1e-9)


def test_cospower_q_vs_monte_carlo(rng):
    filt = FilterModel.cospower(3.0)
    k = apply_filter(filt, rng, 10**6)
    assert q_factor(filt, 2, 4.0) == pytest.approx(1 / np.mean(k**0.5), rel=0.005)


def test_tabulated_matches_sector_like_pattern():
    z = np.linspace(-1, 1, 201)
    filt = FilterModel.tabulated(z, np.full_like(z, 0.25))
    assert q_factor(filt, 2, 4.0) == pytest.approx(2.0, rel=1e-9)


def test_tabulated_weighted():
    z = np.array([0.0, 1.0])
    filt = FilterModel.tabulated(z, [1.0, 0.0], [1.0, 1.0])
    # K(z) = 1 - z on uniform [0, 1]: E[K] = 1/2
    assert mean_gain_power(filt, 1.0) == pytest.approx(0.5, rel=1e-9)


def test_single_point_table(rng):
    filt = FilterModel.tabulated([0.0], [0.5])
    assert np.all(apply_filter(filt, rng, 100) == 0.5)
    assert q_factor(filt, 2, 4.0) == pytest.approx(1 / math.sqrt(0.5))


def test_zero_gain_gives_infinite_q():
    filt = FilterModel.tabulated([0.0, 1.0], [0.0, 0.0])
    with pytest.warns(RuntimeWarning):
        assert math.isinf(q_factor(filt, 2, 4.0))


def test_sector_sampler(rng):
    k = apply_filter(FilterModel.sector(0.25, 0.0), rng, 10**5)
    p = (k == 1.0).mean()
    assert abs(p - 0.25) < 3 * math.sqrt(0.25 * 0.75 / k.size)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.0, 0.99), st.floats(0.0, 0.5))
def test_q_at_least_one_and_monotone(p, back, extra):
    q1 = q_factor(FilterModel.sector(p, back), 2, 4.0)
    q2 = q_factor(FilterModel.sector(p, min(back + extra, 0.99)), 2, 4.0)
    assert q1 >= 1.0
    assert q2 <= q1 * (1 + 1e-12)


def test_filtered_outage(fig4_link, fig4_density):
    d = np.logspace(4, 8, 5)
    iso = filtered_outage(d, FilterModel.isotropic(), fig4_density, 2, fig4_link)
    plain = outage(d, CancellationPolicy.none(), fig4_density, 2, fig4_link)
    np.testing.assert_array_equal(iso.p_exact, plain.p_exact)
    sec = filtered_outage(d, FilterModel.sector(0.1), fig4_density, 2, fig4_link)
    np.testing.assert_allclose(sec.p_approx, plain.p_approx / 10, rtol=1e-14)
    b = filtered_density_bound(0.01, 1e6, FilterModel.sector(0.1), 2, fig4_link)
    assert b.rho_exact == pytest.approx(10 * density_bound(0.01, 1e6, CancellationPolicy.none(), 2, fig4_link).rho_exact)


def test_filtered_outage_uniform_only(fig4_link):
    with pytest.raises(ValueError):
        filtered_outage(1e5, FilterModel.sector(0.1), DensityModel.power_law(1e-4, 0.5), 2, fig4_link)


def test_load_table(tmp_path):
    path = tmp_path / "pattern.txt"
    path.write_text("# z K w\n-1, 0.1, 1\n0 1 2\n1 0.1 1\n")
    filt = load_table(path)
    assert filt.kind == "tabulated"
    assert float(filt.pattern(0.5)) == pytest.approx(0.55)
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3 4\n")
    with pytest.raises(ValueError, match="bad.txt:1"):
        load_table(bad)


def test_invalid_filters():
    with pytest.raises(ValueError):
        FilterModel.sector(0.0)
    with pytest.raises(ValueError):
        FilterModel.tabulated([0.0, 1.0], [0.5, 1.5])
