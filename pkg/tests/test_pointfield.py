import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from poisson_outage.pointfield import (
    DensityModel, average_count, ball_constant, kth_nearest_distance_cdf, nearest_distance_cdf,
    radius_for_count, sample_field,
)


def test_ball_constants():
    assert ball_constant(1) == 2.0
    assert ball_constant(2) == math.pi
    assert ball_constant(3) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    with pytest.raises(ValueError):
        ball_constant(4)


def test_uniform_count():
    dens = DensityModel.uniform(1e-5)
    assert average_count(dens, 2, 1e3) == pytest.approx(10 * math.pi, rel=1e-14)


@pytest.mark.parametrize("dens", [
    DensityModel.power_law(2.0, -0.5, 1.5),
    DensityModel.power_law(0.3, 1.0, 1.0),
    DensityModel.piecewise([1.0, 2.5], [0.4, 0.0, 1.2]),
])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_count_matches_shell_integral(dens, m):
    # oracle: integral of rho(r) * surface area of the sphere of radius r
    surface = m * ball_constant(m)
    for r in (0.3, 1.7, 4.0):
        brk = [b for b in dens.breakpoints if b < r]
        val = integrate.quad(lambda x: float(dens.at(x)) * surface * x ** (m - 1), 0, r, points=brk or None,
                             epsabs=0, epsrel=1e-12)[0]
        assert average_count(dens, m, r) == pytest.approx(val, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1e3), st.floats(-1.5, 2.0), st.integers(2, 3))
def test_radius_inverts_count(t, beta, m):
    dens = DensityModel.power_law(0.7, beta, 2.0)
    r = radius_for_count(dens, m, t)
    assert average_count(dens, m, r) == pytest.approx(t, rel=1e-10)


def test_piecewise_inverse_skips_empty_shell():
    dens = DensityModel.piecewise([1.0, 2.0], [0.5, 0.0, 0.5])
    t_inner = average_count(dens, 2, 1.0)
    r = radius_for_count(dens, 2, t_inner + 1e-9)
    assert r >= 2.0


def test_beta_at_minus_m_rejected():
    with pytest.raises(ValueError):
        average_count(DensityModel.power_law(1.0, -2.0), 2, 1.0)


def test_empty_field(rng):
    f = sample_field(DensityModel.uniform(0.0), 2, 10.0, rng)
    assert len(f) == 0


def test_sampled_nearest_distance_law(rng):
    dens = DensityModel.uniform(1.0 / math.pi)
    near = []
    for _ in range(4000):
        f = sample_field(dens, 2, 5.0, rng)
        near.append(f.distances[0] if len(f) else 5.0)
    near = np.array(near)
    # Kolmogorov-Smirnov against 1 - exp(-r**2) restricted to r < 5 (mass outside is e^-25)
    res = stats.kstest(near, lambda r: nearest_distance_cdf(dens, 2, r))
    assert res.pvalue > 1e-3


def test_sample_counts_are_poisson(rng):
    dens = DensityModel.uniform(2.0)
    counts = np.array([len(sample_field(dens, 1, 2.0, rng)) for _ in range(5000)])
    mean = average_count(dens, 1, 2.0)
    assert abs(counts.mean() - mean) < 4 * math.sqrt(mean / counts.size)
    assert counts.var() == pytest.approx(mean, rel=0.1)


def test_distances_sorted_in_region(rng):
    f = sample_field(DensityModel.power_law(1.0, 0.5), 3, 2.0, rng)
    assert np.all(np.diff(f.distances) >= 0)
    assert np.all((f.distances > 0) & (f.distances <= 2.0))


def test_kth_nearest_cdf_poisson_series():
    dens = DensityModel.uniform(0.3)
    n = average_count(dens, 2, 2.0)
    oracle = 1 - math.exp(-n) * sum(n**j / math.factorial(j) for j in range(3))
    assert kth_nearest_distance_cdf(dens, 2, 3, 2.0) == pytest.approx(oracle, rel=1e-12)
