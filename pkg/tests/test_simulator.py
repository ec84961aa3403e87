import math

import numpy as np
import pytest

from poisson_outage.analytic import CancellationPolicy, inr_ccdf
from poisson_outage.fading import FadingModel
from poisson_outage.filtering import FilterModel
from poisson_outage.kernel import available_backends
from poisson_outage.pointfield import DensityModel
from poisson_outage.propagation import LinkParams, from_db, inr_of_distance
from poisson_outage.simulator import (
    DominanceReport, Scenario, dominance_report, estimate_outage_curve, exceedance_counts, run_trial,
    sandwich_bounds, trial_records, wilson_interval,
)

BACKENDS = available_backends()


def scenario(n_max=100.0, **kw):
    link = LinkParams.from_r_max(4.0, 1e3)
    dens = DensityModel.uniform(n_max / (math.pi * 1e6))
    kw.setdefault("trials", 20000)
    return Scenario(2, link, dens, **kw)


def test_empty_field():
    sc = Scenario(2, LinkParams.from_r_max(4.0, 1e3), DensityModel.uniform(0.0), trials=5)
    rec = run_trial(sc, 3)
    assert rec.nearest_k_inr == 0.0 and rec.total_inr == 0.0 and rec.survivors == 0
    curve = estimate_outage_curve(sc, [0.0, 10.0])
    assert np.all(curve.count_total == 0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_trial_matches_distances(backend):
    sc = scenario(n_max=20.0, trials=50, master_seed=99)
    link = sc.params
    for pol in (CancellationPolicy.none(), CancellationPolicy.complete(3), CancellationPolicy.partial(2, 0.2),
                CancellationPolicy.hybrid(3, 0.5)):
        sc.policy = pol
        for i in range(0, 50, 7):
            rec = run_trial(sc, i, backend)
            inr = inr_of_distance(link, rec.distances)
            w = np.ones(inr.size)
            ww = pol.weights()[: inr.size]
            w[: ww.size] = ww
            avg = w * inr
            assert rec.total_inr == pytest.approx(avg.sum(), rel=1e-12)
            assert rec.nearest_k_inr == pytest.approx(avg.max() if avg.size else 0.0, rel=1e-12)
            assert rec.survivors == int(np.count_nonzero(w > 0))
    sc.policy = CancellationPolicy.none()
    rec = run_trial(sc, 4, backend)
    assert rec.nearest_k_inr == pytest.approx(float(inr_of_distance(link, rec.distances[0])), rel=1e-12)


def test_trial_index_bound():
    with pytest.raises(IndexError):
        run_trial(scenario(trials=3), 3)
    with pytest.raises(ValueError):
        scenario(trials=2**32)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
@pytest.mark.parametrize("fading", [FadingModel(), FadingModel("rayleigh"), FadingModel("lognormal", sigma=0.9),
                                    FadingModel("composite", sigma=0.4), FadingModel("nakagami", m_f=0.7),
                                    FadingModel("nakagami", m_f=2.5), FadingModel("weibull", shape=1.5),
                                    FadingModel("rice", k_factor=3.0)], ids=lambda f: f.kind)
@pytest.mark.parametrize("filt", [FilterModel(), FilterModel.sector(0.3, 0.05), FilterModel.cospower(2.0),
                                  FilterModel.tabulated(np.linspace(-1, 1, 9), np.linspace(0, 1, 9))],
                         ids=lambda f: f.kind)
def test_backends_agree(fading, filt):
    sc = scenario(n_max=30.0, trials=1500, fading=fading, filter=filt, policy=CancellationPolicy.partial(2, 0.3),
                  master_seed=2**63 + 11)
    a = trial_records(sc, 0, None, "python")
    b = trial_records(sc, 0, None, "compiled")
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=0)


def test_counts_independent_of_blocking_and_workers():
    sc = scenario(trials=30000, fading=FadingModel("rayleigh"), master_seed=5)
    grid = from_db(np.arange(30, 60, 3.0))
    ref = exceedance_counts(sc, grid, workers=1, block=30000)
    for workers, block in ((1, 777), (3, 4096)):
        got = exceedance_counts(sc, grid, workers=workers, block=block)
        assert all(np.array_equal(r, g) for r, g in zip(ref, got))


def test_counts_match_records():
    sc = scenario(trials=5000, master_seed=3)
    grid = from_db(np.arange(30, 60, 5.0))
    near, tot = exceedance_counts(sc, grid)
    rn, rt, _, _ = trial_records(sc)
    np.testing.assert_array_equal(near, (rn[None, :] > grid[:, None]).sum(axis=1))
    np.testing.assert_array_equal(tot, (rt[None, :] > grid[:, None]).sum(axis=1))


def test_grid_must_ascend():
    with pytest.raises(ValueError):
        exceedance_counts(scenario(trials=10), [3.0, 2.0])


def test_total_at_least_nearest():
    rn, rt, rs, ns = trial_records(scenario(trials=5000, fading=FadingModel("rayleigh")))
    assert np.all(rt >= rn * (1 - 1e-15))


def test_monotone_coupling_in_region():
    grid = np.arange(20, 60, 2.0)
    counts = [estimate_outage_curve(scenario(trials=5000, region_multiplier=r, master_seed=8), grid).count_total
              for r in (1.0, 2.0, 4.0)]
    assert np.all(counts[1] >= counts[0]) and np.all(counts[2] >= counts[1])
    # the dominant statistic is unaffected by the extra, weaker interferers
    near = [estimate_outage_curve(scenario(trials=5000, region_multiplier=r, master_seed=8), grid).count_nearest
            for r in (1.0, 4.0)]
    assert np.array_equal(near[0], near[1])


def test_wilson():
    lo, hi = wilson_interval(np.array([0, 1]), 1)
    assert lo[0] == 0.0 and hi[1] == 1.0
    assert hi[0] > 0.8 and lo[1] < 0.2
    lo, hi = wilson_interval(500, 1000)
    assert lo < 0.5 < hi
    widths = [np.subtract(*wilson_interval(n // 10, n)[::-1]) for n in (10**4, 10**6)]
    assert widths[0] / widths[1] == pytest.approx(10.0, rel=0.02)


def test_single_trial_curve():
    c = estimate_outage_curve(scenario(trials=1), [30.0, 40.0, 50.0])
    assert set(np.unique(c.p_total)) <= {0.0, 1.0}


@pytest.mark.parametrize("k", [1, 2, 3])
def test_nearest_matches_exact_law(k):
    sc = scenario(trials=200000, policy=CancellationPolicy.complete(k), master_seed=k)
    grid = np.arange(30.0, 70.0, 1.0)
    c = estimate_outage_curve(sc, grid)
    exact = inr_ccdf(from_db(grid), k, sc.density, 2, sc.params)
    lo, hi = c.ci_nearest
    assert np.mean((exact >= lo) & (exact <= hi)) >= 0.95


def test_nearest_matches_exact_law_radial():
    link = LinkParams.from_r_max(3.0, 50.0)
    dens = DensityModel.power_law(0.05, -0.8, 5.0)
    sc = Scenario(2, link, dens, trials=200000, master_seed=4)
    grid = np.arange(-5.0, 30.0, 1.0)
    c = estimate_outage_curve(sc, grid)
    exact = inr_ccdf(from_db(grid), 1, dens, 2, link)
    lo, hi = c.ci_nearest
    assert np.mean((exact >= lo) & (exact <= hi)) >= 0.95


def test_retention():
    sc = scenario(trials=1000)
    c = estimate_outage_curve(sc, [40.0], retain=10)
    assert c.samples[0].shape == (10,)
    np.testing.assert_array_equal(c.samples[1], trial_records(sc, 0, 10)[1])


def test_dominance_report():
    sc = scenario(trials=100000, master_seed=1)
    rep = dominance_report(sc, np.arange(30.0, 80.0, 5.0))
    ok = rep.sufficient
    assert np.all(rep.ratio[ok] >= 1.0)
    assert rep.ratio[3] > 1.1  # 45 dB, P_out near 0.4: the rest of the field matters
    assert np.all(rep.half_width[ok] >= 0)
    empty = DominanceReport(np.array([0.0]), 10, np.array([0]), np.array([0]))
    assert empty.status[0] == "insufficient trials" and np.isnan(empty.ratio[0])


def test_single_interferer_ratio_is_one():
    # a field with one survivor: total equals the dominant interferer
    rn, rt, _, ns = trial_records(scenario(n_max=0.5, trials=20000))
    one = ns == 1
    assert one.sum() > 1000
    np.testing.assert_array_equal(rn[one], rt[one])
    rep = DominanceReport(np.zeros(1), 100, np.array([40]), np.array([40]))
    assert rep.ratio[0] == 1.0 and rep.half_width[0] == 0.0


def test_delta_method_half_width_matches_bootstrap(rng):
    sc = scenario(trials=40000, master_seed=9)
    rn, rt, _, _ = trial_records(sc)
    x = 2e4
    rep = DominanceReport(np.zeros(1), rn.size, np.array([(rn > x).sum()]), np.array([(rt > x).sum()]))
    boots = []
    for _ in range(300):
        idx = rng.integers(0, rn.size, rn.size)
        boots.append((rt[idx] > x).sum() / (rn[idx] > x).sum())
    assert rep.half_width[0] / 2.5758 == pytest.approx(np.std(boots), rel=0.25)


def test_sandwich_bounds():
    sc = scenario(trials=20000, master_seed=2)
    lower, total, upper = sandwich_bounds(sc, np.arange(30.0, 60.0, 3.0))
    assert np.all(lower <= total) and np.all(total <= upper)
