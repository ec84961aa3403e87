"""Monte-Carlo estimation of outage curves and tail-dominance diagnostics.

Each trial draws one Poisson field around the receiver, applies the
cancellation policy in distance order, multiplies every surviving interferer
by i.i.d. fading and filter gains and records two statistics:

* the *dominant* INR: the survivor with the largest post-cancellation average
  INR (for no/complete cancellation, the k-th nearest interferer), after its
  own fading and filter gain;
* the *total* INR: the sum over all survivors.

Trial ``i`` depends only on ``(master_seed, i)``; the reduction over trials is
an integer histogram sum, so results are identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from . import analytic
from .analytic import CancellationPolicy, UniformRequiredError
from .fading import FadingModel
from .filtering import FilterModel, q_factor
from .kernel import get_backend
from .pointfield import DensityModel, average_count, radius_for_count
from .propagation import LinkParams, from_db
from .rng import FIELD, uniform

CONFIDENCE = 0.99
Z99 = float(stats.norm.ppf(0.5 + CONFIDENCE / 2))
BLOCK = 1 << 15
MAX_TRIALS = 1 << 32


@dataclass
class Scenario:
    m: int
    params: LinkParams
    density: DensityModel
    region_multiplier: float = 1.0
    policy: CancellationPolicy = field(default_factory=CancellationPolicy.none)
    fading: FadingModel = field(default_factory=FadingModel)
    filter: FilterModel = field(default_factory=FilterModel)
    trials: int = 1_000_000
    master_seed: int = 0

    def __post_init__(self):
        self.density.check(self.m)
        if self.region_multiplier < 1:
            raise ValueError("region_multiplier must be >= 1")
        if not 1 <= self.trials < MAX_TRIALS:
            raise ValueError(f"trials must lie in [1, 2**32), got {self.trials}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    @property
    def region_radius(self) -> float:
        return self.region_multiplier * self.params.r_max

    @property
    def n_max(self) -> float:
        return float(average_count(self.density, self.m, self.params.r_max))


@dataclass
class KernelSpec:
    """Flat numeric description of a scenario, consumed by both kernel backends."""

    seed: int
    t_region: float
    seg_t0: np.ndarray
    seg_base: np.ndarray
    seg_coef: np.ndarray
    seg_pow: np.ndarray
    log_g: float
    nu: float
    weights: np.ndarray
    grid: np.ndarray
    fading_code: int = 0
    sigma: float = 0.0
    m_f: float = 1.0
    weibull_scale: float = 1.0
    weibull_shape: float = 1.0
    rice_mean: float = 0.0
    rice_sd: float = 0.0
    filter_code: int = 0
    sector_p: float = 1.0
    backlobe: float = 0.0
    cos_n: float = 0.0
    table_u: np.ndarray = field(default_factory=lambda: np.zeros(1))
    table_z: np.ndarray = field(default_factory=lambda: np.zeros(1))
    pattern_z: np.ndarray = field(default_factory=lambda: np.zeros(1))
    pattern_k: np.ndarray = field(default_factory=lambda: np.ones(1))

    @classmethod
    def from_scenario(cls, sc: Scenario, grid=()) -> "KernelSpec":
        from ._kernel_py import FADING_CODES, FILTER_CODES

        t0, base, coef, power = sc.density.shells(sc.m)
        spec = cls(
            seed=int(sc.master_seed),
            t_region=float(average_count(sc.density, sc.m, sc.region_radius)) if t0.size else 0.0,
            seg_t0=np.ascontiguousarray(t0, dtype=float),
            seg_base=np.ascontiguousarray(base, dtype=float),
            seg_coef=np.ascontiguousarray(coef, dtype=float),
            seg_pow=np.ascontiguousarray(power, dtype=float),
            log_g=sc.params.log_unit_inr,
            nu=float(sc.params.nu),
            weights=np.ascontiguousarray(sc.policy.weights(), dtype=float),
            grid=np.ascontiguousarray(np.sort(np.asarray(grid, dtype=float))),
        )
        fd = sc.fading
        spec.fading_code = FADING_CODES[fd.kind]
        spec.sigma = fd.sigma
        spec.m_f = fd.m_f
        if fd.kind == "weibull":
            spec.weibull_scale, spec.weibull_shape = fd.weibull_scale, fd.shape
        if fd.kind == "rice":
            spec.rice_mean = math.sqrt(fd.k_factor / (fd.k_factor + 1.0))
            spec.rice_sd = math.sqrt(0.5 / (fd.k_factor + 1.0))
        ft = sc.filter
        spec.filter_code = FILTER_CODES[ft.kind]
        spec.sector_p, spec.backlobe, spec.cos_n = ft.p, ft.backlobe, ft.n
        if ft.kind == "tabulated":
            u, z = ft.inverse_cdf_table()
            zt, kt, _ = ft._table
            spec.table_u, spec.table_z = np.ascontiguousarray(u), np.ascontiguousarray(z)
            spec.pattern_z, spec.pattern_k = np.ascontiguousarray(zt), np.ascontiguousarray(kt)
        return spec


@dataclass
class TrialRecord:
    nearest_k_inr: float
    total_inr: float
    second_inr: float
    survivors: int
    distances: np.ndarray = field(repr=False)


def field_distances(sc: Scenario, trial_index: int) -> np.ndarray:
    """Interferer distances of one trial, ascending, from the trial's own stream."""
    spec = KernelSpec.from_scenario(sc)
    if spec.seg_t0.size == 0:
        return np.zeros(0)
    counts = []
    t = 0.0
    j = 0
    while True:
        t -= math.log(float(uniform(sc.master_seed, trial_index, FIELD, 0, j)))
        if t > spec.t_region:
            break
        counts.append(t)
        j += 1
    if not counts:
        return np.zeros(0)
    return np.atleast_1d(radius_for_count(sc.density, sc.m, np.array(counts)))


def run_trial(sc: Scenario, trial_index: int, backend=None) -> TrialRecord:
    if not 0 <= trial_index < sc.trials:
        raise IndexError(f"trial_index {trial_index} outside [0, {sc.trials})")
    kern = get_backend(backend)
    near, tot, sec, ns = kern.trial_records(KernelSpec.from_scenario(sc), trial_index, trial_index + 1)
    return TrialRecord(float(near[0]), float(tot[0]), float(sec[0]), int(ns[0]), field_distances(sc, trial_index))


def trial_records(sc: Scenario, start: int = 0, stop: int | None = None, backend=None):
    """Arrays (dominant, total, runner-up, survivors) for trials [start, stop)."""
    stop = sc.trials if stop is None else stop
    kern = get_backend(backend)
    return kern.trial_records(KernelSpec.from_scenario(sc), start, stop)


def _block_worker(args):
    spec, lo, hi, backend = args
    return get_backend(backend).simulate_block(spec, lo, hi)


def exceedance_counts(sc: Scenario, d_grid, workers: int = 1, backend=None, block: int = BLOCK):
    """Counts of trials whose dominant / total INR exceeds each threshold of ``d_grid``."""
    grid = np.asarray(d_grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("threshold grid must be nonempty and strictly ascending")
    spec = KernelSpec.from_scenario(sc, grid)
    backend_name = get_backend(backend).BACKEND
    jobs = [(spec, lo, min(lo + block, sc.trials), backend_name) for lo in range(0, sc.trials, block)]
    h_near = np.zeros(grid.size + 1, dtype=np.int64)
    h_tot = np.zeros(grid.size + 1, dtype=np.int64)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block_worker, jobs))
    else:
        results = map(_block_worker, jobs)
    for hn, ht in results:
        h_near += hn
        h_tot += ht
    # a value at histogram position p exceeds grid[j] for every j < p
    exceed = lambda h: np.cumsum(h[::-1])[::-1][1:]
    return exceed(h_near), exceed(h_tot)


def wilson_interval(count, n, z: float = Z99):
    count = np.asarray(count, dtype=float)
    p = count / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return np.clip(centre - half, 0.0, 1.0), np.clip(centre + half, 0.0, 1.0)


@dataclass
class OutageCurve:
    d_db: np.ndarray
    trials: int
    count_nearest: np.ndarray
    count_total: np.ndarray
    p_exact: np.ndarray
    p_approx: np.ndarray
    regime_valid: np.ndarray
    samples: tuple | None = field(default=None, repr=False)

    @property
    def p_nearest(self):
        return self.count_nearest / self.trials

    @property
    def p_total(self):
        return self.count_total / self.trials

    @property
    def ci_nearest(self):
        return wilson_interval(self.count_nearest, self.trials)

    @property
    def ci_total(self):
        return wilson_interval(self.count_total, self.trials)

    @property
    def half_width_total(self):
        lo, hi = self.ci_total
        return 0.5 * (hi - lo)

    @property
    def reference(self):
        """Analytic reference: exact where defined, the asymptote otherwise."""
        return np.where(np.isnan(self.p_exact), self.p_approx, self.p_exact)

    def within_ci(self):
        lo, hi = self.ci_total
        ref = self.reference
        return (ref >= lo) & (ref <= hi)


def analytic_columns(sc: Scenario, d):
    """Exact and asymptotic outage for a scenario, NaN where no formula applies."""
    d = np.asarray(d, dtype=float)
    nan = np.full(d.shape, np.nan)
    q = 1.0
    if sc.filter.kind != "isotropic":
        if not sc.density.is_uniform:
            return nan, nan.copy(), np.zeros(d.shape, bool)
        q = q_factor(sc.filter, sc.m, sc.params.nu)
    shift = analytic.fading_shift(sc.fading, sc.policy, sc.m, sc.params.nu, sc.density)
    try:
        pt = analytic.outage(d, sc.policy, sc.density, sc.m, sc.params, shift, q_factor=q)
    except UniformRequiredError:
        return nan, nan.copy(), np.zeros(d.shape, bool)
    p_exact = np.atleast_1d(np.asarray(pt.p_exact, dtype=float)).copy()
    if sc.policy.has_exact_law and sc.fading.kind != "none":
        p_exact = np.array([
            analytic.faded_outage(x, sc.policy.k, sc.fading, sc.density, sc.m, sc.params, q) for x in d
        ])
    return p_exact, np.atleast_1d(pt.p_approx).astype(float), np.atleast_1d(pt.regime_valid).astype(bool)


def estimate_outage_curve(sc: Scenario, d_grid_db, workers: int = 1, backend=None, retain: int = 0) -> OutageCurve:
    """Empirical outage curves over a dB grid, with analytic columns attached.

    ``retain`` keeps the per-trial records of the first ``retain`` trials for
    exploratory use (quantiles and the like).
    """
    d_db = np.asarray(d_grid_db, dtype=float)
    d = from_db(d_db)
    c_near, c_tot = exceedance_counts(sc, d, workers=workers, backend=backend)
    p_exact, p_approx, valid = analytic_columns(sc, d)
    samples = trial_records(sc, 0, min(retain, sc.trials), backend) if retain > 0 else None
    return OutageCurve(d_db, sc.trials, c_near, c_tot, p_exact, p_approx, valid, samples)


@dataclass
class DominanceReport:
    """Ratio Pr{total > x} / Pr{dominant > x} over a threshold grid."""

    x_db: np.ndarray
    trials: int
    count_nearest: np.ndarray
    count_total: np.ndarray

    @property
    def sufficient(self):
        return self.count_nearest > 0

    @property
    def ratio(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.sufficient, self.count_total / np.maximum(self.count_nearest, 1), np.nan)

    @property
    def half_width(self):
        """Delta-method half-width; the dominant exceedance implies the total one."""
        r = self.ratio
        p_n = self.count_nearest / self.trials
        with np.errstate(divide="ignore", invalid="ignore"):
            var = r * (r - 1.0) / (self.trials * p_n)
        return np.where(self.sufficient, Z99 * np.sqrt(np.maximum(var, 0.0)), np.nan)

    @property
    def status(self):
        return np.where(self.sufficient, "ok", "insufficient trials")

    @classmethod
    def from_curve(cls, curve: OutageCurve) -> "DominanceReport":
        return cls(curve.d_db, curve.trials, curve.count_nearest, curve.count_total)


def dominance_report(sc: Scenario, x_grid_db, workers: int = 1, backend=None) -> DominanceReport:
    x_db = np.asarray(x_grid_db, dtype=float)
    c_near, c_tot = exceedance_counts(sc, from_db(x_db), workers=workers, backend=backend)
    return DominanceReport(x_db, sc.trials, c_near, c_tot)


def sandwich_bounds(sc: Scenario, x_grid_db, trials: int | None = None, backend=None):
    """Empirical Pr{X1 + X2 > x} <= Pr{sum > x} <= Pr{X1 + (N - 1) X2 > x}.

    X1, X2 are the two largest surviving INRs by average power and N the
    number of survivors. Without fading these bound the total exactly in every
    trial. Returns (lower, total, upper) probability arrays.
    """
    near, tot, sec, ns = trial_records(sc, 0, trials, backend)
    x = from_db(np.asarray(x_grid_db, dtype=float))[:, None]
    lower = near + sec
    upper = near + np.maximum(ns - 1, 0) * sec
    return tuple((v[None, :] > x).mean(axis=1) for v in (lower, tot, upper))


def poisson_tail(k: int, n_bar):
    """Pr{Poisson(n_bar) >= k}."""
    return special.gammainc(k, n_bar)
