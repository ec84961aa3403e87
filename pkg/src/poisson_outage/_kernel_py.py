"""Pure-numpy Monte-Carlo kernel, vectorized across the trials of a block.

Mirrors ``_kernel.pyx`` draw for draw: interferers arrive in order of
increasing distance as the points of a unit-rate Poisson process in
expected-count space, T_1 < T_2 < ... <= N(region), and are mapped back to
radii through the closed-form inverse of the ball count.
"""
from __future__ import annotations

import math

import numpy as np

from .rng import FADING, FIELD, FILTER, uniform

FADING_CODES = {"none": 0, "rayleigh": 1, "lognormal": 2, "composite": 3, "nakagami": 4, "weibull": 5, "rice": 6}
FILTER_CODES = {"isotropic": 0, "sector": 1, "cospower": 2, "tabulated": 3}

BACKEND = "python"


def _normal(u0, u1):
    return np.sqrt(-2.0 * np.log(u0)) * np.cos(2.0 * math.pi * u1)


def _fading(spec, trials, j):
    code = spec.fading_code
    n = trials.size
    if code == 0:
        return np.ones(n)
    u = lambda i: uniform(spec.seed, trials, FADING, j, i)
    if code == 1:
        return -np.log(u(0))
    if code == 2:
        return np.exp(spec.sigma * _normal(u(0), u(1)))
    if code == 3:
        return -np.log(u(2)) * np.exp(spec.sigma * _normal(u(0), u(1)))
    if code == 5:
        return spec.weibull_scale * (-np.log(u(0))) ** (1.0 / spec.weibull_shape)
    if code == 6:
        u0, u1 = u(0), u(1)
        rad = np.sqrt(-2.0 * np.log(u0))
        s = spec.rice_sd
        i_part = spec.rice_mean + s * (rad * np.cos(2.0 * math.pi * u1))
        q_part = s * (rad * np.sin(2.0 * math.pi * u1))
        return i_part * i_part + q_part * q_part
    # nakagami: Marsaglia-Tsang gamma(shape, 1) / m_f with per-attempt uniforms
    mf = spec.m_f
    shape = mf if mf >= 1.0 else mf + 1.0
    dd = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * dd)
    out = np.empty(n)
    todo = np.arange(n)
    attempt = 0
    while todo.size:
        t = trials[todo]
        base = 4 * attempt
        u0, u1, u2, u3 = (uniform(spec.seed, t, FADING, j, base + i) for i in range(4))
        x = _normal(u0, u1)
        v = (1.0 + c * x) ** 3
        with np.errstate(invalid="ignore", divide="ignore"):
            ok = (v > 0) & (np.log(u2) < 0.5 * x * x + dd - dd * v + dd * np.log(v))
        g = dd * v[ok]
        if mf < 1.0:
            g = g * u3[ok] ** (1.0 / mf)
        out[todo[ok]] = g / mf
        todo = todo[~ok]
        attempt += 1
    return out


def _filter(spec, trials, j):
    code = spec.filter_code
    if code == 0:
        return np.ones(trials.size)
    u = uniform(spec.seed, trials, FILTER, j, 0)
    if code == 1:
        return np.where(u < spec.sector_p, 1.0, spec.backlobe)
    if code == 2:
        return (0.5 * (1.0 + np.cos(math.pi * (2.0 * u - 1.0)))) ** spec.cos_n
    z = np.interp(u, spec.table_u, spec.table_z)
    return np.interp(z, spec.pattern_z, spec.pattern_k)


def _simulate(spec, trial_start, trial_stop):
    trials = np.arange(trial_start, trial_stop, dtype=np.uint64)
    n = trials.size
    t = np.zeros(n)
    total = np.zeros(n)
    best_avg = np.zeros(n)
    best_val = np.zeros(n)
    sec_avg = np.zeros(n)
    sec_val = np.zeros(n)
    nsurv = np.zeros(n, dtype=np.int64)
    alive = np.arange(n) if spec.seg_t0.size else np.zeros(0, dtype=np.int64)
    weights = spec.weights
    j = 0
    while alive.size:
        t[alive] -= np.log(uniform(spec.seed, trials[alive], FIELD, 0, j))
        alive = alive[t[alive] <= spec.t_region]
        if not alive.size:
            break
        w = weights[j] if j < weights.size else 1.0
        if w > 0:
            ta = t[alive]
            s = np.searchsorted(spec.seg_t0, ta, side="right") - 1
            logd = spec.log_g - spec.nu / spec.seg_pow[s] * np.log(
                spec.seg_base[s] + (ta - spec.seg_t0[s]) * spec.seg_coef[s])
            avg = w * np.exp(logd)
            v = avg * _fading(spec, trials[alive], j) * _filter(spec, trials[alive], j)
            total[alive] += v
            nsurv[alive] += 1
            ba = best_avg[alive]
            sa = sec_avg[alive]
            top = avg > ba
            mid = ~top & (avg > sa)
            sec_avg[alive] = np.where(top, ba, np.where(mid, avg, sa))
            sec_val[alive] = np.where(top, best_val[alive], np.where(mid, v, sec_val[alive]))
            best_avg[alive] = np.where(top, avg, ba)
            best_val[alive] = np.where(top, v, best_val[alive])
        j += 1
    return best_val, total, sec_val, nsurv


def simulate_block(spec, trial_start, trial_stop):
    """Histograms of grid positions for the dominant-interferer and total INR."""
    nearest, total, _, _ = _simulate(spec, trial_start, trial_stop)
    size = spec.grid.size + 1
    h_near = np.bincount(np.searchsorted(spec.grid, nearest, side="left"), minlength=size)
    h_tot = np.bincount(np.searchsorted(spec.grid, total, side="left"), minlength=size)
    return h_near.astype(np.int64), h_tot.astype(np.int64)


def trial_records(spec, trial_start, trial_stop):
    """Per-trial (dominant INR, total INR, runner-up INR, surviving count)."""
    return _simulate(spec, trial_start, trial_stop)
