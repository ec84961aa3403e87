# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte-Carlo kernel; same draws and arithmetic order as _kernel_py."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, sqrt, cos, sin, pow, M_PI
from libc.stdint cimport uint32_t, uint64_t, int64_t

cnp.import_array()

BACKEND = "compiled"

cdef enum:
    FIELD = 0
    FADING = 1
    FILTER = 2


cdef inline void philox(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                        uint32_t k0, uint32_t k1, uint32_t* out) noexcept nogil:
    cdef uint64_t p0, p1
    cdef int i
    for i in range(10):
        if i:
            k0 = <uint32_t>(k0 + 0x9E3779B9u)
            k1 = <uint32_t>(k1 + 0xBB67AE85u)
        p0 = <uint64_t>0xD2511F53u * c0
        p1 = <uint64_t>0xCD9E8D57u * c2
        c0 = <uint32_t>(p1 >> 32) ^ c1 ^ k0
        c1 = <uint32_t>p1
        c2 = <uint32_t>(p0 >> 32) ^ c3 ^ k1
        c3 = <uint32_t>p0
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


cdef inline double to_unit(uint32_t hi, uint32_t lo) noexcept nogil:
    cdef uint64_t bits = ((<uint64_t>hi << 32) | lo) >> 11
    return (<double>bits + 0.5) * 1.1102230246251565e-16


cdef inline double draw(uint32_t k0, uint32_t k1, uint64_t trial, uint32_t sub,
                        uint32_t point, uint64_t index) noexcept nogil:
    cdef uint32_t w[4]
    philox(<uint32_t>(index >> 1), point, <uint32_t>trial, sub, k0, k1, w)
    if index & 1:
        return to_unit(w[2], w[3])
    return to_unit(w[0], w[1])


cdef inline double normal(double u0, double u1) noexcept nogil:
    return sqrt(-2.0 * log(u0)) * cos(2.0 * M_PI * u1)


cdef inline double interp(double x, const double[::1] xp, const double[::1] fp) noexcept nogil:
    cdef Py_ssize_t n = xp.shape[0]
    cdef Py_ssize_t lo = 0, hi = n - 1, mid
    if x <= xp[0]:
        return fp[0]
    if x >= xp[n - 1]:
        return fp[n - 1]
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if xp[mid] <= x:
            lo = mid
        else:
            hi = mid
    return (fp[hi] - fp[lo]) / (xp[hi] - xp[lo]) * (x - xp[lo]) + fp[lo]


cdef struct Params:
    uint32_t k0
    uint32_t k1
    double t_region
    double log_g
    double nu
    int fading_code
    double sigma
    double m_f
    double weibull_scale
    double weibull_shape
    double rice_mean
    double rice_sd
    int filter_code
    double sector_p
    double backlobe
    double cos_n


cdef inline double fading_gain(Params* p, uint64_t trial, uint32_t j) noexcept nogil:
    cdef int code = p.fading_code
    cdef double u0, u1, u2, u3, x, v, g, rad, ip, qp, shape, dd, c
    cdef uint64_t base = 0
    if code == 0:
        return 1.0
    if code == 1:
        return -log(draw(p.k0, p.k1, trial, FADING, j, 0))
    if code == 2:
        u0 = draw(p.k0, p.k1, trial, FADING, j, 0)
        u1 = draw(p.k0, p.k1, trial, FADING, j, 1)
        return exp(p.sigma * normal(u0, u1))
    if code == 3:
        u0 = draw(p.k0, p.k1, trial, FADING, j, 0)
        u1 = draw(p.k0, p.k1, trial, FADING, j, 1)
        u2 = draw(p.k0, p.k1, trial, FADING, j, 2)
        return -log(u2) * exp(p.sigma * normal(u0, u1))
    if code == 5:
        u0 = draw(p.k0, p.k1, trial, FADING, j, 0)
        return p.weibull_scale * pow(-log(u0), 1.0 / p.weibull_shape)
    if code == 6:
        u0 = draw(p.k0, p.k1, trial, FADING, j, 0)
        u1 = draw(p.k0, p.k1, trial, FADING, j, 1)
        rad = sqrt(-2.0 * log(u0))
        ip = p.rice_mean + p.rice_sd * (rad * cos(2.0 * M_PI * u1))
        qp = p.rice_sd * (rad * sin(2.0 * M_PI * u1))
        return ip * ip + qp * qp
    shape = p.m_f if p.m_f >= 1.0 else p.m_f + 1.0
    dd = shape - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * dd)
    while True:
        u0 = draw(p.k0, p.k1, trial, FADING, j, base)
        u1 = draw(p.k0, p.k1, trial, FADING, j, base + 1)
        u2 = draw(p.k0, p.k1, trial, FADING, j, base + 2)
        u3 = draw(p.k0, p.k1, trial, FADING, j, base + 3)
        x = normal(u0, u1)
        v = (1.0 + c * x)
        v = v * v * v
        if v > 0 and log(u2) < 0.5 * x * x + dd - dd * v + dd * log(v):
            g = dd * v
            if p.m_f < 1.0:
                g = g * pow(u3, 1.0 / p.m_f)
            return g / p.m_f
        base += 4


cdef inline double filter_gain(Params* p, uint64_t trial, uint32_t j,
                               const double[::1] tu, const double[::1] tz,
                               const double[::1] pz, const double[::1] pk) noexcept nogil:
    cdef double u
    if p.filter_code == 0:
        return 1.0
    u = draw(p.k0, p.k1, trial, FILTER, j, 0)
    if p.filter_code == 1:
        return 1.0 if u < p.sector_p else p.backlobe
    if p.filter_code == 2:
        return pow(0.5 * (1.0 + cos(M_PI * (2.0 * u - 1.0))), p.cos_n)
    return interp(interp(u, tu, tz), pz, pk)


cdef inline Py_ssize_t grid_position(double v, const double[::1] grid) noexcept nogil:
    # number of grid values strictly below v
    cdef Py_ssize_t lo = 0, hi = grid.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if grid[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef Params make_params(spec):
    cdef Params p
    seed = int(spec.seed)
    p.k0 = seed & 0xFFFFFFFF
    p.k1 = seed >> 32
    p.t_region = spec.t_region
    p.log_g = spec.log_g
    p.nu = spec.nu
    p.fading_code = spec.fading_code
    p.sigma = spec.sigma
    p.m_f = spec.m_f
    p.weibull_scale = spec.weibull_scale
    p.weibull_shape = spec.weibull_shape
    p.rice_mean = spec.rice_mean
    p.rice_sd = spec.rice_sd
    p.filter_code = spec.filter_code
    p.sector_p = spec.sector_p
    p.backlobe = spec.backlobe
    p.cos_n = spec.cos_n
    return p


cdef void run(Params* p, uint64_t start, uint64_t stop,
              const double[::1] seg_t0, const double[::1] seg_base,
              const double[::1] seg_coef, const double[::1] seg_pow,
              const double[::1] weights,
              const double[::1] tu, const double[::1] tz,
              const double[::1] pz, const double[::1] pk,
              double[::1] nearest, double[::1] total, double[::1] second,
              int64_t[::1] nsurv) noexcept nogil:
    cdef uint64_t trial
    cdef Py_ssize_t i = 0, s, nseg = seg_t0.shape[0], nw = weights.shape[0]
    cdef uint32_t j
    cdef uint32_t w4[4]
    cdef double t, u, w, logd, avg, v, tot, best_avg, best_val, sec_avg, sec_val
    cdef int64_t ns
    for trial in range(start, stop):
        t = 0.0
        tot = 0.0
        best_avg = 0.0
        best_val = 0.0
        sec_avg = 0.0
        sec_val = 0.0
        ns = 0
        s = 0
        j = 0
        while nseg > 0:
            if (j & 1) == 0:
                philox(j >> 1, 0, <uint32_t>trial, FIELD, p.k0, p.k1, w4)
                u = to_unit(w4[0], w4[1])
            else:
                u = to_unit(w4[2], w4[3])
            t = t - log(u)
            if t > p.t_region:
                break
            w = weights[j] if j < nw else 1.0
            if w > 0:
                while s + 1 < nseg and seg_t0[s + 1] <= t:
                    s += 1
                logd = p.log_g - p.nu / seg_pow[s] * log(seg_base[s] + (t - seg_t0[s]) * seg_coef[s])
                avg = w * exp(logd)
                v = avg * fading_gain(p, trial, j) * filter_gain(p, trial, j, tu, tz, pz, pk)
                tot = tot + v
                ns += 1
                if avg > best_avg:
                    sec_avg = best_avg
                    sec_val = best_val
                    best_avg = avg
                    best_val = v
                elif avg > sec_avg:
                    sec_avg = avg
                    sec_val = v
            j += 1
        nearest[i] = best_val
        total[i] = tot
        second[i] = sec_val
        nsurv[i] = ns
        i += 1


def trial_records(spec, trial_start, trial_stop):
    cdef Params p = make_params(spec)
    cdef uint64_t start = trial_start, stop = trial_stop
    n = stop - start
    nearest = np.zeros(n)
    total = np.zeros(n)
    second = np.zeros(n)
    nsurv = np.zeros(n, dtype=np.int64)
    cdef double[::1] nv = nearest, tv = total, sv = second
    cdef int64_t[::1] cv = nsurv
    cdef const double[::1] a0 = spec.seg_t0, a1 = spec.seg_base, a2 = spec.seg_coef, a3 = spec.seg_pow
    cdef const double[::1] wt = spec.weights
    cdef const double[::1] tu = spec.table_u, tz = spec.table_z, pz = spec.pattern_z, pk = spec.pattern_k
    with nogil:
        run(&p, start, stop, a0, a1, a2, a3, wt, tu, tz, pz, pk, nv, tv, sv, cv)
    return nearest, total, second, nsurv


def simulate_block(spec, trial_start, trial_stop, Py_ssize_t chunk=65536):
    """Histograms of grid positions for the dominant-interferer and total INR."""
    cdef const double[::1] grid = spec.grid
    cdef Py_ssize_t size = grid.shape[0] + 1
    h_near = np.zeros(size, dtype=np.int64)
    h_tot = np.zeros(size, dtype=np.int64)
    cdef int64_t[::1] hn = h_near, ht = h_tot
    cdef double[::1] nv, tv
    cdef Py_ssize_t i, m
    lo = trial_start
    while lo < trial_stop:
        hi = min(lo + chunk, trial_stop)
        nearest, total, _, _ = trial_records(spec, lo, hi)
        nv = nearest
        tv = total
        m = hi - lo
        with nogil:
            for i in range(m):
                hn[grid_position(nv[i], grid)] += 1
                ht[grid_position(tv[i], grid)] += 1
        lo = hi
    return h_near, h_tot
