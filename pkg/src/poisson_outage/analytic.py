"""Closed-form outage laws for a receiver in a Poisson field of interferers.

Everything here is expressed through N(D), the expected number of interferers
whose average INR exceeds D. For a uniform density

    N(D) = N_max * D ** (-m / nu)

and the k-th strongest average INR exceeds D with probability
Pr{Poisson(N(D)) >= k}. Approximations are always reported next to the exact
value, never in its place.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .fading import FadingModel, NumericalError, fractional_moment
from .pointfield import DensityModel, average_count, ball_constant
from .propagation import LinkParams, db, r_of_inr

POLICY_KINDS = ("none", "complete", "partial", "hybrid")

_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


class UniformRequiredError(ValueError):
    """The requested formula holds only for a uniform node density."""


@dataclass(frozen=True)
class CancellationPolicy:
    """Which of the nearest interferers are suppressed, and how much.

    ``complete(k)``: the k-1 nearest contribute nothing.
    ``partial(k, alpha)``: the k-1 nearest are attenuated to ``alpha`` times their power.
    ``hybrid(k, alpha)``: the k-2 nearest are removed and the (k-1)-th is attenuated by ``alpha``.
    ``none()`` is ``complete(1)``.
    """

    kind: str = "none"
    k: int = 1
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown cancellation policy {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        minimum = {"none": 1, "complete": 1, "partial": 2, "hybrid": 3}[self.kind]
        if self.k < minimum:
            raise ValueError(f"{self.kind} cancellation needs k >= {minimum}")
        if self.kind == "none" and self.k != 1:
            raise ValueError("policy 'none' has k = 1; use complete(k)")

    @classmethod
    def none(cls) -> "CancellationPolicy":
        return cls("none", 1)

    @classmethod
    def complete(cls, k: int) -> "CancellationPolicy":
        return cls("none", 1) if k == 1 else cls("complete", k)

    @classmethod
    def partial(cls, k: int, alpha: float) -> "CancellationPolicy":
        return cls("partial", k, alpha)

    @classmethod
    def hybrid(cls, k: int, alpha: float) -> "CancellationPolicy":
        return cls("hybrid", k, alpha)

    @property
    def has_exact_law(self) -> bool:
        return self.kind in ("none", "complete")

    def weights(self) -> np.ndarray:
        """Power multipliers applied to the nearest interferers, in distance order."""
        if self.kind in ("none", "complete"):
            return np.zeros(self.k - 1)
        if self.kind == "partial":
            return np.full(self.k - 1, self.alpha)
        return np.concatenate([np.zeros(self.k - 2), [self.alpha]])

    def dominant_order(self) -> int:
        """Exponent of N(D) in the tail of this policy's outage probability."""
        if self.kind == "partial":
            return 1
        if self.kind == "hybrid":
            return self.k - 1
        return self.k

    def _check_alpha(self):
        if self.kind in ("partial", "hybrid") and self.alpha == 0.0:
            lower = self.k if self.kind == "partial" else self.k - 1
            raise ValueError(
                f"alpha = 0 makes {self.kind}(k={self.k}) a complete cancellation; use complete({lower})"
            )


@dataclass(frozen=True)
class FadingShift:
    """Multiplicative tail shift E[g**order] caused by fading."""

    order: float = 0.0
    shift: float = 1.0

    def __post_init__(self):
        if not self.shift > 0:
            raise ValueError("fading shift must be positive")


def fading_shift(model: FadingModel, policy: CancellationPolicy, m: int, nu: float,
                 density: DensityModel | None = None) -> FadingShift:
    """Fading shift for the policy's dominant tail term."""
    p = density.tail_exponent(m) if density is not None else float(m)
    order = policy.dominant_order() * p / nu
    return FadingShift(order=order, shift=fractional_moment(model, order))


@dataclass
class OutagePoint:
    d: np.ndarray | float
    p_exact: np.ndarray | float
    p_approx: np.ndarray | float
    regime_valid: np.ndarray | bool

    @property
    def d_db(self):
        return db(self.d)


@dataclass
class TradeoffBound:
    """Largest admissible node population for an outage target."""

    epsilon: float
    k: int
    q_factor: float
    n_bar_exact: float  # max expected count in the active interference zone
    n_bar_small_eps: float
    rho_exact: float  # max uniform density
    rho_small_eps: float
    n_max_exact: float  # max expected count in the potential interference zone
    n_max_small_eps: float


@dataclass
class CapacityResult:
    gamma: float
    epsilon: float
    d_eps: float
    d_eps_closed: float
    capacity: float
    capacity_high_sir: float
    capacity_low_sir: float
    capacity_high_sir_closed: float
    capacity_low_sir_closed: float


def _check_d(d):
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("INR threshold must be positive")
    return d


def n_max(density: DensityModel, m: int, params: LinkParams) -> float:
    return float(average_count(density, m, params.r_max))


def _require_uniform(density: DensityModel, what: str):
    if not density.is_uniform:
        raise UniformRequiredError(f"{what} holds only for a uniform density")


def active_count(d, density: DensityModel, m: int, params: LinkParams, q_factor: float = 1.0):
    """N(D): expected number of (visible) interferers with average INR above D."""
    d = _check_d(d)
    if density.is_uniform:
        nmax = n_max(density, m, params)
        out = nmax * np.exp(-(m / params.nu) * np.log(d)) if nmax > 0 else np.zeros_like(d)
    else:
        out = np.asarray(average_count(density, m, r_of_inr(params, d)), dtype=float)
    out = out / q_factor
    return out[()] if np.ndim(out) == 0 else out


def _active_count_log(log_d: float, density, m, params, q_factor) -> float:
    # same as active_count but safe for thresholds beyond the float range
    if density.is_uniform:
        nmax = n_max(density, m, params)
        return nmax * math.exp(-(m / params.nu) * log_d) / q_factor if nmax > 0 else 0.0
    r = math.exp((params.log_unit_inr - log_d) / params.nu)
    return float(average_count(density, m, r)) / q_factor


def inr_cdf(d, k: int, density: DensityModel, m: int, params: LinkParams, q_factor: float = 1.0):
    """Pr{k-th strongest average INR <= D} = Pr{Poisson(N(D)) < k}."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return special.gammaincc(k, active_count(d, density, m, params, q_factor))


def inr_ccdf(d, k: int, density: DensityModel, m: int, params: LinkParams, q_factor: float = 1.0):
    if k < 1:
        raise ValueError("k must be >= 1")
    return special.gammainc(k, active_count(d, density, m, params, q_factor))


def inr_pdf(d, k: int, density: DensityModel, m: int, params: LinkParams, q_factor: float = 1.0):
    """Density of the k-th strongest average INR."""
    d = _check_d(d)
    n = np.asarray(active_count(d, density, m, params, q_factor), dtype=float)
    if density.is_uniform:
        dn_dd = (m / params.nu) * n / d
    else:
        # dN/dD = rho(r) * surface(r) * dr/dD, dr/dD = -r / (nu D)
        r = np.asarray(r_of_inr(params, d))
        surface = m * ball_constant(m) * r ** (m - 1)
        dn_dd = density.at(r) * surface * r / (params.nu * d) / q_factor
    with np.errstate(divide="ignore", invalid="ignore"):
        log_poisson = (k - 1) * np.log(n) - n - special.gammaln(k)
        out = np.where(n > 0, np.exp(log_poisson) * dn_dd, 0.0)
    return out[()] if out.ndim == 0 else out


def outage(d, policy: CancellationPolicy, density: DensityModel, m: int, params: LinkParams,
           fading_shift: FadingShift | None = None, q_factor: float = 1.0) -> OutagePoint:
    """Outage probability at INR threshold ``d`` under a cancellation policy.

    ``p_exact`` is the exact law of the dominant interferer; it exists for
    no/complete cancellation without fading and is NaN otherwise.
    ``p_approx`` is the small-outage asymptote, multiplied by the fading shift.
    """
    d = _check_d(d)
    policy._check_alpha()
    shift = 1.0 if fading_shift is None else fading_shift.shift
    mu = m / params.nu
    n = np.asarray(active_count(d, density, m, params, q_factor), dtype=float)
    k, alpha = policy.k, policy.alpha

    if policy.has_exact_law:
        p_exact = special.gammainc(k, n) if shift == 1.0 else np.full_like(n, np.nan)
        p_approx = shift * np.exp(k * np.log(n) - special.gammaln(k + 1)) if np.all(n > 0) else (
            shift * n**k / math.factorial(k))
        valid = n < 1.0
    elif policy.kind == "partial":
        _require_uniform(density, "the partial-cancellation asymptote")
        scaled = alpha**mu * n
        p_exact = np.full_like(n, np.nan)
        p_approx = shift * scaled
        valid = scaled < 1.0
    else:
        _require_uniform(density, "the hybrid-cancellation asymptote")
        scaled = alpha**mu * n
        p_exact = np.full_like(n, np.nan)
        p_approx = shift * np.exp((k - 1) * np.log(scaled) - special.gammaln(k)) if np.all(scaled > 0) else (
            shift * scaled ** (k - 1) / math.factorial(k - 1))
        # the attenuated term outweighs the first uncancelled one: D > D0 / alpha^(k-1)
        valid = n < alpha ** ((k - 1) * mu)

    def unwrap(x):
        x = np.asarray(x)
        return x[()] if x.ndim == 0 else x

    return OutagePoint(unwrap(d), unwrap(p_exact), unwrap(p_approx), unwrap(valid))


def critical_inr(policy: CancellationPolicy, density: DensityModel, m: int, params: LinkParams,
                 q_factor: float = 1.0) -> float:
    """Threshold D0 with on average one interferer in the active zone, N(D0) = 1."""
    if density.is_uniform:
        nmax = n_max(density, m, params) / q_factor
        if nmax <= 0:
            return 0.0
        return math.exp((params.nu / m) * math.log(nmax))
    f = lambda log_d: _active_count_log(log_d, density, m, params, q_factor) - 1.0
    return math.exp(_bisect_log(f, 0.0))


def outage_piecewise(d, policy: CancellationPolicy, density: DensityModel, m: int, params: LinkParams,
                     fading_shift: FadingShift | None = None, q_factor: float = 1.0):
    """1 below the critical INR, the small-outage asymptote above it."""
    d0 = critical_inr(policy, density, m, params, q_factor)
    approx = outage(d, policy, density, m, params, fading_shift, q_factor).p_approx
    out = np.where(np.asarray(d) < d0, 1.0, approx)
    return out[()] if out.ndim == 0 else out


def _bisect_log(f, start: float, tol: float = 1e-10, max_iter: int = 400) -> float:
    """Root of a decreasing function of log D by bracketing from ``start`` and bisection."""
    lo = hi = start
    step = 1.0
    while f(lo) <= 0:
        lo -= step
        step *= 2
        if lo < -1e6:
            raise NumericalError("could not bracket the root from below")
    step = 1.0
    while f(hi) > 0:
        hi += step
        step *= 2
        if hi > 1e6:
            raise NumericalError("could not bracket the root from above")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            return mid
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    raise NumericalError("bisection did not converge")


def density_bound(epsilon: float, d: float, policy: CancellationPolicy, m: int, params: LinkParams,
                  q_factor: float = 1.0, fading_shift: FadingShift | None = None) -> TradeoffBound:
    """Largest node population keeping the outage at ``d`` below ``epsilon``.

    ``d`` is the distortion-free INR P_max / P_0. The exact form inverts the
    Poisson tail (no/complete cancellation only); the small-epsilon form
    inverts the asymptote. Both are scaled by the filter selectivity.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    d = float(_check_d(d))
    policy._check_alpha()
    k, alpha = policy.k, policy.alpha
    shift = 1.0 if fading_shift is None else fading_shift.shift
    mu = m / params.nu

    if policy.has_exact_law:
        if shift == 1.0:
            exact = -math.log1p(-epsilon) if k == 1 else float(special.gammaincinv(k, epsilon))
        else:
            exact = math.nan
        small = (math.factorial(k) * epsilon / shift) ** (1.0 / k)
    elif policy.kind == "partial":
        exact = math.nan
        small = epsilon / (shift * alpha**mu)
    else:
        exact = math.nan
        small = (math.factorial(k - 1) * epsilon / (shift * alpha ** ((k - 1) * mu))) ** (1.0 / (k - 1))

    exact *= q_factor
    small *= q_factor
    # radius of the active zone; the uniform density filling it with n nodes is n / (c_m r**m)
    r_active = float(r_of_inr(params, d))
    volume = ball_constant(m) * r_active**m
    to_nmax = d**mu
    return TradeoffBound(
        epsilon=epsilon, k=k, q_factor=q_factor,
        n_bar_exact=exact, n_bar_small_eps=small,
        rho_exact=exact / volume, rho_small_eps=small / volume,
        n_max_exact=exact * to_nmax, n_max_small_eps=small * to_nmax,
    )


@dataclass
class AlphaThreshold:
    bound: float
    variant: str

    @property
    def capped(self) -> float:
        return min(self.bound, 1.0)


def required_alpha(d: float, k: int, density: DensityModel, m: int, params: LinkParams,
                   fading: FadingModel | None = None, variant: str = "hybrid") -> AlphaThreshold:
    """Cancellation level below which the first uncancelled (k-th) interferer dominates.

    ``variant="hybrid"``: k-2 nearest removed and the (k-1)-th attenuated (k >= 3).
    ``variant="partial"``: all k-1 nearest attenuated by the same factor (k >= 2).
    With ``fading`` the fractional-moment ratios enter the bound.
    """
    d = float(_check_d(d))
    _require_uniform(density, "the required cancellation level")
    nmax = n_max(density, m, params)
    ratio = params.nu / m
    mu = m / params.nu
    mom = (lambda q: 1.0) if fading is None else (lambda q: fractional_moment(fading, q))
    if variant == "hybrid":
        if k < 3:
            raise ValueError("hybrid cancellation threshold needs k >= 3")
        inner = mom(k * mu) * nmax / (mom((k - 1) * mu) * k)
        log_bound = -math.log(d) / (k - 1) + ratio / (k - 1) * math.log(inner)
    elif variant == "partial":
        if k < 2:
            raise ValueError("partial cancellation threshold needs k >= 2")
        inner = mom(k * mu) * nmax ** (k - 1) / (mom(mu) * math.factorial(k))
        log_bound = -(k - 1) * math.log(d) + ratio * math.log(inner)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return AlphaThreshold(bound=math.exp(min(log_bound, _LOG_FLOAT_MAX)), variant=variant)


def outage_inr(epsilon: float, policy: CancellationPolicy, density: DensityModel, m: int,
               params: LinkParams, q_factor: float = 1.0) -> float:
    """ln of D_eps, the threshold whose exact outage equals ``epsilon`` (bisection)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if not policy.has_exact_law:
        raise ValueError("outage INR needs an exact outage law (no or complete cancellation)")
    k = policy.k

    def excess(log_d):
        n = _active_count_log(log_d, density, m, params, q_factor)
        return float(special.gammainc(k, n)) - epsilon

    start = math.log(max(critical_inr(policy, density, m, params, q_factor), 1e-300))
    return _bisect_log(excess, start)


def outage_capacity(gamma: float, epsilon: float, policy: CancellationPolicy, density: DensityModel,
                    m: int, params: LinkParams, q_factor: float = 1.0) -> CapacityResult:
    """Outage capacity ln(1 + gamma / D_eps) in nat/s/Hz, with its SIR asymptotes."""
    if not gamma > 0:
        raise ValueError("SNR must be positive")
    log_d = outage_inr(epsilon, policy, density, m, params, q_factor)
    if log_d > _LOG_FLOAT_MAX:
        raise OverflowError(
            f"outage INR for epsilon={epsilon:g} is {10 * log_d / math.log(10):.1f} dB, beyond the float range"
        )
    d_eps = math.exp(log_d)
    k = policy.k
    ratio = params.nu / m
    if density.is_uniform:
        nmax = n_max(density, m, params) / q_factor
        log_closed = ratio * math.log(nmax) - ratio / k * math.log(math.factorial(k) * epsilon)
        d_closed = math.exp(log_closed) if log_closed <= _LOG_FLOAT_MAX else math.inf
    else:
        log_closed = d_closed = math.nan
    return CapacityResult(
        gamma=gamma, epsilon=epsilon, d_eps=d_eps, d_eps_closed=d_closed,
        capacity=math.log1p(gamma / d_eps),
        capacity_high_sir=math.log(gamma) - log_d,
        capacity_low_sir=gamma / d_eps,
        capacity_high_sir_closed=math.log(gamma) - log_closed,
        capacity_low_sir_closed=gamma * math.exp(-log_closed),
    )


# -- fading, evaluated exactly ------------------------------------------------

def _log_gain_density(model: FadingModel):
    """Density of s = ln g, and a range holding essentially all of its mass."""
    kind = model.kind
    if kind == "rayleigh":
        return (lambda s: math.exp(s - math.exp(s))), (-50.0, 4.0)
    if kind == "lognormal":
        sd = model.sigma
        return (lambda s: math.exp(-0.5 * (s / sd) ** 2) / (sd * math.sqrt(2 * math.pi))), (-14 * sd, 14 * sd)
    if kind == "nakagami":
        mf = model.m_f
        c = mf * math.log(mf) - math.lgamma(mf)
        return (lambda s: math.exp(c + mf * s - mf * math.exp(s))), (-60.0 / mf, 5.0)
    if kind in ("weibull", "rice"):
        return (lambda s: float(model.pdf(math.exp(s))) * math.exp(s)), (-60.0, 5.0)
    raise ValueError(f"no log-gain density for {kind} fading")


def faded_outage(d: float, k: int, fading: FadingModel, density: DensityModel, m: int, params: LinkParams,
                 q_factor: float = 1.0, split=None) -> float:
    """Pr{g * d_k > D}: k-th nearest interferer's INR after i.i.d. fading.

    Computed as E_g[Pr{d_k > D / g}] by quadrature over ln g. ``split``
    restricts the integral to gains below (``"low"``) or above (``"high"``)
    ``D**split_exponent``; pass ``split=("low", e)`` or ``("high", e)``.
    """
    d = float(_check_d(d))
    if fading.kind == "none":
        return float(inr_ccdf(d, k, density, m, params, q_factor))

    def tail(s):
        return float(special.gammainc(k, _active_count_log(math.log(d) - s, density, m, params, q_factor)))

    if fading.kind == "composite":
        # g = e * l: condition on the lognormal factor, integrate the Rayleigh one
        ray = FadingModel("rayleigh")
        logn = FadingModel("lognormal", sigma=fading.sigma)
        if fading.sigma == 0:
            return faded_outage(d, k, ray, density, m, params, q_factor, split)
        f_l, (a, b) = _log_gain_density(logn)
        inner = lambda t: f_l(t) * _faded_integral(tail, ray, math.log(d), shift=t, split=split)
        return integrate.quad(inner, a, b, limit=200, epsabs=0.0, epsrel=1e-9)[0]
    if fading.kind == "lognormal" and fading.sigma == 0:
        return float(inr_ccdf(d, k, density, m, params, q_factor))
    return _faded_integral(tail, fading, math.log(d), shift=0.0, split=split)


def _faded_integral(tail, model, log_d, shift, split):
    f, (a, b) = _log_gain_density(model)
    if split is not None:
        side, expo = split
        cut = expo * log_d - shift
        if side == "low":
            b = min(b, cut)
        elif side == "high":
            a = max(a, cut)
        else:
            raise ValueError("split side must be 'low' or 'high'")
        if a >= b:
            return 0.0
    g = lambda s: f(s) * tail(s + shift)
    pts = [p for p in (log_d - shift,) if a < p < b]
    val, err = integrate.quad(g, a, b, points=pts or None, limit=400, epsabs=0.0, epsrel=1e-10)
    return val
