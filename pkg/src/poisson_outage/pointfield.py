"""Poisson fields of interferers described by their distances to the receiver.

Only radii are sampled: received interference power depends on distance
alone, so angular coordinates never need to be materialized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

#: Volume of the unit ball in 1, 2 and 3 dimensions.
BALL_CONSTANT = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}


def ball_constant(m: int) -> float:
    try:
        return BALL_CONSTANT[m]
    except KeyError:
        raise ValueError(f"dimension must be 1, 2 or 3, got {m!r}") from None


@dataclass(frozen=True)
class DensityModel:
    """Node density profile rho(r) around the receiver.

    Use the constructors :meth:`uniform`, :meth:`power_law` and
    :meth:`piecewise` rather than building instances by hand.

    ``uniform``
        rho(r) = rho0.
    ``power_law``
        rho(r) = rho0 * (r / r_ref) ** beta, with beta > -m.
    ``piecewise``
        rho(r) = levels[j] on the shell breakpoints[j-1] <= r < breakpoints[j]
        (the first shell starts at 0, the last one is unbounded).
    """

    kind: str
    rho0: float = 0.0
    beta: float = 0.0
    r_ref: float = 1.0
    breakpoints: tuple[float, ...] = ()
    levels: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "power_law", "piecewise"):
            raise ValueError(f"unknown density kind {self.kind!r}")
        if self.kind == "piecewise":
            if len(self.levels) != len(self.breakpoints) + 1:
                raise ValueError("piecewise density needs len(levels) == len(breakpoints) + 1")
            if any(b <= 0 for b in self.breakpoints) or list(self.breakpoints) != sorted(set(self.breakpoints)):
                raise ValueError("breakpoints must be positive and strictly increasing")
            if any(level < 0 for level in self.levels):
                raise ValueError("density levels must be nonnegative")
        else:
            if self.rho0 < 0:
                raise ValueError("density must be nonnegative")
            if self.kind == "power_law" and self.r_ref <= 0:
                raise ValueError("r_ref must be positive")

    @classmethod
    def uniform(cls, rho: float) -> "DensityModel":
        return cls("uniform", rho0=float(rho))

    @classmethod
    def power_law(cls, rho0: float, beta: float, r_ref: float = 1.0) -> "DensityModel":
        return cls("power_law", rho0=float(rho0), beta=float(beta), r_ref=float(r_ref))

    @classmethod
    def piecewise(cls, breakpoints, levels) -> "DensityModel":
        return cls(
            "piecewise",
            breakpoints=tuple(float(b) for b in breakpoints),
            levels=tuple(float(v) for v in levels),
        )

    @property
    def is_uniform(self) -> bool:
        return self.kind == "uniform" or (self.kind == "power_law" and self.beta == 0.0)

    def check(self, m: int) -> None:
        ball_constant(m)
        if self.kind == "power_law" and self.beta <= -m:
            raise ValueError(f"beta={self.beta} must exceed -m={-m} for a finite ball count")

    def tail_exponent(self, m: int) -> float:
        """Growth exponent p of the ball count N(r) ~ r**p as r -> 0."""
        self.check(m)
        if self.kind == "power_law":
            return m + self.beta
        return float(m)

    def at(self, r):
        """Point density rho(r)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "uniform":
            return np.full_like(r, self.rho0)
        if self.kind == "power_law":
            with np.errstate(divide="ignore"):
                return self.rho0 * (r / self.r_ref) ** self.beta
        idx = np.searchsorted(np.asarray(self.breakpoints), r, side="right")
        return np.asarray(self.levels)[idx]

    def shells(self, m: int):
        """Closed-form pieces of the ball count for the sampler.

        Returns arrays ``(t0, base, coef, power)``; on piece j the radius
        holding an expected count T is ``(base[j] + (T - t0[j]) * coef[j]) ** (1 / power[j])``.
        Pieces with zero density are dropped; an empty result means no nodes.
        """
        self.check(m)
        c = ball_constant(m)
        if self.kind == "uniform":
            if self.rho0 == 0:
                return _empty_shells()
            return (np.zeros(1), np.zeros(1), np.array([1.0 / (c * self.rho0)]), np.array([float(m)]))
        if self.kind == "power_law":
            if self.rho0 == 0:
                return _empty_shells()
            p = m + self.beta
            amp = self.rho0 * m * c * self.r_ref ** (-self.beta) / p
            return (np.zeros(1), np.zeros(1), np.array([1.0 / amp]), np.array([p]))
        t0, base, coef, power = [], [], [], []
        edges = (0.0,) + self.breakpoints
        for j, level in enumerate(self.levels):
            if level > 0:
                t0.append(self._piecewise_count(m, edges[j]))
                base.append(edges[j] ** m)
                coef.append(1.0 / (c * level))
                power.append(float(m))
        return tuple(np.array(v, dtype=float) for v in (t0, base, coef, power))

    def _piecewise_count(self, m: int, r: float) -> float:
        c = ball_constant(m)
        total = 0.0
        lo = 0.0
        for b, level in zip(self.breakpoints + (math.inf,), self.levels):
            hi = min(b, r)
            if hi > lo:
                total += c * level * (hi**m - lo**m)
            if r <= b:
                break
            lo = b
        return total


def _empty_shells():
    return tuple(np.zeros(0) for _ in range(4))


def average_count(density: DensityModel, m: int, r):
    """Expected number of nodes inside the ball of radius ``r``."""
    density.check(m)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    c = ball_constant(m)
    if density.kind == "uniform":
        out = c * density.rho0 * r**m
    elif density.kind == "power_law":
        p = m + density.beta
        out = density.rho0 * m * c * density.r_ref ** (-density.beta) * r**p / p
    else:
        out = np.vectorize(lambda x: density._piecewise_count(m, x), otypes=[float])(r)
    return out[()] if out.ndim == 0 else out


def radius_for_count(density: DensityModel, m: int, count):
    """Inverse of :func:`average_count`: radius of the ball holding ``count`` nodes."""
    t = np.asarray(count, dtype=float)
    t0, base, coef, power = density.shells(m)
    if t0.size == 0:
        raise ValueError("density is identically zero")
    j = np.clip(np.searchsorted(t0, t, side="right") - 1, 0, None)
    out = (base[j] + (t - t0[j]) * coef[j]) ** (1.0 / power[j])
    return out[()] if out.ndim == 0 else out


@dataclass
class PointField:
    """One realization of interferer distances, sorted ascending."""

    m: int
    distances: np.ndarray = field(repr=False)
    region_radius: float

    def __post_init__(self):
        self.distances = np.asarray(self.distances, dtype=float)

    def __len__(self):
        return len(self.distances)


def sample_field(density: DensityModel, m: int, region_radius: float, rng: np.random.Generator) -> PointField:
    """Draw a Poisson field inside the ball of radius ``region_radius``.

    The count is Poisson with mean N(region_radius); radii are i.i.d. with
    CDF N(r)/N(region_radius), drawn by inverse transform.
    """
    if region_radius <= 0:
        raise ValueError("region_radius must be positive")
    total = float(average_count(density, m, region_radius))
    n = rng.poisson(total) if total > 0 else 0
    if n == 0:
        return PointField(m, np.zeros(0), region_radius)
    counts = rng.random(n) * total
    r = np.minimum(radius_for_count(density, m, counts), region_radius)
    r = np.atleast_1d(r)
    # u == 0 maps to r == 0, outside the open interval the field lives on
    r[r <= 0] = np.nextafter(0.0, 1.0)
    return PointField(m, np.sort(r), region_radius)


def kth_nearest_distance_cdf(density: DensityModel, m: int, k: int, r):
    """Pr{distance to the k-th nearest node <= r} = Pr{Poisson(N(r)) >= k}."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return special.gammainc(k, average_count(density, m, r))


def nearest_distance_cdf(density: DensityModel, m: int, r):
    return -np.expm1(-average_count(density, m, r))
