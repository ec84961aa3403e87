"""Linear receive filtering (antenna patterns and the like) and its selectivity Q.

A filter is a normalized power gain 0 <= K(z) <= 1 over a scalar filtering
variable z with density f_z. The statistical selectivity

    Q = 1 / E[K(z) ** (m / nu)]

is the factor by which filtering thins the visible interferer population.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .analytic import CancellationPolicy, OutagePoint, TradeoffBound, density_bound, outage
from .fading import NumericalError
from .pointfield import DensityModel
from .propagation import LinkParams

FILTER_KINDS = ("isotropic", "sector", "cospower", "tabulated")


@dataclass(frozen=True)
class FilterModel:
    """Filter gain pattern.

    ``sector``
        Main lobe covering a fraction ``p`` of the filtering range with gain 1,
        gain ``backlobe`` elsewhere.
    ``cospower``
        K(z) = ((1 + cos z) / 2) ** n with z uniform on [-pi, pi).
    ``tabulated``
        K linearly interpolated between samples ``(z, K)``; ``weights`` gives
        f_z at the same nodes (uniform when omitted), normalized internally.
    """

    kind: str = "isotropic"
    p: float = 1.0
    backlobe: float = 0.0
    n: float = 0.0
    z: tuple[float, ...] = ()
    gain: tuple[float, ...] = ()
    weights: tuple[float, ...] | None = None
    _table: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}; expected one of {FILTER_KINDS}")
        if self.kind == "sector":
            if not 0 < self.p <= 1:
                raise ValueError("sector fraction p must lie in (0, 1]")
            if not 0 <= self.backlobe < 1:
                raise ValueError("backlobe must lie in [0, 1)")
        if self.kind == "cospower" and self.n < 0:
            raise ValueError("cospower exponent must be nonnegative")
        if self.kind == "tabulated":
            z = np.asarray(self.z, dtype=float)
            k = np.asarray(self.gain, dtype=float)
            if z.size == 0 or z.shape != k.shape:
                raise ValueError("tabulated filter needs matching, nonempty z and gain columns")
            if np.any(np.diff(z) <= 0):
                raise ValueError("tabulated z must be strictly increasing")
            if np.any((k < 0) | (k > 1)):
                raise ValueError("filter gain must lie in [0, 1]")
            w = np.ones_like(z) if self.weights is None else np.asarray(self.weights, dtype=float)
            if w.shape != z.shape or np.any(w < 0):
                raise ValueError("weights must be nonnegative and match z")
            object.__setattr__(self, "_table", (z, k, w))

    @classmethod
    def isotropic(cls) -> "FilterModel":
        return cls("isotropic")

    @classmethod
    def sector(cls, p: float, backlobe: float = 0.0) -> "FilterModel":
        return cls("sector", p=p, backlobe=backlobe)

    @classmethod
    def cospower(cls, n: float) -> "FilterModel":
        return cls("cospower", n=n)

    @classmethod
    def tabulated(cls, z, gain, weights=None) -> "FilterModel":
        return cls(
            "tabulated",
            z=tuple(float(v) for v in np.atleast_1d(z)),
            gain=tuple(float(v) for v in np.atleast_1d(gain)),
            weights=None if weights is None else tuple(float(v) for v in np.atleast_1d(weights)),
        )

    def pattern(self, z):
        """K(z)."""
        z = np.asarray(z, dtype=float)
        if self.kind == "isotropic":
            return np.ones_like(z)
        if self.kind == "cospower":
            return (0.5 * (1.0 + np.cos(z))) ** self.n
        if self.kind == "tabulated":
            zt, kt, _ = self._table
            return np.interp(z, zt, kt)
        raise ValueError("sector filters are defined by lobe fractions, not a z pattern")

    def inverse_cdf_table(self, size: int = 4097):
        """(u_grid, z_grid) for inverse-transform sampling of z under f_z."""
        zt, _, w = self._table
        if zt.size == 1:
            return np.array([0.0, 1.0]), np.array([zt[0], zt[0]])
        z_fine = np.linspace(zt[0], zt[-1], max(size, 8 * zt.size))
        f = np.interp(z_fine, zt, w)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(z_fine))])
        if cdf[-1] <= 0:
            raise ValueError("filter weights integrate to zero")
        cdf /= cdf[-1]
        u = np.linspace(0.0, 1.0, size)
        return u, np.interp(u, cdf, z_fine)


def load_table(path) -> FilterModel:
    """Read a tabulated pattern from a whitespace/comma separated text file.

    Columns: z, K and an optional f_z weight. Lines starting with ``#`` are
    comments.
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(parts)}")
            rows.append([float(p) for p in parts])
    if not rows:
        raise ValueError(f"{path}: empty filter table")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: inconsistent column count")
    arr = np.array(rows)
    return FilterModel.tabulated(arr[:, 0], arr[:, 1], arr[:, 2] if arr.shape[1] == 3 else None)


def mean_gain_power(filt: FilterModel, s: float, rtol: float = 1e-9) -> float:
    """E[K(z) ** s] under f_z."""
    if filt.kind == "isotropic":
        return 1.0
    if filt.kind == "sector":
        back = 0.0 if filt.backlobe == 0 else filt.backlobe**s
        return filt.p + (1.0 - filt.p) * back
    if filt.kind == "cospower":
        f = lambda z: filt.pattern(z) ** s
        val, err = integrate.quad(f, 0.0, math.pi, epsabs=0.0, epsrel=rtol, limit=200)
        return val / math.pi
    zt, kt, w = filt._table
    if zt.size == 1:
        return float(kt[0] ** s)
    f = lambda z: np.interp(z, zt, kt) ** s * np.interp(z, zt, w)
    num = den = 0.0
    for lo, hi in zip(zt[:-1], zt[1:]):
        num += integrate.quad(f, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)[0]
        den += 0.5 * (np.interp(lo, zt, w) + np.interp(hi, zt, w)) * (hi - lo)
    if den <= 0:
        raise NumericalError("filter weights integrate to zero")
    return num / den


def q_factor(filt: FilterModel, m: int, nu: float) -> float:
    """Statistical selectivity Q >= 1; ``inf`` (with a warning) when K vanishes."""
    if m / nu <= 0:
        raise ValueError("m / nu must be positive")
    mean = mean_gain_power(filt, m / nu)
    if mean <= 0:
        warnings.warn("filter gain is identically zero: Q is infinite", RuntimeWarning, stacklevel=2)
        return math.inf
    return 1.0 / min(mean, 1.0)


def cospower_mean_gain_power(n: float, s: float) -> float:
    """Closed form of E[K**s] for the cospower pattern."""
    a = n * s
    return math.exp(special.gammaln(a + 0.5) - special.gammaln(a + 1.0)) / math.sqrt(math.pi)


def apply_filter(filt: FilterModel, rng: np.random.Generator, size=None):
    """Draw filter gains K(z) with z ~ f_z, independently per interferer."""
    if filt.kind == "isotropic":
        return np.ones(size) if size is not None else 1.0
    u = rng.random(size)
    if filt.kind == "sector":
        return np.where(u < filt.p, 1.0, filt.backlobe)
    if filt.kind == "cospower":
        return filt.pattern(math.pi * (2.0 * u - 1.0))
    ut, zt = filt.inverse_cdf_table()
    return filt.pattern(np.interp(u, ut, zt))


def _require_uniform(density: DensityModel):
    if not density.is_uniform:
        raise ValueError(
            "analytic filtered outage needs a uniform density; use the simulator for radial densities"
        )


def filtered_outage(
    d, filt: FilterModel, density: DensityModel, m: int, params: LinkParams,
    policy: CancellationPolicy | None = None,
) -> OutagePoint:
    """Outage with the visible interferer count thinned by Q."""
    _require_uniform(density)
    return outage(d, policy or CancellationPolicy.none(), density, m, params, q_factor=q_factor(filt, m, params.nu))


def filtered_density_bound(
    epsilon, d, filt: FilterModel, m: int, params: LinkParams, policy: CancellationPolicy | None = None,
) -> TradeoffBound:
    return density_bound(epsilon, d, policy or CancellationPolicy.none(), m, params, q_factor=q_factor(filt, m, params.nu))
