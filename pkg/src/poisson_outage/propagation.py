"""Link budget: distance <-> interference-to-noise ratio, interference zones."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pointfield import DensityModel, average_count


@dataclass(frozen=True)
class LinkParams:
    """Path loss g_a = a_nu * r**-nu and the powers of the link budget.

    Only the combination ``p_t * g_t * g_r * a_nu / p_0`` enters any result.
    """

    nu: float
    p_t: float = 1.0
    p_0: float = 1.0
    a_nu: float = 1.0
    g_t: float = 1.0
    g_r: float = 1.0

    def __post_init__(self):
        if self.nu < 1:
            raise ValueError(f"path-loss exponent must be >= 1, got {self.nu}")
        for name in ("p_t", "p_0", "a_nu", "g_t", "g_r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def log_unit_inr(self) -> float:
        """ln of the INR produced by one transmitter at unit distance."""
        return (
            math.log(self.p_t) + math.log(self.g_t) + math.log(self.g_r) + math.log(self.a_nu) - math.log(self.p_0)
        )

    @property
    def r_max(self) -> float:
        return math.exp(self.log_unit_inr / self.nu)

    @classmethod
    def from_r_max(cls, nu: float, r_max: float) -> "LinkParams":
        """Noise-normalized link whose potential interference zone has radius ``r_max``."""
        return cls(nu=nu, p_t=1.0, p_0=r_max ** (-nu))


@dataclass(frozen=True)
class Zones:
    r_max: float
    n_max: float


def inr_of_distance(params: LinkParams, r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("distance must be positive: the point-source model breaks down at r = 0")
    out = np.exp(params.log_unit_inr - params.nu * np.log(r))
    return out[()] if out.ndim == 0 else out


def r_of_inr(params: LinkParams, d):
    """Radius of the active interference zone for INR threshold ``d``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("INR must be positive")
    out = np.exp((params.log_unit_inr - np.log(d)) / params.nu)
    return out[()] if out.ndim == 0 else out


def zones(params: LinkParams, density: DensityModel, m: int) -> Zones:
    r_max = params.r_max
    return Zones(r_max=r_max, n_max=float(average_count(density, m, r_max)))


def db(x):
    return 10.0 * np.log10(x)


def from_db(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)
