"""Outage probability of a receiver inside a Poisson field of interferers.

Closed-form and asymptotic outage laws, density and capacity tradeoffs, and a
Monte-Carlo validator with a compiled kernel.
"""
from .analytic import (
    CancellationPolicy,
    critical_inr,
    density_bound,
    fading_shift,
    faded_outage,
    outage,
    outage_capacity,
    required_alpha,
)
from .fading import FadingModel, fractional_moment
from .filtering import FilterModel, q_factor
from .pointfield import DensityModel, PointField, sample_field
from .propagation import LinkParams, db, from_db
from .simulator import DominanceReport, OutageCurve, Scenario, dominance_report, estimate_outage_curve

__version__ = "0.1.0"
