import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poisson_outage.pointfield import DensityModel
from poisson_outage.propagation import LinkParams, db, from_db, inr_of_distance, r_of_inr, zones


def test_r_max_fig3():
    p = LinkParams(nu=4.0, p_t=1.0, p_0=1e-10)
    assert p.r_max == pytest.approx(1e10**0.25, rel=1e-14)


def test_unit_inr_at_r_max():
    p = LinkParams(nu=3.0, p_t=2.0, p_0=1e-9, a_nu=0.5, g_t=3.0, g_r=1.5)
    assert inr_of_distance(p, p.r_max) == pytest.approx(1.0, rel=1e-13)


@given(st.floats(1e-3, 1e6), st.floats(1.0, 6.0))
def test_round_trip(r, nu):
    p = LinkParams.from_r_max(nu, 1e3)
    assert r_of_inr(p, inr_of_distance(p, r)) == pytest.approx(r, rel=1e-12)


def test_zero_distance_rejected():
    with pytest.raises(ValueError):
        inr_of_distance(LinkParams(nu=4.0), 0.0)


def test_zones():
    z = zones(LinkParams.from_r_max(4.0, 1e3), DensityModel.uniform(100 / (math.pi * 1e6)), 2)
    assert z.n_max == pytest.approx(100.0, rel=1e-13)


def test_db_round_trip():
    assert db(1e4) == pytest.approx(40.0)
    assert np.allclose(db(from_db([-3.0, 0.0, 71.5])), [-3.0, 0.0, 71.5])


def test_invalid_exponent():
    with pytest.raises(ValueError):
        LinkParams(nu=0.5)
