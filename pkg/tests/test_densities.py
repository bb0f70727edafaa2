import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nevanlab.densities import IntervalSet, density_limits, density_profile, log_periodic_set
from nevanlab.errors import ConfigError, DomainError
from nevanlab.logcplx import RadialGrid


def test_merge_and_parse():
    F = IntervalSet.parse("5:8,1:2,7:10")
    assert F.intervals == ((1.0, 2.0), (5.0, 10.0))
    assert IntervalSet.parse("[[1, 3]]").intervals == ((1.0, 3.0),)
    assert len(IntervalSet.parse("")) == 0
    with pytest.raises(ConfigError):
        IntervalSet.parse("1:x")
    with pytest.raises(DomainError):
        IntervalSet(((0.5, 2.0),))
    with pytest.raises(DomainError):
        IntervalSet(((3.0, 2.0),))


def test_profile_closed_form():
    F = IntervalSet(((2.0, 4.0),))
    d, ld = density_profile(F, 5.0)
    assert d == pytest.approx(2.0 / 4.0)
    assert ld == pytest.approx(math.log(2.0) / math.log(5.0))
    with pytest.raises(DomainError):
        density_profile(F, 1.0)


def test_empty_and_full_sets():
    g = RadialGrid.geometric(2, 1e4)
    assert density_limits(IntervalSet(()), g) == (0.0, 0.0, 0.0, 0.0)
    full = density_limits(IntervalSet(((1.0, math.inf),)), g)
    assert all(v == pytest.approx(1.0) for v in full)


def test_log_periodic_limits():
    F = log_periodic_set(12)
    ud, ld, ul, ll = density_limits(F, RadialGrid.geometric(math.exp(10), math.exp(24), per_decade=96))
    assert ud == pytest.approx(math.e / (math.e + 1), abs=0.02)
    assert ld == pytest.approx(1 / (math.e + 1), abs=0.02)
    assert ul == pytest.approx(0.5, abs=0.03)
    assert ll == pytest.approx(0.5, abs=0.03)


def test_scaled_power():
    F = IntervalSet(((2.0, 3.0),)).scaled_power(2)
    assert F.intervals == ((4.0, 9.0),)


@st.composite
def interval_sets(draw):
    n = draw(st.integers(1, 6))
    cuts = sorted(k / 100 for k in draw(st.lists(st.integers(0, 800), min_size=2 * n, max_size=2 * n, unique=True)))
    return IntervalSet(tuple((10 ** cuts[2 * i], 10 ** cuts[2 * i + 1]) for i in range(n)))


@given(interval_sets())
@settings(max_examples=60, deadline=None)
def test_pointwise_profiles_in_unit_interval(F):
    rs = np.geomspace(1.01, 1e9, 200)
    d, ld = density_profile(F, rs)
    assert np.all((d >= 0) & (d <= 1 + 1e-12))
    assert np.all((ld >= 0) & (ld <= 1 + 1e-12))
