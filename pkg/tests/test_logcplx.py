import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nevanlab.errors import DomainError, QuadratureError
from nevanlab.logcplx import (CircleSampling, LogComplex, RadialGrid, circle_integral_logplus, fit_slope,
                              lc_add, lc_add_arrays, lc_mul, wrap, wrap_array)

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)
phase = st.floats(min_value=-10, max_value=10, allow_nan=False)


def test_wrap_range():
    assert wrap(math.pi) == math.pi
    assert wrap(-math.pi) == math.pi
    assert wrap(3 * math.pi) == pytest.approx(math.pi)
    assert wrap(0.5) == 0.5
    arr = wrap_array([-math.pi, math.pi, 7.0])
    assert arr[0] == math.pi and arr[1] == math.pi
    assert arr[2] == pytest.approx(7.0 - 2 * math.pi)


def test_zero_and_roundtrip():
    z = LogComplex.zero()
    assert z.is_zero and z.phase == 0.0
    w = LogComplex.from_complex(3 + 4j)
    assert w.log_mod == pytest.approx(math.log(5))
    assert w.to_complex() == pytest.approx(3 + 4j)
    assert LogComplex.from_complex(0) == z


def test_rejects_nan_and_inf():
    with pytest.raises(DomainError):
        LogComplex(math.nan)
    with pytest.raises(DomainError):
        LogComplex(math.inf)


def test_huge_values_multiply():
    big = LogComplex(math.exp(40), 1.0)
    p = lc_mul(big, big)
    assert p.log_mod == 2 * math.exp(40)
    assert p.phase == pytest.approx(2.0)


def test_exact_cancellation_gives_zero():
    a = LogComplex(1e5, 0.3)
    assert lc_add(a, -a).is_zero


def test_add_with_zero_is_identity():
    a = LogComplex(2.0, 1.0)
    assert lc_add(a, LogComplex.zero()) == a
    assert lc_add(LogComplex.zero(), a) == a


@given(finite, phase, finite, phase)
@settings(max_examples=200, deadline=None)
def test_add_matches_complex(l1, p1, l2, p2):
    # restrict to moduli where plain complex arithmetic is exact enough to compare
    l1, l2 = l1 / 10, l2 / 10
    a, b = LogComplex(l1, p1), LogComplex(l2, p2)
    want = a.to_complex() + b.to_complex()
    got = lc_add(a, b)
    scale = max(abs(a.to_complex()), abs(b.to_complex()))
    if abs(want) < 1e-10 * scale:
        return
    assert abs(got.to_complex() - want) <= 1e-12 * scale


@given(finite, phase, finite, phase)
@settings(max_examples=200, deadline=None)
def test_mul_is_exact_in_log_form(l1, p1, l2, p2):
    p = lc_mul(LogComplex(l1, p1), LogComplex(l2, p2))
    assert p.log_mod == l1 + l2
    assert abs(wrap(p.phase - (p1 + p2))) < 1e-12


def test_vectorized_add_matches_scalar():
    rng = np.random.default_rng(3)
    lm1, lm2 = rng.normal(size=20) * 5, rng.normal(size=20) * 5
    ph1, ph2 = rng.uniform(-3, 3, 20), rng.uniform(-3, 3, 20)
    lm2[0] = -np.inf
    lm, ph = lc_add_arrays(lm1, ph1, lm2, ph2)
    for i in range(20):
        s = lc_add(LogComplex(lm1[i], ph1[i]), LogComplex(lm2[i], ph2[i]))
        assert lm[i] == pytest.approx(s.log_mod, abs=1e-12)
        assert abs(wrap(ph[i] - s.phase)) < 1e-12


def test_grid_constructors():
    g = RadialGrid.geometric(1, 100)
    assert len(g) == 97
    assert g.radii[0] == 1.0 and g.radii[-1] == pytest.approx(100.0)
    assert RadialGrid.linear(1, 2, 3).radii == (1.0, 1.5, 2.0)
    with pytest.raises(DomainError):
        RadialGrid(())
    with pytest.raises(DomainError):
        RadialGrid((2.0, 1.0))
    with pytest.raises(DomainError):
        RadialGrid.geometric(1, 10, 0)


def test_circle_sampling_validation():
    with pytest.raises(DomainError):
        CircleSampling(1.0, initial_count=100)
    with pytest.raises(DomainError):
        CircleSampling(1.0, refine_tol=0)


def test_logplus_mean_of_exp():
    # log|e^z| = r cos(theta); its positive part has mean r / pi
    for r in (1.0, 10.0):
        val = circle_integral_logplus(lambda th: r * np.cos(th), CircleSampling(r))
        assert val == pytest.approx(r / math.pi, rel=1e-9)


def test_quadrature_failure_reports_estimate():
    rng = np.random.default_rng(0)

    def noisy(th):
        return rng.normal(size=np.shape(th))

    with pytest.raises(QuadratureError) as info:
        circle_integral_logplus(noisy, CircleSampling(1.0, 16, 1e-12, max_depth=2))
    assert info.value.estimate > 0


def test_fit_slope():
    x = np.log([1, 2, 4, 8])
    slope, icpt, rms = fit_slope(x, 1.5 * x + 2)
    assert slope == pytest.approx(1.5) and icpt == pytest.approx(2.0) and rms < 1e-12
    with pytest.raises(DomainError):
        fit_slope([1, 2], [1, 2])
