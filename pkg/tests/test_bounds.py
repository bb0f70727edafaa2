import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nevanlab.bounds import (GrowthTrend, TheoremVerdict, assemble_verdict, bank_laine_bound, be_bound,
                             bounds_table, cond18_threshold, cor23_bound, petrenko_bound, rossi_bound,
                             thm12_bound, thm33_threshold, thm35_threshold)
from nevanlab.errors import DomainError, PreconditionError


def test_petrenko_examples():
    assert petrenko_bound(0.5) == pytest.approx(math.pi / 2, abs=1e-15)
    assert petrenko_bound(0) == 1.0
    assert petrenko_bound(0.25) == pytest.approx(math.pi / (2 * math.sqrt(2)), abs=1e-15)
    # both branches meet at 1/2
    left = math.pi * 0.5 / math.sin(math.pi * 0.5)
    assert abs(left - math.pi * 0.5) < 1e-12
    with pytest.raises(DomainError):
        petrenko_bound(-0.1)


@given(st.floats(0, 20))
def test_petrenko_at_least_one(mu):
    assert petrenko_bound(mu) >= 1.0


def test_bank_laine():
    assert bank_laine_bound(1.5) == (1.5, True)
    assert bank_laine_bound(1.0) == (1.0, False)
    assert bank_laine_bound(0.3) == (0.3, True)


def test_rossi_and_be():
    assert rossi_bound(0.5) == math.inf
    assert rossi_bound(0.75) == 1.5
    assert rossi_bound(1 - 1e-9) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(DomainError):
        rossi_bound(1.0)
    assert be_bound(1, 0.75) == 1.5
    assert be_bound(2, 1.5) == 3.0
    assert be_bound(2, 1.0 + 1e-9) > 1e8
    with pytest.raises(DomainError):
        be_bound(2, 2.0)
    for mu in (0.5, 0.6, 0.75, 0.9, 0.999):
        assert be_bound(1, mu) == rossi_bound(mu)


def test_thm12_and_cor23():
    assert thm12_bound(1, 0) == math.inf
    assert thm12_bound(0.75, 0) == 2.0
    assert thm12_bound(0.75, 1 - 1e-12) < 1e-10
    with pytest.raises(DomainError):
        thm12_bound(0, 0)
    with pytest.raises(DomainError):
        thm12_bound(0.5, 1)
    assert cor23_bound(1) == math.inf
    assert cor23_bound(math.pi) == pytest.approx(math.pi / (2 * (math.pi - 1)), abs=1e-15)
    assert cor23_bound(math.inf) == 0.5
    with pytest.raises(DomainError):
        cor23_bound(0.9)


def test_thm12_monotone_exact():
    grid = [Fraction(k, 20) for k in range(1, 20)]

    def exact(a, b):
        return (1 - b) / (2 * (1 - a))

    for b in grid[:-1]:
        vals = [exact(a, b) for a in grid]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        assert all(thm12_bound(float(a), float(b)) == pytest.approx(float(exact(a, b)), rel=1e-15) for a in grid)
    for a in grid:
        vals = [exact(a, b) for b in grid]
        assert all(x > y for x, y in zip(vals, vals[1:]))


def test_thresholds():
    assert (thm33_threshold(0.5), thm35_threshold(0.5), cond18_threshold(0.5)) == pytest.approx((2, 1, 2 / math.pi))
    assert (thm33_threshold(0), thm35_threshold(0), cond18_threshold(0)) == pytest.approx((1, 0.5, 1 / math.pi))
    assert thm35_threshold(2 / 3) == pytest.approx(1.5)
    assert thm33_threshold(1) == thm35_threshold(1) == cond18_threshold(1) == math.inf
    with pytest.raises(DomainError):
        thm33_threshold(1.5)


@given(st.floats(0, 1, exclude_max=True))
def test_thm35_above_cond18(xi):
    assert thm35_threshold(xi) > cond18_threshold(xi)


def test_table():
    t = bounds_table(mu=0.5, alpha=0.75, xi=1.0)
    assert t["petrenko"] == pytest.approx(math.pi / 2)
    assert t["thm12"] == 2.0
    assert t["thm33"] == t["thm35"] == t["cond18"] == math.inf
    assert bounds_table(rho=1.2)["rossi"] is None


def test_verdict_e_minus_z_case():
    v = assemble_verdict("Thm33", {"xi": 0.5, "beta_minus": math.pi})
    assert v.hypothesis_satisfied is False
    assert v.predicted_bound == 2.0
    assert v.conclusion_consistent is None


def test_verdict_infinite_lambda_with_rising_staircase():
    v = assemble_verdict("Thm12", {"alpha": 1.0}, GrowthTrend(1.0, 1.6))
    assert v.hypothesis_satisfied and v.conclusion_consistent
    flat = assemble_verdict("Thm12", {"alpha": 1.0}, 1.5)
    assert flat.conclusion_consistent is False


def test_verdict_lambda_tolerance():
    v = assemble_verdict("Thm12", {"alpha": 0.75, "rho": 1.5}, 1.9)
    assert v.hypothesis_satisfied and v.conclusion_consistent
    v = assemble_verdict("Thm12", {"alpha": 0.75, "rho": 1.5}, 1.8)
    assert v.conclusion_consistent is False
    # integer order with mu = rho and rho above the bound: no side condition holds
    v = assemble_verdict("Thm12", {"alpha": 0.75, "rho": 3.0, "mu": 3.0}, 1.0)
    assert not v.hypothesis_satisfied


def test_verdict_polynomial_coefficient_not_covered():
    v = assemble_verdict("BankLaine66", {"rho": 1.5, "transcendental": False}, 1.5)
    assert not v.hypothesis_satisfied and v.conclusion_consistent is None


def test_verdict_errors():
    with pytest.raises(DomainError):
        assemble_verdict("Cor23", {"beta_plus": 0.5})
    with pytest.raises(PreconditionError, match="xi, mu"):
        assemble_verdict("Thm35", {})
    with pytest.raises(PreconditionError, match="rho"):
        assemble_verdict("Thm12", {"alpha": 0.5})
    with pytest.raises(DomainError):
        assemble_verdict("Nope", {})
    with pytest.raises(DomainError):
        TheoremVerdict("Thm12", {}, 1.0, None, True, True)
