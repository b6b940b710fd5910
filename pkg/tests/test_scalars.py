import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spindex.scalars import (
    QuadraticIrrational,
    ResonantValueError,
    continued_fraction_convergents,
    exact_ceil,
    exact_floor,
    frac_part,
    guarded_ceil,
    guarded_floor,
    guarded_round,
    rationality_witness,
    root_of_unity_order,
    snap_integer,
)

SQRT2 = QuadraticIrrational(0, 1, 2)
PHI = QuadraticIrrational(Fraction(1, 2), Fraction(1, 2), 5)

small_fracs = st.fractions(
    min_value=-50, max_value=50, max_denominator=40
)


def test_quadratic_basics():
    assert float(SQRT2) == pytest.approx(math.sqrt(2))
    assert float(PHI) == pytest.approx((1 + math.sqrt(5)) / 2)
    assert PHI * PHI == PHI + 1  # golden-ratio identity, exactly
    assert (SQRT2 * SQRT2) == 2
    assert (1 / PHI if False else PHI.inverse()) == PHI - 1


@given(a=small_fracs, b=small_fracs, c=small_fracs, d=small_fracs)
@settings(max_examples=200, deadline=None)
def test_quadratic_field_arithmetic(a, b, c, d):
    x = QuadraticIrrational(a, b, 2)
    y = QuadraticIrrational(c, d, 2)
    assert float(x + y) == pytest.approx(float(x) + float(y), abs=1e-9)
    assert float(x * y) == pytest.approx(float(x) * float(y), abs=1e-8)
    if not (c == 0 and d == 0):
        assert float(x / y) == pytest.approx(float(x) / float(y), rel=1e-9, abs=1e-9)


@given(a=small_fracs, b=small_fracs)
@settings(max_examples=300, deadline=None)
def test_exact_floor_matches_value(a, b):
    x = QuadraticIrrational(a, b, 2)
    n = exact_floor(x)
    assert x >= n
    assert x < n + 1


def test_floor_near_integers():
    # 3 + eps and 3 - eps with eps = 5 - 3*sqrt(2)... exact edge cases
    x = QuadraticIrrational(-4, 5, 2)  # 5 sqrt2 - 4 = 3.071..
    assert exact_floor(x) == 3
    y = QuadraticIrrational(7, -5, 2)  # 7 - 5 sqrt2 = -0.071
    assert exact_floor(y) == -1
    assert exact_ceil(y) == 0
    assert frac_part(x) == x - 3


def test_comparisons_exact():
    # 99/70 is a convergent of sqrt 2: comparisons must still be exact
    assert SQRT2 > Fraction(99, 70) or SQRT2 < Fraction(99, 70)
    assert (SQRT2 < Fraction(99, 70)) == (2 < Fraction(99, 70) ** 2)
    assert SQRT2 != Fraction(99, 70)


def test_guarded_floor_resonance():
    with pytest.raises(ResonantValueError):
        guarded_floor(3.0 + 2e-10, what="test")
    assert guarded_floor(3.3) == 3
    assert guarded_ceil(3.3) == 4
    assert guarded_floor(Fraction(3)) == 3  # exact values never guard
    assert guarded_ceil(QuadraticIrrational(3, 0, 2) + Fraction(1, 10**12)) == 4


def test_guarded_round():
    assert guarded_round(2.4999) == 2
    assert guarded_round(Fraction(5, 2)) == 3  # exact half rounds up
    with pytest.raises(ResonantValueError):
        guarded_round(2.5 + 1e-12)


def test_snap_integer():
    assert snap_integer(3.0000000001) == 3
    assert snap_integer(Fraction(4)) == 4
    assert snap_integer(QuadraticIrrational(5, 0, 2)) == 5
    with pytest.raises(ValueError):
        snap_integer(3.01)
    with pytest.raises(ValueError):
        snap_integer(SQRT2)


def test_convergents_of_half():
    assert (1, 2, 2) in list(continued_fraction_convergents(0.5, 100))


def test_rationality_witness_rationals():
    w = rationality_witness(2 / 3)
    assert (w["p"], w["q"]) == (2, 3)
    w = rationality_witness(Fraction(7, 11))
    assert (w["p"], w["q"]) == (7, 11)
    w = rationality_witness(1.5)
    assert (w["p"], w["q"]) == (3, 2)


def test_rationality_witness_irrationals():
    assert rationality_witness(math.sqrt(2))["kind"] == "irrational_within_bound"
    assert rationality_witness(SQRT2)["kind"] == "irrational"
    assert rationality_witness(PHI - 1)["kind"] == "irrational"
    assert rationality_witness(QuadraticIrrational(3, 0, 5))["kind"] == "rational"


@given(p=st.integers(1, 400), q=st.integers(2, 500))
@settings(max_examples=200, deadline=None)
def test_rationality_witness_detects_all_small_rationals(p, q):
    g = math.gcd(p, q)
    p, q = p // g, q // g
    if q == 1:
        return
    w = rationality_witness(p / q)
    assert w["kind"] == "rational"
    assert (w["p"], w["q"]) == (p, q)


def test_root_of_unity_order():
    assert root_of_unity_order(Fraction(1, 3)) == 3
    assert root_of_unity_order(Fraction(5, 4)) == 4  # reduced mod 1
    assert root_of_unity_order(SQRT2 - 1) is None
    assert root_of_unity_order(1 / 3) == 3
