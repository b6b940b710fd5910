import math
from fractions import Fraction

import numpy as np
import pytest

from spindex.scalars import QuadraticIrrational, ResonantValueError, to_float
from spindex.sp_core import BasicNormalForm, diamond, make_normal_form
from spindex.paths import (
    RotationAtom,
    Segment,
    ShearAtom,
    SymplecticPath,
    power_path,
    rotation_path,
    symbolic_path,
)
from spindex.path_index import index_report
from spindex.iteration import (
    IterationProfile,
    bott_nullity,
    degree_shift,
    direct_power_nullity,
    dynamical_convexity,
    iterate_mu_minus,
    mean_identity_check,
    nondegenerate_part,
    nullity_of_power,
)

from conftest import random_symbolic_path

SQRT2 = QuadraticIrrational(0, 1, 2)


def test_iterate_formula_rotation_example():
    p = rotation_path(Fraction(7, 10))
    rep = index_report(p)
    assert rep.lower == 1
    assert iterate_mu_minus(rep.lower, rep.table, 3) == 5
    assert iterate_mu_minus(rep.lower, rep.table, 1) == rep.lower
    # direct check against the iterated path
    assert index_report(power_path(p, 3)).lower == 5


def test_iterate_formula_shear_example():
    p = symbolic_path([ShearAtom(1.0)])
    rep = index_report(p)
    for k in (1, 2, 7, 30):
        assert iterate_mu_minus(rep.lower, rep.table, k) == -1
        assert index_report(power_path(p, k)).lower == -1


def test_iterate_formula_vs_direct(rng):
    for _ in range(25):
        p = random_symbolic_path(rng, slots=2, degenerate=bool(rng.integers(0, 2)))
        rep = index_report(p)
        for k in (2, 3, 7, 11):
            assert iterate_mu_minus(rep.lower, rep.table, k) == index_report(
                power_path(p, k)
            ).lower


def test_resonant_ceiling_guard():
    p = rotation_path(1 / 3 + 1e-13)  # float angle, resonant at k = 3
    rep = index_report(p)
    with pytest.raises(ResonantValueError):
        iterate_mu_minus(rep.lower, rep.table, 3)
    # exact rational angles never guard
    pe = rotation_path(Fraction(1, 3))
    repe = index_report(pe)
    assert iterate_mu_minus(repe.lower, repe.table, 3) == index_report(
        power_path(pe, 3)
    ).lower


def test_nullity_of_power():
    pe = rotation_path(Fraction(1, 3))
    repe = index_report(pe)
    assert nullity_of_power(repe.table, 3) == 2
    assert nullity_of_power(repe.table, 2) == 0
    sh = index_report(symbolic_path([ShearAtom(1.0)]))
    assert all(nullity_of_power(sh.table, k) == 1 for k in (1, 2, 9))


def test_mean_identity_examples():
    for alpha in (Fraction(3, 10), Fraction(9, 11)):
        rep = index_report(rotation_path(alpha))
        chk = mean_identity_check(rep)
        assert chk["passed"] and chk["residual"] < 1e-12
    hyp = index_report(
        symbolic_path([__import__("spindex.paths", fromlist=["HyperbolicAtom"]).HyperbolicAtom(0.8)])
    )
    assert hyp.mean == hyp.lower == 0
    assert mean_identity_check(hyp)["passed"]


def test_bott_nullity_examples():
    r3 = make_normal_form(BasicNormalForm(kind="R", turns=Fraction(1, 3)))
    assert bott_nullity(r3, 3) == 2
    assert direct_power_nullity(r3, 3) == 2
    assert bott_nullity(r3, 2) == 0
    n11 = make_normal_form(BasicNormalForm(kind="N1", lam=1, a=1))
    for k in (1, 2, 17, 30):
        assert bott_nullity(n11, k) == 1 == direct_power_nullity(n11, k)
    strong = make_normal_form(
        BasicNormalForm(kind="R", turns=float(SQRT2) / 2)
    )
    for k in range(1, 101):
        assert bott_nullity(strong, k) == 0


def test_bott_vs_direct_on_mixed(rng):
    m = diamond(
        make_normal_form(BasicNormalForm(kind="R", turns=Fraction(2, 5))),
        make_normal_form(BasicNormalForm(kind="D", lam=2.0)),
    )
    for k in range(1, 31):
        assert bott_nullity(m, k) == direct_power_nullity(m, k)


def test_degree_shift():
    p = rotation_path(Fraction(7, 10))
    base = index_report(p)
    it = index_report(power_path(p, 3))
    assert degree_shift(base, it, admissible=True) == 4
    assert degree_shift(base, base, admissible=True) == 0
    with pytest.raises(ValueError):
        degree_shift(base, it, admissible=False)


def test_nondegenerate_part():
    nd = index_report(rotation_path(Fraction(3, 10)))
    out = nondegenerate_part(nd)
    assert out["reduced_dim"] == 2
    assert out["reduced_mu"] == nd.lower
    tot = index_report(symbolic_path([ShearAtom(1.0)]))
    out = nondegenerate_part(tot)
    assert out["reduced_dim"] == 0
    assert out["reduced_mu"] == tot.lower + 1
    mixed = index_report(
        symbolic_path([ShearAtom(1.0), RotationAtom(Fraction(3, 10))])
    )
    out = nondegenerate_part(mixed)
    assert out["reduced_dim"] == 2
    assert out["reduced_mu"] == mixed.lower + 1


def test_dynamical_convexity():
    convex = index_report(
        SymplecticPath(
            dim=2,
            segments=[
                Segment((RotationAtom(SQRT2 / 2),)),
                Segment((RotationAtom(Fraction(1)),)),
            ],
        )
    )
    assert convex.lower == 3
    out = dynamical_convexity(convex)
    assert out["flag"] and out["strictly_increasing"] and out["linear_bound"]
    flat = index_report(rotation_path(Fraction(3, 10)))
    assert dynamical_convexity(flat)["flag"] is False


def test_profile_mean_envelope():
    p = rotation_path(Fraction(7, 10))
    prof = IterationProfile.from_report(index_report(p))
    assert prof.check_mean_envelope(kcap=1000)
    assert prof.mu_plus(3) == prof.mu_minus(3)
