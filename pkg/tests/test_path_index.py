import math
from fractions import Fraction

import numpy as np
import pytest

from spindex.scalars import QuadraticIrrational, is_exact, to_float
from spindex.sp_core import BasicNormalForm, make_normal_form, random_symplectic, diamond
from spindex.paths import (
    GenericAtom,
    HyperbolicAtom,
    N2Atom,
    RotationAtom,
    Segment,
    ShearAtom,
    SymplecticPath,
    append_loop,
    loop_segment,
    power_path,
    rotation_path,
    sampled_path,
    symbolic_path,
)
from spindex.path_index import (
    index_report,
    maslov_loop_index,
    mean_index,
    perturbation_oracle,
    rho,
)

from conftest import random_symbolic_path

SQRT2 = QuadraticIrrational(0, 1, 2)


# ---------------------------------------------------------------------------
# rho
# ---------------------------------------------------------------------------

def test_rho_normalization_examples():
    assert rho(make_normal_form(BasicNormalForm(kind="D", lam=2.0))) == pytest.approx(1)
    assert rho(make_normal_form(BasicNormalForm(kind="D", lam=-2.0))) == pytest.approx(-1)


def test_rho_rotation_calibration():
    for th in (0.3, 1.5, 2.9, 3.5, 5.1):
        m = make_normal_form(BasicNormalForm(kind="R", turns=th / (2 * math.pi)))
        assert rho(m) == pytest.approx(complex(math.cos(th), math.sin(th)), abs=1e-9)


def test_rho_product_and_naturality(rng):
    a = make_normal_form(BasicNormalForm(kind="R", turns=0.31))
    b = make_normal_form(BasicNormalForm(kind="R", turns=0.12))
    assert rho(diamond(a, b)) == pytest.approx(rho(a) * rho(b), abs=1e-8)
    q = random_symplectic(4, rng, scale=0.4)
    m = diamond(a, b)
    assert rho(q @ m @ np.linalg.inv(q)) == pytest.approx(rho(m), abs=1e-7)


# ---------------------------------------------------------------------------
# mean index and loops
# ---------------------------------------------------------------------------

def test_mean_index_examples():
    # generator loop: exp(2 pi i t) diamond Id has mean index 2
    loop = symbolic_path([RotationAtom(Fraction(1)), RotationAtom(Fraction(0))])
    assert mean_index(loop) == 2
    const = symbolic_path([RotationAtom(Fraction(0))])
    assert mean_index(const) == 0
    p = rotation_path(Fraction(3, 2))  # R(3 pi t)
    assert mean_index(p) == Fraction(3, 2) * 2


def test_mean_index_exact_quadratic():
    p = rotation_path(SQRT2)
    mu = mean_index(p)
    assert is_exact(mu)
    assert to_float(mu) == pytest.approx(2 * math.sqrt(2))


def test_mean_index_sampled_winding():
    ts = np.linspace(0, 1, 33)
    samples = [
        (t, np.array([[math.cos(2 * math.pi * t), -math.sin(2 * math.pi * t)],
                      [math.sin(2 * math.pi * t), math.cos(2 * math.pi * t)]]))
        for t in ts
    ]
    p = sampled_path(samples)
    assert mean_index(p) == pytest.approx(2.0, abs=1e-8)
    assert maslov_loop_index(p) == 1


def test_spectrum_constant_homotopy(rng):
    # MI5: conjugated families share the mean index
    base = lambda t: np.array(
        [[math.cos(2 * math.pi * 0.7 * t), -math.sin(2 * math.pi * 0.7 * t)],
         [math.sin(2 * math.pi * 0.7 * t), math.cos(2 * math.pi * 0.7 * t)]]
    )
    values = []
    for _ in range(4):
        q = random_symplectic(2, rng, scale=0.6)
        qi = np.linalg.inv(q)
        pts = [(t, q @ base(t) @ qi) for t in np.linspace(0, 1, 65)]
        # conjugated path no longer starts at Id; precompose to fix the base
        m0inv = np.linalg.inv(pts[0][1])
        pts = [(t, m @ m0inv) for t, m in pts]
        values.append(mean_index(sampled_path(pts)))
    assert max(values) - min(values) < 1e-8


def test_maslov_loop_examples():
    assert maslov_loop_index(rotation_path(Fraction(1))) == 1
    const = symbolic_path([RotationAtom(Fraction(0))])
    assert maslov_loop_index(const) == 0
    two = symbolic_path([RotationAtom(Fraction(-2)), RotationAtom(Fraction(1))])
    assert maslov_loop_index(two) == -1
    with pytest.raises(ValueError):
        maslov_loop_index(rotation_path(Fraction(1, 3)))


# ---------------------------------------------------------------------------
# power path
# ---------------------------------------------------------------------------

def test_power_path_endpoint(rng):
    p = random_symbolic_path(rng, slots=2)
    end = p.endpoint()
    p5 = power_path(p, 5)
    assert np.allclose(p5.endpoint(), np.linalg.matrix_power(end, 5), atol=1e-8)
    assert power_path(p, 1) is p


def test_power_path_homogeneity():
    p = rotation_path(Fraction(7, 10))
    for k in (2, 3, 20):
        assert mean_index(power_path(p, k)) == k * Fraction(7, 5)


# ---------------------------------------------------------------------------
# index reports
# ---------------------------------------------------------------------------

def test_rotation_index_formula():
    for lam in (1.5, -0.25, 2.25, -3.7, 0.4):
        rep = index_report(rotation_path(Fraction(lam).limit_denominator(10**6)))
        want = int(math.copysign(1, lam)) * (2 * math.floor(abs(lam)) + 1)
        assert rep.lower == rep.upper == want


def test_shear_report_and_oracle():
    p = symbolic_path([ShearAtom(1.0)])
    rep = index_report(p)
    assert (rep.mean, rep.lower, rep.nullity, rep.upper) == (0, -1, 1, 0)
    assert perturbation_oracle(p) == (-1, 0)
    m = symbolic_path([ShearAtom(-1.0)])
    repm = index_report(m)
    assert (repm.lower, repm.upper) == (0, 1)
    assert perturbation_oracle(m) == (0, 1)


def test_identity_and_loop_oracle():
    const = symbolic_path([RotationAtom(Fraction(0))])
    assert perturbation_oracle(const) == (-1, 1)
    loop = rotation_path(Fraction(1))
    assert perturbation_oracle(loop) == (1, 3)
    rep = index_report(loop)
    assert (rep.lower, rep.upper) == (1, 3)


def test_loop_shift_property(rng):
    for _ in range(20):
        p = random_symbolic_path(rng, slots=2, loops=0)
        rep = index_report(p)
        for ell in (-2, 1, 3):
            shifted = index_report(append_loop(p, ell))
            assert shifted.lower == rep.lower + 2 * ell
            assert shifted.upper == rep.upper + 2 * ell
            assert to_float(shifted.mean) == pytest.approx(
                to_float(rep.mean) + 2 * ell, abs=1e-9
            )


def test_additivity(rng):
    for _ in range(30):
        p = random_symbolic_path(rng, slots=1, loops=0)
        q = random_symbolic_path(rng, slots=1, loops=0)
        combined = SymplecticPath(
            dim=4,
            segments=[Segment(tuple(p.segments[0].atoms + q.segments[0].atoms))],
        )
        rp, rq, rc = index_report(p), index_report(q), index_report(combined)
        assert rc.lower == rp.lower + rq.lower
        assert rc.upper == rp.upper + rq.upper
        assert to_float(rc.mean) == pytest.approx(
            to_float(rp.mean) + to_float(rq.mean), abs=1e-9
        )


def test_parity(rng):
    # (-1)^(mu - m) = sign det(Id - end) for non-degenerate paths
    for _ in range(50):
        p = random_symbolic_path(rng, slots=2, loops=0)
        rep = index_report(p)
        if rep.nullity:
            continue
        det = np.linalg.det(np.eye(p.dim) - p.endpoint())
        assert (-1) ** ((rep.lower - rep.m) % 2) == int(math.copysign(1, det))


def test_bounds_vs_mean(rng):
    for _ in range(50):
        p = random_symbolic_path(rng, slots=3)
        rep = index_report(p)
        mu = to_float(rep.mean)
        assert mu - rep.m <= rep.lower + 1e-9
        assert rep.upper <= mu + rep.m + 1e-9
        assert rep.upper - rep.lower == rep.nullity


def test_oracle_agreement_degenerate(rng):
    for _ in range(40):
        p = random_symbolic_path(rng, slots=2, degenerate=True)
        rep = index_report(p)
        assert perturbation_oracle(p) == (rep.lower, rep.upper)


def test_mixed_slot_numeric_path():
    # rotation followed by shear in the same slot forces the numeric route
    p = SymplecticPath(
        dim=2,
        segments=[Segment((RotationAtom(0.3),)), Segment((ShearAtom(1.0),))],
    )
    rep = index_report(p)
    end = p.endpoint()
    assert np.allclose(end, np.array([[1.0, 1.0], [0.0, 1.0]]) @ p.segments[0].value(1.0))
    assert rep.upper - rep.lower == rep.nullity


def test_generic_atom_negative_hyperbolic():
    target = np.array([[-2.0, 0.0], [0.0, -0.5]])
    p = symbolic_path([GenericAtom(GenericAtom.to_matrix_tuple(target))])
    mu = mean_index(p)
    assert is_exact(mu) and mu in (Fraction(-1), Fraction(1))
    rep = index_report(p)
    assert rep.nullity == 0
    assert abs(rep.lower) == 1


def test_n2_atom_path():
    p = symbolic_path([N2Atom(0.23, trivial=False)])
    rep = index_report(p)
    assert rep.mean == 0
    assert rep.nullity == 0
    assert rep.lower == rep.upper
    rows = {round(to_float(t), 6): (sp, sm) for t, sp, sm, _ in rep.circle_data}
    assert rows[0.23] == (1, 1) and rows[0.77] == (1, 1)
