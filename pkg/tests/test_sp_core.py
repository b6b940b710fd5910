import math
from fractions import Fraction

import numpy as np
import pytest

from spindex.scalars import QuadraticIrrational
from spindex.sp_core import (
    AmbiguousSpectrumError,
    BasicNormalForm,
    SymplecticError,
    UnsupportedDegeneracyError,
    classify_iteration,
    decompose_normal_form,
    diamond,
    diamond_many,
    is_symplectic,
    make_normal_form,
    nullity_omega,
    random_symplectic,
    spectral_data,
    standard_j,
)

SQRT2 = QuadraticIrrational(0, 1, 2)


def rot(theta):
    return make_normal_form(BasicNormalForm(kind="R", turns=theta / (2 * math.pi)))


def test_diamond_identity():
    assert np.allclose(diamond(np.eye(2), np.eye(2)), np.eye(4))


def test_diamond_block_layout():
    # the displayed 4-block interleaving: A blocks on the diagonal of the
    # upper-left quadrant, B blocks in the upper-right, etc.
    a = rot(0.4)
    b = rot(1.1)
    m = diamond(a, b)
    want = np.array(
        [
            [a[0, 0], 0, a[0, 1], 0],
            [0, b[0, 0], 0, b[0, 1]],
            [a[1, 0], 0, a[1, 1], 0],
            [0, b[1, 0], 0, b[1, 1]],
        ]
    )
    assert np.allclose(m, want)
    assert is_symplectic(m)


def test_diamond_associative_and_spectrum(rng):
    for _ in range(100):
        a = random_symplectic(2, rng)
        b = random_symplectic(4, rng)
        c = random_symplectic(2, rng)
        left = diamond(diamond(a, b), c)
        right = diamond(a, diamond(b, c))
        assert np.allclose(left, right)
        ev_sum = sorted(
            np.concatenate([np.linalg.eigvals(a), np.linalg.eigvals(b)]),
            key=lambda z: (z.real, z.imag),
        )
        ev_dia = sorted(np.linalg.eigvals(diamond(a, b)), key=lambda z: (z.real, z.imag))
        assert np.allclose(ev_sum, ev_dia, atol=1e-7)


def test_nullity_additivity_over_diamond(rng):
    a = rot(0.7)
    b = make_normal_form(BasicNormalForm(kind="N1", lam=1, a=1))
    m = diamond(a, b)
    for ang in np.linspace(0.1, 6.2, 13):
        om = complex(math.cos(ang), math.sin(ang))
        assert nullity_omega(m, om) == nullity_omega(a, om) + nullity_omega(b, om)


def test_spectral_data_rotation_krein():
    sd = spectral_data(rot(0.7))
    fams = {round(f.value.imag, 6): f for f in sd.families}
    up = [f for f in sd.families if f.value.imag > 0][0]
    assert up.krein_pos == 1 and up.krein_neg == 0
    down = [f for f in sd.families if f.value.imag < 0][0]
    assert down.krein_pos == 0 and down.krein_neg == 1
    assert sd.m0 == 0


def test_spectral_data_examples():
    d = spectral_data(make_normal_form(BasicNormalForm(kind="D", lam=-2.0)))
    assert d.m0 == 2
    assert not any(f.on_circle for f in d.families)
    n11 = make_normal_form(BasicNormalForm(kind="N1", lam=1, a=1))
    assert nullity_omega(n11, 1.0 + 0j) == 1
    sd = spectral_data(n11)
    assert sd.families[0].multiplicity == 2


def test_nullity_examples():
    assert nullity_omega(np.eye(2), 1.0 + 0j) == 2
    th = 0.9
    assert nullity_omega(rot(th), complex(math.cos(th), math.sin(th))) == 1
    assert nullity_omega(make_normal_form(BasicNormalForm(kind="D", lam=2.0)), 1.0 + 0j) == 0


def test_make_normal_form_literals():
    assert np.allclose(
        make_normal_form(BasicNormalForm(kind="D", lam=2.0)), np.diag([2.0, 0.5])
    )
    assert np.allclose(
        make_normal_form(BasicNormalForm(kind="N1", lam=1, a=1)),
        np.array([[1.0, 1.0], [0.0, 1.0]]),
    )
    assert np.allclose(
        make_normal_form(BasicNormalForm(kind="R", turns=Fraction(1, 4))),
        np.array([[0.0, -1.0], [1.0, 0.0]]),
    )


def test_n2_validation():
    good = make_normal_form(BasicNormalForm(kind="N2", turns=0.23, trivial=True))
    assert is_symplectic(good)
    with pytest.raises(ValueError):
        make_normal_form(
            BasicNormalForm(kind="N2", turns=0.23, b=((1.0, 2.0), (0.5, 1.0)))
        )
    with pytest.raises(ValueError):
        make_normal_form(BasicNormalForm(kind="N2", turns=0.5, trivial=True))


@pytest.mark.parametrize("turns", [0.23, 0.77, 0.41])
@pytest.mark.parametrize("trivial", [True, False])
def test_n2_flag_roundtrip(turns, trivial, rng):
    m = make_normal_form(BasicNormalForm(kind="N2", turns=turns, trivial=trivial))
    for _ in range(3):
        q = random_symplectic(4, rng, scale=0.4)
        deco = decompose_normal_form(q @ m @ np.linalg.inv(q))
        assert len(deco.blocks) == 1
        blk = deco.blocks[0]
        assert blk.kind == "N2"
        assert blk.trivial == trivial
        assert float(blk.turns) == pytest.approx(min(turns, 1 - turns), abs=1e-7)


def test_decompose_conjugated_rotations(rng):
    m = diamond(rot(0.9), rot(2 * math.pi * 0.77))
    for _ in range(5):
        q = random_symplectic(4, rng, scale=0.5)
        deco = decompose_normal_form(q @ m @ np.linalg.inv(q))
        kinds = sorted(float(b.turns) for b in deco.blocks)
        assert all(b.kind == "R" for b in deco.blocks)
        assert kinds == pytest.approx([0.9 / (2 * math.pi), 0.77], abs=1e-7)
        assert deco.rest_dim == 0


def test_decompose_n1_signs(rng):
    for lam in (1, -1):
        for a in (-1, 0, 1):
            m = make_normal_form(BasicNormalForm(kind="N1", lam=lam, a=a))
            q = random_symplectic(2, rng, scale=0.3)
            deco = decompose_normal_form(q @ m @ np.linalg.inv(q))
            assert len(deco.blocks) == 1
            blk = deco.blocks[0]
            assert blk.kind == "N1" and blk.lam == lam and blk.a == a


def test_decompose_hyperbolic_rest():
    m = diamond(
        make_normal_form(BasicNormalForm(kind="D", lam=2.0)),
        make_normal_form(BasicNormalForm(kind="D", lam=-2.0)),
    )
    deco = decompose_normal_form(m)
    assert deco.blocks == []
    assert deco.rest_dim == 4
    assert deco.rest_m0 == 2
    rest = deco.hyperbolic_rest()
    assert is_symplectic(rest)
    assert sorted(np.linalg.eigvals(rest).real) == pytest.approx([-2, -0.5, 0.5, 2])


def test_decompose_mixed_reassembly():
    blocks = [
        BasicNormalForm(kind="R", turns=Fraction(7, 25)),
        BasicNormalForm(kind="N1", lam=1, a=-1),
        BasicNormalForm(kind="D", lam=1.7),
    ]
    m = diamond_many([make_normal_form(b) for b in blocks])
    deco = decompose_normal_form(m)
    kinds = sorted(b.kind for b in deco.blocks)
    assert kinds == ["N1", "R"]
    rblk = next(b for b in deco.blocks if b.kind == "R")
    nblk = next(b for b in deco.blocks if b.kind == "N1")
    assert float(rblk.turns) == pytest.approx(7 / 25, abs=1e-9)
    assert (nblk.lam, nblk.a) == (1, -1)
    assert deco.rest_dim == 2


def test_unsupported_jordan_three():
    u = np.array([[1.0, 1.0, 0.5], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
    m = np.zeros((6, 6))
    m[:3, :3] = u
    m[3:, 3:] = np.linalg.inv(u).T
    # (x, y) block layout [[U, 0], [0, U^{-T}]] is symplectic
    assert is_symplectic(m)
    with pytest.raises(UnsupportedDegeneracyError):
        decompose_normal_form(m)


def test_classify_iteration_examples():
    r3 = rot(2 * math.pi / 3)
    assert classify_iteration(r3, 3)["admissible"] is False
    assert classify_iteration(r3, 2)["admissible"] is True
    irr = rot(2 * math.pi * math.sqrt(2) / 2)
    for k in (1, 10, 997, 10**6):
        assert classify_iteration(irr, k)["admissible"] is True
    neg = diamond(
        make_normal_form(BasicNormalForm(kind="D", lam=-2.0)), rot(0.9)
    )
    rec = classify_iteration(neg, 2)
    assert rec["neg_interval_count"] == 1
    assert rec["good_if_iterate"] is False
    assert classify_iteration(neg, 3)["good_if_iterate"] is True


def test_classify_iteration_k1_always_admissible(rng):
    for _ in range(20):
        m = random_symplectic(4, rng)
        assert classify_iteration(m, 1)["admissible"] is True


def test_spectrum_closure_random_atoms(rng):
    # eigenvalue multiset closed under conjugation and inversion
    for _ in range(200):
        mats = [
            make_normal_form(BasicNormalForm(kind="R", turns=float(rng.uniform(0.05, 0.45)))),
            make_normal_form(BasicNormalForm(kind="D", lam=float(rng.uniform(1.2, 3.0)))),
        ]
        q = random_symplectic(4, rng, scale=0.4)
        m = q @ diamond_many(mats) @ np.linalg.inv(q)
        ev = np.linalg.eigvals(m)
        for lam in ev:
            assert min(abs(ev - np.conj(lam))) < 1e-7
            assert min(abs(ev - 1.0 / lam)) < 1e-7


def test_ambiguous_clusters_error():
    # gap in the gray zone just above the clustering tolerance
    m = diamond(rot(0.5), rot(0.5 + 5e-6))
    with pytest.raises(AmbiguousSpectrumError):
        spectral_data(m)
