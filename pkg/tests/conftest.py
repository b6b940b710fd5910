"""Shared generators for the test suite.

Random paths are diamond-assembled from closed-form atoms with rotation
angles drawn as exact fractions p/q with a prime q around a few hundred, so
ceiling arithmetic in the iteration formulas is exact and never ambiguous
for the iterate ranges the tests use.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from spindex.paths import (
    GenericAtom,
    HyperbolicAtom,
    N2Atom,
    RotationAtom,
    Segment,
    ShearAtom,
    SymplecticPath,
    loop_segment,
)
from spindex.orbits import OrbitSystem, PrimeOrbitSpec
from spindex.scalars import as_scalar

PRIMES = [211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281]


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_fraction_turns(rng, lo=0.03, hi=0.97) -> Fraction:
    """Exact rational turns away from 0, 1/2 and 1."""
    while True:
        q = int(rng.choice(PRIMES))
        p = int(rng.integers(1, q))
        f = Fraction(p, q)
        x = float(f)
        if lo < x < hi and abs(x - 0.5) > 0.02:
            return f


def random_rotation_atom(rng) -> RotationAtom:
    whole = int(rng.integers(-2, 3))
    return RotationAtom(whole + random_fraction_turns(rng))


def random_nondegenerate_atom(rng):
    kind = rng.integers(0, 3)
    if kind == 0:
        return random_rotation_atom(rng)
    if kind == 1:
        return HyperbolicAtom(float(rng.uniform(0.2, 1.5)) * (1 if rng.random() < 0.5 else -1))
    # negative-hyperbolic block via a generic atom
    lam = float(rng.uniform(1.3, 3.0))
    target = np.array([[-lam, 0.0], [0.0, -1.0 / lam]])
    return GenericAtom(GenericAtom.to_matrix_tuple(target))


def random_degenerate_atom(rng):
    kind = rng.integers(0, 2)
    if kind == 0:
        return ShearAtom(float(rng.choice([-1.0, 1.0])) * float(rng.uniform(0.5, 1.5)))
    return RotationAtom(Fraction(int(rng.integers(-1, 2))))  # endpoint Id


def random_symbolic_path(rng, slots=2, degenerate=False, loops=None) -> SymplecticPath:
    atoms = []
    forced = int(rng.integers(0, slots)) if degenerate else -1
    for i in range(slots):
        if i == forced:
            atoms.append(random_degenerate_atom(rng))
        elif rng.random() < 0.7:
            atoms.append(random_rotation_atom(rng))
        else:
            atoms.append(random_nondegenerate_atom(rng))
    segs = [Segment(tuple(atoms))]
    if loops is None:
        loops = int(rng.integers(-1, 2))
    if loops:
        segs.append(loop_segment(2 * slots, loops))
    return SymplecticPath(dim=2 * slots, segments=segs)


def d_minus2_atom() -> GenericAtom:
    return GenericAtom(GenericAtom.to_matrix_tuple(np.array([[-2.0, 0.0], [0.0, -0.5]])))


def mean_preserving_mutant(
    system: OrbitSystem, idx: int, mut_atom, mean_shift_turns=0, loops: int = 1
) -> OrbitSystem:
    """Replace the tail blocks of orbit idx's path by the mutation block,
    folding the removed rotation angles (minus a compensating shift for
    winding-carrying mutation atoms) into the last surviving rotation atom.

    The fold keeps the orbit's mean index equal to the host's, so the host's
    verified event structure and deviation orderings survive the mutation.
    """
    spec = system.orbits[idx]
    seg = spec.path.segments[0]
    rot_atoms = list(seg.atoms)
    dim = spec.path.dim
    keep = (dim - mut_atom.dim) // 2
    assert keep >= 1, "mutation block leaves no rotation to fold into"
    folded = as_scalar(0)
    for a in rot_atoms[keep - 1 :]:
        folded = folded + as_scalar(a.turns)
    folded = folded - as_scalar(mean_shift_turns)
    atoms = tuple(rot_atoms[: keep - 1]) + (RotationAtom(folded), mut_atom)
    path = SymplecticPath(
        dim=dim, segments=[Segment(atoms), loop_segment(dim, loops)]
    )
    orbits = list(system.orbits)
    orbits[idx] = PrimeOrbitSpec(
        label=spec.label, action_2pi=spec.action_2pi, path=path
    )
    return OrbitSystem(n=system.n, orbits=orbits)
