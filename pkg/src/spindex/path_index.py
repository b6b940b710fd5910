"""Rotation quasimorphism, mean index, Conley-Zehnder indices and the
perturbation oracle.

The rotation function rho: Sp(2m) -> S^1 is pinned by Naturality, Product,
Determinant and Normalization; concretely

    rho(M) = (-1)^{m0/2} * prod_{unit lam not in {+-1}} lam^{krein_pos(lam)}

with m0 the total multiplicity of negative real eigenvalues.  The mean index
is the winding of rho along the path divided by pi; rotation atoms contribute
their angle analytically, totally-real blocks contribute nothing, everything
else is resolved by adaptive sampling with the |Delta arg| < pi/2 rule.

The lower Conley-Zehnder index of a path with decomposable endpoint comes
from rearranging the mean-index identity

    mu_minus = mean - S^+(1) + C(M) - sum_theta (theta/pi) S^-(e^{i theta}),

whose right-hand side must snap to an integer (a failed snap signals a wrong
Krein calibration, never a rounding problem).  The perturbation oracle
recomputes mu_-/mu_+ independently by opening every eigenvalue-1 block with
tiny rotations and hyperbolic stretches and summing the closed-form Sp(2)
catalog, and exists to cross-check that choice.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .scalars import (
    Scalar,
    as_scalar,
    frac_part,
    is_exact,
    snap_integer,
    to_float,
)
from .sp_core import (
    AmbiguousSpectrumError,
    BasicNormalForm,
    NormalFormDecomposition,
    SymplecticError,
    decompose_normal_form,
    spectral_data,
)
from .paths import (
    Atom,
    GenericAtom,
    HyperbolicAtom,
    IdentityAtom,
    N2Atom,
    RotationAtom,
    Segment,
    ShearAtom,
    SymplecticPath,
)
from .splitting import SplittingTable, splitting_table

__all__ = [
    "rho",
    "mean_index",
    "maslov_loop_index",
    "IndexReport",
    "index_report",
    "perturbation_oracle",
    "endpoint_decomposition",
    "WindingError",
]


class WindingError(RuntimeError):
    """Adaptive refinement could not certify the winding."""


# ---------------------------------------------------------------------------
# rho
# ---------------------------------------------------------------------------

def _rho_2x2(mat: np.ndarray) -> complex:
    tr = mat[0, 0] + mat[1, 1]
    if tr >= 2.0:
        return 1.0 + 0.0j
    if tr <= -2.0:
        return -1.0 + 0.0j
    delta = math.acos(max(-1.0, min(1.0, tr / 2.0)))
    lam = complex(math.cos(delta), math.sin(delta))
    # eigenvector for e^{i delta}; pick the better-conditioned row
    if abs(mat[0, 1]) >= abs(mat[1, 0]):
        v1, v2 = mat[0, 1], lam - mat[0, 0]
    else:
        v1, v2 = lam - mat[1, 1], mat[1, 0]
    krein = -2.0 * (v1.conjugate() * v2).imag  # h(v, v) for -iJ
    return lam if krein > 0 else lam.conjugate()


def rho(mat: np.ndarray) -> complex:
    """Rotation quasimorphism value of a symplectic matrix."""
    mat = np.asarray(mat, dtype=float)
    if mat.shape[0] == 2:
        return _rho_2x2(mat)
    sd = spectral_data(mat)
    out = complex((-1) ** (sd.m0 // 2))
    for fam in sd.families:
        if not fam.on_circle or abs(fam.value.imag) == 0.0:
            continue
        out *= fam.value ** fam.krein_pos
    return out / abs(out)


# ---------------------------------------------------------------------------
# winding engine
# ---------------------------------------------------------------------------

def _winding_pi_units(fn, budget: int = 1 << 14) -> float:
    """Total continuous argument change of t -> rho(fn(t)) over [0,1], in
    units of pi.

    Refinement rule: an interval is accepted only when its short-arc argument
    is below pi/2 AND one further halving agrees with the short arc (this
    catches aliased full turns without a global Lipschitz bound).  Samples at
    eigenvalue-collision instants are shifted by a harmless epsilon in t.
    """
    evals = [0]

    def value(t: float) -> complex:
        evals[0] += 1
        if evals[0] > budget:
            raise WindingError(
                f"winding refinement budget exhausted after {budget} samples; "
                f"last resolution ~{1.0 / budget:.2e}"
            )
        for shift in (0.0, 1e-9, -1e-9, 1e-7, -1e-7, 1e-5, -1e-5):
            ts = min(1.0, max(0.0, t + shift))
            try:
                return rho(fn(ts))
            except AmbiguousSpectrumError:
                continue
        raise WindingError(f"spectrum not resolvable near t = {t:.9f}")

    total = 0.0
    stack = [(0.0, value(0.0), 1.0, value(1.0))]
    while stack:
        t0, z0, t1, z1 = stack.pop()
        tm = (t0 + t1) / 2
        zm = value(tm)
        d = cmath.phase(z1 / z0)
        d_lo = cmath.phase(zm / z0)
        d_hi = cmath.phase(z1 / zm)
        short = abs(d_lo) < math.pi / 2 and abs(d_hi) < math.pi / 2
        # phase noise scales like sqrt(eps) where the spectrum crosses the
        # parabolic locus, so consistency cannot be demanded below ~1e-8
        consistent = short and abs(d_lo + d_hi - d) < 3e-8
        if (t1 - t0) <= 1.0 / 64 and (consistent or (short and t1 - t0 <= 1e-7)):
            total += d_lo + d_hi
            continue
        if t1 - t0 < 1e-12:
            raise WindingError(f"winding not resolvable near t = {t0:.12f}")
        stack.append((t0, z0, tm, zm))
        stack.append((tm, zm, t1, z1))
    return total / math.pi


def _slot_paths(path: SymplecticPath) -> Optional[List[List[Tuple[Atom, np.ndarray]]]]:
    """For block-aligned symbolic paths: per slot, the list of
    (atom, pre_matrix) pairs across segments.

    Segments whose signatures differ only by split identity blocks are
    promoted onto the coarsest signature (e.g. a Maslov-loop segment written
    in 2x2 atoms aligns with a segment carrying a 4-dim N2 slot)."""
    if not path.is_symbolic:
        return None
    sigs = [seg.signature() for seg in path.segments]
    target = min(sigs, key=len)
    rechunked = []
    for seg in path.segments:
        chunks = _rechunk_atoms(seg.atoms, target)
        if chunks is None:
            return None
        rechunked.append(chunks)
    slots: List[List[Tuple[Atom, np.ndarray]]] = [[] for _ in target]
    pres = [np.eye(d) for d in target]
    for chunks in rechunked:
        for i, atom in enumerate(chunks):
            slots[i].append((atom, pres[i]))
            pres[i] = atom.endpoint() @ pres[i]
    return slots


def _rechunk_atoms(atoms: Sequence[Atom], target: tuple) -> Optional[List[Atom]]:
    """Regroup a segment's atoms onto the target dimension signature; only
    groups made entirely of identity blocks may merge."""
    out: List[Atom] = []
    queue = list(atoms)
    for want in target:
        got = 0
        group: List[Atom] = []
        while got < want:
            if not queue:
                return None
            a = queue.pop(0)
            group.append(a)
            got += a.dim
        if got != want:
            return None
        if len(group) == 1:
            out.append(group[0])
        elif all(_is_identity_atom(a) for a in group):
            out.append(IdentityAtom(size=want))
        else:
            return None
    return out if not queue else None


_REAL_TRIANGULAR = (ShearAtom, HyperbolicAtom)


def _is_identity_atom(atom: Atom) -> bool:
    if isinstance(atom, IdentityAtom):
        return True
    return isinstance(atom, RotationAtom) and to_float(atom.turns) == 0.0


def _integer_loop_turns(atom: Atom):
    """Integer turn count of a whole-loop rotation atom, else None."""
    if isinstance(atom, RotationAtom):
        f = frac_part(as_scalar(atom.turns))
        if f == 0:
            t = as_scalar(atom.turns) - f
            return int(t) if isinstance(t, Fraction) else int(to_float(atom.turns))
    return None


def _endpoint_identity(atom: Atom) -> bool:
    """Endpoint of the atom is the identity (the path may still wind)."""
    if _is_identity_atom(atom):
        return True
    return _integer_loop_turns(atom) is not None or (
        isinstance(atom, ShearAtom) and atom.a == 0
    ) or (isinstance(atom, HyperbolicAtom) and atom.rate == 0)


def _slot_winding(entries: List[Tuple[Atom, np.ndarray]]):
    """Winding of one slot in pi units; exact scalar when analytic."""
    atoms = [a for a, _ in entries]
    if all(isinstance(a, RotationAtom) or _is_identity_atom(a) for a in atoms):
        total = as_scalar(0)
        for a in atoms:
            if isinstance(a, RotationAtom):
                total = total + 2 * as_scalar(a.turns)
        return total
    if all(isinstance(a, _REAL_TRIANGULAR) or _is_identity_atom(a) for a in atoms):
        return Fraction(0)  # upper-triangular real family, rho constant
    if all(isinstance(a, N2Atom) or _is_identity_atom(a) for a in atoms):
        jordan_pre = all(
            np.allclose(pre, np.eye(pre.shape[0])) for a, pre in entries
            if isinstance(a, N2Atom)
        )
        if jordan_pre:
            return Fraction(0)  # rho == 1 along a pure Jordan family
    # power pattern: the same atom repeated against successive endpoint
    # powers is a slot-level iterated path, so MI4 gives count * (first copy)
    moving = [(a, pre) for a, pre in entries if not _is_identity_atom(a)]
    total = None
    if (
        moving
        and all(a == moving[0][0] for a, _ in moving)
        and np.allclose(moving[0][1], np.eye(moving[0][0].dim), atol=1e-9)
    ):
        w0 = _winding_pi_units(lambda t, a=moving[0][0]: a.value(t))
        total = len(moving) * w0
    if total is None:
        total = 0.0
        for atom, pre in entries:
            total += _winding_pi_units(lambda t, a=atom, p=pre: a.value(t) @ p)
    end = np.eye(atoms[0].dim)
    for atom, pre in entries:
        end = atom.endpoint() @ pre
    # MI3 per slot: real-only unit spectrum forces an integer winding
    try:
        sd = spectral_data(end)
        real_unit = all(abs(f.value.imag) == 0.0 for f in sd.families if f.on_circle)
    except AmbiguousSpectrumError:
        real_unit = False
    if real_unit and abs(total - round(total)) <= 1e-6 * max(1, len(moving)):
        return Fraction(round(total))
    return total


def mean_index(path: SymplecticPath) -> Scalar:
    """Mean index: winding of rho along the path divided by pi.

    Exact for paths whose slots are rotations or totally-real families;
    adaptive numeric otherwise, with an integer snap when the endpoint
    spectrum meets the circle only in {+-1} (where the mean index is an
    integer)."""
    slots = _slot_paths(path)
    if slots is not None:
        exact_acc = as_scalar(0)
        float_acc = 0.0
        numeric = False
        for entries in slots:
            w = _slot_winding(entries)
            if is_exact(w):
                exact_acc = exact_acc + w
            else:
                numeric = True
                float_acc += w
        if not numeric:
            return exact_acc
        value = to_float(exact_acc) + float_acc
    elif path.is_symbolic:
        value = 0.0
        pre = np.eye(path.dim)
        for seg in path.segments:
            value += _winding_pi_units(lambda t, s=seg, p=pre: s.value(t) @ p)
            pre = seg.endpoint() @ pre
    else:
        value = _winding_pi_units(path.value)
    # MI3: integer mean index when the unit spectrum is real
    try:
        sd = spectral_data(path.endpoint())
    except AmbiguousSpectrumError:
        return value
    real_unit = all(abs(f.value.imag) == 0.0 for f in sd.families if f.on_circle)
    if real_unit and abs(value - round(value)) <= 1e-6:
        return Fraction(round(value))
    return value


def maslov_loop_index(path: SymplecticPath) -> int:
    """Maslov index of a loop: half the rho-winding, an integer."""
    gap = np.linalg.norm(path.endpoint() - np.eye(path.dim))
    if gap > 1e-8:
        raise ValueError(f"not a loop: endpoint differs from start by {gap:.3g}")
    w = mean_index(path)
    return snap_integer(
        as_scalar(w) / 2 if is_exact(w) else w / 2.0, tol=1e-6, what="loop winding / 2"
    )


# ---------------------------------------------------------------------------
# endpoint block models
# ---------------------------------------------------------------------------

def _compose_slot_block(entries: List[Tuple[Atom, np.ndarray]]) -> List[BasicNormalForm]:
    """Normal-form classes of one slot's endpoint product, exact when the
    slot is homogeneous in kind."""
    atoms = [a for a, _ in entries]
    slot_dim = atoms[0].dim
    if all(isinstance(a, RotationAtom) or _is_identity_atom(a) for a in atoms):
        if slot_dim == 4:
            return [IdentityAtom(4).endpoint_block()] * 2
        total = as_scalar(0)
        for a in atoms:
            if isinstance(a, RotationAtom):
                total = total + as_scalar(a.turns)
        return [RotationAtom(total).endpoint_block()]
    if all(isinstance(a, ShearAtom) or _is_identity_atom(a) for a in atoms):
        s = sum(a.a for a in atoms if isinstance(a, ShearAtom))
        return [ShearAtom(s).endpoint_block()]
    if all(isinstance(a, HyperbolicAtom) or _is_identity_atom(a) for a in atoms):
        r = sum(a.rate for a in atoms if isinstance(a, HyperbolicAtom))
        return [HyperbolicAtom(r).endpoint_block()]
    n2s = [a for a in atoms if isinstance(a, N2Atom)]
    if len(n2s) == 1 and all(
        isinstance(a, N2Atom) or _is_identity_atom(a) for a in atoms
    ):
        return [n2s[0].endpoint_block()]
    # mixed slot: decompose the slot product numerically
    prod = np.eye(slot_dim)
    for a, _pre in entries:
        prod = a.endpoint() @ prod
    hints = {}
    for a in atoms:
        if isinstance(a, (RotationAtom, N2Atom)) and is_exact(as_scalar(a.turns)):
            f = frac_part(as_scalar(a.turns))
            hints[to_float(f)] = f
            hints[to_float(1 - f)] = 1 - f
    deco = decompose_normal_form(prod, exact_turns=hints)
    return list(deco.blocks) + _rest_blocks(deco)


def _rest_blocks(deco: NormalFormDecomposition) -> List[BasicNormalForm]:
    """Represent off-circle spectrum as D-blocks; only m0 (negative real
    multiplicity) and dimensions matter downstream, and a complex quadruple
    re^{i a} maps to two positive D-pairs of modulus r."""
    out: List[BasicNormalForm] = []
    vals = list(deco.rest_eigenvalues)
    while vals:
        lam = vals.pop(0)
        if abs(lam.imag) == 0.0:
            inv = 1.0 / lam.real
            k = min(range(len(vals)), key=lambda i: abs(vals[i] - inv))
            vals.pop(k)
            out.append(BasicNormalForm(kind="D", lam=float(lam.real)))
        else:
            for p in (lam.conjugate(), 1.0 / lam, (1.0 / lam).conjugate()):
                k = min(range(len(vals)), key=lambda i: abs(vals[i] - p))
                vals.pop(k)
            out.append(BasicNormalForm(kind="D", lam=float(abs(lam))))
            out.append(BasicNormalForm(kind="D", lam=float(abs(lam))))
    return out


def endpoint_decomposition(path: SymplecticPath) -> NormalFormDecomposition:
    """Normal-form decomposition of the endpoint, symbolic when possible."""
    slots = _slot_paths(path)
    if slots is not None:
        blocks: List[BasicNormalForm] = []
        for entries in slots:
            blocks.extend(_compose_slot_block(entries))
        unit_blocks = [b for b in blocks if b.kind in ("R", "N1", "N2")]
        rest = []
        for b in blocks:
            if b.kind == "D":
                rest.extend([complex(b.lam), complex(1.0 / b.lam)])
        return NormalFormDecomposition(
            dim=path.dim, blocks=unit_blocks, rest_eigenvalues=rest
        )
    return decompose_normal_form(path.endpoint())


# ---------------------------------------------------------------------------
# index report
# ---------------------------------------------------------------------------

@dataclass
class IndexReport:
    """Complete Maslov-type index data of one path."""

    dim: int
    mean: Scalar
    lower: int
    upper: int
    nullity: int
    splitting_at_one: Tuple[int, int]
    circle_data: list  # rows (turns, s_plus, s_minus, nu_omega), turns in (0,1)
    C: int
    dyn_convex: bool
    decomposition: NormalFormDecomposition = field(repr=False, default=None)
    table: SplittingTable = field(repr=False, default=None)

    @property
    def m(self) -> int:
        return self.dim // 2


def index_report(path: SymplecticPath) -> IndexReport:
    """Mean index, lower/upper Conley-Zehnder indices, nullity and splitting
    data of a path, via the mean-index identity rearrangement."""
    mean = mean_index(path)
    deco = endpoint_decomposition(path)
    return report_from_parts(path.dim, mean, deco)


def report_from_parts(
    dim: int, mean: Scalar, deco: NormalFormDecomposition
) -> IndexReport:
    table = splitting_table(deco)
    m = dim // 2
    s1p, s1m = table.at_one
    # mu_- = mean - S^+(1) + C - sum (theta/pi) S^-  with theta/pi = 2 turns
    exact_acc = as_scalar(mean) if is_exact(mean) else as_scalar(0)
    float_acc = 0.0 if is_exact(mean) else float(mean)
    exact_acc = exact_acc - s1p + table.C
    for turns, _sp, sm, _nu in table.rows:
        if sm:
            if is_exact(turns):
                exact_acc = exact_acc - 2 * as_scalar(turns) * sm
            else:
                float_acc -= 2.0 * turns * sm
    acc = exact_acc if float_acc == 0.0 else to_float(exact_acc) + float_acc
    lower = snap_integer(acc, tol=1e-6, what="mu_minus via mean-index identity")
    nullity = deco.nullity_at(0)
    upper = lower + nullity
    mean_f = to_float(mean)
    if not (mean_f - m <= lower + 1e-9 and upper <= mean_f + m + 1e-9):
        raise SymplecticError(
            f"index bounds violated: mean {mean_f}, mu- {lower}, mu+ {upper}, m {m}"
        )
    if nullity == 0:
        par = 1
        for blk in deco.blocks:
            par *= _det_one_minus_sign(blk)
        # each positive real pair (lam, 1/lam) contributes a sign flip
        pos_gt_one = sum(
            1
            for lam in deco.rest_eigenvalues
            if abs(lam.imag) == 0 and lam.real > 1
        )
        par *= (-1) ** pos_gt_one
        if (-1) ** ((lower - m) % 2) != par:
            raise SymplecticError(
                "parity check failed: wrong Krein calibration or decomposition"
            )
    return IndexReport(
        dim=dim,
        mean=mean,
        lower=lower,
        upper=upper,
        nullity=nullity,
        splitting_at_one=(s1p, s1m),
        circle_data=list(table.rows),
        C=table.C,
        dyn_convex=lower >= m + 2,
        decomposition=deco,
        table=table,
    )


def _det_one_minus_sign(blk: BasicNormalForm) -> int:
    """Sign of det(Id - B) for a basic block with no eigenvalue 1."""
    if blk.kind == "R":
        return 1  # 2 - 2cos(theta) > 0
    if blk.kind == "N1":
        if blk.lam > 0:
            raise SymplecticError("eigenvalue-1 block in a non-degenerate parity check")
        return 1  # det [[2, -a], [0, 2]] = 4
    if blk.kind == "N2":
        return 1  # det(Id - R)^2
    if blk.kind == "D":
        # (1 - lam)(1 - 1/lam): negative for lam > 0, positive for lam < 0
        return 1 if blk.lam < 0 else -1
    raise SymplecticError(f"unknown block kind {blk.kind}")


# ---------------------------------------------------------------------------
# perturbation oracle
# ---------------------------------------------------------------------------

def _opened_contribution(block2: np.ndarray) -> int:
    """Catalog value of a tiny opening of an eigenvalue-1 block: +1 for an
    elliptic opening with Krein angle in (0, pi), -1 for the conjugate side,
    0 for hyperbolic."""
    tr = block2[0, 0] + block2[1, 1]
    if abs(tr) >= 2.0:
        return 0
    r = _rho_2x2(block2)
    return 1 if r.imag > 0 else -1


def _n1_matrix(a: int) -> np.ndarray:
    return np.array([[1.0, float(a)], [0.0, 1.0]])


def perturbation_oracle(path: SymplecticPath, eps: float = 1e-4) -> Tuple[int, int]:
    """Independent (mu_-, mu_+): open every eigenvalue-1 block of the
    endpoint with +-eps rotations and a hyperbolic stretch, in all
    combinations, and score each non-degenerate opening by the closed-form
    Sp(2) catalog plus diamond additivity; return (min, max)."""
    mean = mean_index(path)
    deco = endpoint_decomposition(path)
    exact_acc = as_scalar(mean) if is_exact(mean) else as_scalar(0)
    float_acc = 0.0 if is_exact(mean) else float(mean)
    # contribution of blocks without eigenvalue 1; N1(-1, a), N2 and D
    # contribute 0 in the non-degenerate catalog
    for blk in deco.blocks:
        if blk.kind == "R":
            if is_exact(blk.turns):
                exact_acc = exact_acc + 1 - 2 * as_scalar(blk.turns)
            else:
                float_acc += 1.0 - 2.0 * to_float(blk.turns)
    base = exact_acc if float_acc == 0.0 else to_float(exact_acc) + float_acc
    one_blocks = [b for b in deco.blocks if b.kind == "N1" and b.lam > 0]
    if not one_blocks:
        mu = snap_integer(base, tol=1e-6, what="catalog index")
        return mu, mu

    def rot_eps(e: float) -> np.ndarray:
        return np.array([[math.cos(e), -math.sin(e)], [math.sin(e), math.cos(e)]])

    stretch = np.array([[math.exp(eps), 0.0], [0.0, math.exp(-eps)]])
    options_per_block = []
    for blk in one_blocks:
        b2 = _n1_matrix(blk.a or 0)
        opts = set()
        for nudge in (rot_eps(eps), rot_eps(-eps), stretch, np.linalg.inv(stretch)):
            opened = b2 @ nudge
            if abs(opened[0, 0] + opened[1, 1] - 2.0) < 1e-12:
                continue  # still parabolic; not an opening
            opts.add(_opened_contribution(opened))
        if not opts:
            raise SymplecticError("perturbation family failed to open a block")
        options_per_block.append(sorted(opts))
    lo = snap_integer(
        base + sum(min(o) for o in options_per_block), tol=1e-6, what="oracle minimum"
    )
    hi = snap_integer(
        base + sum(max(o) for o in options_per_block), tol=1e-6, what="oracle maximum"
    )
    return lo, hi
