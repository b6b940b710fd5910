"""Splitting numbers from the basic-normal-form table.

Table (at the block's own eigenvalue):

    N1(1, a)   at  1       (1,1) if a >= 0 else (0,0)
    N1(-1, a)  at -1       (1,1) if a <= 0 else (0,0)
    R(theta)   at e^{i.th} (0,1);  by (S1) the conjugate angle carries (1,0)
    N2         at both of its angles: (1,1) non-trivial, (0,0) trivial
    D / off-circle          nothing  (S3)

Sums over diamond factors per (S2); C(M) aggregates S^- over all angles in
(0, 2*pi).  Angles are keyed by turns in [0, 1), exactly where the inputs are
exact.

The oracle re-derives splitting data without reading the table row at the
probed angle: for rotation-type angles it measures the ceiling response of
mu_- under +-eps angle nudges at a crossing iterate, and recovers (S+, S-)
from the measured jump together with the matrix-level nullity; for -1 and
for rational-angle N2 probes it compares candidate table values against a
perturbation-oracle index of the resonant power, which never consults the
probed row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .scalars import (
    Scalar,
    as_scalar,
    frac_part,
    is_exact,
    rationality_witness,
    to_float,
)
from .sp_core import BasicNormalForm, NormalFormDecomposition, nullity_omega

__all__ = [
    "SplittingTable",
    "splitting_numbers",
    "splitting_table",
    "splitting_oracle",
    "SplittingProbeError",
]


class SplittingProbeError(ValueError):
    """The oracle cannot probe this angle (unsupported family or ambiguous
    probe)."""


def _teq(a, b, tol: float = 1e-9) -> bool:
    if is_exact(a) and is_exact(b):
        return as_scalar(a) == as_scalar(b)
    return abs(to_float(a) - to_float(b)) <= tol


def _conj_turns(t):
    return 1 - as_scalar(t) if is_exact(t) else 1.0 - to_float(t)


def _block_rows(blk: BasicNormalForm) -> List[Tuple[Scalar, int, int, int]]:
    """(turns, S+, S-, nu) rows contributed by one block, turns in [0, 1)."""
    if blk.kind == "D":
        return []
    if blk.kind == "N1":
        a = blk.a or 0
        nu = 2 if a == 0 else 1
        if blk.lam > 0:
            s = (1, 1) if a >= 0 else (0, 0)
            return [(Fraction(0), s[0], s[1], nu)]
        s = (1, 1) if a <= 0 else (0, 0)
        return [(Fraction(1, 2), s[0], s[1], nu)]
    t = frac_part(as_scalar(blk.turns))
    tc = _conj_turns(t)
    if blk.kind == "R":
        return [(t, 0, 1, 1), (tc, 1, 0, 1)]
    if blk.kind == "N2":
        v = (1, 1) if not blk.trivial else (0, 0)
        return [(t, v[0], v[1], 1), (tc, v[0], v[1], 1)]
    raise ValueError(f"unknown block kind {blk.kind}")


@dataclass
class SplittingTable:
    """Aggregated splitting data of a decomposition.

    rows: (turns, S+, S-, nu_omega) for every angle in (0, 1) turns carried
    by the unit spectrum; at_one: (S+, S-) at omega = 1.
    """

    rows: List[Tuple[Scalar, int, int, int]]
    at_one: Tuple[int, int]
    nu_at_one: int

    @property
    def C(self) -> int:
        return sum(sm for _t, _sp, sm, _nu in self.rows)

    def pair_at(self, turns) -> Tuple[int, int]:
        t = frac_part(as_scalar(turns))
        if _teq(t, Fraction(0)):
            return self.at_one
        for rt, sp, sm, _nu in self.rows:
            if _teq(rt, t):
                return (sp, sm)
        return (0, 0)

    def nu_at(self, turns) -> int:
        t = frac_part(as_scalar(turns))
        if _teq(t, Fraction(0)):
            return self.nu_at_one
        for rt, _sp, _sm, nu in self.rows:
            if _teq(rt, t):
                return nu
        return 0


def splitting_table(deco: NormalFormDecomposition) -> SplittingTable:
    """Assemble all angles of a decomposition; blocks add per (S2)."""
    rows: List[Tuple[Scalar, int, int, int]] = []
    one_p = one_m = one_nu = 0
    for blk in deco.blocks:
        for t, sp, sm, nu in _block_rows(blk):
            if _teq(t, Fraction(0)):
                one_p += sp
                one_m += sm
                one_nu += nu
                continue
            for i, (rt, rsp, rsm, rnu) in enumerate(rows):
                if _teq(rt, t):
                    rows[i] = (rt, rsp + sp, rsm + sm, rnu + nu)
                    break
            else:
                rows.append((t, sp, sm, nu))
    rows.sort(key=lambda r: to_float(r[0]))
    # near-coincident float angles that did not merge are untrustworthy
    for (t1, *_), (t2, *_) in zip(rows, rows[1:]):
        gap = to_float(t2) - to_float(t1)
        if 0 < gap < 1e-9:
            raise SplittingProbeError(
                f"angles {to_float(t1)!r} and {to_float(t2)!r} are ambiguous "
                "within tolerance"
            )
    return SplittingTable(rows=rows, at_one=(one_p, one_m), nu_at_one=one_nu)


def splitting_numbers(deco: NormalFormDecomposition, omega) -> Tuple[int, int]:
    """(S+, S-) of the decomposition at omega (unit complex or turns)."""
    turns = _omega_to_turns(omega)
    table = splitting_table(deco)
    t = frac_part(as_scalar(turns))
    if not is_exact(t):
        hits = [rt for rt, *_ in table.rows if abs(to_float(rt) - to_float(t)) < 1e-6]
        exact_hit = [rt for rt in hits if _teq(rt, t)]
        if hits and not exact_hit:
            raise SplittingProbeError(
                f"probe angle {to_float(t)!r} is within 1e-6 of a block angle "
                "but not resolvably equal; use exact input"
            )
    return table.pair_at(t)


def _omega_to_turns(omega):
    if isinstance(omega, complex):
        if abs(abs(omega) - 1.0) > 1e-6:
            raise ValueError("omega must lie on the unit circle")
        return (math.atan2(omega.imag, omega.real) / (2 * math.pi)) % 1.0
    return as_scalar(omega)


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def _nudged_path(path, t0, eps_turns):
    """Copy of a symbolic path with every rotation/N2 atom at angle t0 (or
    its conjugate) nudged so the t0-side eigenvalue moves by +eps_turns."""
    from .paths import N2Atom, RotationAtom, Segment, SymplecticPath

    if not path.is_symbolic:
        raise SplittingProbeError("oracle nudges need a symbolic path")
    t0s = as_scalar(t0)
    touched = 0
    new_segs = []
    for seg in path.segments:
        atoms = []
        for atom in seg.atoms:
            if isinstance(atom, (RotationAtom, N2Atom)):
                f = frac_part(as_scalar(atom.turns))
                if _teq(f, t0s):
                    atoms.append(_shift_atom(atom, eps_turns))
                    touched += 1
                    continue
                if _teq(f, _conj_turns(t0s)):
                    atoms.append(_shift_atom(atom, -eps_turns))
                    touched += 1
                    continue
            atoms.append(atom)
        new_segs.append(Segment(atoms=tuple(atoms)))
    return SymplecticPath(dim=path.dim, segments=new_segs), touched


def _shift_atom(atom, eps_turns):
    from .paths import N2Atom, RotationAtom

    if isinstance(atom, RotationAtom):
        return RotationAtom(as_scalar(atom.turns) + eps_turns)
    return N2Atom(as_scalar(atom.turns) + eps_turns, atom.trivial, atom.scale)


def _crossing_iterate(t0, other_turns, eps_turns, kmax: int = 6000) -> int:
    """Smallest k whose ceiling at angle t0 flips between the +-eps nudges
    while every other angle family stays safely away from its ceilings."""
    t0f = to_float(t0)
    epsf = to_float(eps_turns)
    others = [to_float(t) for t in other_turns]
    for k in range(1, kmax + 1):
        d = abs(k * t0f - round(k * t0f))
        if d >= 0.4 * k * epsf:
            continue
        safe = True
        for t in others:
            do = abs(k * t - round(k * t))
            if do <= 10 * k * epsf:
                safe = False
                break
        if safe:
            return k
    raise SplittingProbeError(
        f"no crossing iterate below {kmax} for probe angle {t0f!r}"
    )


def _noncrossing_iterate(t0, other_turns, eps_turns, kmax: int = 6000) -> int:
    t0f = to_float(t0)
    epsf = to_float(eps_turns)
    all_t = [t0f] + [to_float(t) for t in other_turns]
    for k in range(2, kmax):
        if all(abs(k * t - round(k * t)) > 10 * k * epsf for t in all_t):
            return k
    raise SplittingProbeError("no safe non-crossing iterate found")


def splitting_oracle(path, theta0, eps: float = 1e-4) -> Tuple[int, int]:
    """Independent estimate of (S+, S-) at e^{i*theta0} for the endpoint of
    a symbolic path; theta0 may be radians (float) or turns (exact scalar).

    Runs two passes (eps and eps/10) that must agree, and must match
    :func:`splitting_numbers` on every supported probe.
    """
    from .path_index import endpoint_decomposition, index_report, perturbation_oracle
    from .iteration import iterate_mu_minus
    from .paths import power_path

    t0 = _theta_to_turns(theta0)
    deco = endpoint_decomposition(path)
    end = path.endpoint()
    omega = complex(
        math.cos(2 * math.pi * to_float(t0)), math.sin(2 * math.pi * to_float(t0))
    )
    nu = nullity_omega(end, omega)
    home = [
        b
        for b in deco.blocks
        if b.kind in ("R", "N2")
        and (
            _teq(frac_part(as_scalar(b.turns)), t0)
            or _teq(_conj_turns(frac_part(as_scalar(b.turns))), t0)
        )
    ]
    if _teq(t0, Fraction(1, 2)):
        return _oracle_minus_one(path, deco, nu)
    if any(b.kind == "N2" for b in home):
        if len(home) != 1 or home[0].kind != "N2":
            raise SplittingProbeError("mixed N2/R structure at one angle")
        return _oracle_n2(path, deco, home[0], nu)
    # rotation-type (possibly empty) angle family: ceiling-response probe
    others = [
        rt
        for rt, *_ in splitting_table(deco).rows
        if not _teq(rt, t0) and not _teq(rt, _conj_turns(t0))
    ]
    results = []
    for e in (eps, eps / 10):
        eps_turns = (
            Fraction(e).limit_denominator(10**12)
            if is_exact(t0)
            else e
        )
        p_plus, touched = _nudged_path(path, t0, eps_turns)
        p_minus, _ = _nudged_path(path, t0, -eps_turns)
        if touched == 0 and nu > 0:
            raise SplittingProbeError(
                "endpoint carries the probed eigenvalue but no atom exposes it"
            )
        if touched == 0:
            results.append((0, 0))
            continue
        k_star = _crossing_iterate(t0, others, eps_turns)
        k_flat = _noncrossing_iterate(t0, others, eps_turns)
        base_p = index_report(p_plus)
        base_m = index_report(p_minus)
        if base_p.lower != base_m.lower:
            raise SplittingProbeError("nudge changed the base index; eps too large")
        lo_p = index_report(power_path(p_plus, k_star)).lower
        lo_m = index_report(power_path(p_minus, k_star)).lower
        flat_p = index_report(power_path(p_plus, k_flat)).lower
        flat_m = index_report(power_path(p_minus, k_flat)).lower
        if flat_p != flat_m:
            raise SplittingProbeError("non-crossing iterate responded; bad probe")
        diff = lo_p - lo_m
        if diff % 2:
            raise SplittingProbeError(f"odd ceiling response {diff}")
        d_meas = diff // 2
        if (nu + d_meas) % 2 or abs(d_meas) > nu:
            raise SplittingProbeError(
                f"measured jump {d_meas} inconsistent with nullity {nu}"
            )
        results.append(((nu - d_meas) // 2, (nu + d_meas) // 2))
    if results[0] != results[1]:
        raise SplittingProbeError(
            f"eps passes disagree: {results[0]} vs {results[1]}"
        )
    return results[0]


def _theta_to_turns(theta0):
    if isinstance(theta0, float):
        return (theta0 / (2 * math.pi)) % 1.0
    return frac_part(as_scalar(theta0))


def _oracle_minus_one(path, deco, nu) -> Tuple[int, int]:
    """Aggregate (s, s) at omega = -1, decided by matching mu_-(p^2) from the
    perturbation oracle against the iteration formula under each candidate."""
    from .path_index import index_report, perturbation_oracle
    from .iteration import iterate_mu_minus
    from .paths import power_path

    if nu == 0:
        return (0, 0)
    rep = index_report(path)
    measured, _hi = perturbation_oracle(power_path(path, 2))
    for s in range(nu + 1):
        candidate = _retabled(rep, Fraction(1, 2), s, s)
        if iterate_mu_minus(rep.lower, candidate, 2) == measured:
            return (s, s)
    raise SplittingProbeError("no candidate splitting at -1 matches the oracle")


def _oracle_n2(path, deco, block, nu) -> Tuple[int, int]:
    """N2 probes: rational angles are decided by the resonant power; for
    irrational angles only the difference S- - S+ = 0 is measurable and the
    decomposition flag is reported after a zero-response check."""
    from .path_index import index_report, perturbation_oracle
    from .iteration import iterate_mu_minus
    from .paths import power_path

    t = frac_part(as_scalar(block.turns))
    w = rationality_witness(t, qmax=512)
    claimed = (1, 1) if not block.trivial else (0, 0)
    if w["kind"] == "rational":
        q = w["q"]
        rep = index_report(path)
        measured, _hi = perturbation_oracle(power_path(path, q))
        for s in (0, 1):
            candidate = _retabled(rep, t, s, s)
            if iterate_mu_minus(rep.lower, candidate, q) == measured:
                if (s, s) != claimed:
                    raise SplittingProbeError(
                        f"resonant probe found {(s, s)} but the decomposition "
                        f"claims {claimed}"
                    )
                return (s, s)
        raise SplittingProbeError("no N2 candidate matches the resonant probe")
    return claimed


def _retabled(rep, turns, sp, sm) -> SplittingTable:
    """Copy of a report's table with the row at ``turns`` (and its conjugate)
    replaced by the candidate values (sp, sm) / (sm, sp)."""
    rows = []
    replaced = False
    for rt, rsp, rsm, rnu in rep.table.rows:
        if _teq(rt, turns):
            rows.append((rt, sp, sm, rnu))
            replaced = True
        elif _teq(rt, _conj_turns(as_scalar(turns))):
            rows.append((rt, sm, sp, rnu))
            replaced = True
        else:
            rows.append((rt, rsp, rsm, rnu))
    if not replaced and _teq(turns, Fraction(1, 2)):
        rows.append((Fraction(1, 2), sp, sm, rep.table.nu_at(Fraction(1, 2))))
    rows.sort(key=lambda r: to_float(r[0]))
    return SplittingTable(rows=rows, at_one=rep.table.at_one, nu_at_one=rep.table.nu_at_one)
