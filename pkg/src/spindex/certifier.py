"""Irrational-ellipticity certification.

For a dynamically convex system with exactly n prime orbits, the pipeline
certifies the orbits that occupy extremal mean-index positions at verified
common index jump events:

  Step 1  concentration bookkeeping: at the orbit's top event (where its
          mean index strictly dominates) and bottom event, the degree of a
          non-degenerate iterate is its Conley-Zehnder index and equals
          mu_+; the slot values d + n - 1 / d - n + 1 predicted by the
          degree model are recorded as evidence.  Hypothesis failures
          (eta >= 1/2, missing events) leave the orbit inconclusive.
  Step 2  mu_-(y^{k_b}) = mu_+(y^{k_b}), hence nu = 0, and strong
          non-degeneracy by two routes that must agree: the divisibility
          argument through N and a direct root-of-unity scan of every
          Floquet angle.  Failure refutes irrational ellipticity outright
          (an elliptic orbit with irrational angles has no degenerate
          iterate).
  Step 3  the rotation-count identity at the bottom iterate k:

            sum_{theta in (0,pi), theta/pi irrational}
                (2 ceil((k+1)theta/2pi) - 2 ceil(k theta/2pi) - 1)
                (S^-(e^{i theta}) - S^+(e^{i theta}))  ==  n - 1.

          Every term is at most 1 and only rotation blocks reach it, so a
          pass squeezes the endpoint into n - 1 elliptic directions;
          hyperbolic or N2 blocks leave a deficit.
  Step 4  the endpoint must be symplectically conjugate to a diamond of
          rotations: Krein-resolved angles, the no-{theta, 2pi - theta}
          screening, unit ceiling increments at k, and per-angle
          irrationality witnesses.

Every step stores its evidence in the certificate; a failed step marks the
orbit rejected with the failing clause.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .scalars import (
    QMAX_DEFAULT,
    as_scalar,
    frac_part,
    guarded_ceil,
    is_exact,
    rationality_witness,
    to_float,
)
from .sp_core import NormalFormDecomposition, decompose_normal_form
from .splitting import splitting_table
from .cijt import (
    DEFAULT_DMAX,
    DEFAULT_ETA,
    CijtEvent,
    compute_N,
    find_events,
)
from .orbits import OrbitSystem, PrimeOrbitSpec

__all__ = [
    "Certificate",
    "CertificationResult",
    "certify_system",
    "step3_sum",
    "rotation_decomposition",
    "RotationDecompositionError",
]


class RotationDecompositionError(ValueError):
    """The matrix is not symplectically conjugate to a diamond of rotations."""


@dataclass
class Certificate:
    orbit: str
    verdict: str  # 'irrationally_elliptic' | 'rejected'
    failed_step: Optional[int] = None
    failure: Optional[str] = None
    events: dict = field(default_factory=dict)
    step1: dict = field(default_factory=dict)
    step2: dict = field(default_factory=dict)
    step3: dict = field(default_factory=dict)
    step4: dict = field(default_factory=dict)


@dataclass
class CertificationResult:
    certificates: List[Certificate]
    inconclusive: List[dict]
    events_scanned: int

    def __iter__(self):
        return iter(self.certificates)

    def __len__(self):
        return len(self.certificates)

    def by_orbit(self, label: str) -> Optional[Certificate]:
        for c in self.certificates:
            if c.orbit == label:
                return c
        return None


# ---------------------------------------------------------------------------
# step 3 and step 4 primitives
# ---------------------------------------------------------------------------

def step3_sum(
    deco: NormalFormDecomposition, k: int, qmax: int = QMAX_DEFAULT
) -> dict:
    """Evaluate the rotation-count identity at iterate k.

    Requires a strongly non-degenerate endpoint (no eigenvalue-1 blocks, no
    rational angles); the target is half the dimension.
    """
    table = splitting_table(deco)
    if table.nu_at_one:
        raise ValueError("step-3 sum needs a non-degenerate endpoint")
    target = deco.dim // 2
    value = 0
    contributions = []
    for turns, sp, sm, _nu in table.rows:
        t = frac_part(as_scalar(turns))
        tf = to_float(t)
        if tf >= 0.5:  # upper-half angles only; theta = pi excluded with them
            continue
        w = rationality_witness(t, qmax=qmax)
        if w["kind"] == "rational":
            raise ValueError(
                f"angle {tf!r} is rational (order {w['q']}): endpoint is not "
                "strongly non-degenerate"
            )
        kt = (k * as_scalar(t)) if is_exact(t) else k * tf
        kt1 = ((k + 1) * as_scalar(t)) if is_exact(t) else (k + 1) * tf
        jump = guarded_ceil(kt1, what="(k+1)theta/2pi") - guarded_ceil(
            kt, what="k theta/2pi"
        )
        term = (2 * jump - 1) * (sm - sp)
        value += term
        contributions.append(
            {"turns": tf, "jump": jump, "s_plus": sp, "s_minus": sm, "term": term}
        )
    return {
        "value": value,
        "target": target,
        "passed": value == target,
        "contributions": contributions,
        "k": k,
    }


def rotation_angles_turns(deco: NormalFormDecomposition) -> list:
    """Krein-resolved rotation angles (turns) of an elliptic, strongly
    non-degenerate decomposition; each R block contributes its own angle."""
    if deco.rest_eigenvalues:
        raise RotationDecompositionError(
            "endpoint has off-circle spectrum: not conjugate to rotations"
        )
    angles = []
    for blk in deco.blocks:
        if blk.kind == "R":
            angles.append(frac_part(as_scalar(blk.turns)))
        elif blk.kind == "N2":
            raise RotationDecompositionError(
                "Jordan block obstructs conjugacy to rotations (N2 present)"
            )
        else:
            raise RotationDecompositionError(
                f"eigenvalue {blk.lam} block obstructs conjugacy to rotations"
            )
    return sorted(angles, key=to_float)


def rotation_decomposition(mat: np.ndarray) -> List[float]:
    """Angles theta_1..theta_m (radians, Krein-resolved) with the input
    symplectically conjugate to diamond R(theta_i); raises when no such
    conjugacy exists."""
    deco = decompose_normal_form(np.asarray(mat, dtype=float))
    return [2 * math.pi * to_float(t) for t in rotation_angles_turns(deco)]


# ---------------------------------------------------------------------------
# the pipeline
# ---------------------------------------------------------------------------

def certify_system(
    system: OrbitSystem,
    eta=DEFAULT_ETA,
    d_max: int = DEFAULT_DMAX,
    qmax: int = QMAX_DEFAULT,
) -> CertificationResult:
    """Run Steps 1-4 for every orbit that is strictly extremal (by mean
    index) at some verified event pair; at least the two orbits realizing
    the interchange diagrams are attempted on a genuine system."""
    n = system.n
    if len(system.orbits) != n:
        raise ValueError(
            f"certification needs exactly n = {n} prime orbits, got "
            f"{len(system.orbits)}"
        )
    for spec in system.orbits:
        if not spec.report.dyn_convex:
            raise ValueError(
                f"orbit {spec.label} is not dynamically convex "
                f"(mu_- = {spec.report.lower} < {spec.path.dim // 2 + 2})"
            )
    inconclusive: List[dict] = []
    if to_float(eta) >= 0.5:
        return CertificationResult(
            certificates=[],
            inconclusive=[
                {
                    "orbit": spec.label,
                    "reason": f"eta = {to_float(eta)} >= 1/2 breaks the "
                    "index-forcing hypothesis",
                }
                for spec in system.orbits
            ],
            events_scanned=0,
        )
    events = find_events(system, eta=eta, d_max=d_max, qmax=qmax)
    ninfo = compute_N(system, qmax=qmax)
    certificates: List[Certificate] = []
    for idx, spec in enumerate(system.orbits):
        tops = [e for e in events if e.strict() and e.ordering()[-1] == idx]
        bottoms = [e for e in events if e.strict() and e.ordering()[0] == idx]
        if not tops or not bottoms:
            inconclusive.append(
                {
                    "orbit": spec.label,
                    "reason": "no interchange event pair within budget "
                    f"(d_max = {d_max}, events = {len(events)})",
                }
            )
            continue
        certificates.append(
            _certify_orbit(system, idx, tops[0], bottoms[0], ninfo, qmax)
        )
    return CertificationResult(
        certificates=certificates,
        inconclusive=inconclusive,
        events_scanned=len(events),
    )


def _certify_orbit(
    system: OrbitSystem,
    idx: int,
    top: CijtEvent,
    bottom: CijtEvent,
    ninfo: dict,
    qmax: int,
) -> Certificate:
    n = system.n
    spec = system.orbits[idx]
    k_t, k_b = top.k[idx], bottom.k[idx]
    cert = Certificate(
        orbit=spec.label,
        verdict="irrationally_elliptic",
        events={
            "top": {"d": top.d, "k": k_t, "deviation": top.deviations[idx]},
            "bottom": {"d": bottom.d, "k": k_b, "deviation": bottom.deviations[idx]},
            "d_pair": tuple(sorted((bottom.d, top.d))),
            "N": ninfo["N"],
        },
    )

    # ---- Step 1: concentration bookkeeping --------------------------------
    step1 = {}
    for name, ev, k, slot in (
        ("top", top, k_t, top.d + n - 1),
        ("bottom", bottom, k_b, bottom.d - n + 1),
    ):
        nu = spec.nullity(k)
        mu_plus = spec.mu_plus(k)
        entry = {
            "k": k,
            "d": ev.d,
            "nu": nu,
            "mu_plus": mu_plus,
            "slot": slot,
            "slot_match": mu_plus == slot,
        }
        if nu == 0:
            # deg = mu = mu_+ verified directly for non-degenerate iterates
            entry["deg_equals_mu_plus"] = True
        else:
            entry["deg_equals_mu_plus"] = None
            entry["note"] = (
                "degenerate iterate: concentration rule not assertable; "
                "step 2 decides"
            )
        step1[name] = entry
    step1["degree_model_ok"] = bool(
        step1["top"]["slot_match"] and step1["bottom"]["slot_match"]
    )
    cert.step1 = step1

    # ---- Step 2: nu = 0 and strong non-degeneracy -------------------------
    nu_b = spec.nullity(k_b)
    lo_b = spec.mu_minus(k_b)
    step2 = {
        "k": k_b,
        "nullity": nu_b,
        "mu_minus": lo_b,
        "mu_plus": lo_b + nu_b,
        "slot_match": lo_b == bottom.d - n + 1,
    }
    if nu_b != 0:
        step2["witness"] = "degenerate iterate refutes irrational ellipticity"
        cert.step2 = step2
        return _reject(cert, 2, f"nu({spec.label}^{k_b}) = {nu_b} != 0")
    # divisibility route: nu(y^{k_b}) = 0 with N | k_b kills every root of
    # unity whose order divides p | N
    div_ok = k_b % ninfo["N"] == 0
    scan = []
    scan_ok = True
    if spec.report.table.nu_at_one:
        scan_ok = False
        scan.append({"angle": 0.0, "kind": "eigenvalue 1"})
    for turns, _sp, _sm, _nu in spec.report.table.rows:
        w = rationality_witness(turns, qmax=qmax)
        item = {"turns": to_float(turns), "witness": w["kind"]}
        if w["kind"] == "rational":
            item["order"] = w["q"]
            scan_ok = False
        scan.append(item)
    step2["divisibility_route"] = div_ok
    step2["scan_route"] = scan_ok
    step2["scan"] = scan
    cert.step2 = step2
    if div_ok != scan_ok:
        raise RuntimeError(
            f"strong-non-degeneracy routes disagree for {spec.label}: "
            f"divisibility {div_ok}, scan {scan_ok}"
        )
    if not scan_ok:
        return _reject(cert, 2, "root of unity among Floquet multipliers")

    # ---- Step 3: rotation-count identity ----------------------------------
    try:
        s3 = step3_sum(spec.report.decomposition, k_b, qmax=qmax)
    except ValueError as exc:
        cert.step3 = {"error": str(exc)}
        return _reject(cert, 3, str(exc))
    cert.step3 = s3
    if not s3["passed"]:
        return _reject(
            cert,
            3,
            f"rotation-count sum {s3['value']} != {s3['target']} "
            "(non-rotation block leaves a deficit)",
        )

    # ---- Step 4: rotation decomposition -----------------------------------
    try:
        angles = rotation_angles_turns(spec.report.decomposition)
    except RotationDecompositionError as exc:
        cert.step4 = {"error": str(exc)}
        return _reject(cert, 4, str(exc))
    step4 = {"angles_turns": [to_float(t) for t in angles]}
    step4["angles_radians"] = [2 * math.pi * to_float(t) for t in angles]
    # Claim 1: no conjugate pair among the resolved angles
    for i, t1 in enumerate(angles):
        for t2 in angles[i:]:
            conj = 1 - as_scalar(t2) if is_exact(t2) else 1.0 - to_float(t2)
            same = (
                as_scalar(t1) == conj
                if is_exact(t1) and is_exact(t2)
                else abs(to_float(t1) - to_float(conj)) < 1e-9
            )
            if same:
                cert.step4 = step4
                return _reject(
                    cert, 4, f"angles {to_float(t1)} and {to_float(t2)} form a "
                    "theta / 2pi-theta pair (Claim-1 screening)"
                )
    # unit ceiling increments at the bottom iterate
    increments = []
    for t in angles:
        kt = (k_b * as_scalar(t)) if is_exact(t) else k_b * to_float(t)
        kt1 = ((k_b + 1) * as_scalar(t)) if is_exact(t) else (k_b + 1) * to_float(t)
        inc = guarded_ceil(kt1, what="(k+1)*turns") - guarded_ceil(kt, what="k*turns")
        increments.append(inc)
    step4["ceiling_increments"] = increments
    witnesses = []
    for t in angles:
        w = rationality_witness(t, qmax=qmax)
        witnesses.append({"turns": to_float(t), "witness": w})
        if w["kind"] == "rational":
            cert.step4 = step4
            return _reject(cert, 4, f"angle {to_float(t)} is rational")
    step4["irrationality"] = witnesses
    cert.step4 = step4
    if any(inc != 1 for inc in increments):
        return _reject(
            cert, 4, f"ceiling increments {increments} not all 1 at k = {k_b}"
        )
    return cert


def _reject(cert: Certificate, step: int, reason: str) -> Certificate:
    cert.verdict = "rejected"
    cert.failed_step = step
    cert.failure = reason
    return cert
