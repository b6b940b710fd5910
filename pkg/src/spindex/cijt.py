"""Verified common index jump events.

The search enumerates candidate degrees d over multiples of N up to a budget,
pairs each orbit with the N-multiple k_i nearest d / mean_i, and emits an
event only after re-verifying every clause:

    (IR1)  |mean(x_i^{k_i}) - d| < eta            for all i,
    (IR2)  mu_+-(x_i^{k_i + 1}) = d + mu_+-(x_i),
    (IR3)  mu_+(x_i^{k_i - 1})  = d - (mu_-(x_i) + 2 S^+(1) - nu(x_i)),

plus divisibility of d and every k_i by N and, when all orbits are
dynamically convex, the window bounds mu_-(k_i + l) >= d + 2 + m and
mu_+(k_i - l) <= d - 2 for l <= 10.  The existence theorem guarantees
infinitely many events, so enumerate-and-verify is complete up to the budget;
an empty result under a tight budget is reported, never guessed around.

N itself follows the construction N = 2 p prod_i s_i! with p the lcm of all
root-of-unity orders among Floquet multipliers and s_i the largest s with
A(x_i^s) <= A(x_0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

from .scalars import (
    QMAX_DEFAULT,
    Scalar,
    as_scalar,
    exact_floor,
    is_exact,
    to_float,
)
from .iteration import dynamical_convexity
from .orbits import OrbitSystem, PrimeOrbitSpec

__all__ = [
    "CijtEvent",
    "GammaClassification",
    "compute_N",
    "find_events",
    "iter_events",
    "verify_event",
    "classify_iterates",
    "find_interchange_events",
    "iter_interchange_pairs",
    "EventVerificationError",
    "DEFAULT_ETA",
    "DEFAULT_DMAX",
]

DEFAULT_ETA = Fraction(1, 8)
DEFAULT_DMAX = 10**4


class EventVerificationError(ValueError):
    """A clause of the event verification failed."""

    def __init__(self, message: str, clause: str):
        super().__init__(message)
        self.clause = clause


@dataclass
class CijtEvent:
    """One verified common index jump event."""

    d: int
    k: Tuple[int, ...]
    eta: Scalar
    N: int
    deviations: Tuple[float, ...] = ()
    checks: dict = field(default_factory=dict)

    def ordering(self) -> Tuple[int, ...]:
        """Orbit indices sorted by deviation (mean-index order in the jump
        interval); only meaningful when deviations are pairwise distinct."""
        return tuple(
            sorted(range(len(self.deviations)), key=lambda i: self.deviations[i])
        )

    def strict(self) -> bool:
        devs = sorted(self.deviations)
        return all(b - a > 1e-12 for a, b in zip(devs, devs[1:]))


@dataclass
class GammaClassification:
    """Iterates around an event split into the three index collections."""

    d: int
    n: int
    interval: Tuple[int, int]
    gamma_plus: list
    gamma_zero: list
    gamma_minus: list


# ---------------------------------------------------------------------------
# the integer N
# ---------------------------------------------------------------------------

def compute_N(system: OrbitSystem, qmax: int = QMAX_DEFAULT) -> dict:
    """N = 2 p prod s_i! from root-of-unity orders and action ratios."""
    x0 = system.x0_index
    a0 = system.orbits[x0].action_2pi
    p = 1
    for spec in system.orbits:
        for q in spec.root_orders(qmax=qmax):
            p = p * q // math.gcd(p, q)
    s_values = {}
    prod = 1
    for i, spec in enumerate(system.orbits):
        if i == x0:
            continue
        ai = spec.action_2pi
        if _leq(ai, a0):
            s = _floor_ratio(a0, ai)
        else:
            s = 0
        s_values[spec.label] = s
        prod *= math.factorial(s) if s else 1  # 0! = 1
    return {"N": 2 * p * prod, "p": p, "s": s_values, "x0": system.orbits[x0].label}


def _leq(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return as_scalar(a) <= as_scalar(b)
    return to_float(a) <= to_float(b)


def _floor_ratio(a0, ai) -> int:
    """max{s : s * ai <= a0}."""
    if is_exact(a0) and is_exact(ai):
        s = 1
        while not ((s + 1) * as_scalar(ai) > as_scalar(a0)):
            s += 1
        return s
    return math.floor(to_float(a0) / to_float(ai) + 1e-12)


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------

def iter_events(
    system: OrbitSystem,
    eta=DEFAULT_ETA,
    d_max: int = DEFAULT_DMAX,
    big_n: Optional[int] = None,
    qmax: int = QMAX_DEFAULT,
) -> Iterator[CijtEvent]:
    """Yield verified events in increasing d."""
    eta = as_scalar(eta)
    if to_float(eta) <= 0:
        raise ValueError("eta must be positive")
    means = [o.mean_of_power(1) for o in system.orbits]
    for mu in means:
        if to_float(mu) <= 0:
            raise ValueError("common index jump needs mean index > 0 for every orbit")
    if big_n is None:
        big_n = compute_N(system, qmax=qmax)["N"]
    means_f = [to_float(m) for m in means]
    eta_f = to_float(eta)
    for d in range(big_n, d_max + 1, big_n):
        candidate_lists = []
        feasible = True
        for mu_f, mu in zip(means_f, means):
            ks = []
            m = round(d / mu_f / big_n)
            for mm in (m - 1, m, m + 1):
                k = big_n * mm
                if k < 2:
                    continue
                dev = k * mu_f - d
                if abs(dev) < eta_f + 1e-9:
                    ks.append(k)
            if not ks:
                feasible = False
                break
            candidate_lists.append(ks)
        if not feasible:
            continue
        for combo in _product(candidate_lists):
            try:
                event = verify_event_tuple(
                    system, d, tuple(combo), eta, big_n, qmax=qmax
                )
            except EventVerificationError:
                continue
            yield event
            break  # one event per d; ties both verified would duplicate d


def _product(lists: Sequence[Sequence[int]]):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


def find_events(
    system: OrbitSystem,
    eta=DEFAULT_ETA,
    d_max: int = DEFAULT_DMAX,
    big_n: Optional[int] = None,
    qmax: int = QMAX_DEFAULT,
) -> List[CijtEvent]:
    """All verified events with d <= d_max, sorted by d (possibly empty)."""
    return list(iter_events(system, eta=eta, d_max=d_max, big_n=big_n, qmax=qmax))


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def verify_event_tuple(
    system: OrbitSystem,
    d: int,
    ks: Tuple[int, ...],
    eta,
    big_n: int,
    qmax: int = QMAX_DEFAULT,
) -> CijtEvent:
    """Verify all clauses for a candidate (d, k_1..k_r); raise on failure."""
    eta = as_scalar(eta)
    checks: dict = {"divisibility": True}
    if d % big_n:
        raise EventVerificationError(f"d = {d} not divisible by N = {big_n}", "divisibility")
    devs = []
    for spec, k in zip(system.orbits, ks):
        if k < 2:
            raise EventVerificationError(f"k = {k} too small for {spec.label}", "k-range")
        if k % big_n:
            raise EventVerificationError(
                f"k = {k} for {spec.label} not divisible by N = {big_n}", "divisibility"
            )
        dev = _deviation(spec, k, d)
        if not _abs_less(dev, eta):
            raise EventVerificationError(
                f"(IR1) |mean({spec.label}^{k}) - {d}| = {abs(to_float(dev)):.6g} "
                f">= eta = {to_float(eta):.6g}",
                "IR1",
            )
        devs.append(to_float(dev))
        lo1, hi1 = spec.mu_minus(1), spec.mu_plus(1)
        if spec.mu_minus(k + 1) != d + lo1 or spec.mu_plus(k + 1) != d + hi1:
            raise EventVerificationError(
                f"(IR2) fails for {spec.label} at k = {k}", "IR2"
            )
        s1p, _ = spec.report.splitting_at_one
        want = d - (lo1 + 2 * s1p - spec.report.nullity)
        if spec.mu_plus(k - 1) != want:
            raise EventVerificationError(
                f"(IR3) fails for {spec.label} at k = {k}: "
                f"mu_+({k - 1}) = {spec.mu_plus(k - 1)} != {want}",
                "IR3",
            )
    checks["IR1"] = checks["IR2"] = checks["IR3"] = True
    convex = all(o.report.dyn_convex for o in system.orbits)
    checks["dynamically_convex"] = convex
    if convex:
        m = system.orbits[0].path.dim // 2
        for spec, k in zip(system.orbits, ks):
            for l in range(1, 11):
                if spec.mu_minus(k + l) < d + 2 + m:
                    raise EventVerificationError(
                        f"lower window bound fails for {spec.label} at l = {l}",
                        "window-low",
                    )
                if k - l >= 1 and spec.mu_plus(k - l) > d - 2:
                    raise EventVerificationError(
                        f"upper window bound fails for {spec.label} at l = {l}",
                        "window-up",
                    )
        checks["window_bounds"] = True
    else:
        checks["window_bounds"] = "not applicable"
    return CijtEvent(
        d=d,
        k=tuple(ks),
        eta=eta,
        N=big_n,
        deviations=tuple(devs),
        checks=checks,
    )


def verify_event(system: OrbitSystem, event: CijtEvent, qmax: int = QMAX_DEFAULT) -> dict:
    """Recompute every clause of an event; structured failure names the
    first violated clause."""
    try:
        redone = verify_event_tuple(
            system, event.d, tuple(event.k), event.eta, event.N, qmax=qmax
        )
    except EventVerificationError as exc:
        return {"passed": False, "clause": exc.clause, "message": str(exc)}
    out = dict(redone.checks)
    out["passed"] = True
    return out


def _deviation(spec: PrimeOrbitSpec, k: int, d: int):
    mu = spec.mean_of_power(k)
    return as_scalar(mu) - d if is_exact(mu) else mu - d


def _abs_less(value, bound) -> bool:
    if is_exact(value) and is_exact(bound):
        v = as_scalar(value)
        b = as_scalar(bound)
        return (v < b) and ((-1) * v < b)
    return abs(to_float(value)) < to_float(bound)


# ---------------------------------------------------------------------------
# gamma classification
# ---------------------------------------------------------------------------

def classify_iterates(
    system: OrbitSystem, event: CijtEvent, k_window: int, qmax: int = QMAX_DEFAULT
) -> GammaClassification:
    """Assign iterates in [k_i - w, k_i + w] to the Gamma collections with
    their degree bounds; bound violations signal an invalid event."""
    n = system.n
    d = event.d
    m = n - 1
    lo_i, hi_i = d - n + 1, d + n - 1
    plus, zero, minus = [], [], []
    for spec, ki in zip(system.orbits, event.k):
        for k in range(max(1, ki - k_window), ki + k_window + 1):
            nu = spec.nullity(k)
            lo = spec.mu_minus(k)
            hi = lo + nu
            entry = {
                "orbit": spec.label,
                "k": k,
                "mu_minus": lo,
                "mu_plus": hi,
            }
            if nu == 0:
                entry["degree"] = lo
            else:
                entry["degree_interval"] = (lo, hi)
            if k == ki:
                if not (lo_i <= lo and hi <= hi_i):
                    raise EventVerificationError(
                        f"Gamma_0 iterate {spec.label}^{k} escapes the jump "
                        f"interval [{lo_i}, {hi_i}]",
                        "gamma0-interval",
                    )
                zero.append(entry)
            elif k > ki:
                if lo < d + n + 1:
                    raise EventVerificationError(
                        f"Gamma_+ bound fails for {spec.label}^{k}", "gamma-plus"
                    )
                entry["bound"] = f"mu_- >= {d + n + 1}"
                plus.append(entry)
            else:
                if hi > d - 2:
                    raise EventVerificationError(
                        f"Gamma_- bound mu_+ <= d-2 fails for {spec.label}^{k}",
                        "gamma-minus",
                    )
                if nu == 0:
                    rec_good = _is_good(spec, k, qmax)
                    if rec_good and lo > d - n - 1:
                        raise EventVerificationError(
                            f"Gamma_- visible degree bound fails for "
                            f"{spec.label}^{k}: deg = {lo} > {d - n - 1}",
                            "gamma-minus-degree",
                        )
                entry["bound"] = f"deg <= {d - n - 1}"
                minus.append(entry)
    return GammaClassification(
        d=d,
        n=n,
        interval=(lo_i, hi_i),
        gamma_plus=plus,
        gamma_zero=zero,
        gamma_minus=minus,
    )


def _is_good(spec: PrimeOrbitSpec, k: int, qmax: int) -> bool:
    neg = spec.neg_interval_count()
    return not (neg % 2 == 1 and k % 2 == 0)


# ---------------------------------------------------------------------------
# interchange search
# ---------------------------------------------------------------------------

def iter_interchange_pairs(events: Sequence[CijtEvent]) -> Iterator[Tuple[CijtEvent, CijtEvent]]:
    """All pairs (E, E') with strictly reversed deviation orderings, in
    lexicographic (d, d') order."""
    evs = [e for e in events if e.strict()]
    for i, first in enumerate(evs):
        o1 = first.ordering()
        for second in evs[i + 1 :]:
            if second.ordering() == tuple(reversed(o1)):
                yield first, second


def find_interchange_events(
    system: OrbitSystem,
    eta=DEFAULT_ETA,
    d_max: int = DEFAULT_DMAX,
    big_n: Optional[int] = None,
    qmax: int = QMAX_DEFAULT,
) -> Optional[Tuple[CijtEvent, CijtEvent]]:
    """First pair of verified events whose strict mean-index orderings are
    fully reversed; None when no pair exists under the budget (or with a
    single orbit, where there is nothing to interchange)."""
    if len(system.orbits) < 2:
        return None
    events = find_events(system, eta=eta, d_max=d_max, big_n=big_n, qmax=qmax)
    for pair in iter_interchange_pairs(events):
        return pair
    return None
