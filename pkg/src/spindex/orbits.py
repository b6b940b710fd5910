"""Concrete orbit systems: the ellipsoid oracle and degree bookkeeping.

An ellipsoid E_n(r) with pairwise-irrational radii ratios carries exactly n
prime closed orbits; orbit i has action 2*pi*r_i and its k-th iterate
linearizes, in the disk-induced trivialization, to the path

    diamond_{j != i} R(2*pi*k*(r_i/r_j)*t)   followed by   a Maslov-k loop.

The appended loop is the capping-disk correction: the coordinate-plane
trivialization of the contact hyperplane differs from the disk-induced one by
one full rotation per period.  Three independent checks pin it down: the
least-action orbit gets mu_- = n+1, the degree bijection onto n-1+2N holds,
and every orbit is dynamically convex; all three fail without the loop.

Closed forms used as oracles by the tests:

    mean(x_i^k) = 2 k r_i sum_j (1/r_j)
    mu(x_i^k)   = n - 1 + 2k + 2 sum_{j != i} floor(k r_i / r_j)

Actions are stored divided by 2*pi so the exact scalar tower applies; the
built-in E_2(1, sqrt2) and E_3(1, phi, phi^2) fixtures run entirely in exact
quadratic arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .scalars import (
    QMAX_DEFAULT,
    QuadraticIrrational,
    Scalar,
    as_scalar,
    exact_floor,
    guarded_floor,
    is_exact,
    rationality_witness,
    to_float,
)
from .paths import RotationAtom, Segment, SymplecticPath, loop_segment
from .path_index import IndexReport, index_report
from .iteration import IterationProfile, iterate_mu_minus, nullity_of_power

__all__ = [
    "PrimeOrbitSpec",
    "OrbitSystem",
    "VisibilityRecord",
    "ellipsoid_system",
    "reference_e2",
    "reference_e3",
    "degree_assignment",
    "DegreeBijectionError",
    "action_ratio_check",
    "euler_visibility",
    "deg_iterate",
    "SQRT2",
    "PHI",
]

SQRT2 = QuadraticIrrational(0, 1, 2)
PHI = QuadraticIrrational(Fraction(1, 2), Fraction(1, 2), 5)


class DegreeBijectionError(ValueError):
    """Degree multiset fails the bijection onto n-1+2N."""

    def __init__(self, message: str, degree: int, kind: str):
        super().__init__(message)
        self.degree = degree
        self.kind = kind  # 'missing' | 'duplicate'


@dataclass
class PrimeOrbitSpec:
    """One prime closed orbit: action, associated path, cached index data."""

    label: str
    action_2pi: Scalar  # action divided by 2*pi
    path: SymplecticPath
    _report: Optional[IndexReport] = field(default=None, repr=False)
    _profile: Optional[IterationProfile] = field(default=None, repr=False)

    @property
    def action(self) -> float:
        import math

        return 2 * math.pi * to_float(self.action_2pi)

    @property
    def report(self) -> IndexReport:
        if self._report is None:
            self._report = index_report(self.path)
        return self._report

    @property
    def profile(self) -> IterationProfile:
        if self._profile is None:
            self._profile = IterationProfile.from_report(self.report)
        return self._profile

    def mu_minus(self, k: int) -> int:
        return self.profile.mu_minus(k)

    def mu_plus(self, k: int) -> int:
        return self.profile.mu_plus(k)

    def nullity(self, k: int) -> int:
        return self.profile.nullity(k)

    def mean_of_power(self, k: int) -> Scalar:
        return self.profile.mean_of_power(k)

    def action_of_power(self, k: int) -> Scalar:
        a = as_scalar(self.action_2pi) if is_exact(self.action_2pi) else self.action_2pi
        return k * a

    def neg_interval_count(self) -> int:
        """Multiplicity of Floquet eigenvalues in (-1, 0)."""
        deco = self.report.decomposition
        count = sum(
            1 for b in deco.blocks if b.kind == "D" and -1 < b.lam < 0
        )
        count += sum(
            1
            for lam in deco.rest_eigenvalues
            if abs(lam.imag) == 0 and -1 < lam.real < 0
        )
        return count

    def admissible(self, k: int, qmax: int = QMAX_DEFAULT) -> bool:
        """No eigenvalue other than 1 becomes a k-th root of unity."""
        for turns, _sp, _sm, _nu in self.report.table.rows:
            w = rationality_witness(turns, qmax=qmax)
            if w["kind"] == "rational" and (k * w["p"]) % w["q"] == 0:
                return False
        return True

    def root_orders(self, qmax: int = QMAX_DEFAULT) -> List[int]:
        """Orders of root-of-unity Floquet eigenvalues (with caveat-bounded
        detection for float angles); eigenvalue 1 contributes order 1."""
        orders = []
        if self.report.table.nu_at_one:
            orders.append(1)
        for turns, _sp, _sm, _nu in self.report.table.rows:
            w = rationality_witness(turns, qmax=qmax)
            if w["kind"] == "rational":
                if w["q"] > qmax:
                    raise ValueError(
                        f"root-of-unity order {w['q']} exceeds the bound {qmax}; "
                        "exact input required"
                    )
                orders.append(w["q"])
        return orders


@dataclass
class OrbitSystem:
    """Finite family of prime closed orbits on a (2n-1)-dimensional level."""

    n: int
    orbits: List[PrimeOrbitSpec]

    def __post_init__(self):
        want = 2 * (self.n - 1)
        for o in self.orbits:
            if o.path.dim != want:
                raise ValueError(
                    f"orbit {o.label}: path dimension {o.path.dim} != {want}"
                )

    @property
    def x0_index(self) -> int:
        """Least-action visible prime orbit.

        A non-degenerate prime is always good hence visible; a degenerate
        prime has undetermined visibility and is passed over (unless every
        orbit is degenerate, when least action decides)."""
        candidates = [i for i, o in enumerate(self.orbits) if o.nullity(1) == 0]
        pool = candidates or range(len(self.orbits))
        return min(pool, key=lambda i: to_float(self.orbits[i].action_2pi))

    def subsystem(self, indices: Sequence[int]) -> "OrbitSystem":
        return OrbitSystem(n=self.n, orbits=[self.orbits[i] for i in indices])


@dataclass
class VisibilityRecord:
    """Good/bad flag, equivariant Euler characteristic and degree data of one
    iterate; degenerate iterates carry only the [mu_-, mu_+] interval."""

    good: Optional[bool]
    euler: Optional[int]
    degree: Union[int, Tuple[int, int]]


# ---------------------------------------------------------------------------
# ellipsoids
# ---------------------------------------------------------------------------

def ellipsoid_system(radii: Sequence, qmax: int = QMAX_DEFAULT) -> OrbitSystem:
    """Orbit system of the ellipsoid E_n(r); radii may be exact scalars.

    Pairwise-rational radii ratios are rejected: such an ellipsoid carries
    infinitely many prime closed orbits and has no finite model here.
    """
    rs = [as_scalar(r) for r in radii]
    n = len(rs)
    if n < 2:
        raise ValueError("an ellipsoid system needs at least two radii")
    for v in rs:
        if to_float(v) <= 0:
            raise ValueError("radii must be positive")
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ratio = _ratio(rs[i], rs[j])
            w = rationality_witness(ratio, qmax=qmax)
            if w["kind"] == "rational":
                raise ValueError(
                    f"radii ratio r{i + 1}/r{j + 1} = {w['p']}/{w['q']} is "
                    "rational: the ellipsoid has infinitely many prime closed "
                    "orbits (#T(E_n(r)) = infinity)"
                )
    dim = 2 * (n - 1)
    orbits = []
    for i in range(n):
        atoms = [RotationAtom(_ratio(rs[i], rs[j])) for j in range(n) if j != i]
        path = SymplecticPath(
            dim=dim,
            segments=[Segment(atoms=tuple(atoms)), loop_segment(dim, 1)],
        )
        orbits.append(
            PrimeOrbitSpec(label=f"x{i + 1}", action_2pi=rs[i], path=path)
        )
    return OrbitSystem(n=n, orbits=orbits)


def _ratio(a: Scalar, b: Scalar):
    if is_exact(a) and is_exact(b):
        if isinstance(a, QuadraticIrrational) or isinstance(b, QuadraticIrrational):
            qa = a if isinstance(a, QuadraticIrrational) else QuadraticIrrational(a, 0, b.d)
            return qa / b
        return Fraction(a) / Fraction(b)
    return to_float(a) / to_float(b)


def reference_e2() -> OrbitSystem:
    """E_2(1, sqrt 2) in exact arithmetic over Q(sqrt 2)."""
    return ellipsoid_system([Fraction(1), SQRT2])


def reference_e3() -> OrbitSystem:
    """E_3(1, phi, phi^2) in exact arithmetic over Q(sqrt 5)."""
    return ellipsoid_system([Fraction(1), PHI, PHI * PHI])


# ---------------------------------------------------------------------------
# degree bookkeeping
# ---------------------------------------------------------------------------

def euler_visibility(spec: PrimeOrbitSpec, k: int, qmax: int = QMAX_DEFAULT) -> VisibilityRecord:
    """Good/bad classification, Euler characteristic and degree of x^k."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    nu = spec.nullity(k)
    lo = spec.mu_minus(k)
    if nu > 0:
        rec = VisibilityRecord(good=None, euler=None, degree=(lo, lo + nu))
    else:
        neg = spec.neg_interval_count()
        good = not (neg % 2 == 1 and k % 2 == 0)
        mu = lo
        rec = VisibilityRecord(good=good, euler=(-1) ** (mu % 2) if good else 0, degree=mu)
        if spec.admissible(k, qmax=qmax) and (k % 2 == 1 or neg % 2 == 0):
            base_mu = spec.mu_minus(1)
            base_euler = (-1) ** (base_mu % 2)
            if rec.euler != base_euler:
                raise ValueError(
                    f"Euler characteristic not invariant along admissible "
                    f"iterate k = {k} of {spec.label}"
                )
    lo_b, hi_b = (rec.degree, rec.degree) if isinstance(rec.degree, int) else rec.degree
    mean = to_float(spec.mean_of_power(k))
    n = spec.path.dim // 2 + 1
    if not (mean - n + 1 - 1e-6 <= lo_b and hi_b <= mean + n - 1 + 1e-6):
        raise ValueError(
            f"degree data of {spec.label}^{k} escapes the mean-index window"
        )
    return rec


def degree_assignment(
    system: OrbitSystem, cutoff: int, qmax: int = QMAX_DEFAULT
) -> Dict[int, Tuple[str, int]]:
    """deg(x^k) = mu(x^k) for good non-degenerate iterates up to cutoff.

    Asserts the bijection onto {n+1, n+3, ...} and action monotonicity; on
    failure raises DegreeBijectionError naming the first missing or
    duplicated degree.  Degenerate iterates downgrade the bijection check to
    a notice (returned under the 'notice' key of the mapping's attribute).
    """
    n = system.n
    out: Dict[int, Tuple[str, int]] = {}
    actions: Dict[int, float] = {}
    notices: List[str] = []
    for spec in system.orbits:
        mean1 = to_float(spec.mean_of_power(1))
        if mean1 <= 0:
            raise ValueError(f"orbit {spec.label} has non-positive mean index")
        kmax = int((cutoff + n) / mean1) + 2
        for k in range(1, kmax + 1):
            rec = euler_visibility(spec, k, qmax=qmax)
            if rec.good is None:
                notices.append(f"{spec.label}^{k} degenerate; interval {rec.degree}")
                continue
            if not rec.good:
                continue
            deg = rec.degree
            if deg > cutoff:
                continue
            if deg in out:
                raise DegreeBijectionError(
                    f"degree {deg} duplicated by {out[deg]} and ({spec.label}, {k})",
                    degree=deg,
                    kind="duplicate",
                )
            out[deg] = (spec.label, k)
            actions[deg] = to_float(spec.action_of_power(k))
    if not notices:
        expected = list(range(n + 1, cutoff + 1, 2))
        for want in expected:
            if want not in out:
                raise DegreeBijectionError(
                    f"degree {want} missing from the assignment",
                    degree=want,
                    kind="missing",
                )
        degs = sorted(out)
        for d1, d2 in zip(degs, degs[1:]):
            if actions[d1] >= actions[d2] + 1e-12:
                raise DegreeBijectionError(
                    f"action monotonicity fails between degrees {d1} and {d2}",
                    degree=d2,
                    kind="monotonicity",
                )
    result = DegreeAssignment(sorted(out.items()))
    result.notices = notices
    return result


class DegreeAssignment(dict):
    """Mapping degree -> (orbit label, k); ``notices`` lists degenerate
    iterates whose interval-valued degrees suspend the bijection check."""

    notices: List[str] = []


def action_ratio_check(system: OrbitSystem, count: int) -> dict:
    """Constancy of A(x)/mean(x) over the first ``count`` visible iterates.

    For ellipsoids the common value is pi / sum(1/r_j).
    """
    import math

    entries = []
    for spec in system.orbits:
        for k in range(1, count + 1):
            entries.append((to_float(spec.action_of_power(k)), spec.label, k, spec))
    entries.sort()
    entries = entries[:count]
    ratios = []
    for a2p, label, k, spec in entries:
        mean = to_float(spec.mean_of_power(k))
        if mean <= 0:
            raise ValueError(f"orbit {label} has non-positive mean index")
        ratios.append((2 * math.pi * a2p / mean, label, k))
    base = ratios[0][0]
    max_dev = 0.0
    worst = ratios[0][1:]
    for r, label, k in ratios:
        dev = abs(r - base)
        if dev > max_dev:
            max_dev, worst = dev, (label, k)
    if max_dev >= 1e-10 * max(1.0, abs(base)):
        raise ValueError(
            f"action/mean ratio not constant: deviation {max_dev:.3g} at "
            f"{worst[0]}^{worst[1]}"
        )
    return {"ratio": base, "max_deviation": max_dev, "count": len(ratios)}


def deg_iterate(
    spec: PrimeOrbitSpec, base_deg: int, k: int, qmax: int = QMAX_DEFAULT
) -> int:
    """deg(x^k) = deg(x) + (mu_+(x^k) - mu_+(x)) for admissible k."""
    if not spec.admissible(k, qmax=qmax):
        raise ValueError(f"iterate k = {k} of {spec.label} is not admissible")
    shift = spec.mu_plus(k) - spec.mu_plus(1)
    lo_shift = spec.mu_minus(k) - spec.mu_minus(1)
    if shift != lo_shift:
        raise ValueError("mu_+ and mu_- shifts disagree on an admissible iterate")
    return base_deg + shift
