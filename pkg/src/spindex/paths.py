"""Paths in the symplectic group.

A symbolic path is an ordered concatenation of segments; each segment is a
diamond-sum of closed-form atoms starting at the identity.  Concatenation
follows the product-to-concatenation homotopy: inside segment j the path is
``Seg_j(s) @ M_{j-1}`` where ``M_{j-1}`` is the endpoint of the previous
segments.  A sampled path is a strictly increasing time grid with a matrix
per node; evaluation between nodes interpolates through the matrix logarithm,
which stays inside the group.

Atoms
-----
rotation     R(2*pi*turns*t)                exact winding ledger
hyperbolic   diag(e^{c t}, e^{-c t})        spectrum real, no winding
shear        [[1, a t], [0, 1]]             totally degenerate, no winding
n2           [[R(t*theta), t*b(t)], [0, R]] Jordan family, rho == 1
generic      polar interpolation Id -> M    numeric winding

Angles are carried in turns (angle / 2*pi) through the exact scalar tower.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .scalars import Scalar, as_scalar, frac_part, is_exact, to_float
from .sp_core import (
    BasicNormalForm,
    SymplecticError,
    check_symplectic,
    diamond_many,
    is_symplectic,
    n2_offdiag_block,
)

__all__ = [
    "Atom",
    "IdentityAtom",
    "RotationAtom",
    "HyperbolicAtom",
    "ShearAtom",
    "N2Atom",
    "GenericAtom",
    "Segment",
    "SymplecticPath",
    "symbolic_path",
    "sampled_path",
    "rotation_path",
    "loop_segment",
    "power_path",
    "append_loop",
]


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


class Atom:
    """A closed-form path [0,1] -> Sp(dim) with value(0) = Id."""

    dim: int = 2

    def value(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def endpoint(self) -> np.ndarray:
        return self.value(1.0)

    def endpoint_block(self) -> Optional[BasicNormalForm]:
        """Basic-normal-form class of the endpoint, when closed-form."""
        return None


@dataclass(frozen=True)
class IdentityAtom(Atom):
    """Constant identity block of any even dimension (alignment filler)."""

    size: int = 2

    @property
    def dim(self) -> int:
        return self.size

    def value(self, t: float) -> np.ndarray:
        return np.eye(self.size)

    def endpoint_block(self) -> BasicNormalForm:
        return BasicNormalForm(kind="N1", lam=1.0, a=0)


@dataclass(frozen=True)
class RotationAtom(Atom):
    """R(2*pi*turns*t); turns may be any exact scalar or float."""

    turns: Scalar

    @property
    def dim(self) -> int:
        return 2

    def value(self, t: float) -> np.ndarray:
        return _rot(2 * math.pi * to_float(self.turns) * t)

    def endpoint_block(self) -> BasicNormalForm:
        f = frac_part(as_scalar(self.turns))
        if f == 0:
            return BasicNormalForm(kind="N1", lam=1.0, a=0)
        if f == Fraction(1, 2):
            return BasicNormalForm(kind="N1", lam=-1.0, a=0)
        return BasicNormalForm(kind="R", turns=f)


@dataclass(frozen=True)
class HyperbolicAtom(Atom):
    """diag(e^{c t}, e^{-c t})."""

    rate: float

    @property
    def dim(self) -> int:
        return 2

    def value(self, t: float) -> np.ndarray:
        e = math.exp(self.rate * t)
        return np.array([[e, 0.0], [0.0, 1.0 / e]])

    def endpoint_block(self) -> BasicNormalForm:
        if self.rate == 0:
            return BasicNormalForm(kind="N1", lam=1.0, a=0)
        return BasicNormalForm(kind="D", lam=math.exp(self.rate))


@dataclass(frozen=True)
class ShearAtom(Atom):
    """[[1, a t], [0, 1]]."""

    a: float

    @property
    def dim(self) -> int:
        return 2

    def value(self, t: float) -> np.ndarray:
        return np.array([[1.0, self.a * t], [0.0, 1.0]])

    def endpoint_block(self) -> BasicNormalForm:
        sign = (self.a > 0) - (self.a < 0)
        return BasicNormalForm(kind="N1", lam=1.0, a=sign)


@dataclass(frozen=True)
class N2Atom(Atom):
    """Jordan family from Id to N2(e^{i*theta}, b), theta = 2*pi*turns.

    The interpolant [[R(s*theta), s*b(s)], [0, R(s*theta)]] is symplectic for
    every s with b(s) solving the symplecticity constraint at angle s*theta,
    and carries a genuine Jordan block for s > 0, so rho == 1 along the whole
    family and the atom contributes no winding.
    """

    turns: Scalar
    trivial: bool
    scale: float = 1.0

    @property
    def dim(self) -> int:
        return 4

    def value(self, t: float) -> np.ndarray:
        theta = 2 * math.pi * to_float(self.turns) * t
        out = np.eye(4)
        if t == 0 or abs(math.sin(theta)) < 1e-12:
            # near angle 0/pi the constrained b blows up; take b = 0 there
            r = _rot(theta)
            out[:2, :2] = r
            out[2:, 2:] = r
            return out
        b = np.asarray(
            n2_offdiag_block(to_float(self.turns) * t, self.trivial, self.scale * t),
            dtype=float,
        )
        r = _rot(theta)
        out[:2, :2] = r
        out[:2, 2:] = b
        out[2:, 2:] = r
        return out

    def endpoint_block(self) -> BasicNormalForm:
        f = frac_part(as_scalar(self.turns))
        return BasicNormalForm(kind="N2", turns=f, trivial=self.trivial)


_GENERIC_CACHE: dict = {}


@dataclass(frozen=True)
class GenericAtom(Atom):
    """Polar-interpolated path Id -> M: Q(t) P(t) with Q(t) = exp(t log Q)
    through the unitary part and P(t) = P^t through the positive part.

    The unitary factor of a symplectic polar decomposition has the block
    form [[X, -Y], [Y, X]]; its logarithm is taken through the complex
    unitary X + iY so the path stays inside the symplectic group even when
    the unitary part has eigenvalue -1 (where a naive real matrix log
    fails).
    """

    target: tuple  # row-major tuple form so the dataclass stays hashable

    @property
    def dim(self) -> int:
        return len(self.target)

    def _factors(self):
        cached = _GENERIC_CACHE.get(self.target)
        if cached is not None:
            return cached
        from scipy.linalg import logm, polar

        mat = np.asarray(self.target, dtype=float)
        u, p = polar(mat)
        m = mat.shape[0] // 2
        x, y = u[:m, :m], u[m:, :m]
        if not (
            np.allclose(u[:m, m:], -y, atol=1e-9)
            and np.allclose(u[m:, m:], x, atol=1e-9)
        ):
            raise SymplecticError(
                "generic atom target is not symplectic (bad unitary factor)"
            )
        lc = logm(x + 1j * y)  # skew-Hermitian
        w, v = np.linalg.eigh((p + p.T) / 2)
        if np.any(w <= 0):
            raise SymplecticError("generic atom target has a singular stretch")
        _GENERIC_CACHE[self.target] = (lc, w, v)
        return lc, w, v

    def value(self, t: float) -> np.ndarray:
        from scipy.linalg import expm

        lc, w, v = self._factors()
        uc = expm(t * lc)
        m = uc.shape[0]
        q = np.zeros((2 * m, 2 * m))
        q[:m, :m] = uc.real
        q[:m, m:] = -uc.imag
        q[m:, :m] = uc.imag
        q[m:, m:] = uc.real
        pt = v @ np.diag(w ** t) @ v.T
        return q @ pt

    def endpoint(self) -> np.ndarray:
        return np.asarray(self.target, dtype=float)

    @staticmethod
    def to_matrix_tuple(mat: np.ndarray) -> tuple:
        return tuple(tuple(float(x) for x in row) for row in np.asarray(mat))


@dataclass(frozen=True)
class Segment:
    """A diamond-sum of atoms, itself a path from the identity."""

    atoms: tuple

    @property
    def dim(self) -> int:
        return sum(a.dim for a in self.atoms)

    def value(self, t: float) -> np.ndarray:
        return diamond_many([a.value(t) for a in self.atoms])

    def endpoint(self) -> np.ndarray:
        return diamond_many([a.endpoint() for a in self.atoms])

    def signature(self) -> tuple:
        return tuple(a.dim for a in self.atoms)


class SymplecticPath:
    """Either a symbolic concatenation of segments or a sampled grid."""

    def __init__(
        self,
        dim: int,
        segments: Optional[Sequence[Segment]] = None,
        samples: Optional[Sequence] = None,
    ):
        self.dim = dim
        if (segments is None) == (samples is None):
            raise ValueError("exactly one of segments/samples must be given")
        self.segments: Optional[tuple] = None
        self.samples = None
        if segments is not None:
            segments = tuple(segments)
            if not segments:
                raise ValueError("a symbolic path needs at least one segment")
            for s in segments:
                if s.dim != dim:
                    raise ValueError("segment dimension mismatch")
            self.segments = segments
        else:
            samples = [(float(t), np.asarray(m, dtype=float)) for t, m in samples]
            if samples[0][0] != 0.0 or samples[-1][0] != 1.0:
                raise ValueError("sampled path must cover [0, 1]")
            if any(b[0] <= a[0] for a, b in zip(samples, samples[1:])):
                raise ValueError("sample times must increase strictly")
            if np.linalg.norm(samples[0][1] - np.eye(dim)) > 1e-9:
                raise SymplecticError("sampled path must start at the identity")
            for _t, m in samples:
                check_symplectic(m)
            self.samples = samples

    # -- structure ----------------------------------------------------------
    @property
    def is_symbolic(self) -> bool:
        return self.segments is not None

    def aligned_signature(self) -> Optional[tuple]:
        """Common atom-dimension signature across segments, if any."""
        if not self.is_symbolic:
            return None
        sigs = {seg.signature() for seg in self.segments}
        return sigs.pop() if len(sigs) == 1 else None

    def segment_prefix_endpoints(self) -> List[np.ndarray]:
        """Endpoint of the path after each segment (symbolic only)."""
        out = []
        acc = np.eye(self.dim)
        for seg in self.segments:
            acc = seg.endpoint() @ acc
            out.append(acc)
        return out

    # -- evaluation ----------------------------------------------------------
    def value(self, t: float) -> np.ndarray:
        if not 0.0 <= t <= 1.0:
            raise ValueError("path parameter must lie in [0, 1]")
        if self.is_symbolic:
            n = len(self.segments)
            pos = t * n
            j = min(int(pos), n - 1)
            local = pos - j
            pre = np.eye(self.dim) if j == 0 else self.segment_prefix_endpoints()[j - 1]
            return self.segments[j].value(local) @ pre
        times = [s[0] for s in self.samples]
        import bisect

        i = bisect.bisect_right(times, t) - 1
        if i >= len(times) - 1:
            return self.samples[-1][1]
        t0, m0 = self.samples[i]
        t1, m1 = self.samples[i + 1]
        if t == t0:
            return m0
        s = (t - t0) / (t1 - t0)
        return _log_interp(m0, m1, s)

    def endpoint(self) -> np.ndarray:
        if self.is_symbolic:
            return self.segment_prefix_endpoints()[-1]
        return self.samples[-1][1]


def _log_interp(m0: np.ndarray, m1: np.ndarray, s: float) -> np.ndarray:
    """Interpolate inside the group: m0 expm(s log(m0^{-1} m1))."""
    from scipy.linalg import expm, logm

    step = np.linalg.solve(m0, m1)
    return m0 @ np.real(expm(s * np.real(logm(step))))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def symbolic_path(*segment_atoms: Sequence[Atom]) -> SymplecticPath:
    segs = [Segment(atoms=tuple(atoms)) for atoms in segment_atoms]
    return SymplecticPath(dim=segs[0].dim, segments=segs)


def sampled_path(samples) -> SymplecticPath:
    samples = list(samples)
    dim = np.asarray(samples[0][1]).shape[0]
    return SymplecticPath(dim=dim, samples=samples)


def rotation_path(turns: Scalar, total_dim: int = 2) -> SymplecticPath:
    """R(2*pi*turns*t) diamond identity padding."""
    atoms: List[Atom] = [RotationAtom(as_scalar(turns))]
    for _ in range((total_dim - 2) // 2):
        atoms.append(RotationAtom(Fraction(0)))
    return symbolic_path(atoms)


def loop_segment(dim: int, maslov: int) -> Segment:
    """Loop of Maslov index ``maslov``: R(2*pi*maslov*t) diamond identities."""
    atoms: List[Atom] = [RotationAtom(Fraction(maslov))]
    for _ in range((dim - 2) // 2):
        atoms.append(RotationAtom(Fraction(0)))
    return Segment(atoms=tuple(atoms))


def power_path(path: SymplecticPath, k: int) -> SymplecticPath:
    """The k-th iteration: segments Phi(t) Phi(1)^j concatenated, j < k."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if k == 1:
        return path
    if path.is_symbolic:
        return SymplecticPath(dim=path.dim, segments=path.segments * k)
    end = path.endpoint()
    out = []
    power = np.eye(path.dim)
    for j in range(k):
        for idx, (t, m) in enumerate(path.samples):
            if j > 0 and idx == 0:
                continue  # shared node between copies
            out.append(((j + t) / k, m @ power))
        power = end @ power
    return SymplecticPath(dim=path.dim, samples=out)


def append_loop(path: SymplecticPath, maslov: int) -> SymplecticPath:
    """Concatenate a rotation loop at the endpoint (degree-shift device)."""
    if not path.is_symbolic:
        raise ValueError("append_loop expects a symbolic path")
    return SymplecticPath(
        dim=path.dim, segments=tuple(path.segments) + (loop_segment(path.dim, maslov),)
    )
