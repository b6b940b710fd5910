"""Symplectic linear algebra: the diamond product, spectra with Krein
signatures, basic normal forms and their detection.

Conventions
-----------
The symplectic form on R^{2m} is represented by

    J = [[0, -I_m], [I_m, 0]]

and Sp(2m) = {M : M^T J M = J}.  The diamond product interleaves two
symplectic matrices block-wise so the result is symplectic in the canonical
coordinates of the direct sum.

Angles are carried as "turns" (angle / 2*pi) so the exact scalar tower from
:mod:`spindex.scalars` applies; ``block.turns`` is always reduced to (0, 1).

The Krein form used everywhere is h(x, y) = y* (-i J) x on the complexified
phase space.  With this sign, the eigenvalue e^{i*theta} of R(theta) is
Krein-positive for every theta, which calibrates rho(R(theta)) = e^{i*theta}
(checked by the path-index tests).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .scalars import (
    QMAX_DEFAULT,
    Scalar,
    as_scalar,
    frac_part,
    is_exact,
    rationality_witness,
    root_of_unity_order,
    to_float,
)

__all__ = [
    "SymplecticError",
    "UnsupportedDegeneracyError",
    "AmbiguousSpectrumError",
    "standard_j",
    "is_symplectic",
    "check_symplectic",
    "diamond",
    "diamond_many",
    "SpectralData",
    "EigenFamily",
    "spectral_data",
    "nullity_omega",
    "BasicNormalForm",
    "make_normal_form",
    "n2_offdiag_block",
    "NormalFormDecomposition",
    "decompose_normal_form",
    "classify_iteration",
    "random_symplectic",
]

SYMPLECTIC_TOL = 1e-9
UNIT_CIRCLE_TOL = 1e-8
# numpy scatters a defective (Jordan) eigenvalue by ~sqrt(eps * scale), which
# can exceed 1e-7; desk-scale angle separation is >= 1e-3, so merging up to
# 1e-6 is unambiguous while the (1x, 10x) band stays a hard diagnostic
CLUSTER_TOL = 1e-6
KERNEL_TOL = 1e-8


class SymplecticError(ValueError):
    """Input fails a symplectic-structure validation."""


class UnsupportedDegeneracyError(SymplecticError):
    """Jordan structure at a unit eigenvalue beyond what the library models
    (size >= 3 blocks)."""


class AmbiguousSpectrumError(SymplecticError):
    """Two eigenvalue families sit within merging distance of each other."""


def standard_j(dim: int) -> np.ndarray:
    m = dim // 2
    j = np.zeros((dim, dim))
    j[:m, m:] = -np.eye(m)
    j[m:, :m] = np.eye(m)
    return j


def is_symplectic(mat: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    if mat.ndim != 2 or mat.shape[1] != n or n % 2:
        return False
    j = standard_j(n)
    scale = max(1.0, np.linalg.norm(mat, ord=2) ** 2)
    return bool(np.linalg.norm(mat.T @ j @ mat - j) <= tol * scale)


def check_symplectic(mat: np.ndarray, tol: float = SYMPLECTIC_TOL) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if not is_symplectic(mat, tol):
        raise SymplecticError("matrix is not symplectic within tolerance")
    det = np.linalg.det(mat)
    if abs(det - 1.0) > 1e-6 * max(1.0, abs(det)):
        raise SymplecticError(f"symplectic matrix must have det 1, got {det}")
    return mat


def diamond(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Symplectic direct sum with interleaved (A|B / C|D) block layout."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ma, mb = a.shape[0] // 2, b.shape[0] // 2
    out = np.zeros((2 * (ma + mb), 2 * (ma + mb)))
    # quadrants of each factor
    out[:ma, :ma] = a[:ma, :ma]
    out[:ma, ma + mb : 2 * ma + mb] = a[:ma, ma:]
    out[ma + mb : 2 * ma + mb, :ma] = a[ma:, :ma]
    out[ma + mb : 2 * ma + mb, ma + mb : 2 * ma + mb] = a[ma:, ma:]
    out[ma : ma + mb, ma : ma + mb] = b[:mb, :mb]
    out[ma : ma + mb, 2 * ma + mb :] = b[:mb, mb:]
    out[2 * ma + mb :, ma : ma + mb] = b[mb:, :mb]
    out[2 * ma + mb :, 2 * ma + mb :] = b[mb:, mb:]
    return out


def diamond_many(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(mats[0], dtype=float)
    for m in mats[1:]:
        out = diamond(out, m)
    return out


# ---------------------------------------------------------------------------
# spectra with Krein data
# ---------------------------------------------------------------------------

@dataclass
class EigenFamily:
    """One eigenvalue with its algebraic multiplicity and, when it lies on the
    unit circle, the inertia of the Krein form on its generalized eigenspace."""

    value: complex
    multiplicity: int
    on_circle: bool
    krein_pos: int = 0
    krein_neg: int = 0

    @property
    def angle_turns(self) -> float:
        return (cmath.phase(self.value) / (2 * math.pi)) % 1.0


@dataclass
class SpectralData:
    dim: int
    families: List[EigenFamily]

    @property
    def m0(self) -> int:
        """Total algebraic multiplicity of negative real eigenvalues."""
        return sum(
            f.multiplicity
            for f in self.families
            if abs(f.value.imag) == 0.0 and f.value.real < 0
        )

    def unit_families(self) -> List[EigenFamily]:
        return [f for f in self.families if f.on_circle]

    def family_at(self, value: complex, tol: float = CLUSTER_TOL) -> Optional[EigenFamily]:
        for f in self.families:
            if abs(f.value - value) <= tol:
                return f
        return None


def _generalized_eigenspace(mat: np.ndarray, lam: complex, mult: int) -> np.ndarray:
    """Orthonormal basis (columns) of ker((M - lam)^2), complex."""
    a = mat.astype(complex) - lam * np.eye(mat.shape[0])
    a2 = a @ a
    _u, s, vh = np.linalg.svd(a2)
    scale = max(s[0], 1.0)
    null_mask = s <= 1e-10 * scale
    basis = vh.conj().T[:, null_mask]
    if basis.shape[1] < mult:
        raise UnsupportedDegeneracyError(
            f"Jordan structure of size >= 3 at eigenvalue {lam:.6g} "
            "(unsupported degeneracy)"
        )
    return basis[:, :]


def _krein_inertia(mat: np.ndarray, lam: complex, mult: int) -> Tuple[int, int]:
    """Inertia (pos, neg) of h(x, y) = y* (-iJ) x on the generalized
    eigenspace of the unit eigenvalue lam."""
    basis = _generalized_eigenspace(mat, lam, mult)
    if basis.shape[1] != mult:
        raise AmbiguousSpectrumError(
            f"generalized eigenspace at {lam:.6g} has dimension "
            f"{basis.shape[1]}, expected multiplicity {mult}"
        )
    j = standard_j(mat.shape[0])
    h = basis.conj().T @ (-1j * j) @ basis
    h = (h + h.conj().T) / 2
    ev = np.linalg.eigvalsh(h)
    tol = 1e-8 * max(1.0, float(np.max(np.abs(ev))) if ev.size else 1.0)
    pos = int(np.sum(ev > tol))
    neg = int(np.sum(ev < -tol))
    if pos + neg != mult:
        raise UnsupportedDegeneracyError(
            f"degenerate Krein form at eigenvalue {lam:.6g}; Jordan structure "
            "is beyond the supported size-2 blocks"
        )
    return pos, neg


def spectral_data(mat: np.ndarray, tol: float = CLUSTER_TOL) -> SpectralData:
    """Cluster the spectrum into conjugate/reciprocal families and attach
    Krein inertia to every unit eigenvalue."""
    mat = check_symplectic(mat)
    raw = np.linalg.eigvals(mat)
    values: List[complex] = []
    counts: List[int] = []
    for lam in raw:
        placed = False
        for i, v in enumerate(values):
            if abs(lam - v) <= tol:
                values[i] = (v * counts[i] + lam) / (counts[i] + 1)
                counts[i] += 1
                placed = True
                break
        if not placed:
            values.append(complex(lam))
            counts.append(1)
    # distinct clusters too close to each other cannot be trusted
    for i in range(len(values)):
        for k in range(i + 1, len(values)):
            gap = abs(values[i] - values[k])
            if gap < 10 * tol:
                raise AmbiguousSpectrumError(
                    f"eigenvalue clusters {values[i]:.9g} and {values[k]:.9g} "
                    f"are within {gap:.3g} of merging"
                )
    families = []
    for v, c in zip(values, counts):
        # snap to the structural loci; cluster means recenter the Jordan
        # scatter, so the on-circle test may use the cluster tolerance
        if abs(v.imag) <= tol:
            v = complex(v.real, 0.0)
        on_circle = abs(abs(v) - 1.0) <= (UNIT_CIRCLE_TOL if c == 1 else tol)
        if on_circle:
            v = v / abs(v)
            if abs(v - 1) <= tol:
                v = complex(1.0)
            elif abs(v + 1) <= tol:
                v = complex(-1.0)
        fam = EigenFamily(value=v, multiplicity=c, on_circle=on_circle)
        if on_circle:
            fam.krein_pos, fam.krein_neg = _krein_inertia(mat, v, c)
        families.append(fam)
    return SpectralData(dim=mat.shape[0], families=families)


def nullity_omega(mat: np.ndarray, omega: complex, tol: float = KERNEL_TOL) -> int:
    """Complex kernel dimension of (M - omega*Id) by singular-value
    thresholding."""
    if abs(abs(omega) - 1.0) > 1e-6:
        raise ValueError(f"omega must lie on the unit circle, got {omega}")
    mat = np.asarray(mat, dtype=float)
    a = mat.astype(complex) - omega * np.eye(mat.shape[0])
    s = np.linalg.svd(a, compute_uv=False)
    scale = max(float(s[0]), 1.0)
    return int(np.sum(s <= tol * scale))


# ---------------------------------------------------------------------------
# basic normal forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasicNormalForm:
    """Tagged basic normal form.

    kind 'D'  : diag(lam, 1/lam), lam real, |lam| != 1
    kind 'N1' : [[lam, a], [0, lam]], lam in {1, -1}, a in {-1, 0, 1}
    kind 'R'  : rotation by angle 2*pi*turns, turns in (0,1) \\ {1/2}
    kind 'N2' : [[R, b], [0, R]] at angle 2*pi*turns, with triviality flag
    """

    kind: str
    lam: Optional[float] = None
    a: Optional[int] = None
    turns: Optional[Scalar] = None
    trivial: Optional[bool] = None
    b: Optional[tuple] = None  # stored row-major ((b1, b2), (b3, b4))

    @property
    def dim(self) -> int:
        return 4 if self.kind == "N2" else 2

    def angle(self) -> float:
        return 2 * math.pi * to_float(self.turns)


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def n2_offdiag_block(turns, trivial: bool, scale: float = 1.0) -> tuple:
    """A b-block making N2(e^{i*theta}, b) symplectic with the requested
    triviality; theta = 2*pi*turns.

    Symplecticity of [[R, b], [0, R]] forces R^T b symmetric, i.e.
    (b2 - b3) cos(theta) + (b1 + b4) sin(theta) = 0, and triviality is the
    sign of (b2 - b3) sin(theta).
    """
    theta = 2 * math.pi * to_float(turns)
    s, c = math.sin(theta), math.cos(theta)
    if abs(s) < 1e-12:
        raise ValueError("N2 angle must avoid 0 and pi")
    diff = scale if (trivial == (s > 0)) else -scale  # b2 - b3
    b2, b3 = diff / 2, -diff / 2
    b1 = b4 = -diff * c / (2 * s)
    return ((b1, b2), (b3, b4))


def make_normal_form(spec: BasicNormalForm) -> np.ndarray:
    """Realize a basic normal form as a literal matrix (validated)."""
    if spec.kind == "D":
        lam = float(spec.lam)
        if lam == 0 or abs(abs(lam) - 1.0) <= 1e-12:
            raise ValueError("D(lam) needs a real lam off the unit circle")
        return np.array([[lam, 0.0], [0.0, 1.0 / lam]])
    if spec.kind == "N1":
        if spec.lam not in (1, -1, 1.0, -1.0):
            raise ValueError("N1 needs lam in {1, -1}")
        a = 0 if spec.a is None else spec.a
        return np.array([[float(spec.lam), float(a)], [0.0, float(spec.lam)]])
    if spec.kind == "R":
        t = frac_part(as_scalar(spec.turns))
        tf = to_float(t)
        if tf <= 0 or tf == 0.5:
            raise ValueError("R(theta) needs theta in (0, pi) u (pi, 2pi)")
        return _rotation(2 * math.pi * tf)
    if spec.kind == "N2":
        t = frac_part(as_scalar(spec.turns))
        b = spec.b
        if b is None:
            if spec.trivial is None:
                raise ValueError("N2 needs either b or a triviality flag")
            b = n2_offdiag_block(t, spec.trivial)
        barr = np.asarray(b, dtype=float)
        theta = 2 * math.pi * to_float(t)
        s, c = math.sin(theta), math.cos(theta)
        if abs(s) < 1e-12:
            raise ValueError("N2 angle must avoid 0 and pi")
        if barr[0, 1] == barr[1, 0]:
            raise ValueError("N2 needs b2 != b3")
        constraint = (barr[0, 1] - barr[1, 0]) * c + (barr[0, 0] + barr[1, 1]) * s
        if abs(constraint) > 1e-9 * max(1.0, float(np.abs(barr).max())):
            raise ValueError(
                "N2 parameter b violates symplecticity: "
                "(b2-b3)cos(theta) + (b1+b4)sin(theta) must vanish"
            )
        if spec.trivial is not None:
            flag = (barr[0, 1] - barr[1, 0]) * s > 0
            if flag != spec.trivial:
                raise ValueError("N2 triviality flag contradicts (b2-b3)sin(theta)")
        r = _rotation(theta)
        mat = np.zeros((4, 4))
        mat[:2, :2] = r
        mat[:2, 2:] = barr
        mat[2:, 2:] = r
        return check_symplectic(mat)
    raise ValueError(f"unknown basic normal form kind {spec.kind!r}")


def realize_blocks(blocks: Sequence[BasicNormalForm]) -> np.ndarray:
    return diamond_many([make_normal_form(b) for b in blocks])


# ---------------------------------------------------------------------------
# decomposition into basic normal forms
# ---------------------------------------------------------------------------

@dataclass
class NormalFormDecomposition:
    """Multiset of basic normal forms matching the unit-circle data of a
    matrix, plus a hyperbolic rest carrying all off-circle spectrum."""

    dim: int
    blocks: List[BasicNormalForm]
    rest_eigenvalues: List[complex] = field(default_factory=list)

    @property
    def rest_dim(self) -> int:
        return self.dim - sum(b.dim for b in self.blocks)

    @property
    def rest_m0(self) -> int:
        return sum(1 for v in self.rest_eigenvalues if abs(v.imag) == 0 and v.real < 0)

    def hyperbolic_rest(self) -> Optional[np.ndarray]:
        """A symplectic realization of the off-circle spectrum (or None)."""
        if not self.rest_eigenvalues:
            return None
        used = []
        mats = []
        vals = list(self.rest_eigenvalues)
        while vals:
            lam = vals.pop(0)
            if abs(lam.imag) == 0:
                inv = 1.0 / lam.real
                k = min(range(len(vals)), key=lambda i: abs(vals[i] - inv))
                vals.pop(k)
                mats.append(np.array([[lam.real, 0.0], [0.0, inv]]))
            else:
                partners = [lam.conjugate(), 1.0 / lam, (1.0 / lam).conjugate()]
                for p in partners:
                    k = min(range(len(vals)), key=lambda i: abs(vals[i] - p))
                    vals.pop(k)
                r = abs(lam)
                rot = _rotation(cmath.phase(lam))
                top = np.hstack([r * rot, np.zeros((2, 2))])
                bot = np.hstack([np.zeros((2, 2)), rot / r])
                mats.append(np.vstack([top, bot]))
            used.append(lam)
        return diamond_many(mats) if mats else None

    def nullity_at(self, turns) -> int:
        """nu_omega from the block model at omega = e^{2*pi*i*turns}."""
        t = frac_part(as_scalar(turns))
        total = 0
        for blk in self.blocks:
            total += _block_nullity_at(blk, t)
        return total

    def unit_angle_turns(self) -> list:
        """Sorted distinct turns in (0,1) carried by blocks, plus 0 if an
        eigenvalue-1 block is present."""
        seen = []
        for blk in self.blocks:
            for t in _block_angles(blk):
                if not any(_turns_equal(t, u) for u in seen):
                    seen.append(t)
        return sorted(seen, key=to_float)


def _turns_equal(a, b, tol: float = 1e-9) -> bool:
    if is_exact(a) and is_exact(b):
        return as_scalar(a) == as_scalar(b)
    return abs(to_float(a) - to_float(b)) <= tol


def _block_angles(blk: BasicNormalForm) -> list:
    if blk.kind == "D":
        return []
    if blk.kind == "N1":
        return [Fraction(0)] if blk.lam > 0 else [Fraction(1, 2)]
    t = frac_part(as_scalar(blk.turns))
    one = Fraction(1)
    return [t, one - t] if is_exact(t) else [t, 1.0 - to_float(t)]


def _block_nullity_at(blk: BasicNormalForm, t) -> int:
    if blk.kind == "D":
        return 0
    if blk.kind == "N1":
        home = Fraction(0) if blk.lam > 0 else Fraction(1, 2)
        if _turns_equal(t, home):
            return 2 if blk.a == 0 else 1
        return 0
    bt = frac_part(as_scalar(blk.turns))
    if _turns_equal(t, bt) or _turns_equal(t, 1 - bt if is_exact(bt) else 1.0 - to_float(bt)):
        return 1
    return 0


def _inertia_of_form(mat: np.ndarray, basis: np.ndarray, shift: float) -> Tuple[int, int, np.ndarray]:
    """Inertia of Q(v) = <J (M - shift) v, v> restricted to span(basis)."""
    j = standard_j(mat.shape[0])
    a = mat - shift * np.eye(mat.shape[0])
    s = j @ a
    s = (s + s.T) / 2
    f = basis.T @ s @ basis
    f = (f + f.T) / 2
    ev = np.linalg.eigvalsh(f)
    scale = max(1.0, float(np.max(np.abs(ev))) if ev.size else 1.0)
    tol = 1e-8 * scale
    return int(np.sum(ev > tol)), int(np.sum(ev < -tol)), ev


def _real_generalized_eigenspace(mat: np.ndarray, lam: float, mult: int) -> np.ndarray:
    a = mat - lam * np.eye(mat.shape[0])
    a2 = a @ a
    _u, s, vh = np.linalg.svd(a2)
    scale = max(s[0], 1.0)
    basis = vh.T[:, s <= 1e-10 * scale]
    if basis.shape[1] != mult:
        raise UnsupportedDegeneracyError(
            f"Jordan structure of size >= 3 at eigenvalue {lam} (unsupported)"
        )
    return basis


def _n2_trivial_flag(mat: np.ndarray, omega: complex) -> bool:
    """Triviality of the Jordan pair at the unit eigenvalue omega (upper
    half-plane representative).

    Uses the conjugation-invariant sign xi = Re[(w* (-iJ) e) * i * conj(omega)]
    where e spans ker(M - omega) and (M - omega) w = e; xi > 0 iff the block
    is non-trivial (calibrated against the literal N2 matrices).
    """
    n = mat.shape[0]
    a = mat.astype(complex) - omega * np.eye(n)
    _u, s, vh = np.linalg.svd(a)
    e = vh.conj().T[:, -1]
    w, *_ = np.linalg.lstsq(a, e, rcond=None)
    resid = np.linalg.norm(a @ w - e)
    if resid > 1e-6:
        raise UnsupportedDegeneracyError(
            f"cannot resolve Jordan chain at eigenvalue {omega:.6g}"
        )
    j = standard_j(n)
    h_ew = w.conj() @ ((-1j * j) @ e)
    xi = (h_ew * 1j * omega.conjugate()).real
    if abs(xi) < 1e-10:
        raise UnsupportedDegeneracyError(
            f"N2 triviality sign at {omega:.6g} is numerically ambiguous"
        )
    return xi < 0


def decompose_normal_form(
    mat: np.ndarray,
    exact_turns: Optional[dict] = None,
) -> NormalFormDecomposition:
    """Decompose the homotopy-component data of a symplectic matrix into
    basic normal forms plus a hyperbolic rest.

    ``exact_turns`` optionally maps float turn values to exact scalars; when
    a detected unit angle matches one within 1e-9, the exact value is carried
    into the block (the symbolic path machinery uses this hook).

    Exact for diamond-assemblies of basic forms (possibly conjugated); for
    general input the result matches spectrum, per-omega nullities, Krein
    counts and N2-triviality of the input.
    """
    mat = check_symplectic(mat)
    spec = spectral_data(mat)
    blocks: List[BasicNormalForm] = []
    rest: List[complex] = []
    handled = set()
    for fam in spec.families:
        if not fam.on_circle:
            rest.extend([fam.value] * fam.multiplicity)
            continue
        v = fam.value
        if v.imag < -CLUSTER_TOL:
            continue  # handled with the conjugate partner
        if abs(v.imag) <= CLUSTER_TOL and v.real > 0:
            # eigenvalue +1
            blocks.extend(_blocks_at_real_unit(mat, +1.0, fam.multiplicity))
        elif abs(v.imag) <= CLUSTER_TOL and v.real < 0:
            blocks.extend(_blocks_at_real_unit(mat, -1.0, fam.multiplicity))
        else:
            conj = spec.family_at(v.conjugate())
            if conj is None or conj.multiplicity != fam.multiplicity:
                raise AmbiguousSpectrumError(
                    f"unit eigenvalue {v:.9g} lacks a matching conjugate family"
                )
            blocks.extend(
                _blocks_at_complex_unit(mat, fam, exact_turns or {})
            )
        handled.add((round(v.real, 9), round(abs(v.imag), 9)))
    deco = NormalFormDecomposition(dim=mat.shape[0], blocks=blocks, rest_eigenvalues=rest)
    if deco.rest_dim != len(rest):
        raise SymplecticError(
            "block dimensions inconsistent with off-circle spectrum"
        )
    return deco


def _blocks_at_real_unit(mat: np.ndarray, lam: float, mult: int) -> List[BasicNormalForm]:
    """N1-type blocks at eigenvalue +-1 from the inertia of
    Q(v) = <J(M - lam)v, v> on the generalized eigenspace."""
    basis = _real_generalized_eigenspace(mat, lam, mult)
    p_pos, p_neg, _ev = _inertia_of_form(mat, basis, lam)
    if mult % 2:
        raise SymplecticError(f"odd multiplicity {mult} at eigenvalue {lam}")
    p_zero2 = mult - 2 * (p_pos + p_neg)
    if p_zero2 < 0 or p_zero2 % 2:
        raise UnsupportedDegeneracyError(
            f"Jordan structure at eigenvalue {lam} beyond size-2 blocks"
        )
    p0 = p_zero2 // 2
    out = []
    out.extend([BasicNormalForm(kind="N1", lam=lam, a=1)] * p_pos)
    out.extend([BasicNormalForm(kind="N1", lam=lam, a=0)] * p0)
    out.extend([BasicNormalForm(kind="N1", lam=lam, a=-1)] * p_neg)
    return out


def _blocks_at_complex_unit(
    mat: np.ndarray, fam: EigenFamily, exact_turns: dict
) -> List[BasicNormalForm]:
    v = fam.value
    t_float = fam.angle_turns
    t: Scalar = t_float
    for tf, texact in exact_turns.items():
        if abs(tf - t_float) <= 1e-9:
            t = texact
            break
    geo = nullity_omega(mat, v)
    alg = fam.multiplicity
    if geo == alg:
        # semisimple: krein_pos copies rotating by +theta, krein_neg by -theta
        pos, neg = fam.krein_pos, fam.krein_neg
        t_conj = 1 - as_scalar(t) if is_exact(t) else 1.0 - t_float
        out = [BasicNormalForm(kind="R", turns=t)] * pos
        out += [BasicNormalForm(kind="R", turns=t_conj)] * neg
        return out
    if alg == 2 and geo == 1:
        trivial = _n2_trivial_flag(mat, v)
        return [BasicNormalForm(kind="N2", turns=t, trivial=trivial)]
    raise UnsupportedDegeneracyError(
        f"unit eigenvalue {v:.6g} with algebraic multiplicity {alg} and "
        f"geometric multiplicity {geo} is beyond the supported normal forms"
    )


# ---------------------------------------------------------------------------
# eigenvalue-level iteration classification
# ---------------------------------------------------------------------------

def classify_iteration(
    mat: np.ndarray, k: int, qmax: int = QMAX_DEFAULT
) -> dict:
    """Admissibility and good/bad data for the k-th iterate of a return map.

    admissible: no eigenvalue lam != 1 with lam^k = 1 (root-of-unity test by
    continued fractions, denominator bound ``qmax``).
    neg_interval_count: total multiplicity of eigenvalues in (-1, 0).
    good_if_iterate: False exactly when the count is odd and k is even.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    spec = spectral_data(np.asarray(mat, dtype=float))
    admissible = True
    caveats = []
    for fam in spec.families:
        v = fam.value
        if abs(v - 1) <= CLUSTER_TOL:
            continue
        if not fam.on_circle:
            continue
        if abs(v + 1) <= CLUSTER_TOL:
            if k % 2 == 0:
                admissible = False
            continue
        order = root_of_unity_order(fam.angle_turns, qmax=qmax)
        if order is None:
            w = rationality_witness(fam.angle_turns, qmax=qmax)
            if w["kind"] == "irrational_within_bound":
                caveats.append(
                    f"eigenvalue angle {fam.angle_turns:.12g} treated as "
                    f"irrational within denominator bound {qmax}"
                )
            continue
        if k % order == 0:
            admissible = False
    neg = sum(
        f.multiplicity
        for f in spec.families
        if abs(f.value.imag) == 0 and -1 < f.value.real < 0
    )
    return {
        "admissible": admissible,
        "good_if_iterate": not (neg % 2 == 1 and k % 2 == 0),
        "neg_interval_count": neg,
        "qmax": qmax,
        "caveats": caveats,
    }


# ---------------------------------------------------------------------------
# random generators (used heavily by the test-suite)
# ---------------------------------------------------------------------------

def random_symplectic(dim: int, rng: np.random.Generator, scale: float = 0.7) -> np.ndarray:
    """Random symplectic matrix exp(J S) with S symmetric."""
    from scipy.linalg import expm

    s = rng.normal(scale=scale, size=(dim, dim))
    s = (s + s.T) / 2
    return expm(standard_j(dim) @ s)
