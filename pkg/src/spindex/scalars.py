"""Exact scalar arithmetic for angles, mean indices and actions.

Three scalar kinds coexist throughout the library:

  * ``Fraction`` -- exact rationals,
  * ``QuadraticIrrational`` -- numbers a + b*sqrt(d) with rational a, b and a
    fixed non-square d (enough for the built-in fixtures, whose rotation
    numbers live in Q(sqrt(2)) or Q(sqrt(5))),
  * ``float`` -- everything else, protected by explicit guard bands.

Floors, ceilings and comparisons on the exact kinds are computed exactly, so
the ceiling jumps in the iteration formulas never depend on rounding.  Floats
near an integer raise ``ResonantValueError`` instead of silently tie-breaking.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

__all__ = [
    "QuadraticIrrational",
    "Scalar",
    "ResonantValueError",
    "as_scalar",
    "to_float",
    "is_exact",
    "exact_floor",
    "exact_ceil",
    "guarded_floor",
    "guarded_ceil",
    "guarded_round",
    "frac_part",
    "is_integer_value",
    "snap_integer",
    "continued_fraction_convergents",
    "rationality_witness",
    "QMAX_DEFAULT",
]

Scalar = Union[int, Fraction, "QuadraticIrrational", float]

#: default denominator bound for root-of-unity / rationality detection
QMAX_DEFAULT = 10**6

#: guard band around integers for float floor/ceil in iteration formulas
CEILING_GUARD = 1e-9

#: partial quotients at least this large terminate a float's continued
#: fraction as "rational within working precision"
CF_EXPLOSION = 10**7


class ResonantValueError(ValueError):
    """A float landed inside the guard band of an integer where a floor or
    ceiling jump decides an index; exact input is required to resolve it."""


class QuadraticIrrational:
    """Exact number a + b*sqrt(d), a and b rational, d a non-square integer > 1.

    Arithmetic stays inside one quadratic field; mixing different d is an
    error unless one operand is rational (b == 0).
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 2):
        self.a = Fraction(a)
        self.b = Fraction(b)
        if d <= 1 or math.isqrt(d) ** 2 == d:
            raise ValueError(f"d must be a non-square integer > 1, got {d}")
        self.d = int(d)

    # -- coercion ---------------------------------------------------------
    def _coerce(self, other) -> "QuadraticIrrational":
        if isinstance(other, QuadraticIrrational):
            if other.d != self.d and other.b != 0 and self.b != 0:
                raise ValueError(f"cannot mix sqrt({self.d}) and sqrt({other.d})")
            d = self.d if self.b != 0 or other.b == 0 else other.d
            return QuadraticIrrational(other.a, other.b, d)
        if isinstance(other, (int, Fraction)):
            return QuadraticIrrational(other, 0, self.d)
        return NotImplemented

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        d = self.d if self.b != 0 else o.d
        return QuadraticIrrational(self.a + o.a, self.b + o.b, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticIrrational(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        d = self.d if self.b != 0 else o.d
        return QuadraticIrrational(
            self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticIrrational":
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("zero quadratic irrational")
        return QuadraticIrrational(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    # -- order ------------------------------------------------------------
    def sign(self) -> int:
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        if self.a == 0:
            return 1 if self.b > 0 else -1
        if self.a > 0 and self.b > 0:
            return 1
        if self.a < 0 and self.b < 0:
            return -1
        big_a = self.a * self.a > self.b * self.b * self.d
        if self.a > 0:
            return 1 if big_a else -1
        return -1 if big_a else 1

    def _cmp(self, other) -> int:
        diff = self - other
        if diff is NotImplemented:
            raise TypeError(f"cannot compare with {other!r}")
        return diff.sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadraticIrrational):
            if self.b == 0 and other.b == 0:
                return self.a == other.a
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    # -- floor / float ----------------------------------------------------
    def __floor__(self) -> int:
        n = math.floor(float(self))
        # float estimate can be off by one near integers; fix exactly
        while self._cmp(n) < 0:
            n -= 1
        while self._cmp(n + 1) >= 0:
            n += 1
        return n

    def __ceil__(self) -> int:
        return -math.floor(-self)

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError("not rational")
        return self.a

    def __repr__(self):
        if self.b == 0:
            return f"QuadraticIrrational({self.a})"
        return f"QuadraticIrrational({self.a}, {self.b}, d={self.d})"


# ---------------------------------------------------------------------------
# scalar tower helpers
# ---------------------------------------------------------------------------

def as_scalar(x) -> Scalar:
    """Normalize to the scalar tower: ints become Fractions, floats stay."""
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, (Fraction, QuadraticIrrational, float)):
        return x
    raise TypeError(f"not a scalar: {x!r}")


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, QuadraticIrrational))


def to_float(x) -> float:
    return float(x)


def exact_floor(x) -> int:
    """Floor of an exact scalar (no guards needed)."""
    if isinstance(x, (int, Fraction)):
        return math.floor(x)
    if isinstance(x, QuadraticIrrational):
        return math.floor(x)
    raise TypeError(f"exact_floor needs an exact scalar, got {type(x)}")


def exact_ceil(x) -> int:
    if isinstance(x, (int, Fraction)):
        return math.ceil(x)
    if isinstance(x, QuadraticIrrational):
        return math.ceil(x)
    raise TypeError(f"exact_ceil needs an exact scalar, got {type(x)}")


def guarded_floor(x, guard: float = CEILING_GUARD, what: str = "value") -> int:
    """Floor with a resonance guard: floats within ``guard`` of an integer
    raise instead of tie-breaking."""
    if is_exact(x):
        return exact_floor(x)
    n = round(x)
    if abs(x - n) < guard:
        raise ResonantValueError(
            f"{what} = {x!r} lies within {guard} of integer {n}; "
            "exact-angle input required"
        )
    return math.floor(x)


def guarded_ceil(x, guard: float = CEILING_GUARD, what: str = "value") -> int:
    if is_exact(x):
        return exact_ceil(x)
    return guarded_floor(-x, guard, what=what) * -1


def guarded_round(x, guard: float = CEILING_GUARD, what: str = "value") -> int:
    """Nearest integer; exact half-way points raise for floats."""
    if is_exact(x):
        return exact_floor(as_scalar(x) + Fraction(1, 2))
    h = x - 0.5
    n = round(h)
    if abs(h - n) < guard:
        raise ResonantValueError(f"{what} = {x!r} is a guarded rounding tie")
    return math.floor(h) + 1


def frac_part(x) -> Scalar:
    """x - floor(x), staying in the same scalar kind."""
    if is_exact(x):
        return as_scalar(x) - exact_floor(x)
    return x - math.floor(x)


def is_integer_value(x, tol: float = 1e-6) -> bool:
    if isinstance(x, (int,)):
        return True
    if isinstance(x, Fraction):
        return x.denominator == 1
    if isinstance(x, QuadraticIrrational):
        return x.b == 0 and x.a.denominator == 1
    return abs(x - round(x)) <= tol


def snap_integer(x, tol: float = 1e-6, what: str = "value") -> int:
    """Round a quantity that is proven integral; a failed snap is an error."""
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise ValueError(f"{what} = {x} is not an integer")
        return int(x)
    if isinstance(x, QuadraticIrrational):
        if not (x.b == 0 and x.a.denominator == 1):
            raise ValueError(f"{what} = {x!r} is not an integer")
        return int(x.a)
    n = round(x)
    if abs(x - n) > tol:
        raise ValueError(f"{what} = {x!r} fails integer snap (tol {tol})")
    return int(n)


# ---------------------------------------------------------------------------
# continued fractions and rationality witnesses
# ---------------------------------------------------------------------------

def continued_fraction_convergents(x: float, qmax: int):
    """Yield (p, q, a) convergents of x with q <= qmax; a is the partial
    quotient that produced the convergent."""
    p0, q0, p1, q1 = 0, 1, 1, 0  # h_{-2}/k_{-2}, h_{-1}/k_{-1}
    t = x
    for _ in range(64):
        a = math.floor(t)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > qmax:
            return
        yield p1, q1, a
        rem = t - a
        if rem <= 0:
            return
        t = 1.0 / rem
        if t > 2**52:
            return


def rationality_witness(x, qmax: int = QMAX_DEFAULT) -> dict:
    """Decide whether a scalar is rational, with an auditable witness.

    Returns a dict with fields:
      kind: 'rational' | 'irrational' | 'irrational_within_bound'
      p, q: the fraction, when rational
      qmax: the bound used (float inputs only ever certify up to the bound)
      note: human-readable caveat for bounded claims
    """
    if isinstance(x, int):
        return {"kind": "rational", "p": x, "q": 1, "qmax": qmax}
    if isinstance(x, Fraction):
        return {
            "kind": "rational",
            "p": x.numerator,
            "q": x.denominator,
            "qmax": qmax,
        }
    if isinstance(x, QuadraticIrrational):
        if x.is_rational():
            f = x.as_fraction()
            return {
                "kind": "rational",
                "p": f.numerator,
                "q": f.denominator,
                "qmax": qmax,
            }
        return {
            "kind": "irrational",
            "qmax": qmax,
            "note": f"exact quadratic irrational over sqrt({x.d})",
        }
    x = float(x)
    sign = -1 if x < 0 else 1
    ax = abs(x)
    ip = math.floor(ax)
    fx = ax - ip
    if fx == 0.0:
        return {"kind": "rational", "p": sign * ip, "q": 1, "qmax": qmax}
    prev = None
    for p, q, _a in continued_fraction_convergents(fx, qmax):
        err = abs(fx - p / q)
        # a rational float reveals itself by a huge next partial quotient,
        # equivalently by an error far below the 1/q^2 scale of irrationals
        if err < 1.0 / (q * max(q, 1) * CF_EXPLOSION):
            num = sign * (ip * q + p)
            return {"kind": "rational", "p": num, "q": q, "qmax": qmax}
        prev = (p, q, err)
    return {
        "kind": "irrational_within_bound",
        "qmax": qmax,
        "best": prev,
        "note": f"no rational p/q with q <= {qmax} within working precision; "
        "irrationality is asserted only up to this bound",
    }


def root_of_unity_order(turns, qmax: int = QMAX_DEFAULT):
    """Order q of e^{2*pi*i*turns} if it is a root of unity with q <= qmax,
    else None.  ``turns`` is the angle divided by 2*pi."""
    w = rationality_witness(frac_part(turns), qmax=qmax)
    if w["kind"] == "rational":
        q = w["q"]
        return q if q <= qmax else None
    return None
