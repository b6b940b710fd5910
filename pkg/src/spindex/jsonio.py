"""JSON encodings shared by the library and the command line.

Schemas
-------
path      {"dim": 2m, "segments": [{"atoms": [atom, ...]}, ...]}
          or {"dim": 2m, "samples": [{"t": t, "matrix": rows}, ...]}
atom      {"kind": "rotation", "angle": radians}        (or "turns": value)
          {"kind": "hyperbolic", "rate": c}
          {"kind": "shear", "a": a}
          {"kind": "n2", "angle": radians, "trivial": bool}
          {"kind": "generic", "target": rows}
          {"kind": "identity", "size": 2k}
system    {"n": n, "orbits": [{"label": l, "action": A, "path": path}, ...]}
          or {"ellipsoid": {"r": [values...]}}
value     number, or exact forms {"rat": [p, q]},
          {"quad": {"a": [p, q], "b": [p, q], "d": d}}, or the strings
          "sqrt2" / "phi" / "phi^2"

Matrices are row-major arrays of rows.  Emitted reports use sorted keys and
floats printed with 17 significant digits, so identical inputs produce
byte-identical output.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

import numpy as np

from .scalars import QuadraticIrrational, to_float
from .paths import (
    GenericAtom,
    HyperbolicAtom,
    IdentityAtom,
    N2Atom,
    RotationAtom,
    Segment,
    ShearAtom,
    SymplecticPath,
)
from .path_index import IndexReport
from .cijt import CijtEvent
from .certifier import Certificate
from .orbits import OrbitSystem, PrimeOrbitSpec, ellipsoid_system, PHI, SQRT2

__all__ = [
    "dumps_stable",
    "decode_value",
    "decode_path",
    "encode_path",
    "decode_system",
    "report_to_json",
    "event_to_json",
    "certificate_to_json",
    "JsonInputError",
]

TWO_PI = 2 * math.pi


class JsonInputError(ValueError):
    """Malformed or inconsistent JSON input."""


# ---------------------------------------------------------------------------
# deterministic dumping
# ---------------------------------------------------------------------------

def _stable(obj, out: list) -> None:
    if obj is None or obj is True or obj is False:
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating, Fraction, QuadraticIrrational)):
        v = to_float(obj)
        if math.isnan(v) or math.isinf(v):
            raise ValueError("non-finite float in report")
        text = format(v, ".17g")
        out.append(text)
    elif isinstance(obj, dict):
        out.append("{")
        first = True
        for key in sorted(obj):
            if not isinstance(key, str):
                raise ValueError(f"non-string key {key!r} in report")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key))
            out.append(":")
            _stable(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _stable(item, out)
        out.append("]")
    elif isinstance(obj, np.ndarray):
        _stable(obj.tolist(), out)
    else:
        raise ValueError(f"cannot serialize {type(obj)} deterministically")


def dumps_stable(obj) -> str:
    out: list = []
    _stable(obj, out)
    return "".join(out)


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------

_NAMED_VALUES = {
    "sqrt2": SQRT2,
    "phi": PHI,
    "phi^2": PHI * PHI,
}


def decode_value(v):
    """Number, exact-form object or named constant -> scalar."""
    if isinstance(v, bool):
        raise JsonInputError("boolean is not a numeric value")
    if isinstance(v, (int, float)):
        return Fraction(v) if isinstance(v, int) else float(v)
    if isinstance(v, str):
        if v in _NAMED_VALUES:
            return _NAMED_VALUES[v]
        raise JsonInputError(f"unknown named value {v!r}")
    if isinstance(v, dict):
        if "rat" in v:
            p, q = v["rat"]
            return Fraction(int(p), int(q))
        if "quad" in v:
            spec = v["quad"]
            return QuadraticIrrational(
                Fraction(*spec["a"]), Fraction(*spec["b"]), int(spec["d"])
            )
    raise JsonInputError(f"cannot decode value {v!r}")


def _decode_turns(atom: dict):
    if "turns" in atom:
        return decode_value(atom["turns"])
    if "angle" in atom:
        angle = atom["angle"]
        if isinstance(angle, dict) or isinstance(angle, str):
            raise JsonInputError("exact values go under 'turns', not 'angle'")
        return float(angle) / TWO_PI
    raise JsonInputError(f"atom needs 'angle' or 'turns': {atom!r}")


def decode_atom(atom: dict):
    kind = atom.get("kind")
    if kind == "rotation":
        return RotationAtom(_decode_turns(atom))
    if kind == "hyperbolic":
        return HyperbolicAtom(float(atom["rate"]))
    if kind == "shear":
        return ShearAtom(float(atom["a"]))
    if kind == "n2":
        return N2Atom(
            _decode_turns(atom),
            trivial=bool(atom["trivial"]),
            scale=float(atom.get("scale", 1.0)),
        )
    if kind == "generic":
        target = np.asarray(atom["target"], dtype=float)
        return GenericAtom(GenericAtom.to_matrix_tuple(target))
    if kind == "identity":
        return IdentityAtom(int(atom.get("size", 2)))
    raise JsonInputError(f"unknown atom kind {kind!r}")


def decode_path(data: dict) -> SymplecticPath:
    if not isinstance(data, dict) or "dim" not in data:
        raise JsonInputError("path JSON needs a 'dim' field")
    dim = int(data["dim"])
    if dim < 2 or dim % 2:
        raise JsonInputError(f"path dimension must be a positive even integer, got {dim}")
    if "segments" in data:
        segs = []
        for seg in data["segments"]:
            atoms = tuple(decode_atom(a) for a in seg["atoms"])
            segs.append(Segment(atoms=atoms))
            if segs[-1].dim != dim:
                raise JsonInputError(
                    f"segment dimension {segs[-1].dim} != path dim {dim}"
                )
        return SymplecticPath(dim=dim, segments=segs)
    if "samples" in data:
        samples = [(float(s["t"]), np.asarray(s["matrix"], dtype=float)) for s in data["samples"]]
        for _t, m in samples:
            if m.shape != (dim, dim):
                raise JsonInputError("sample matrix shape mismatch")
        return SymplecticPath(dim=dim, samples=samples)
    raise JsonInputError("path JSON needs 'segments' or 'samples'")


def encode_path(path: SymplecticPath) -> dict:
    if path.is_symbolic:
        segs = [{"atoms": [_encode_atom(a) for a in seg.atoms]} for seg in path.segments]
        return {"dim": path.dim, "segments": segs}
    return {
        "dim": path.dim,
        "samples": [{"t": t, "matrix": m.tolist()} for t, m in path.samples],
    }


def _encode_atom(a) -> dict:
    if isinstance(a, RotationAtom):
        return {"kind": "rotation", "angle": TWO_PI * to_float(a.turns)}
    if isinstance(a, HyperbolicAtom):
        return {"kind": "hyperbolic", "rate": a.rate}
    if isinstance(a, ShearAtom):
        return {"kind": "shear", "a": a.a}
    if isinstance(a, N2Atom):
        return {
            "kind": "n2",
            "angle": TWO_PI * to_float(a.turns),
            "trivial": a.trivial,
            "scale": a.scale,
        }
    if isinstance(a, GenericAtom):
        return {"kind": "generic", "target": [list(r) for r in a.target]}
    if isinstance(a, IdentityAtom):
        return {"kind": "identity", "size": a.size}
    raise ValueError(f"unknown atom {a!r}")


def decode_system(data: dict, qmax: int) -> OrbitSystem:
    if "ellipsoid" in data:
        radii = [decode_value(v) for v in data["ellipsoid"]["r"]]
        return ellipsoid_system(radii, qmax=qmax)
    if "orbits" not in data or "n" not in data:
        raise JsonInputError("system JSON needs 'n' and 'orbits' (or 'ellipsoid')")
    n = int(data["n"])
    orbits = []
    for o in data["orbits"]:
        if "action_over_2pi" in o:
            # exact actions are carried in units of 2*pi
            a2p = decode_value(o["action_over_2pi"])
        else:
            a2p = float(o["action"]) / TWO_PI
        orbits.append(
            PrimeOrbitSpec(
                label=str(o["label"]),
                action_2pi=a2p,
                path=decode_path(o["path"]),
            )
        )
    return OrbitSystem(n=n, orbits=orbits)


# ---------------------------------------------------------------------------
# report encoding
# ---------------------------------------------------------------------------

def report_to_json(rep: IndexReport) -> dict:
    return {
        "dim": rep.dim,
        "mean": to_float(rep.mean),
        "mu_minus": rep.lower,
        "mu_plus": rep.upper,
        "nullity": rep.nullity,
        "splitting_at_one": list(rep.splitting_at_one),
        "C": rep.C,
        "dynamically_convex": rep.dyn_convex,
        "circle_data": [
            {
                "turns": to_float(t),
                "angle": TWO_PI * to_float(t),
                "s_plus": sp,
                "s_minus": sm,
                "nu_omega": nu,
            }
            for t, sp, sm, nu in rep.circle_data
        ],
    }


def event_to_json(e: CijtEvent) -> dict:
    return {
        "d": e.d,
        "k": list(e.k),
        "eta": to_float(e.eta),
        "N": e.N,
        "deviations": list(e.deviations),
        "checks": _plain(e.checks),
    }


def certificate_to_json(c: Certificate) -> dict:
    return {
        "orbit": c.orbit,
        "verdict": c.verdict,
        "failed_step": c.failed_step,
        "failure": c.failure,
        "events": _plain(c.events),
        "step1": _plain(c.step1),
        "step2": _plain(c.step2),
        "step3": _plain(c.step3),
        "step4": _plain(c.step4),
    }


def _plain(obj: Any):
    """Recursive cast to plain JSON types (exact scalars to floats)."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (Fraction, QuadraticIrrational)):
        return to_float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj
