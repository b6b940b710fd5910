"""Command-line front end.

Subcommands: index, iterate, split, cijt, ellipsoid, degrees, certify.
Every report echoes the full configuration; JSON output is byte-stable
(sorted keys, 17-significant-digit floats).  Exit codes: 0 success, 1 a
verification or certification said no, 2 bad input or parameters.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from .scalars import QMAX_DEFAULT, ResonantValueError, to_float
from .sp_core import SymplecticError, UnsupportedDegeneracyError
from .path_index import index_report, perturbation_oracle
from .splitting import splitting_numbers
from .iteration import IterationProfile, mean_identity_check
from .cijt import compute_N, find_events, find_interchange_events
from .orbits import DegreeBijectionError, degree_assignment, action_ratio_check, ellipsoid_system
from .certifier import certify_system
from .jsonio import (
    JsonInputError,
    certificate_to_json,
    decode_path,
    decode_system,
    decode_value,
    dumps_stable,
    event_to_json,
    report_to_json,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--eta", type=float, default=0.125, help="index-jump budget")
    common.add_argument("--dmax", type=int, default=10**4, help="degree budget for event search")
    common.add_argument("--qmax", type=int, default=QMAX_DEFAULT, help="denominator bound for rationality detection")
    common.add_argument("--cutoff", type=int, default=101, help="degree cutoff for degree tables")
    common.add_argument("--jobs", type=int, default=1, help="parallelism degree (searches may use it internally)")

    p = argparse.ArgumentParser(
        prog="spindex",
        description="Maslov-type index iteration for symplectic paths",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("index", parents=[common], help="index report of a path")
    s.add_argument("path_json")
    s.add_argument("--oracle", action="store_true", help="also run the perturbation oracle")

    s = sub.add_parser("iterate", parents=[common], help="iterated indices of a path")
    s.add_argument("path_json")
    s.add_argument("--k", type=int, required=True)

    s = sub.add_parser("split", parents=[common], help="splitting numbers of a path endpoint")
    s.add_argument("path_json")
    s.add_argument("--omega", type=float, required=True, help="angle in radians")

    s = sub.add_parser("cijt", parents=[common], help="common index jump events of a system")
    s.add_argument("system_json")

    s = sub.add_parser("ellipsoid", parents=[common], help="ellipsoid orbit system")
    s.add_argument("--r", required=True, help="comma-separated radii (numbers or sqrt2/phi/phi^2)")

    s = sub.add_parser("degrees", parents=[common], help="degree assignment of a system")
    s.add_argument("system_json")

    s = sub.add_parser("certify", parents=[common], help="irrational-ellipticity certification")
    s.add_argument("system_json")
    return p


def _load(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise JsonInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise JsonInputError(f"malformed JSON in {path}: {exc}") from exc


def _config(args) -> dict:
    return {
        "command": args.command,
        "eta": args.eta,
        "d_max": args.dmax,
        "q_max": args.qmax,
        "cutoff": args.cutoff,
        "format": args.format,
        "jobs": args.jobs,
    }


def _radii(text: str):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("sqrt2", "phi", "phi^2"):
            out.append(decode_value(tok))
        else:
            try:
                out.append(float(tok))
            except ValueError as exc:
                raise JsonInputError(f"bad radius {tok!r}") from exc
    return out


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    config = _config(args)
    try:
        report, code = _dispatch(args, config)
    except (JsonInputError, UnsupportedDegeneracyError, ResonantValueError) as exc:
        print(f"spindex: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SymplecticError, ValueError) as exc:
        print(f"spindex: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = {"config": config, "result": report}
    if args.format == "json":
        print(dumps_stable(out))
    else:
        _print_text(args.command, report)
    return code


def _dispatch(args, config) -> tuple:
    cmd = args.command
    if cmd == "index":
        path = decode_path(_load(args.path_json))
        rep = index_report(path)
        result = report_to_json(rep)
        result["mean_identity"] = mean_identity_check(rep)
        if args.oracle:
            lo, hi = perturbation_oracle(path)
            result["oracle"] = {"mu_minus": lo, "mu_plus": hi}
            if (lo, hi) != (rep.lower, rep.upper):
                result["oracle"]["agrees"] = False
                return result, EXIT_FAIL
            result["oracle"]["agrees"] = True
        return result, EXIT_OK
    if cmd == "iterate":
        path = decode_path(_load(args.path_json))
        rep = index_report(path)
        prof = IterationProfile.from_report(rep, qmax=args.qmax)
        k = args.k
        if k < 1:
            raise JsonInputError("--k must be a positive integer")
        return {
            "k": k,
            "mu_minus": prof.mu_minus(k),
            "mu_plus": prof.mu_plus(k),
            "nullity": prof.nullity(k),
            "mean": to_float(prof.mean_of_power(k)),
            "base": report_to_json(rep),
        }, EXIT_OK
    if cmd == "split":
        path = decode_path(_load(args.path_json))
        rep = index_report(path)
        sp, sm = splitting_numbers(rep.decomposition, args.omega / (2 * math.pi))
        nu = rep.table.nu_at(args.omega / (2 * math.pi))
        return {
            "omega_angle": args.omega,
            "s_plus": sp,
            "s_minus": sm,
            "nu_omega": nu,
        }, EXIT_OK
    if cmd == "cijt":
        system = decode_system(_load(args.system_json), qmax=args.qmax)
        ninfo = compute_N(system, qmax=args.qmax)
        events = find_events(
            system, eta=args.eta, d_max=args.dmax, qmax=args.qmax
        )
        result = {
            "N": ninfo,
            "eta": args.eta,
            "d_max": args.dmax,
            "events": [event_to_json(e) for e in events],
        }
        if not events:
            result["note"] = "no events under budget"
        pair = None
        if len(system.orbits) >= 2 and events:
            from .cijt import iter_interchange_pairs

            for cand in iter_interchange_pairs(events):
                pair = cand
                break
        if pair:
            result["interchange_pair"] = [event_to_json(pair[0]), event_to_json(pair[1])]
        return result, EXIT_OK
    if cmd == "ellipsoid":
        radii = _radii(args.r)
        system = ellipsoid_system(radii, qmax=args.qmax)
        assign = degree_assignment(system, args.cutoff, qmax=args.qmax)
        ratio = action_ratio_check(system, 100)
        return {
            "n": system.n,
            "orbits": [
                {
                    "label": o.label,
                    "action": o.action,
                    "mean": to_float(o.mean_of_power(1)),
                    "mu_minus": o.mu_minus(1),
                }
                for o in system.orbits
            ],
            "degrees": {str(d): list(v) for d, v in assign.items()},
            "action_mean_ratio": ratio,
        }, EXIT_OK
    if cmd == "degrees":
        system = decode_system(_load(args.system_json), qmax=args.qmax)
        try:
            assign = degree_assignment(system, args.cutoff, qmax=args.qmax)
        except DegreeBijectionError as exc:
            return {
                "passed": False,
                "kind": exc.kind,
                "degree": exc.degree,
                "message": str(exc),
            }, EXIT_FAIL
        return {
            "passed": True,
            "degrees": {str(d): list(v) for d, v in assign.items()},
            "notices": assign.notices,
        }, EXIT_OK
    if cmd == "certify":
        system = decode_system(_load(args.system_json), qmax=args.qmax)
        res = certify_system(
            system, eta=Fraction(args.eta).limit_denominator(10**9),
            d_max=args.dmax, qmax=args.qmax
        )
        result = {
            "certificates": [certificate_to_json(c) for c in res.certificates],
            "inconclusive": res.inconclusive,
            "events_scanned": res.events_scanned,
        }
        rejected = any(c.verdict == "rejected" for c in res.certificates)
        return result, EXIT_FAIL if rejected else EXIT_OK
    raise JsonInputError(f"unknown command {cmd!r}")


def _print_text(command: str, report: dict) -> None:
    if command == "certify":
        for cert in report["certificates"]:
            line = f"{cert['orbit']}: {cert['verdict']}"
            if cert["verdict"] == "rejected":
                line += f" (step {cert['failed_step']}: {cert['failure']})"
            else:
                angles = cert["step4"].get("angles_radians", [])
                line += " angles " + ", ".join(f"{a:.9f}" for a in angles)
            print(line)
        for item in report["inconclusive"]:
            print(f"{item['orbit']}: inconclusive ({item['reason']})")
        return
    if command == "ellipsoid" or command == "degrees":
        degs = report.get("degrees", {})
        for d in sorted(degs, key=int):
            label, k = degs[d]
            print(f"deg {d}: {label}^{k}")
        if "action_mean_ratio" in report:
            print(f"action/mean ratio: {report['action_mean_ratio']['ratio']:.12g}")
        return
    if command == "cijt":
        for e in report["events"]:
            print(f"d={e['d']} k={e['k']} deviations={['%.4f' % d for d in e['deviations']]}")
        if "interchange_pair" in report:
            a, b = report["interchange_pair"]
            print(f"interchange pair: d={a['d']} and d={b['d']}")
        if "note" in report:
            print(report["note"])
        return
    print(dumps_stable(report))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
