import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from spindex.cli import run
from spindex.jsonio import decode_path, dumps_stable, encode_path
from spindex.paths import rotation_path
from fractions import Fraction


def invoke(args, tmp_path=None):
    proc = subprocess.run(
        [sys.executable, "-m", "spindex.cli", *args],
        capture_output=True,
        text=True,
        timeout=600,
    )
    return proc


def write(tmp_path: Path, name: str, payload) -> str:
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


ROT_PATH = {
    "dim": 2,
    "segments": [{"atoms": [{"kind": "rotation", "angle": 3 * math.pi}]}],
}


def test_index_command(tmp_path):
    f = write(tmp_path, "p.json", ROT_PATH)
    proc = invoke(["index", f, "--oracle"])
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["result"]["mu_minus"] == 3
    assert out["result"]["oracle"]["agrees"] is True
    assert out["config"]["eta"] == 0.125
    assert out["config"]["d_max"] == 10000


def test_iterate_command(tmp_path):
    f = write(
        tmp_path,
        "p.json",
        {"dim": 2, "segments": [{"atoms": [{"kind": "rotation", "turns": {"rat": [7, 10]}}]}]},
    )
    proc = invoke(["iterate", f, "--k", "3"])
    out = json.loads(proc.stdout)
    assert proc.returncode == 0
    assert out["result"]["mu_minus"] == 5


def test_split_command(tmp_path):
    f = write(
        tmp_path,
        "p.json",
        {"dim": 2, "segments": [{"atoms": [{"kind": "rotation", "turns": {"rat": [3, 10]}}]}]},
    )
    proc = invoke(["split", f, "--omega", str(2 * math.pi * 0.3)])
    out = json.loads(proc.stdout)
    assert proc.returncode == 0
    assert (out["result"]["s_plus"], out["result"]["s_minus"]) == (0, 1)
    assert out["result"]["nu_omega"] == 1


def test_ellipsoid_command_spec_example():
    proc = invoke(["ellipsoid", "--r", "1,1.4142135623730951", "--cutoff", "101"])
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    degs = sorted(int(d) for d in out["result"]["degrees"])
    assert degs == list(range(3, 102, 2))


def test_cijt_command_and_empty_budget(tmp_path):
    f = write(tmp_path, "e2.json", {"ellipsoid": {"r": [1, "sqrt2"]}})
    proc = invoke(["cijt", f, "--dmax", "300"])
    out = json.loads(proc.stdout)
    assert proc.returncode == 0
    assert [e["d"] for e in out["result"]["events"]] == [116, 280]
    tiny = invoke(["cijt", f, "--eta", "1e-9", "--dmax", "100"])
    tout = json.loads(tiny.stdout)
    assert tiny.returncode == 0
    assert tout["result"]["events"] == []
    assert tout["result"]["note"] == "no events under budget"


def test_certify_command(tmp_path):
    f = write(tmp_path, "e2.json", {"ellipsoid": {"r": [1, "sqrt2"]}})
    proc = invoke(["certify", f])
    out = json.loads(proc.stdout)
    assert proc.returncode == 0
    verdicts = {c["orbit"]: c["verdict"] for c in out["result"]["certificates"]}
    assert verdicts == {"x1": "irrationally_elliptic", "x2": "irrationally_elliptic"}


def test_degrees_command_failure_exit_one(tmp_path):
    orbit_path = encode_path(rotation_path(Fraction(7, 10)))
    bad = {
        "n": 2,
        "orbits": [
            {"label": "a", "action": 6.0, "path": orbit_path},
            {"label": "b", "action": 6.0, "path": orbit_path},
        ],
    }
    f = write(tmp_path, "bad.json", bad)
    proc = invoke(["degrees", f, "--cutoff", "21"])
    assert proc.returncode == 1
    out = json.loads(proc.stdout)
    assert out["result"]["passed"] is False
    assert out["result"]["kind"] == "duplicate"


def test_malformed_inputs_exit_two(tmp_path):
    f = tmp_path / "junk.json"
    f.write_text("{not json")
    assert invoke(["index", str(f)]).returncode == 2
    g = write(tmp_path, "dims.json", {"dim": 3, "segments": []})
    assert invoke(["index", g]).returncode == 2
    h = write(
        tmp_path,
        "rational.json",
        {"ellipsoid": {"r": [1, 1.5]}},
    )
    assert invoke(["cijt", h]).returncode == 2


def test_determinism_byte_identical(tmp_path):
    f = write(tmp_path, "e2.json", {"ellipsoid": {"r": [1, "sqrt2"]}})
    a = invoke(["cijt", f, "--dmax", "700"])
    b = invoke(["cijt", f, "--dmax", "700"])
    assert a.stdout == b.stdout and a.returncode == b.returncode == 0


def test_report_reparses(tmp_path):
    f = write(tmp_path, "e2.json", {"ellipsoid": {"r": [1, "sqrt2"]}})
    proc = invoke(["cijt", f, "--dmax", "700"])
    out = json.loads(proc.stdout)
    assert dumps_stable(out) == proc.stdout.strip()


def test_path_json_roundtrip():
    p = rotation_path(Fraction(7, 10))
    enc = encode_path(p)
    dec = decode_path(enc)
    import numpy as np

    assert np.allclose(dec.endpoint(), p.endpoint())


def test_run_function_direct(tmp_path):
    f = write(tmp_path, "p.json", ROT_PATH)
    assert run(["index", f]) == 0


def test_float_formatting_17g(tmp_path):
    f = write(tmp_path, "p.json", ROT_PATH)
    proc = invoke(["index", f])
    # mean = 3; deviations and floats print via %.17g (shortest exact form)
    assert '"mean":3' in proc.stdout
