import json
import subprocess
import sys

import pytest

from qfdlog import cli, secest
from qfdlog.ideals import ideal_pow, principal_near, prime_ideal_above
from qfdlog.ntkernel import gen_prime_discriminant, kronecker


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_disc(capsys):
    code, out, _ = run(capsys, "gen-disc", "--bits", "40", "--imaginary", "--seed", "5")
    assert code == 0
    d = int(out)
    assert d < 0 and (-d).bit_length() == 40
    code, out2, _ = run(capsys, "gen-disc", "--bits", "40", "--imaginary", "--seed", "5")
    assert out == out2
    code, out, _ = run(capsys, "gen-disc", "--bits", "40", "--real", "--json")
    rec = json.loads(out)
    assert int(rec["delta"]) > 0 and rec["seed"] == 0


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("QFDLOG_SEED", "5")
    _, a, _ = run(capsys, "gen-disc", "--bits", "40", "--imaginary")
    _, b, _ = run(capsys, "gen-disc", "--bits", "40", "--imaginary", "--seed", "5")
    assert a == b
    monkeypatch.setenv("QFDLOG_SEED", "x")
    assert run(capsys, "gen-disc", "--bits", "40", "--imaginary")[0] == 64


def test_classgroup_text_and_json(capsys):
    code, out, _ = run(capsys, "classgroup", "-d", "-3299")
    assert code == 0 and "h = 27" in out and "C(9) x C(3)" in out
    code, out, _ = run(capsys, "classgroup", "-d", "-3299", "--json")
    rec = json.loads(out)
    assert rec["h"] == 27 and rec["invariants"] == [9, 3]


def test_json_output_is_deterministic(capsys):
    outs = [run(capsys, "classgroup", "-d", "-1000003", "--json", "--seed", "4")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_regulator(capsys):
    code, out, _ = run(capsys, "regulator", "-d", "13")
    assert code == 0 and out.startswith("R = 1.194763217287")
    code, out, _ = run(capsys, "regulator", "-d", "4000033", "--json")
    rec = json.loads(out)
    assert rec["h"] == 2 and rec["regulator"]


def test_dlog(capsys):
    d = -1000003
    g = next(prime_ideal_above(d, p) for p in (11, 13, 17, 19, 23, 29, 31) if kronecker(d, p) == 1)
    a, _ = ideal_pow(d, g, 777)
    code, out, _ = run(capsys, "dlog", "-d", str(d), "-g", str(g), "-a", str(a), "--json")
    rec = json.loads(out)
    assert code == 0 and rec["verified"] is True


def test_infra_dlog(capsys):
    d = 4000033
    a = principal_near(d, 500.0).ideal
    code, out, _ = run(capsys, "infra-dlog", "-d", str(d), "-a", str(a))
    assert code == 0 and "verified = True" in out


def test_cache_round_trip(capsys, tmp_path):
    path = str(tmp_path / "rels.txt")
    c1, out1, _ = run(capsys, "classgroup", "-d", "-3299", "--cache", path, "--json")
    c2, out2, _ = run(capsys, "classgroup", "-d", "-3299", "--cache", path, "--json")
    assert c1 == c2 == 0
    assert json.loads(out1)["h"] == json.loads(out2)["h"] == 27
    assert run(capsys, "classgroup", "-d", "-4420", "--cache", path)[0] == 64


def test_estimate(capsys):
    code, out, _ = run(capsys, "estimate", "--table")
    assert code == 0 and out.splitlines()[1].split()[:3] == ["768", "640", "634"]
    code, out, _ = run(capsys, "estimate", "--target-rsa", "2048", "--json")
    rec = json.loads(out)
    row = next(r for r in secest.security_table() if r.rsa_bits == 2048)
    assert rec["mode"] == "paper-calibrated" and rec["rows"][0]["imaginary"] == row.bits_imaginary
    assert abs(row.bits_imaginary - 1348) <= 3
    code, out, _ = run(capsys, "estimate", "--literal-units", "--json")
    assert json.loads(out)["mode"] == "literal-units"
    code, out, _ = run(capsys, "estimate", "--anchor-bits", "256", "--anchor-seconds", "100", "--json")
    assert code == 0 and json.loads(out)["anchors"]["imaginary"]["bits"] == 256
    assert run(capsys, "estimate", "--anchor-bits", "256")[0] == 64


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--bits-range", "24:32", "--step", "8", "--json")
    rows = json.loads(out)["rows"]
    assert code == 0 and [r["bits"] for r in rows] == [24, 32]
    assert all(r["status"] == "ok" for r in rows)
    assert run(capsys, "bench", "--bits-range", "32:24")[0] == 64


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["classgroup"],
        ["classgroup", "-d", "abc"],
        ["classgroup", "-d", "23"],
        ["classgroup", "-d", "-92"],
        ["regulator", "-d", "-23"],
        ["dlog", "-d", "-23", "-g", "2,1", "-a", "5,1"],
        ["infra-dlog", "-d", "13", "-a", "3,1"],
        ["gen-disc", "--bits", "3", "--real"],
        ["classgroup", "-d", "-23", "--jobs", "0"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 64 and err


def test_timeout_exit_code(capsys):
    d = gen_prime_discriminant(90, -1, 0)
    code, _, err = run(capsys, "classgroup", "-d", str(d), "--timeout", "0.001")
    assert code == 3 and "timeout" in err


def test_console_entry_point():
    p = subprocess.run([sys.executable, "-m", "qfdlog.cli", "classgroup", "-d", "-23"], capture_output=True, text=True)
    assert p.returncode == 0 and "h = 3" in p.stdout
