import json

import pytest

from derandshadows.cli import main
from derandshadows.models import load_dataset

DATA = __import__("derandshadows.data", fromlist=["x"]).__path__[0]


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_help_exits_zero(capsys, tmp_path):
    for sub in ([], ["derandomize"], ["simulate"], ["estimate"], ["benchmark"]):
        code, out, _ = run(capsys, *sub, "--help")
        assert code == 0 and "Usage" in out
    assert list(tmp_path.iterdir()) == []


def test_bell_derandomize(capsys, tmp_path):
    out = tmp_path / "bell.json"
    code, _, _ = run(capsys, "derandomize", "--paulis", f"{DATA}/bell.paulis", "--shots", "100", "--depth", "3",
                     "--epsilon", "0.9", "--order", "scan", "--out", str(out), "--log", str(tmp_path / "log.tsv"))
    assert code == 0
    data = json.loads(out.read_text())
    assert len(data["circuits"]) == 100 and data["manifest"]["command"] == "derandomize"
    first = data["circuits"][0]
    assert all(c["t"] == first["t"] and c["s"] == first["s"] for c in data["circuits"])
    assert (tmp_path / "log.tsv").read_text().splitlines()[1] == "measurement\tslot\toption\tcost"


def test_validation_exit_codes(capsys, tmp_path):
    base = ["derandomize", "--paulis", f"{DATA}/bell.paulis", "--depth", "3", "--epsilon", "0.9"]
    assert run(capsys, *base, "--shots", "0")[0] == 2
    assert run(capsys, *base)[0] == 2
    assert run(capsys, *base, "--shots", "3", "--per-observable", "3")[0] == 2
    bad = tmp_path / "bad.paulis"
    bad.write_text("1.0 XQ\n")
    code, _, err = run(capsys, "derandomize", "--paulis", str(bad), "--depth", "1", "--epsilon", "0.5", "--shots", "2")
    assert code == 3 and "position 2" in err
    assert run(capsys, "benchmark", "nope", "--epsilon", "1")[0] == 2


def test_h2_two_structures_and_pipeline(capsys, tmp_path):
    circ = tmp_path / "h2.json"
    code, _, _ = run(capsys, "derandomize", "--paulis", f"{DATA}/h2.paulis", "--shots", "100", "--depth", "1",
                     "--epsilon", "0.9", "--weights", "abs-coeff", "--out", str(circ))
    assert code == 0
    structures = {(tuple(c["t"]), tuple(c["s"])) for c in json.loads(circ.read_text())["circuits"]}
    assert len(structures) == 2
    o1, o2 = tmp_path / "o1.tsv", tmp_path / "o2.tsv"
    for o in (o1, o2):
        assert run(capsys, "simulate", "--circuits", str(circ), "--state", f"ground:{DATA}/h2.paulis",
                   "--seed", "4", "--out", str(o))[0] == 0
    assert o1.read_bytes() == o2.read_bytes()
    rep = tmp_path / "r.json"
    assert run(capsys, "estimate", "--circuits", str(circ), "--outcomes", str(o1), "--paulis",
               f"{DATA}/h2.paulis", "--epsilon", "0.1", "--out", str(rep))[0] == 0
    data = json.loads(rep.read_text())
    assert not any(r["unmeasured"] for r in data["paulis"])
    recombined = sum(r["coefficient"] * r["estimate"] for r in data["paulis"])
    assert data["scalar"]["value"] == pytest.approx(recombined)


def test_simulate_zero_state_and_dimension_error(capsys, tmp_path):
    circ = tmp_path / "c.json"
    circ.write_text(json.dumps({"circuits": [{"n": 2, "d": 0, "t": [], "s": [1, 1]}] * 3}))
    out = tmp_path / "o.tsv"
    assert run(capsys, "simulate", "--circuits", str(circ), "--state", "zero", "--seed", "1", "--out", str(out))[0] == 0
    rows = [l.split("\t") for l in out.read_text().splitlines() if not l.startswith("#")]
    assert [r[1] for r in rows] == ["00"] * 3
    vec = tmp_path / "psi.txt"
    vec.write_text("1 0\n0 0\n0 0\n0 0\n0 0\n0 0\n0 0\n0 0\n")
    assert run(capsys, "simulate", "--circuits", str(circ), "--state", f"file:{vec}", "--seed", "1")[0] == 4


def test_zero_hit_row_flagged(capsys, tmp_path):
    circ = tmp_path / "c.json"
    circ.write_text(json.dumps({"circuits": [{"n": 1, "d": 0, "t": [], "s": [1]}]}))
    outcomes = tmp_path / "o.tsv"
    outcomes.write_text("0\t0\n")
    paulis = tmp_path / "p.paulis"
    paulis.write_text("1 Z\n1 X\n")
    code, out, err = run(capsys, "estimate", "--circuits", str(circ), "--outcomes", str(outcomes),
                         "--paulis", str(paulis), "--epsilon", "0.5")
    assert code == 0 and "never measured" in err
    rows = json.loads(out)["paulis"]
    assert rows[1]["estimate"] == 0 and rows[1]["vacuous"] and rows[1]["unmeasured"]


def test_benchmark_bell_table(capsys):
    code, out, _ = run(capsys, "--threads", "1", "benchmark", "bell", "--epsilon", "0.9")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[0] == "pauli,hits,shots,cost"
    assert all(l.split(",")[1] == "100" for l in lines[1:])


def test_record_time_flag(capsys, tmp_path):
    out = tmp_path / "c.json"
    assert run(capsys, "--record-time", "derandomize", "--paulis", f"{DATA}/bell.paulis", "--shots", "1",
               "--depth", "0", "--epsilon", "0.5", "--out", str(out))[0] == 0
    assert "wall_clock_seconds" in json.loads(out.read_text())["manifest"]
