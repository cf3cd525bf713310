from __future__ import annotations

import json
import subprocess
import sys

import pytest

from brk.cli import decode_runs, encode_runs, main
from brk.machines import plain_complexity
from brk.generators import Registry

REGISTRY = [
    {"name": "id", "program": "input", "f": "affine:1,2"},
    {"name": "double", "program": "input\ndup\ncat", "f": "affine:1,3"},
    {"name": "zeros", "program": "empty", "f": "affine:1,1"},
]


def run(capsys, *argv) -> tuple[int, str]:
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_measure(capsys):
    assert run(capsys, "measure", "--level", 3, "--gens", "000,101") == (0, "1/2^2\n")
    code, out = run(capsys, "measure", "--json", "--level", 2, "--gens", "00")
    assert code == 0 and json.loads(out)["measure"] == "1/2^2"
    code, out = run(capsys, "measure", '{"level": 0, "generators": [""]}')
    assert out.strip() == "1/2^0"


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1
    assert main(["measure", "--level", "2", "--gens", "0"]) == 1


def test_violation_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"depth": 1, "values": {"": "1", "0": "3", "1": "0"}}))
    assert main(["check-martingale", "--martingale", str(bad), "--depth", "1"]) == 2


def test_rle_round_trip():
    bits = "0" * 12 + "111" + "0"
    assert decode_runs(encode_runs(bits)) == bits
    assert decode_runs("0*12 1*3") == "0" * 12 + "111"


def test_test_pipeline(tmp_path, capsys):
    imm = tmp_path / "imm.json"
    weak = tmp_path / "weak.json"
    mart = tmp_path / "mart.json"
    assert main(["immunity", "--f", "affine:2,0", "--depth", "4", "-o", str(imm)]) == 0
    assert main(["weaken", "--test", str(imm), "--depth", "12", "-o", str(weak)]) == 0
    assert main(["to-martingale", "--test", str(weak), "--depth", "2", "--table", "6", "-o", str(mart)]) == 0
    assert main(["check-martingale", "--martingale", str(mart), "--depth", "8"]) == 0
    code, out = run(capsys, "kraft", "--martingale", str(mart), "--exhaustive", 5)
    assert code == 0 and "holds" in out
    code, out = run(capsys, "normalize", "--test", str(imm), "--depth", 3, "--json")
    assert code == 0 and json.loads(out)["stages"][3]["level"] == 6


def test_martingale_shortcuts(capsys):
    assert run(capsys, "kraft", "--martingale", "constant", "--sigma", "0", "--H", "00,01")[1].strip() == "equality"
    code, out = run(capsys, "eval-martingale", "--martingale", "all-in:0", "-x", "000")
    assert code == 0 and "1/2^-3" not in out and "8" in out


def test_diagonalize_then_check_compress(tmp_path, capsys):
    reg = tmp_path / "reg.json"
    reg.write_text(json.dumps(REGISTRY))
    x = tmp_path / "x.txt"
    log = tmp_path / "log.json"
    assert main(["diagonalize", "-r", str(reg), "-n", "96", "-o", str(x), "--log", str(log)]) == 0
    bits = x.read_text().strip()
    assert len(bits) == 96
    R = Registry.from_json(REGISTRY)
    by_name = {e.name: e for e in R}
    for rec in json.loads(log.read_text())["stages"]:
        e = by_name[rec["entry"]]
        L, c = rec["f"], rec["c"]
        assert plain_complexity(e.machine, bits[:L], L - c - 1).value is None
    code, out = run(capsys, "check-compress", "-x", str(x), "-r", str(reg))
    assert code == 0 and out.count("not compressed") == 3


def test_complexity_and_join(capsys):
    code, out = run(capsys, "complexity", "-m", "input\ndup\ncat", "-t", "0101", "--max-len", 3)
    assert code == 0 and "= 2" in out
    assert run(capsys, "join", "-a", "000", "-b", "111")[1].strip() == "010101"


def test_counterexample_and_density(tmp_path, capsys):
    reg = tmp_path / "reg.json"
    reg.write_text(json.dumps([{"program": "input\nint 0\nobit\ncat", "f": "affine:1,2"}]))
    code, out = run(capsys, "counterexample", "-r", str(reg), "--stages", 2)
    data = json.loads(out)
    assert code == 0 and data["zero_block_test"] == "fails-through 4"
    code, out = run(capsys, "density", "-x", "0*4 1*4", "--checkpoints", "4,8", "--json")
    assert [r["ones"] for r in json.loads(out)] == [0, 4]


def test_random_test_is_seeded(capsys):
    a = run(capsys, "random-test", "--seed", 5, "--depth", 3)[1]
    b = run(capsys, "random-test", "--seed", 5, "--depth", 3)[1]
    assert a == b and json.loads(a)["stages"]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "brk.cli", "measure", "--level", "1", "--gens", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "1/2^1"
