from __future__ import annotations

import random
from fractions import Fraction

import pytest

import oracles as O
from brk.core import ClopenSet, Oracle, OracleIndexError
from brk.machines import (
    INF,
    BudgetExceeded,
    DSLMachine,
    FunctionMachine,
    ImageIndex,
    MachineError,
    TableMachine,
    check_compression,
    compressor_from_test,
    domain_is_antichain,
    load_machine,
    plain_complexity,
    prefix_free_from_test,
    step_limit,
    test_from_compressor,
)
from brk.mltests import BoundedTest, NotWeak, immunity_test, weaken
from brk.schedules import LengthSchedule as LS

IDENTITY = DSLMachine.parse("input", "id")
EMPTY = DSLMachine.parse("empty", "const")
DOUBLE = DSLMachine.parse("input\ndup\ncat", "double")


def test_run_examples():
    assert IDENTITY("0110") == "0110"
    assert EMPTY("101") == ""
    assert DOUBLE("01") == "0101"
    assert DSLMachine.parse("inf")("0") is INF
    loop = DSLMachine.parse("empty\nrepeat 3\nindex\nint 1\nadd\nif\napp1\nend\nend")
    assert loop("") == "111"
    branch = DSLMachine.parse("input\nlen\nif\ninput\nint 1\nskip\nelse\npush 0000\nend")
    assert branch("") == "0000" and branch("101") == "01"
    assert DSLMachine.parse("push 1\ninput\ncat\nflip")("01") == "010"
    assert DSLMachine.parse("input\nrev\ninput\ncat")("001") == "100001"
    assert DSLMachine.parse("# comment only\ninput # trailing\n")("1") == "1"


def test_parse_errors():
    for bad in ("push 012", "int x", "bogus", "repeat 2\ninput", "end", "dup 3"):
        with pytest.raises(MachineError):
            DSLMachine.parse(bad)
    with pytest.raises(MachineError):
        DSLMachine.parse("input\nint 1\ncat").run("0")


def test_budgets(monkeypatch):
    slow = DSLMachine.parse("empty\nint 1000000\ntimes\napp0\nend", step_budget=50)
    res = slow.execute("")
    assert res.status == "budget" and res.steps >= 50
    with pytest.raises(BudgetExceeded):
        slow.run("")
    monkeypatch.setenv("BRK_MAX_BUDGET", "10")
    assert step_limit(1000) == 10
    monkeypatch.setenv("BRK_MAX_BUDGET", "abc")
    with pytest.raises(Exception):
        step_limit(5)


def test_oracle_recording_is_complete():
    prog = DSLMachine.parse("input\ninput\nlen\nobit\ncat\nint 0\nobit\ncat")
    rng = random.Random(9)
    for _ in range(100):
        sigma = "".join(rng.choice("01") for _ in range(rng.randint(0, 6)))
        z = "".join(rng.choice("01") for _ in range(8))
        res = prog.execute(sigma, Oracle(z))
        assert set(res.queries) == {0, len(sigma)}
        other = list("".join(rng.choice("01") for _ in range(8)))
        for q in res.queries:
            other[q] = z[q]
        assert prog.execute(sigma, Oracle("".join(other))).output == res.output
    with pytest.raises(OracleIndexError):
        prog.run("1111", Oracle("01"))


def test_table_and_function_machines():
    T = TableMachine({"0": "1", "1": "inf"})
    assert T("0") == "1" and T("1") is INF and T("00") is INF
    assert T.domain == ["0"]
    back = load_machine(T.to_json())
    assert back("0") == "1"
    F = FunctionMachine(lambda s: s[::-1])
    assert F("001") == "100"
    assert load_machine("input\ndup\ncat")("1") == "11"


def test_plain_complexity_examples():
    rep = plain_complexity(IDENTITY, "010", 5)
    assert rep.value == 3 and rep.witness == "010"
    assert plain_complexity(EMPTY, "", 3).value == 0
    assert plain_complexity(DOUBLE, "0101", 3).witness == "01"
    assert plain_complexity(DOUBLE, "011", 4).value is None


def test_plain_complexity_against_shuffled_search():
    rng = random.Random(10)
    for case in range(120):
        outs = ["".join(rng.choice("01") for _ in range(rng.randint(0, 3))) for _ in range(6)]
        table = {s: rng.choice(outs + ["inf"]) for s in O.words_upto(5) if rng.random() < 0.7}
        M = TableMachine(table)
        tau = rng.choice(outs)
        pool = list(O.words_upto(5))
        rng.shuffle(pool)
        hits = [s for s in pool if table.get(s) == tau]
        want = min(hits, key=lambda s: (len(s), s)) if hits else None
        rep = plain_complexity(M, tau, 5)
        assert rep.witness == want
        assert ImageIndex(M, 5).complexity(tau).witness == want


def test_check_compression_examples():
    x = "0110100110010110"
    v = check_compression(IDENTITY, LS.identity(), x, 4)
    assert not v.compressed and v.first_failure() == 1
    t = weaken(immunity_test(LS.affine(2, 0)), 12)
    comp = compressor_from_test(t, t.max_stage)
    v = check_compression(comp.machine, comp.f, "1" * 40, t.max_stage)
    assert v.compressed
    assert all(r.report.value == r.bound for r in v.rows)


def test_test_from_compressor_examples():
    t = test_from_compressor(EMPTY, LS.affine(1, 1))
    assert all(len(t.explicit(c)) == 0 for c in range(3))
    t = test_from_compressor(IDENTITY, LS.affine(2, 0))
    assert all(len(t.explicit(c)) == 0 for c in range(3))
    two = TableMachine({"": "0000", "1": "1111", "0": "0110"})
    t = test_from_compressor(two, LS.table([0, 4, 8]))
    s = t.explicit(0)
    assert set(s.generators) == {"0000", "1111", "0110"}
    assert O.measure(s.level, s.generators) < 1
    t1 = test_from_compressor(two, LS.table([0, 1, 4, 8]))
    s = t1.explicit(1)
    assert set(s.generators) == {"0000", "1111", "0110"}
    assert O.measure(s.level, s.generators) < Fraction(1, 2)


def test_compressor_examples():
    # stage 1 only: first k strings of length f(1) - 1 map onto G_1, the rest to zeros
    t = BoundedTest.from_stages([ClopenSet.of(0, [""]), ClopenSet.of(3, ["101", "111"])], weak=True)
    comp = compressor_from_test(t, 1)
    assert comp.f(1) == 3
    assert sorted(comp(s) for s in ("00", "01")) == ["101", "111"]
    assert comp("10") == comp("11") == "000"
    empty = BoundedTest.from_stages([ClopenSet.of(0, [""])] + [ClopenSet.of(2 * n, []) for n in range(1, 4)],
                                    weak=True)
    comp = compressor_from_test(empty, 3)
    for s in O.words_upto(6):
        if len(s) <= comp.g(3):
            assert set(comp(s)) <= {"0"}
        else:  # identity tail past the last stage
            assert comp(s) == "0" * comp.f(3) + s[comp.g(3):]
        assert comp(s + "1").startswith(comp(s))
    with pytest.raises(NotWeak):
        compressor_from_test(immunity_test(LS.affine(1, 0)), 2)


def test_compressor_dsl_matches_evaluator():
    t = weaken(immunity_test(LS.affine(2, 0)), 6)
    comp = compressor_from_test(t, t.max_stage)
    prog = comp.compile_to_dsl()
    for s in O.words_upto(5):
        assert prog(s) == comp(s)


def test_prefix_free_examples():
    empty = BoundedTest.from_stages([ClopenSet.of(0, [""])] + [ClopenSet.of(2 * n, []) for n in range(1, 6)])
    pf = prefix_free_from_test(empty, 2)
    assert pf.machine.domain == []
    one = BoundedTest.from_stages([ClopenSet.of(0, [""]), ClopenSet.of(3, ["110"]), ClopenSet.of(5, [])])
    pf = prefix_free_from_test(one, 1, squared=True)
    assert len(pf.machine.domain) == 1 and len(pf.machine.domain[0]) == 2
    pf = prefix_free_from_test(immunity_test(LS.affine(1, 1)), 3)
    assert domain_is_antichain(pf.machine.domain)
    for c in range(1, 4):
        assert pf.defined_fraction(c) <= Fraction(1, 2 ** c)
    assert not domain_is_antichain(["0", "01"])
