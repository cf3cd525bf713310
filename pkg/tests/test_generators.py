from __future__ import annotations

import json
from fractions import Fraction

import pytest

from brk.core import InvalidInput
from brk.generators import (
    Registry,
    RegistryError,
    counterexample_pair,
    density_report,
    diagonal_real,
    join,
    oscillating_real,
    unjoin,
    zero_block_test,
)
from brk.machines import plain_complexity
from brk.mltests import passes

SMALL = [("input", "affine:1,2"), ("input\ndup\ncat", "affine:1,3"), ("empty", "affine:1,1")]


def test_registry_json_round_trip():
    R = Registry.of(*SMALL)
    again = Registry.from_json(json.dumps(R.to_json()))
    assert [e.name for e in again] == ["M0", "M1", "M2"]
    assert again.entry_for(4).name == "M1"
    assert again[1].machine("01") == "0101"


def test_empty_registry_gives_zeros():
    assert diagonal_real(Registry([]), 10).prefix == "0" * 10
    with pytest.raises(RegistryError):
        counterexample_pair(Registry([]), 1)


def test_schedule_must_grow_past_c():
    R = Registry.of(("input", "identity"))
    with pytest.raises(RegistryError):
        diagonal_real(R, 4)


def test_diagonal_stages_defeat_their_machine():
    R = Registry.of(*SMALL)
    real = diagonal_real(R, 200)
    by_name = {e.name: e for e in R}
    for rec in real.stages:
        e = by_name[rec.entry]
        assert real.bits[rec.c: rec.length] == rec.tau
        assert plain_complexity(e.machine, real.bits[: rec.length], rec.length - rec.c - 1).value is None
    log = real.log()
    assert log["length"] == 200 and len(log["stages"]) == len(real.stages)


def test_oscillating_blocks_and_density():
    R = Registry.of(*SMALL)
    real = oscillating_real(R, 600)
    kinds = [k for _, k in real.checkpoints]
    assert kinds[:4] == ["low", "high", "low", "high"]
    rows = density_report(real.bits, [n for n, _ in real.checkpoints], eps=Fraction(1, 4))
    for (n, kind), row in zip(real.checkpoints, rows):
        if kind == "low":
            assert row.density < Fraction(1, 4)
        else:
            assert row.density > Fraction(3, 4)
        assert row.near_half is False
    with pytest.raises(InvalidInput):
        density_report("0101", [0])


def test_join_unjoin():
    assert join("000", "1111") == "010101"
    assert unjoin("010101") == ("000", "111")


def test_counterexample_structure():
    R = Registry.of(("input\nint 0\nobit\ncat", "affine:1,2"))
    pair = counterexample_pair(R, 2)
    assert len(pair.a) == len(pair.b) == pair.h[-1]
    assert [s.side for s in pair.stages] == ["A", "B", "A", "B"]
    for st in pair.stages:
        assert st.h == pair.h[st.i] and st.h > st.max_query
    zt = zero_block_test(pair.h)
    assert str(passes(zt, pair.joined(), len(pair.h) - 1)) == f"fails-through {len(pair.h) - 1}"
    assert passes(zt, "1" * (2 * pair.h[-1]), len(pair.h) - 1).passed
    assert json.loads(json.dumps(pair.log()))["h"] == pair.h


def test_zero_block_test_rejects_bad_h():
    with pytest.raises(InvalidInput):
        zero_block_test([1, 3])
    with pytest.raises(InvalidInput):
        zero_block_test([0, 2, 2])
