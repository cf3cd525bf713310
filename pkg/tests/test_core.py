from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles as O
from brk.core import (
    ClopenSet,
    Dyadic,
    InvalidCode,
    InvalidInput,
    Oracle,
    OracleIndexError,
    PrefixTooShort,
    SequencePrefix,
    decode_set,
    decode_string,
    encode_set,
    encode_string,
    interleave,
    is_antichain,
    lex_first_absent,
    measure,
)

dyadics = st.builds(Dyadic, st.integers(0, 10 ** 6), st.integers(-5, 40))


def F(d: Dyadic) -> Fraction:
    return O.frac(d)


@settings(max_examples=1000)
@given(dyadics, dyadics)
def test_dyadic_agrees_with_fraction(a, b):
    assert F(a + b) == F(a) + F(b)
    assert F(a * b) == F(a) * F(b)
    assert (a < b) == (F(a) < F(b))
    assert (a == b) == (F(a) == F(b))
    if F(a) >= F(b):
        assert F(a - b) == F(a) - F(b)
    else:
        with pytest.raises(InvalidInput):
            a - b
    assert Dyadic.parse(str(a)) == a
    assert a.as_fraction() == F(a)
    assert F(a.half()) == F(a) / 2
    assert F(a.scale(3)) == F(a) * 8


@given(dyadics)
def test_dyadic_canonical(a):
    assert a.num % 2 == 1 or (a.num == 0 and a.exp == 0) or a.exp == 0
    assert hash(a) == hash(Dyadic.of(a.as_fraction()))


def test_dyadic_text_and_errors():
    assert str(Dyadic(1, 2)) == "1/2^2"
    assert str(Dyadic(2, 3)) == "1/2^2"
    assert Dyadic.pow2(-3) == Dyadic(1, 3)
    assert Dyadic.parse("3/8") == Dyadic(3, 3)
    with pytest.raises(InvalidInput):
        Dyadic.of(Fraction(1, 3))
    with pytest.raises(InvalidInput):
        Dyadic(-1)


def test_measure_examples():
    assert measure(ClopenSet.of(3, ["000", "101"])) == Dyadic(1, 2)
    assert measure(ClopenSet.of(0, [""])) == 1
    assert measure(ClopenSet.full(5)) == 1
    assert measure(ClopenSet.empty(4)) == 0


def test_string_codes():
    assert encode_string("") == 1
    assert encode_string("011") == 11
    for s in O.words_upto(10):
        assert decode_string(encode_string(s)) == s
    with pytest.raises(InvalidCode):
        decode_string(0)


def test_set_codes():
    assert encode_set([""]) == int("21", 3) == 7
    assert encode_set(["0", "1"]) == int("2" + "10" + "2" + "11", 3)
    pool = list(O.words_upto(4))
    for a, b in itertools.combinations(pool, 2):
        assert decode_set(encode_set([a, b])) == {a, b}
    with pytest.raises(InvalidInput):
        encode_set([])
    with pytest.raises(InvalidCode):
        decode_set(int("1", 3))
    with pytest.raises(InvalidCode):
        decode_set(int("2112" + "10", 3))  # members out of order


def test_clopen_operations():
    s = ClopenSet.from_prefix_free(["0", "11"], level=3)
    assert s.level == 3 and len(s) == 6
    assert measure(s) == Dyadic(3, 2)
    assert "0110" in s and "1000" not in s
    with pytest.raises(PrefixTooShort):
        s.contains("0")
    assert s.within("1") == ["110", "111"]
    assert s.measure_within("1") == Dyadic(1, 2)
    assert s.measure_within("0111") == Dyadic(1, 4)
    t = ClopenSet.of(1, ["0"])
    assert s.intersect(t).generators == ("000", "001", "010", "011")
    assert ClopenSet.from_json(s.to_json()) == s
    with pytest.raises(InvalidInput):
        ClopenSet.from_prefix_free(["0", "01"])
    with pytest.raises(InvalidInput):
        ClopenSet.of(2, ["0"])


@given(st.sets(st.text("01", max_size=5), max_size=8))
def test_antichain_matches_pairwise(ws):
    brute = all(not a.startswith(b) and not b.startswith(a) for a, b in itertools.combinations(ws, 2))
    assert is_antichain(ws) == brute


def test_prefixes_and_oracles():
    x = SequencePrefix.periodic("01")
    assert x.prefix(5) == "01010" and x[7] == "1"
    lit = SequencePrefix("110")
    with pytest.raises(PrefixTooShort):
        lit.prefix(4)
    z = Oracle("101")
    assert z(2) == "1" and z.max_query == 2
    with pytest.raises(OracleIndexError):
        z(3)
    pad = Oracle("1", pad_zeros=True)
    assert pad(10) == "0" and pad.queries == {10}
    assert Oracle("").max_query == -1
    assert interleave("00", "11") == "0101"
    assert lex_first_absent(2, ["00", "10"], 2) == ["01", "11"]
    assert lex_first_absent(3, [], 1, within="1") == ["100"]
    with pytest.raises(InvalidInput):
        lex_first_absent(1, ["0", "1"], 1)
