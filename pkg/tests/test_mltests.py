from __future__ import annotations

import random
from fractions import Fraction

import pytest

import oracles as O
from brk.core import ClopenSet, Dyadic, SequencePrefix
from brk.mltests import (
    BoundedTest,
    InvalidTest,
    NotWeak,
    PredicateStage,
    check_weak,
    chernoff_test,
    deviation_set,
    immunity_test,
    is_nested,
    nested,
    normalize_to_exact,
    passes,
    prefix_family,
    random_test,
    subsequence,
    ville_pullback,
    weaken,
    weaken_with_indices,
)
from brk.schedules import LengthSchedule as LS, ScheduleError, parse_schedule


# -- schedules ---------------------------------------------------------------

def test_schedule_forms_round_trip():
    for text in ("identity", "affine:2,1", "poly:1,0,1", "table:0,2,5"):
        s = parse_schedule(text)
        again = LS.from_json(s.to_json())
        assert [s(n) for n in range(3)] == [again(n) for n in range(3)]
    assert parse_schedule("poly:1,0,1")(3) == 10
    comp = LS.affine(2, 0).compose(LS.affine(1, 1))
    assert comp(3) == 8 and LS.from_json(comp.to_json())(3) == 8


def test_schedule_errors():
    with pytest.raises(ScheduleError):
        LS.table([0, 1])(2)
    with pytest.raises(ScheduleError):
        LS.affine(1, 0).check_increasing(3) or LS.table([0, 0]).check_increasing(1)
    with pytest.raises(ScheduleError):
        LS.affine(1, 0)(-1)


def test_schedule_program():
    s = LS.from_program("input\ndup\ncat")
    assert [s(n) for n in range(4)] == [0, 2, 4, 6]


# -- verdicts ----------------------------------------------------------------

def test_passes_examples():
    t = prefix_family("0", LS.identity())
    assert str(passes(t, SequencePrefix.periodic("1"), 6)) == "passes-at-stage 1"
    for depth in range(6):
        assert str(passes(t, SequencePrefix.periodic("0"), depth)) == f"fails-through {depth}"


def test_passes_matches_bruteforce_on_immunity():
    t = immunity_test(LS.affine(2, 0))
    rng = random.Random(5)
    sets = [set(t.explicit(n).generators) for n in range(5)]
    for _ in range(200):
        x = "".join(rng.choice("01") for _ in range(20))
        first = next((n for n in range(5) if x[: 2 * n] not in sets[n]), None)
        v = passes(t, x, 4)
        assert v.passed == (first is not None) and v.stage == first


# -- stage families -----------------------------------------------------------

def test_immunity_examples():
    t = immunity_test(LS.affine(2, 0))
    g2 = t.explicit(2)
    assert set(g2.generators) == {s for s in O.words(4) if s[0] == s[2] == "1"}
    assert g2.measure() == Dyadic(1, 2)
    assert t.explicit(0).generators == ("",)
    assert str(passes(immunity_test(LS.affine(1, 1)), SequencePrefix.periodic("1"), 7)) == "fails-through 7"


def test_chernoff_examples():
    assert deviation_set(2, Fraction(2, 5)).generators == ("00", "11")
    t = chernoff_test(1, LS.identity())
    for n in range(3):
        assert t.stage(n).measure() == 0


def test_ville_identity_and_subsequence():
    t = immunity_test(LS.affine(1, 1))
    v = ville_pullback(t, LS.identity())
    for n in range(4):
        assert v.stage(n).level == t.level(n) + 1
        assert v.stage(n).measure() == t.stage(n).measure()
    w = ville_pullback(t, LS.affine(2, 0))
    x = "".join("1" if i % 2 == 0 else random.Random(i).choice("01") for i in range(40))
    assert not passes(w, x, 4).passed
    assert subsequence("0110101", LS.affine(2, 0)) == "0111"


def test_normalize_examples():
    t = BoundedTest.from_stages([ClopenSet.of(0, [""]), ClopenSet.of(3, []), ClopenSet.of(4, [])])
    e = normalize_to_exact(t, 2)
    # level 4 at measure 1/4: the lex-first four strings
    assert e.explicit(2).generators == ("0000", "0001", "0010", "0011")
    exact = immunity_test(LS.affine(1, 0))
    assert normalize_to_exact(exact, 3).explicit(3) == exact.explicit(3)


def test_weaken_examples():
    empty = BoundedTest.from_stages([ClopenSet.of(0, [""])] + [ClopenSet.of(n + 1, []) for n in range(1, 8)])
    w = weaken(empty, 7)
    assert w.weak and check_weak(w, w.max_stage) is None
    assert all(len(w.explicit(n)) == 0 for n in range(1, w.max_stage + 1))
    assert weaken_with_indices(immunity_test(LS.affine(1, 1)), 7).h == [0, 2, 4, 6]


def test_weak_invariant_random():
    rng = random.Random(11)
    for _ in range(40):
        t = random_test(rng, 3, 14)
        w = weaken(t, 3)
        for n in range(w.max_stage):
            cur, nxt = w.explicit(n), w.explicit(n + 1)
            for tau in cur.generators:
                assert 2 * O.mass_within(nxt.generators, nxt.level, tau) <= Fraction(1, 2 ** len(tau))


def test_nested_and_invalid():
    rng = random.Random(3)
    t = random_test(rng, 4, 14)
    assert is_nested(nested(t, 4), 4)
    over = BoundedTest.from_stages([ClopenSet.of(0, [""]), ClopenSet.of(2, ["00", "01", "10"])])
    with pytest.raises(InvalidTest):
        over.stage(1)
    from brk.martingales import martingale_from_test
    with pytest.raises(NotWeak):
        martingale_from_test(immunity_test(LS.affine(1, 0)), 2)


def test_predicate_stage_and_json():
    p = PredicateStage(30, lambda s: s.startswith("1"), Dyadic(1, 1))
    assert p.contains("1" * 30) and not p.contains("0" * 30)
    t = random_test(random.Random(8), 3, 12)
    back = BoundedTest.from_json(t.to_json(3))
    for n in range(4):
        assert back.explicit(n) == t.explicit(n)


def test_random_test_properties():
    rng = random.Random(21)
    for i in range(60):
        t = random_test(rng, 3, 14, nested=bool(i % 2), weak=bool(i % 3 == 0))
        for n in range(4):
            s = t.explicit(n)
            assert O.measure(s.level, s.generators) <= Fraction(1, 2 ** n)
        if i % 2:
            assert is_nested(t, 3)
        if i % 3 == 0:
            assert check_weak(t, 3) is None
