"""Independent oracles for the test suite.

Everything here recomputes from first principles with ``fractions.Fraction``
and plain string handling, so the checks do not lean on the code under test.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def words(n: int):
    return ("".join(p) for p in itertools.product("01", repeat=n))


def words_upto(n: int):
    for k in range(n + 1):
        yield from words(k)


def frac(d) -> Fraction:
    """A Dyadic (or anything with ``num``/``exp``) as a Fraction, parsed from its text form."""
    num, _, exp = str(d).partition("/2^")
    return Fraction(int(num), 2 ** int(exp))


def measure(level: int, gens) -> Fraction:
    gens = set(gens)
    for g in gens:
        assert len(g) == level
    return Fraction(len(gens), 2 ** level)


def mass_within(gens, level: int, tau: str) -> Fraction:
    return Fraction(sum(1 for g in gens if g.startswith(tau)), 2 ** level)


def failing_bruteforce(stage_sets, length: int):
    """All words of ``length`` whose prefixes lie in every stage (explicit sets)."""
    out = []
    for x in words(length):
        if all(x[: lvl] in gens for lvl, gens in stage_sets):
            out.append(x)
    return out


def failing_dfs(stage_sets, length: int):
    """Same set as :func:`failing_bruteforce`, found by pruned tree search."""
    by_level: dict[int, list[set]] = {}
    for lvl, gens in stage_sets:
        by_level.setdefault(lvl, []).append(gens)
    out = []
    stack = [""]
    while stack:
        s = stack.pop()
        if any(s not in g for g in by_level.get(len(s), ())):
            continue
        if len(s) == length:
            out.append(s)
            continue
        stack += [s + "1", s + "0"]
    return sorted(out)


def all_antichains(prefix: str, max_len: int):
    """Every antichain below ``prefix`` with lengths <= max_len, by subset filtering."""
    pool = [prefix + w for k in range(max_len - len(prefix) + 1) for w in words(k)]
    for r in range(len(pool) + 1):
        for combo in itertools.combinations(pool, r):
            if all(not a.startswith(b) and not b.startswith(a)
                   for a, b in itertools.combinations(combo, 2)):
                yield combo
