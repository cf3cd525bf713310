"""Bounded Martin-Loef tests.

A :class:`BoundedTest` is intensional: a level schedule plus a function
producing stage ``n`` on demand (memoized).  Stages are explicit
:class:`~brk.core.ClopenSet` objects, except where enumeration is hopeless
(long Chernoff blocks, wide pullbacks), where a :class:`PredicateStage`
carries a membership predicate and its exact measure.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from brk.core import (
    ClopenSet,
    Dyadic,
    InvalidInput,
    Oracle,
    OracleIndexError,
    PrefixTooShort,
    SequencePrefix,
    as_prefix,
    interleave,
    lex_first_absent,
    strings_of_length,
)
from brk.schedules import LengthSchedule, ScheduleError

# stages wider than this are kept in predicate form
EXPLICIT_LIMIT = 22


class InvalidTest(InvalidInput):
    """A stage breaks the measure bound or another test invariant."""


class StageLimit(InvalidInput):
    """A stage beyond the range a construction was built for."""

    def __init__(self, n: int, max_stage: int):
        super().__init__(f"stage {n} requested, construction reaches stage {max_stage}")
        self.n = n
        self.max_stage = max_stage


class NotWeak(InvalidTest):
    pass


class PredicateStage:
    """A clopen set at one level given by a membership predicate.

    ``measure`` must be the exact measure; ``enumerate`` (optional) lists the
    generators in any order, otherwise all strings of the level are filtered.
    """

    def __init__(self, level: int, predicate: Callable[[str], bool], measure: Dyadic,
                 enumerate: Optional[Callable[[], Iterable[str]]] = None, name: str = ""):
        self.level = level
        self._pred = predicate
        self._measure = measure
        self._enumerate = enumerate
        self.name = name

    def measure(self) -> Dyadic:
        return self._measure

    def contains(self, prefix: str) -> bool:
        if len(prefix) < self.level:
            raise PrefixTooShort(self.level, len(prefix))
        return self._pred(prefix[: self.level])

    __contains__ = contains

    def explicit(self, limit: int = 24) -> ClopenSet:
        if self._enumerate is not None:
            return ClopenSet.of(self.level, self._enumerate())
        if self.level > limit:
            raise InvalidInput(f"level {self.level} too wide to enumerate")
        return ClopenSet.of(self.level, (s for s in strings_of_length(self.level) if self._pred(s)))

    def __repr__(self) -> str:
        return f"PredicateStage(level={self.level}, measure={self._measure}, {self.name})"


Stage = Union[ClopenSet, PredicateStage]


class BoundedTest:
    """Stage-indexed clopen sets ``U_n`` with ``mu(U_n) <= 2^-n``.

    ``levels(n)`` is the common generator length at stage ``n``.  ``weak`` is
    a claim that :func:`check_weak` can verify.  ``basis`` optionally gives a
    prefix-free set generating each stage before refinement; weakness is
    checked against it when present.
    """

    def __init__(self, levels: LengthSchedule, stage_fn: Callable[[int], Stage], *,
                 weak: bool = False, name: str = "test", max_stage: Optional[int] = None,
                 basis: Optional[Callable[[int], Iterable[str]]] = None):
        self.levels = levels
        self._stage_fn = stage_fn
        self.weak = weak
        self.name = name
        self.max_stage = max_stage
        self._basis = basis
        self._memo: dict[int, Stage] = {}
        self.notes: list[str] = []

    def level(self, n: int) -> int:
        return self.levels(n)

    def stage(self, n: int) -> Stage:
        found = self._memo.get(n)
        if found is not None:
            return found
        if self.max_stage is not None and n > self.max_stage:
            raise StageLimit(n, self.max_stage)
        s = self._stage_fn(n)
        if s.level != self.level(n):
            raise InvalidTest(f"{self.name}: stage {n} has level {s.level}, schedule says {self.level(n)}")
        if s.measure() > Dyadic.pow2(-n):
            raise InvalidTest(f"{self.name}: stage {n} has measure {s.measure()} > 2^-{n}")
        # idempotent fill: concurrent writers store equal values
        return self._memo.setdefault(n, s)

    def explicit(self, n: int) -> ClopenSet:
        s = self.stage(n)
        return s if isinstance(s, ClopenSet) else s.explicit()

    def basis(self, n: int) -> list[str]:
        if self._basis is not None:
            return sorted(self._basis(n))
        return list(self.explicit(n).generators)

    def stages(self, depth: int) -> list[Stage]:
        return [self.stage(n) for n in range(depth + 1)]

    def __repr__(self) -> str:
        return f"BoundedTest({self.name}, weak={self.weak})"

    # -- serialization --------------------------------------------------------

    def to_json(self, depth: int) -> dict:
        try:
            schedule = self.levels.to_json()
        except ScheduleError:
            schedule = {"kind": "table", "values": [self.level(n) for n in range(depth + 1)]}
        stages = []
        for n in range(depth + 1):
            s = self.explicit(n)
            stages.append({"n": n, "level": s.level, "generators": list(s.generators)})
        return {"name": self.name, "schedule": schedule, "stages": stages, "weak": self.weak}

    @classmethod
    def from_json(cls, data: dict) -> "BoundedTest":
        stages = {int(s["n"]): ClopenSet.of(int(s["level"]), s["generators"]) for s in data["stages"]}
        if sorted(stages) != list(range(len(stages))):
            raise InvalidTest("stages must be numbered 0..k without gaps")
        if "schedule" in data:
            levels = LengthSchedule.from_json(data["schedule"])
        else:
            levels = LengthSchedule.table([stages[n].level for n in range(len(stages))])

        def stage(n: int) -> ClopenSet:
            return stages[n]

        return cls(levels, stage, weak=bool(data.get("weak", False)),
                   name=data.get("name", "file"), max_stage=len(stages) - 1)

    @classmethod
    def from_stages(cls, sets: list[ClopenSet], *, weak: bool = False, name: str = "explicit") -> "BoundedTest":
        sets = list(sets)
        levels = LengthSchedule.table([s.level for s in sets])
        return cls(levels, lambda n: sets[n], weak=weak, name=name, max_stage=len(sets) - 1)


# ---------------------------------------------------------------------------
# verdicts and checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    passed: bool
    stage: Optional[int]
    depth: int

    def __str__(self) -> str:
        if self.passed:
            return f"passes-at-stage {self.stage}"
        return f"fails-through {self.depth}"


def passes(t: BoundedTest, x, depth: int) -> Verdict:
    """Least ``n <= depth`` with ``X | l(n)`` outside stage ``n``, if any."""
    x = as_prefix(x)
    for n in range(depth + 1):
        s = t.stage(n)
        if not s.contains(x.prefix(s.level)):
            return Verdict(True, n, depth)
    return Verdict(False, None, depth)


def fails_through(t: BoundedTest, prefix: str, depth: int) -> bool:
    return not passes(t, SequencePrefix(prefix), depth).passed


@dataclass(frozen=True)
class WeakViolation:
    stage: int
    tau: str
    mass: Dyadic
    allowed: Dyadic


def check_measures(t: BoundedTest, depth: int) -> list[Dyadic]:
    """Evaluate stages ``0..depth``; raises :class:`InvalidTest` on a bound violation."""
    return [t.stage(n).measure() for n in range(depth + 1)]


def check_weak(t: BoundedTest, depth: int) -> Optional[WeakViolation]:
    """First generator with ``mu(U_{n+1} & [tau]) > mu([tau]) / 2``, for ``n < depth``."""
    for n in range(depth):
        nxt = t.explicit(n + 1)
        for tau in t.basis(n):
            mass = nxt.measure_within(tau)
            allowed = Dyadic.pow2(-len(tau) - 1)
            if mass > allowed:
                return WeakViolation(n, tau, mass, allowed)
    return None


def is_nested(t: BoundedTest, depth: int) -> bool:
    """``U_{n+1}`` is a subset of ``U_n`` for ``n < depth``."""
    for n in range(depth):
        cur, nxt = t.explicit(n), t.explicit(n + 1)
        if nxt.level < cur.level:
            return False
        if any(not cur.contains(g) for g in nxt.generators):
            return False
    return True


# ---------------------------------------------------------------------------
# normalizations
# ---------------------------------------------------------------------------

def normalize_to_exact(t: BoundedTest, depth: int) -> BoundedTest:
    """Pad every stage with the lexicographically first absent strings so
    ``mu(U_n) = 2^-n`` exactly.  Needs ``l(n) >= n``."""
    def stage(n: int) -> ClopenSet:
        s = t.explicit(n)
        if s.level < n:
            raise InvalidTest(f"stage {n} has level {s.level} < {n}; cannot pad to 2^-{n}")
        missing = (1 << (s.level - n)) - len(s)
        return ClopenSet.of(s.level, list(s.generators) + lex_first_absent(s.level, s.generators, missing))

    max_stage = depth if t.max_stage is None else min(depth, t.max_stage)
    return BoundedTest(t.levels, stage, name=f"exact({t.name})", max_stage=max_stage)


def nested(t: BoundedTest, depth: Optional[int] = None) -> BoundedTest:
    """``W_n = U_0 & ... & U_n``, at the level of ``U_n``."""
    memo: dict[int, ClopenSet] = {}

    def stage(n: int) -> ClopenSet:
        if n in memo:
            return memo[n]
        s = t.explicit(n)
        if n == 0:
            out = s
        else:
            prev = stage(n - 1)
            if prev.level > s.level:
                raise ScheduleError(f"{t.name}: levels decrease at stage {n}")
            out = ClopenSet(s.level, tuple(g for g in s.generators if prev.contains(g)))
        memo[n] = out
        return out

    max_stage = t.max_stage if depth is None else (depth if t.max_stage is None else min(depth, t.max_stage))
    return BoundedTest(t.levels, stage, name=f"nested({t.name})", max_stage=max_stage)


@dataclass
class Weakened:
    test: BoundedTest
    h: list[int]


def weaken(t: BoundedTest, depth: int) -> BoundedTest:
    """Turn a test into a weak one by intersecting and thinning.

    Stage ``n`` of the result is ``W_{h(n)}`` with ``h(0) = 0`` and
    ``h(n+1) = l(h(n)) + 1``.  Stages of ``t`` beyond ``depth`` are never
    touched; the result stops at the last ``n`` with ``h(n) <= depth``.
    """
    return weaken_with_indices(t, depth).test


def weaken_with_indices(t: BoundedTest, depth: int) -> Weakened:
    if t.max_stage is not None:
        depth = min(depth, t.max_stage)
    w = nested(t, depth)
    h = [0]
    while True:
        nxt = t.level(h[-1]) + 1
        if nxt > depth:
            break
        h.append(nxt)
    levels = LengthSchedule(lambda n: t.level(h[n]) if n < len(h) else _past(n, len(h) - 1),
                            f"l(h(n)) for {t.name}")

    def stage(n: int) -> ClopenSet:
        return w.explicit(h[n])

    out = BoundedTest(levels, stage, weak=True, name=f"weak({t.name})", max_stage=len(h) - 1)
    out.notes.append(f"h = {h}")
    return Weakened(out, h)


def _past(n: int, max_stage: int) -> int:
    raise StageLimit(n, max_stage)


# ---------------------------------------------------------------------------
# concrete families
# ---------------------------------------------------------------------------

def immunity_test(f: LengthSchedule) -> BoundedTest:
    """Stage ``n``: strings of length ``f(n)`` with a 1 at every ``f(i)``, ``i < n``.

    Any real containing the range of ``f`` fails every stage.
    """
    def stage(n: int) -> Stage:
        f.check_increasing(n, at_least_index=False)
        level = f(n)
        fixed = {f(i) for i in range(n)}
        free = [p for p in range(level) if p not in fixed]

        def gens() -> Iterable[str]:
            for bits in itertools.product("01", repeat=len(free)):
                word = ["1"] * level
                for p, b in zip(free, bits):
                    word[p] = b
                yield "".join(word)

        if level <= EXPLICIT_LIMIT:
            return ClopenSet.of(level, gens())
        return PredicateStage(level, lambda s: all(s[p] == "1" for p in fixed),
                              Dyadic.pow2(-n), gens, name=f"immunity stage {n}")

    return BoundedTest(f, stage, name=f"immunity({f.name})")


# -- Chernoff -------------------------------------------------------------------

def _ln2_interval(bits: int) -> tuple[Fraction, Fraction]:
    """Rational bounds ``lo <= ln 2 <= hi`` with ``hi - lo <= 2^-bits``.

    Uses ln 2 = sum_{k>=1} 1 / (k 2^k); the tail after K terms is below
    1 / ((K+1) 2^K).
    """
    terms = bits + 2
    lo = sum(Fraction(1, k << k) for k in range(1, terms + 1))
    return lo, lo + Fraction(1, (terms + 1) << terms)


def chernoff_block_length(m: int, n: int) -> int:
    """``ceil(6 m^2 (n+1) ln 2)``, certified with interval arithmetic."""
    scale = 6 * m * m * (n + 1)
    bits = 32
    while True:
        lo, hi = _ln2_interval(bits)
        a, b = math.ceil(scale * lo), math.ceil(scale * hi)
        if a == b:
            return a
        bits *= 2


def deviates(s: str, eps: Fraction) -> bool:
    """``|ones(s)/|s| - 1/2| > eps``."""
    n = len(s)
    return abs(2 * s.count("1") - n) > 2 * eps * n


def binomial_tail_count(n: int, eps: Fraction) -> int:
    """Number of strings of length ``n`` whose 1-density deviates from 1/2 by more than ``eps``."""
    eps = Fraction(eps)
    return sum(math.comb(n, k) for k in range(n + 1) if abs(2 * k - n) > 2 * eps * n)


def deviation_set(n: int, eps) -> ClopenSet:
    """S_{n,eps}, enumerated."""
    if n <= 0:
        raise InvalidInput("block length must be positive")
    eps = Fraction(eps)
    out = []
    for k in range(n + 1):
        if abs(2 * k - n) > 2 * eps * n:
            for ones in itertools.combinations(range(n), k):
                word = ["0"] * n
                for p in ones:
                    word[p] = "1"
                out.append("".join(word))
    return ClopenSet.of(n, out)


def exp_neg_majorant(x: Fraction, bits: int) -> Dyadic:
    """A dyadic ``D`` with ``e^-x <= D <= e^-x + 2^-bits`` (for ``x >= 0``).

    ``e^x`` is bounded below by a partial sum of its series (all terms are
    positive), so the reciprocal of that sum bounds ``e^-x`` above; the
    result is then rounded up to ``bits`` binary places.
    """
    x = Fraction(x)
    if x < 0:
        raise InvalidInput("x must be nonnegative")
    term = Fraction(1)
    total = Fraction(1)
    k = 0
    # past k > 2x the tail is at most the last term, so stopping when that
    # term is below 2^-(bits+2) of the sum keeps 1/total within 2^-(bits+1)
    while True:
        k += 1
        term = term * x / k
        total += term
        if k > 2 * x and term < total / (1 << (bits + 2)):
            break
    scaled = (1 << bits) / total
    return Dyadic(math.ceil(scaled), bits)


def chernoff_majorant(n: int, eps, bits: int = 64) -> Dyadic:
    """Certified dyadic upper bound on ``2 e^{-eps^2 n / 6}``."""
    eps = Fraction(eps)
    return exp_neg_majorant(eps * eps * n / 6, bits) * 2


@dataclass(frozen=True)
class ChernoffStage:
    index: int
    block_length: int
    tail_count: int
    majorant: Dyadic


def chernoff_block(m: int, j: int) -> Stage:
    """V_j = S_{N, 1/m} with ``N = ceil(6 m^2 (j+1) ln 2)``."""
    eps = Fraction(1, m)
    N = chernoff_block_length(m, j)
    tail = binomial_tail_count(N, eps)
    if N <= EXPLICIT_LIMIT:
        return deviation_set(N, eps)
    return PredicateStage(N, lambda s: deviates(s, eps), Dyadic(tail, N),
                          lambda: deviation_set(N, eps).generators,
                          name=f"S_{{{N},1/{m}}}")


def chernoff_info(m: int, j: int) -> ChernoffStage:
    eps = Fraction(1, m)
    N = chernoff_block_length(m, j)
    bits = 64 + j
    maj = chernoff_majorant(N, eps, bits)
    while maj > Dyadic.pow2(-j) and bits < 4096:
        bits *= 2
        maj = chernoff_majorant(N, eps, bits)
    return ChernoffStage(j, N, binomial_tail_count(N, eps), maj)


def chernoff_test(m: int, f: LengthSchedule) -> BoundedTest:
    """``U_n = V_{f(n)}`` where ``V_j`` collects blocks with 1-density off by more than 1/m."""
    if m < 1:
        raise InvalidInput("m must be >= 1")
    levels = LengthSchedule(lambda n: chernoff_block_length(m, f(n)), f"chernoff({m})o{f.name}")

    def stage(n: int) -> Stage:
        return chernoff_block(m, f(n))

    return BoundedTest(levels, stage, name=f"chernoff({m},{f.name})")


# -- Ville pullback ---------------------------------------------------------------

def ville_pullback(t: BoundedTest, g: LengthSchedule) -> BoundedTest:
    """Pull ``t`` back along ``n -> g(n)``: X is in stage ``n`` iff
    ``(X(g(0)), ..., X(g(l(n)-1)))`` is in stage ``n`` of ``t``.

    Stage ``n`` has level ``g(l(n)) + 1``, so it reads one unused position
    past the last selected one; the measure is unchanged.
    """
    levels = LengthSchedule(lambda n: g(t.level(n)) + 1, f"ville({t.name},{g.name})")

    def stage(n: int) -> Stage:
        inner = t.stage(n)
        L = inner.level
        g.check_increasing(L, at_least_index=False)
        picks = [g(i) for i in range(L)]
        level = g(L) + 1
        pickset = set(picks)
        free = [p for p in range(level) if p not in pickset]

        def select(s: str) -> str:
            return "".join(s[p] for p in picks)

        def gens() -> Iterable[str]:
            src = inner if isinstance(inner, ClopenSet) else inner.explicit()
            for tau in src.generators:
                for bits in itertools.product("01", repeat=len(free)):
                    word = [""] * level
                    for p, b in zip(picks, tau):
                        word[p] = b
                    for p, b in zip(free, bits):
                        word[p] = b
                    yield "".join(word)

        if level <= EXPLICIT_LIMIT:
            return ClopenSet.of(level, gens())
        return PredicateStage(level, lambda s: inner.contains(select(s)), inner.measure(), gens,
                              name=f"pullback stage {n}")

    return BoundedTest(levels, stage, name=f"ville({t.name},{g.name})", max_stage=t.max_stage)


def subsequence(x: str, g: LengthSchedule) -> str:
    """``Y(n) = X(g(n))`` for every ``n`` with ``g(n) < |x|``."""
    out = []
    n = 0
    while True:
        p = g(n)
        if p >= len(x):
            return "".join(out)
        out.append(x[p])
        n += 1


# -- relative tests and the join test ----------------------------------------------

class OracleTest:
    """A test relative to an oracle ``Z``.

    ``stage_fn(n, oracle)`` returns stage ``n``'s generators (strings of
    length ``<= l(n)``), reading ``Z`` through ``oracle``; it may only read
    positions below ``l(n)``.
    """

    def __init__(self, levels: LengthSchedule, stage_fn: Callable[[int, Oracle], Iterable[str]],
                 name: str = "oracle-test"):
        self.levels = levels
        self._stage_fn = stage_fn
        self.name = name

    def generators(self, n: int, z) -> list[str]:
        """``G^z_n`` for a finite oracle prefix ``z`` of length ``>= l(n)``."""
        L = self.levels(n)
        if len(z) < L:
            raise PrefixTooShort(L, len(z))
        oracle = Oracle(z, bound=L)
        try:
            gens = sorted(set(self._stage_fn(n, oracle)))
        except OracleIndexError as exc:
            raise InvalidTest(f"{self.name}: stage {n} queried the oracle at {exc.index} >= l(n) = {L}") from exc
        for g in gens:
            if len(g) > L:
                raise InvalidTest(f"{self.name}: generator {g!r} longer than l({n}) = {L}")
        return gens

    def stage(self, n: int, z) -> ClopenSet:
        """``[G^z_n]`` refined to level ``l(n)``; checked against ``2^-n``."""
        L = self.levels(n)
        cover = {b for b in strings_of_length(L) if any(b.startswith(g) for g in self.generators(n, z))}
        s = ClopenSet.of(L, cover)
        if s.measure() > Dyadic.pow2(-n):
            raise InvalidTest(f"{self.name}: stage {n} relative to {z!r} has measure {s.measure()}")
        return s

    def fails(self, x: str, z: str, depth: int) -> bool:
        """X is in ``U^Z_n`` for every ``n <= depth``."""
        return all(self.stage(n, z[: self.levels(n)]).contains(x) for n in range(depth + 1))


def lambalgen_join_test(t_oracle: OracleTest, levels: Optional[LengthSchedule] = None) -> BoundedTest:
    """Stage ``n``: all ``a (+) b`` with ``|a| = |b| = l(n)`` and ``b`` in ``[G^a_n]``.

    If ``B`` fails ``t_oracle`` relative to ``A`` then ``A (+) B`` fails the result.
    """
    ell = levels or t_oracle.levels
    if levels is not None:
        for probe in range(4):
            if ell(probe) != t_oracle.levels(probe):
                raise InvalidTest("join test levels must agree with the oracle test's query bound")
    join_levels = LengthSchedule(lambda n: 2 * ell(n), f"2*{ell.name}")

    def stage(n: int) -> ClopenSet:
        L = ell(n)
        gens = []
        for a in strings_of_length(L):
            for b in t_oracle.stage(n, a).generators:
                gens.append(interleave(a, b))
        return ClopenSet.of(2 * L, gens)

    return BoundedTest(join_levels, stage, name=f"join({t_oracle.name})")


# -- small test families used by the checks ---------------------------------------

def prefix_family(x: str, levels: LengthSchedule) -> BoundedTest:
    """Stage ``n`` = ``[x | l(n)]`` (a single generator), for a fixed word or periodic pattern."""
    src = SequencePrefix.periodic(x) if x else None

    def stage(n: int) -> ClopenSet:
        L = levels(n)
        if L < n:
            raise InvalidTest(f"level {L} < {n}")
        word = src.prefix(L) if src is not None else ""
        return ClopenSet(L, (word,))

    return BoundedTest(levels, stage, name=f"prefix({x})")


def copy_oracle_test(levels: LengthSchedule) -> OracleTest:
    """``G^Z_n = {Z | n}``: stage ``n`` holds the reals agreeing with the oracle on ``n`` bits."""
    def stage(n: int, z: Oracle) -> list[str]:
        return ["".join(z(i) for i in range(n))]

    return OracleTest(levels, stage, name="copy")


def random_test(rng: random.Random, depth: int, max_level: int = 16, *,
                nested: bool = False, weak: bool = False, fill: float = 1.0) -> BoundedTest:
    """A random explicit test through ``depth`` with ``l(depth) <= max_level``.

    Levels strictly increase with ``l(n) >= n``.  ``weak`` (which implies
    nested) keeps at most half of the extensions below each earlier
    generator; ``fill`` scales how full each stage is relative to its bound.
    """
    if max_level < depth:
        raise InvalidInput(f"max_level {max_level} too small for depth {depth}")
    # increments of at least 1 keep l(n) >= n and leave room for later stages
    levels = [rng.randint(0, min(2, max_level - depth))]
    for n in range(1, depth + 1):
        room = max_level - levels[-1] - (depth - n)
        levels.append(levels[-1] + rng.randint(1, max(1, min(room, 4))))
    stages = []
    for n, L in enumerate(levels):
        cap = 1 << (L - n)
        if n == 0 or not (nested or weak):
            pool = list(strings_of_length(L)) if L <= 16 else None
            k = rng.randint(0, max(0, int(cap * fill)))
            gens = rng.sample(pool, min(k, len(pool))) if pool is not None else []
        else:
            prev = stages[-1]
            delta = L - prev.level
            per = (1 << (delta - 1)) if weak else (1 << delta)
            budget = cap
            gens = []
            for tau in prev.generators:
                room = min(per, budget)
                k = rng.randint(0, max(0, int(room * fill)))
                tails = rng.sample(range(1 << delta), k)
                gens.extend(tau + format(t, f"0{delta}b") if delta else tau for t in tails)
                budget -= k
        stages.append(ClopenSet.of(L, gens))
    return BoundedTest.from_stages(stages, weak=weak, name=f"random(depth {depth})")
