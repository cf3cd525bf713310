"""Martingales on Cantor space with exact dyadic capital.

Every martingale here is a memoized function ``sigma -> Dyadic``.  The
conversions between tests and martingales are the constructive halves of
the equivalence proofs: betting along a weak test, thresholding capital,
first hitting times, and the weighted sum of per-stage martingales.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional

from brk.core import (
    ONE,
    ZERO,
    ClopenSet,
    Dyadic,
    InvalidInput,
    SequencePrefix,
    as_prefix,
    check_bits,
    is_antichain,
    lex_first_absent,
    strings_of_length,
    strings_up_to,
)
from brk.mltests import BoundedTest, InvalidTest, NotWeak, check_weak
from brk.schedules import LengthSchedule


class Martingale:
    """A capital function ``d`` with ``d(empty) = 1`` and ``d(s) = (d(s0) + d(s1)) / 2``.

    The laws are not enforced on construction; :func:`check_martingale`
    verifies them.  ``witness`` is an optional success schedule ``f`` claiming
    ``d(X | f(n)) >= 2^n`` for the reals of interest.
    """

    def __init__(self, fn: Callable[[str], Dyadic], name: str = "d",
                 witness: Optional[LengthSchedule] = None, spec: Optional[dict] = None):
        self._fn = fn
        self.name = name
        self.witness = witness
        self.spec = spec
        self._memo: dict[str, Dyadic] = {}

    def __call__(self, sigma: str) -> Dyadic:
        v = self._memo.get(sigma)
        if v is None:
            v = Dyadic.of(self._fn(sigma))
            self._memo[sigma] = v
        return v

    def along(self, x, length: int) -> list[Dyadic]:
        """Capital after each of the first ``length`` bits of ``x`` (``length + 1`` values)."""
        p = as_prefix(x).prefix(length)
        return [self(p[:i]) for i in range(length + 1)]

    def succeeds_with(self, x, f: LengthSchedule, depth: int) -> bool:
        """``d(X | f(n)) >= 2^n`` for every ``n <= depth``."""
        x = as_prefix(x)
        return all(self(x.prefix(f(n))) >= Dyadic.pow2(n) for n in range(depth + 1))

    def to_table(self, depth: int) -> dict:
        return {"depth": depth,
                "values": {s: str(self(s)) for s in strings_up_to(depth)}}

    def __repr__(self) -> str:
        return f"Martingale({self.name})"

    # -- simple constructors ------------------------------------------------

    @classmethod
    def constant(cls) -> "Martingale":
        return cls(lambda s: ONE, "constant", spec={"construction": "constant"})

    @classmethod
    def all_in(cls, pattern: str = "0") -> "Martingale":
        """Stake everything on the next bit of ``pattern pattern ...``, every round."""
        check_bits(pattern)
        if not pattern:
            raise InvalidInput("pattern must be nonempty")
        target = SequencePrefix.periodic(pattern)

        def fn(s: str) -> Dyadic:
            return Dyadic.pow2(len(s)) if s == target.prefix(len(s)) else ZERO

        return cls(fn, f"all-in({pattern})", spec={"construction": "all-in", "pattern": pattern})

    @classmethod
    def from_table(cls, depth: int, values: dict) -> "Martingale":
        """Extensional form; beyond ``depth`` the capital stays frozen."""
        table = {s: Dyadic.parse(v) if isinstance(v, str) else Dyadic.of(v) for s, v in values.items()}

        def fn(s: str) -> Dyadic:
            key = s[:depth]
            if key not in table:
                raise InvalidInput(f"martingale table has no entry for {key!r}")
            return table[key]

        return cls(fn, "table", spec={"depth": depth, "values": {s: str(v) for s, v in table.items()}})

    @classmethod
    def from_leaves(cls, depth: int, leaves: dict) -> "Martingale":
        """Fill in ``d`` below ``depth`` by averaging leaf capitals upward.

        The leaves must average to 1.  Beyond ``depth`` the capital is frozen.
        """
        level = {s: Dyadic.of(leaves[s]) for s in strings_of_length(depth)}
        table = dict(level)
        for k in range(depth - 1, -1, -1):
            level = {s: (level[s + "0"] + level[s + "1"]).half() for s in strings_of_length(k)}
            table.update(level)
        if table[""] != ONE:
            raise InvalidInput(f"leaf capitals average to {table['']}, not 1")
        return cls.from_table(depth, table)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MartingaleReport:
    ok: bool
    depth: int
    sigma: Optional[str] = None
    lhs: Optional[Dyadic] = None
    rhs: Optional[Dyadic] = None
    reason: str = ""

    def __str__(self) -> str:
        if self.ok:
            return f"valid through depth {self.depth}"
        return f"violation at {self.sigma!r}: {self.reason} ({self.lhs} vs {self.rhs})"


def check_martingale(d: Martingale, depth: int) -> MartingaleReport:
    """Verify ``d(empty) = 1`` and the averaging law at every ``|sigma| < depth``."""
    root = d("")
    if root != ONE:
        return MartingaleReport(False, depth, "", root, ONE, "d(empty) != 1")
    for sigma in strings_up_to(depth - 1) if depth > 0 else ():
        lhs = d(sigma) * 2
        rhs = d(sigma + "0") + d(sigma + "1")
        if lhs != rhs:
            return MartingaleReport(False, depth, sigma, d(sigma), rhs.half(), "d(s) != (d(s0)+d(s1))/2")
    return MartingaleReport(True, depth)


def kraft_sides(d: Martingale, sigma: str, H: Iterable[str]) -> tuple[Dyadic, Dyadic]:
    """``(sum_{tau in H} d(tau) 2^-|tau|,  d(sigma) 2^-|sigma|)``."""
    H = list(H)
    if len(set(H)) != len(H) or not is_antichain(H):
        raise InvalidInput("H is not an antichain")
    for tau in H:
        if not tau.startswith(sigma):
            raise InvalidInput(f"{tau!r} does not extend {sigma!r}")
    lhs = sum((d(tau).scale(-len(tau)) for tau in H), ZERO)
    return lhs, d(sigma).scale(-len(sigma))


def kraft_check(d: Martingale, sigma: str, H: Iterable[str]) -> bool:
    lhs, rhs = kraft_sides(d, sigma, H)
    return lhs <= rhs


def antichains(sigma: str, max_len: int) -> Iterator[tuple[str, ...]]:
    """Every antichain of extensions of ``sigma`` with lengths ``<= max_len``.

    The count explodes (677 below a root with 3 free levels), so this is
    only for small ``max_len - |sigma|``.
    """
    yield ()
    yield (sigma,)
    if len(sigma) < max_len:
        left = list(antichains(sigma + "0", max_len))
        right = list(antichains(sigma + "1", max_len))
        for a, b in itertools.product(left, right):
            if a or b:
                yield a + b


def kraft_max(d: Martingale, sigma: str, max_len: int) -> Dyadic:
    """Max over all antichains ``H`` below ``sigma`` (lengths ``<= max_len``)
    of ``sum d(tau) 2^-|tau|``.

    An antichain either contains ``sigma`` or splits into antichains below
    ``sigma0`` and ``sigma1``, so the maximum obeys
    ``best(s) = max(d(s) 2^-|s|, best(s0) + best(s1))``.
    """
    own = d(sigma).scale(-len(sigma))
    if len(sigma) >= max_len:
        return own
    split = kraft_max(d, sigma + "0", max_len) + kraft_max(d, sigma + "1", max_len)
    return max(own, split)


@dataclass(frozen=True)
class KraftViolation:
    sigma: str
    best: Dyadic
    bound: Dyadic


def kraft_exhaustive(d: Martingale, max_len: int) -> Optional[KraftViolation]:
    """Kraft's inequality for every ``sigma`` and every antichain below it
    within length ``max_len``; returns the first violation, if any."""
    memo: dict[str, Dyadic] = {}

    def best(s: str) -> Dyadic:
        if s not in memo:
            own = d(s).scale(-len(s))
            memo[s] = own if len(s) >= max_len else max(own, best(s + "0") + best(s + "1"))
        return memo[s]

    for sigma in strings_up_to(max_len):
        bound = d(sigma).scale(-len(sigma))
        if best(sigma) > bound:
            return KraftViolation(sigma, best(sigma), bound)
    return None


# ---------------------------------------------------------------------------
# savings account
# ---------------------------------------------------------------------------

def savings_martingale(d: Martingale, quadrupling: bool = False) -> Martingale:
    """Bank half the working capital each time it crosses the next threshold.

    Thresholds are ``2^{n+1}`` (doubling) or ``4^{n+1}`` (quadrupling).
    With ``tau_i`` the prefix where threshold ``i`` is first met and ``k``
    the number met so far, the new capital is
    ``d(tau)/2^k + sum_{i<k} d(tau_i)/2^{i+1}``.
    """
    base = 4 if quadrupling else 2

    def fn(tau: str) -> Dyadic:
        banked = ZERO
        n = 0
        threshold = Dyadic(base)
        for i in range(len(tau) + 1):
            cap = d(tau[:i])
            while cap >= threshold:
                banked = banked + cap.scale(-(n + 1))
                n += 1
                threshold = threshold * base
        return d(tau).scale(-n) + banked

    kind = "quadrupling" if quadrupling else "doubling"
    return Martingale(fn, f"savings-{kind}({d.name})")


def thresholds_met(d: Martingale, tau: str, quadrupling: bool = False) -> int:
    """``n(tau)``: how many savings thresholds some prefix of ``tau`` has met."""
    base = 4 if quadrupling else 2
    best = max(d(tau[:i]) for i in range(len(tau) + 1))
    n = 0
    threshold = Dyadic(base)
    while best >= threshold:
        n += 1
        threshold = threshold * base
    return n


def savings_transform(d: Martingale, f: LengthSchedule,
                      quadrupling: bool = False) -> tuple[Martingale, LengthSchedule]:
    """The savings martingale together with its persistent-success schedule.

    Doubling: ``f'(n) = f(2^{n+1})``.  Quadrupling: ``f'(n) = f(2n)``.
    """
    d2 = savings_martingale(d, quadrupling)
    if quadrupling:
        f2 = LengthSchedule(lambda n: f(2 * n), f"{f.name}(2n)")
    else:
        f2 = LengthSchedule(lambda n: f(2 ** (n + 1)), f"{f.name}(2^(n+1))")
    d2.witness = f2
    return d2, f2


# ---------------------------------------------------------------------------
# test -> martingale (betting along a weak test)
# ---------------------------------------------------------------------------

def martingale_from_test(t: BoundedTest, depth: int, verify: bool = True) -> Martingale:
    """A martingale with ``d(tau) >= 2^n`` on stage-``n`` generators reached
    through earlier stages.

    Between consecutive levels the capital sitting on a stage-``n``
    generator ``sigma`` is split evenly over the stage-``(n+1)`` extensions
    of ``sigma``, padded with the lexicographically first other extensions up
    to exactly half of them, so each such extension doubles.  Generators
    without stage-``(n+1)`` extensions, and strings outside the test, keep
    their capital unchanged.  Capital is frozen past level ``l(depth)``.
    """
    if not t.weak:
        raise NotWeak(f"{t.name} is not flagged weak")
    if verify:
        bad = check_weak(t, depth)
        if bad is not None:
            raise NotWeak(f"{t.name}: stage {bad.stage + 1} has mass {bad.mass} inside {bad.tau!r}")
    levels = [t.level(n) for n in range(depth + 1)]
    for a, b in zip(levels, levels[1:]):
        if b <= a:
            raise InvalidTest(f"{t.name}: levels must increase, got {levels}")
    stages = [t.explicit(n) for n in range(depth + 1)]
    # winners[b][rho]: sorted padded set of block-b tails that double, for base rho
    winners: list[dict[str, list[str]]] = [{}]
    for b in range(1, depth + 1):
        block = levels[b] - levels[b - 1]
        half = 1 << (block - 1)
        table: dict[str, list[str]] = {}
        for rho in stages[b - 1].generators:
            tails = [g[levels[b - 1]:] for g in stages[b].within(rho)]
            if not tails:
                continue
            if len(tails) > half:
                raise NotWeak(f"{t.name}: {len(tails)} stage-{b} extensions of {rho!r}, at most {half} allowed")
            table[rho] = sorted(tails + lex_first_absent(block, tails, half - len(tails)))
        winners.append(table)

    def factor(b: int, rho: str, part: str) -> Dyadic:
        # m(part) for the block-b bet placed at rho
        wins = winners[b].get(rho)
        if wins is None:
            return ONE
        block = levels[b] - levels[b - 1]
        lo = bisect.bisect_left(wins, part)
        hi = bisect.bisect_left(wins, part + "2")
        return Dyadic(hi - lo, block - 1 - len(part))

    d: Martingale

    def fn(sigma: str) -> Dyadic:
        n = len(sigma)
        if n <= levels[0]:
            return ONE
        if n > levels[-1]:
            return d(sigma[: levels[-1]])
        b = bisect.bisect_left(levels, n)  # levels[b-1] < n <= levels[b]
        base = sigma[: levels[b - 1]]
        cap = d(base)
        if not cap:
            return ZERO
        return cap * factor(b, base, sigma[levels[b - 1]:])

    d = Martingale(fn, f"bet({t.name})", witness=t.levels)
    return d


# ---------------------------------------------------------------------------
# martingale -> test
# ---------------------------------------------------------------------------

def _rich_strings(d: Martingale, level: int, threshold: Dyadic) -> list[str]:
    """Strings of length ``level`` with ``d >= threshold``.

    Branches are pruned when even doubling at every remaining bit cannot reach
    the threshold.
    """
    out: list[str] = []
    stack = [""]
    while stack:
        s = stack.pop()
        if d(s).scale(level - len(s)) < threshold:
            continue
        if len(s) == level:
            if d(s) >= threshold:
                out.append(s)
            continue
        stack.append(s + "1")
        stack.append(s + "0")
    return sorted(out)


def test_from_martingale(d: Martingale, f: LengthSchedule) -> BoundedTest:
    """Stage ``n``: strings of length ``f(n)`` where ``d`` holds at least ``2^n``."""
    def stage(n: int) -> ClopenSet:
        return ClopenSet.of(f(n), _rich_strings(d, f(n), Dyadic.pow2(n)))

    return BoundedTest(f, stage, name=f"rich({d.name})")


test_from_martingale.__test__ = False  # not a pytest test


def hitting_strings(d: Martingale, n: int, max_len: int) -> list[str]:
    """Prefix-minimal ``sigma`` with ``|sigma| <= max_len`` and ``d(sigma) >= 2^n``."""
    threshold = Dyadic.pow2(n)
    out: list[str] = []
    stack = [""]
    while stack:
        s = stack.pop()
        cap = d(s)
        if cap >= threshold:
            out.append(s)
            continue
        if len(s) >= max_len or cap.scale(max_len - len(s)) < threshold:
            continue
        stack.append(s + "1")
        stack.append(s + "0")
    return sorted(out)


def first_hitting_test(d: Martingale, f: LengthSchedule) -> BoundedTest:
    """Weak test from first hitting times.

    ``U_n`` collects the strings where the capital first reaches ``2^n``
    within ``f(n)`` bits; the result is ``V_n = U_{2n}``, refined to level
    ``f(2n)``.  Weakness holds for the hitting strings themselves (the
    ``basis``); refining a hitting string can break it when the capital keeps
    growing below it.
    """
    levels = LengthSchedule(lambda n: f(2 * n), f"{f.name}(2n)")

    def basis(n: int) -> list[str]:
        return hitting_strings(d, 2 * n, f(2 * n))

    def stage(n: int) -> ClopenSet:
        return ClopenSet.from_prefix_free(basis(n), f(2 * n))

    return BoundedTest(levels, stage, weak=True, name=f"first-hit({d.name})", basis=basis)


# ---------------------------------------------------------------------------
# test -> summed martingale
# ---------------------------------------------------------------------------

class SummedMartingale(Martingale):
    """``d = sum_{i>=1} 2^-i d_i`` where ``d_i`` bets on stage ``3i-1``.

    ``d_i`` is 1 below length ``i-1``, equals ``2^{2i}`` on the stage
    generators and on padding strings chosen so every length-``(i-1)``
    string carries the same share, and is frozen past level ``l(3i-1)``.
    Components beyond ``depth`` are the constant martingale, so for
    ``|sigma| >= 1`` the sum closes to
    ``sum_{1<=i<=|sigma|} 2^-i d_i(sigma) + 2^-|sigma|``.
    """

    def __init__(self, t: BoundedTest, depth: int):
        self.test = t
        self.depth = depth
        self._winners: dict[int, list[str]] = {}
        self._levels: dict[int, int] = {}
        for i in range(1, depth + 1):
            self._build(i)
        super().__init__(self._closed_form, f"summed({t.name})")

    def _build(self, i: int) -> None:
        j = 3 * i - 1
        s = self.test.explicit(j)
        L = s.level
        if L < j:
            raise InvalidTest(f"{self.test.name}: level {L} of stage {j} is below {j}")
        share = 1 << (L - j)  # winners below each length-(i-1) string
        wins: list[str] = []
        for sigma in strings_of_length(i - 1):
            mine = s.within(sigma)
            if len(mine) > share:
                raise InvalidTest(f"stage {j} has {len(mine)} generators below {sigma!r}, more than {share}")
            wins.extend(mine)
            wins.extend(lex_first_absent(L, mine, share - len(mine), within=sigma))
        self._winners[i] = sorted(wins)
        self._levels[i] = L

    def padded(self, i: int) -> list[str]:
        """Stage ``3i-1`` generators plus padding (``G u H``)."""
        return self._winners[i]

    def component(self, i: int, sigma: str) -> Dyadic:
        """``d_i(sigma)``, by counting winners below ``sigma``."""
        if i > self.depth:
            return ONE
        L = self._levels[i]
        key = sigma[:L]
        wins = self._winners[i]
        lo = bisect.bisect_left(wins, key)
        hi = bisect.bisect_left(wins, key + "2")
        return Dyadic(hi - lo, L - len(key) - 2 * i)

    def _closed_form(self, sigma: str) -> Dyadic:
        top = len(sigma)
        total = Dyadic.pow2(-top)
        for i in range(1, top + 1):
            total = total + self.component(i, sigma).scale(-i)
        return total

    def partial_sum(self, sigma: str, terms: int) -> Dyadic:
        """``sum_{1<=i<=terms} 2^-i d_i(sigma)``, every component counted directly."""
        total = ZERO
        for i in range(1, terms + 1):
            total = total + self.component(i, sigma).scale(-i)
        return total


def summed_martingale_from_test(t: BoundedTest, depth: int) -> SummedMartingale:
    return SummedMartingale(t, depth)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def load_martingale(data: dict) -> Martingale:
    """Intensional ``{"construction": ...}`` or extensional ``{"depth", "values"}``."""
    kind = data.get("construction")
    if kind is None or kind == "table":
        return Martingale.from_table(int(data["depth"]), data["values"])
    if kind == "constant":
        return Martingale.constant()
    if kind == "all-in":
        return Martingale.all_in(data.get("pattern", "0"))
    if kind == "from-test":
        t = BoundedTest.from_json(data["test"])
        return martingale_from_test(t, int(data.get("depth", t.max_stage)))
    if kind == "summed":
        t = BoundedTest.from_json(data["test"])
        return summed_martingale_from_test(t, int(data["depth"]))
    if kind == "savings":
        inner = load_martingale(data["base"])
        return savings_martingale(inner, bool(data.get("quadrupling", False)))
    raise InvalidInput(f"unknown martingale construction {kind!r}")
