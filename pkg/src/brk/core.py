"""Foundational value types.

Bitstrings are plain ``str`` objects over the alphabet ``"01"``; the empty
string is the empty word.  Measures and capitals are :class:`Dyadic` values,
which never round.
"""

from __future__ import annotations

import bisect
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Iterable, Iterator, Optional

BitString = str


class InvalidInput(ValueError):
    """Raised when a value violates a documented precondition."""


class InvalidCode(InvalidInput):
    pass


class PrefixTooShort(InvalidInput):
    """A literal prefix is shorter than a requested length."""

    def __init__(self, needed: int, have: int):
        super().__init__(f"prefix has {have} bits, {needed} needed")
        self.needed = needed
        self.have = have


# ---------------------------------------------------------------------------
# bitstrings
# ---------------------------------------------------------------------------

def check_bits(s: str) -> str:
    if not isinstance(s, str) or s.strip("01"):
        raise InvalidInput(f"not a bitstring: {s!r}")
    return s


def strings_of_length(n: int) -> Iterator[str]:
    """All strings of length ``n`` in lexicographic order."""
    if n == 0:
        yield ""
        return
    for i in range(1 << n):
        yield format(i, f"0{n}b")


def strings_up_to(n: int) -> Iterator[str]:
    """All strings of length ``<= n`` in length-then-lexicographic order."""
    for k in range(n + 1):
        yield from strings_of_length(k)


def is_prefix(a: str, b: str) -> bool:
    """``a`` is an initial segment of ``b`` (not necessarily proper)."""
    return b.startswith(a)


def incompatible(a: str, b: str) -> bool:
    return not (b.startswith(a) or a.startswith(b))


def is_antichain(strings: Iterable[str]) -> bool:
    """Pairwise incompatible (no element is a prefix of another, no repeats)."""
    ordered = sorted(strings)
    # after sorting, a prefix sorts immediately before some extension of it
    for a, b in zip(ordered, ordered[1:]):
        if b.startswith(a):
            return False
    return True


def count_ones(s: str) -> int:
    return s.count("1")


# ---------------------------------------------------------------------------
# dyadic rationals
# ---------------------------------------------------------------------------

@total_ordering
class Dyadic:
    """A nonnegative rational ``numerator / 2**exponent`` in canonical form.

    Canonical means the numerator is odd, or the value is zero with exponent 0.
    """

    __slots__ = ("num", "exp")

    def __init__(self, num: int = 0, exp: int = 0):
        if num < 0:
            raise InvalidInput("dyadic rationals here are nonnegative")
        if exp < 0:
            num <<= -exp
            exp = 0
        if num == 0:
            exp = 0
        else:
            tz = (num & -num).bit_length() - 1
            shift = min(tz, exp)
            num >>= shift
            exp -= shift
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def of(cls, value) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, Fraction):
            den = value.denominator
            if den & (den - 1):
                raise InvalidInput(f"{value} is not dyadic")
            return cls(value.numerator, den.bit_length() - 1)
        raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")

    @classmethod
    def pow2(cls, k: int) -> "Dyadic":
        """``2**k`` for any integer ``k``."""
        return cls(1, -k)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        text = text.strip()
        if "/" not in text:
            return cls(int(text), 0)
        num, den = text.split("/", 1)
        den = den.strip()
        if den.startswith("2^"):
            return cls(int(num), int(den[2:]))
        return cls.of(Fraction(int(num), int(den)))

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __float__(self) -> float:
        return float(self.as_fraction())

    def __str__(self) -> str:
        return f"{self.num}/2^{self.exp}"

    def __repr__(self) -> str:
        return f"Dyadic({self.num}, {self.exp})"

    def __bool__(self) -> bool:
        return self.num != 0

    def _align(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp), e

    def __add__(self, other) -> "Dyadic":
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        a, b, e = self._align(Dyadic.of(other))
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other) -> "Dyadic":
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        a, b, e = self._align(Dyadic.of(other))
        if a < b:
            raise InvalidInput(f"negative result {self} - {other}")
        return Dyadic(a - b, e)

    def __mul__(self, other) -> "Dyadic":
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        o = Dyadic.of(other)
        return Dyadic(self.num * o.num, self.exp + o.exp)

    __rmul__ = __mul__

    def scale(self, k: int) -> "Dyadic":
        """Multiply by ``2**k`` (``k`` may be negative)."""
        return Dyadic(self.num, self.exp - k)

    def half(self) -> "Dyadic":
        return Dyadic(self.num, self.exp + 1)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Dyadic(other) if other >= 0 else None
            if other is None:
                return False
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.num == other.num and self.exp == other.exp

    def __lt__(self, other) -> bool:
        if isinstance(other, int):
            if other < 0:
                return False
            other = Dyadic(other)
        if not isinstance(other, Dyadic):
            return NotImplemented
        a, b, _ = self._align(other)
        return a < b

    def __hash__(self) -> int:
        if self.exp == 0:
            return hash(self.num)
        return hash(self.as_fraction())


ZERO = Dyadic(0)
ONE = Dyadic(1)


# ---------------------------------------------------------------------------
# string and set codes
# ---------------------------------------------------------------------------

def encode_string(sigma: str) -> int:
    """c(sigma): the number whose binary expansion is ``1`` followed by sigma."""
    return int("1" + check_bits(sigma), 2)


def decode_string(code: int) -> str:
    if code < 1:
        raise InvalidCode(f"{code} is not a string code")
    return bin(code)[3:]


def _to_ternary(n: int) -> str:
    digits = []
    while n:
        n, r = divmod(n, 3)
        digits.append("012"[r])
    return "".join(reversed(digits)) or "0"


def encode_set(strings: Iterable[str]) -> int:
    """C(S): ternary digits ``2 c(s1) 2 c(s2) ...`` with codes increasing.

    Each c(s) is written in binary, so its digits are 0/1 and the 2s
    separate the members unambiguously.
    """
    members = sorted({check_bits(s) for s in strings}, key=encode_string)
    if not members:
        raise InvalidInput("the set code is defined for nonempty sets only")
    digits = "".join("2" + bin(encode_string(s))[2:] for s in members)
    return int(digits, 3)


def decode_set(code: int) -> frozenset[str]:
    if code < 1:
        raise InvalidCode(f"{code} is not a set code")
    digits = _to_ternary(code)
    if not digits.startswith("2"):
        raise InvalidCode(f"{code}: ternary expansion must start with 2")
    parts = digits.split("2")[1:]
    out = []
    for part in parts:
        if not part.startswith("1"):
            raise InvalidCode(f"{code}: malformed member {part!r}")
        out.append(decode_string(int(part, 2)))
    if [encode_string(s) for s in out] != sorted({encode_string(s) for s in out}):
        raise InvalidCode(f"{code}: members not strictly increasing")
    return frozenset(out)


# ---------------------------------------------------------------------------
# clopen sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClopenSet:
    """``[G]`` for a finite set ``G`` of strings all of length ``level``.

    Generators are kept as a lexicographically sorted tuple, so equal sets
    serialize identically.
    """

    level: int
    generators: tuple[str, ...] = ()
    _lookup: frozenset = field(default=frozenset(), repr=False, compare=False)

    def __post_init__(self):
        if self.level < 0:
            raise InvalidInput("level must be >= 0")
        gens = tuple(sorted(set(self.generators)))
        if len(gens) != len(self.generators):
            raise InvalidInput("duplicate generators")
        for g in gens:
            check_bits(g)
            if len(g) != self.level:
                raise InvalidInput(f"generator {g!r} does not have length {self.level}")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "_lookup", frozenset(gens))

    @classmethod
    def of(cls, level: int, generators: Iterable[str]) -> "ClopenSet":
        return cls(level, tuple(sorted(set(generators))))

    @classmethod
    def from_prefix_free(cls, generators: Iterable[str], level: Optional[int] = None) -> "ClopenSet":
        """Build from an antichain of mixed-length strings, refining to one level.

        ``level`` defaults to the longest generator; it must not be shorter.
        """
        gens = sorted(set(generators))
        if not is_antichain(gens):
            raise InvalidInput("generators are not prefix-free")
        top = max((len(g) for g in gens), default=0)
        if level is None:
            level = top
        if level < top:
            raise InvalidInput(f"level {level} below longest generator ({top})")
        out = []
        for g in gens:
            out.extend(g + tail for tail in strings_of_length(level - len(g)))
        return cls(level, tuple(out))

    @classmethod
    def full(cls, level: int) -> "ClopenSet":
        return cls(level, tuple(strings_of_length(level)))

    @classmethod
    def empty(cls, level: int) -> "ClopenSet":
        return cls(level, ())

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self) -> Iterator[str]:
        return iter(self.generators)

    def measure(self) -> Dyadic:
        return Dyadic(len(self.generators), self.level)

    def contains(self, prefix: str) -> bool:
        """Whether every real extending ``prefix`` lies in the set.

        ``prefix`` must have at least ``level`` bits.
        """
        if len(prefix) < self.level:
            raise PrefixTooShort(self.level, len(prefix))
        return prefix[: self.level] in self._lookup

    def __contains__(self, prefix: str) -> bool:
        return self.contains(prefix)

    def refine(self, level: int) -> "ClopenSet":
        if level < self.level:
            raise InvalidInput("cannot refine to a shorter level")
        if level == self.level:
            return self
        tails = list(strings_of_length(level - self.level))
        return ClopenSet(level, tuple(g + t for g in self.generators for t in tails))

    def within(self, tau: str) -> list[str]:
        """Generators extending ``tau`` (requires ``len(tau) <= level``)."""
        if len(tau) > self.level:
            raise InvalidInput("tau is longer than the level")
        lo = bisect.bisect_left(self.generators, tau)
        hi = bisect.bisect_left(self.generators, tau + "2")
        return list(self.generators[lo:hi])

    def measure_within(self, tau: str) -> Dyadic:
        """mu(self intersect [tau])."""
        if len(tau) >= self.level:
            return Dyadic.pow2(-len(tau)) if tau[: self.level] in self._lookup else ZERO
        return Dyadic(len(self.within(tau)), self.level)

    def intersect(self, other: "ClopenSet") -> "ClopenSet":
        level = max(self.level, other.level)
        a, b = self.refine(level), other.refine(level)
        return ClopenSet(level, tuple(g for g in a.generators if g in b._lookup))

    def to_json(self) -> dict:
        return {"level": self.level, "generators": list(self.generators)}

    @classmethod
    def from_json(cls, data: dict) -> "ClopenSet":
        return cls.of(int(data["level"]), data["generators"])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def measure(s: ClopenSet) -> Dyadic:
    return s.measure()


# ---------------------------------------------------------------------------
# prefixes of reals
# ---------------------------------------------------------------------------

class SequencePrefix:
    """A finite view of a real: a literal prefix, optionally extendable.

    With an ``extender`` (a function ``n -> X|n``) the prefix grows on demand;
    a literal prefix raises :class:`PrefixTooShort` when asked for more bits
    than it has.
    """

    def __init__(self, bits: str = "", source: str = "literal",
                 extender: Optional[Callable[[int], str]] = None):
        self._bits = check_bits(bits)
        self.source = source
        self._extender = extender

    @classmethod
    def generated(cls, name: str, extender: Callable[[int], str]) -> "SequencePrefix":
        return cls("", f"generated-by:{name}", extender)

    @classmethod
    def periodic(cls, pattern: str) -> "SequencePrefix":
        """The real ``pattern pattern pattern ...``."""
        check_bits(pattern)
        if not pattern:
            raise InvalidInput("pattern must be nonempty")

        def ext(n: int) -> str:
            return (pattern * (n // len(pattern) + 1))[:n]

        return cls.generated(f"periodic:{pattern}", ext)

    @property
    def bits(self) -> str:
        return self._bits

    @property
    def extendable(self) -> bool:
        return self._extender is not None

    def __len__(self) -> int:
        return len(self._bits)

    def prefix(self, n: int) -> str:
        if n > len(self._bits):
            if self._extender is None:
                raise PrefixTooShort(n, len(self._bits))
            longer = self._extender(n)
            if len(longer) < n or not longer.startswith(self._bits):
                raise InvalidInput(f"{self.source}: extension is not consistent")
            self._bits = longer
        return self._bits[:n]

    def __getitem__(self, i: int) -> str:
        return self.prefix(i + 1)[i]

    def __repr__(self) -> str:
        shown = self._bits if len(self._bits) <= 24 else self._bits[:24] + "..."
        return f"SequencePrefix({shown!r}, source={self.source!r})"


def as_prefix(x) -> SequencePrefix:
    if isinstance(x, SequencePrefix):
        return x
    return SequencePrefix(x)


def lex_first_absent(level: int, present: Iterable[str], count: int,
                     within: str = "") -> list[str]:
    """The ``count`` lexicographically first strings of length ``level``
    extending ``within`` that are not in ``present``."""
    taken = set(present)
    out: list[str] = []
    if count <= 0:
        return out
    for tail in strings_of_length(level - len(within)):
        s = within + tail
        if s not in taken:
            out.append(s)
            if len(out) == count:
                return out
    raise InvalidInput(f"only {len(out)} free strings, {count} requested")


def interleave(a: str, b: str) -> str:
    """a (+) b with a on even positions; both must have equal length."""
    if len(a) != len(b):
        raise InvalidInput("interleave needs equal lengths")
    return "".join(itertools.chain.from_iterable(zip(a, b)))


class OracleIndexError(InvalidInput):
    """An oracle was queried at a position it does not have."""

    def __init__(self, index: int, available: int):
        super().__init__(f"oracle queried at {index}, only {available} bits known")
        self.index = index
        self.available = available


class Oracle:
    """Read access to a real through a finite prefix, recording every query.

    With ``pad_zeros`` the prefix is treated as followed by ``000...``;
    otherwise reading past the prefix raises :class:`OracleIndexError`.
    ``bound`` (if given) is an extra hard limit on queryable positions.
    """

    def __init__(self, bits, pad_zeros: bool = False, bound: Optional[int] = None):
        self._src = bits if isinstance(bits, SequencePrefix) else None
        self._bits = "" if self._src is not None else check_bits(bits)
        self.pad_zeros = pad_zeros
        self.bound = bound
        self.queries: set[int] = set()

    def __call__(self, i: int) -> str:
        if i < 0:
            raise OracleIndexError(i, len(self._bits))
        if self.bound is not None and i >= self.bound:
            raise OracleIndexError(i, self.bound)
        self.queries.add(i)
        if self._src is not None:
            if i < len(self._src) or self._src.extendable:
                return self._src[i]
            if self.pad_zeros:
                return "0"
            raise OracleIndexError(i, len(self._src))
        if i < len(self._bits):
            return self._bits[i]
        if self.pad_zeros:
            return "0"
        raise OracleIndexError(i, len(self._bits))

    @property
    def max_query(self) -> int:
        """Largest queried index, or -1 if there were no queries."""
        return max(self.queries, default=-1)


def as_oracle(x) -> Optional[Oracle]:
    if x is None or isinstance(x, Oracle):
        return x
    return Oracle(x)
