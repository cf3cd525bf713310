"""Computable reals built by diagonalizing against a finite machine registry.

* :func:`diagonal_real` -- each stage picks the lexicographically first
  extension that no short input of the current machine produces.
* :func:`oscillating_real` -- the same, with long blocks of 0s and 1s in
  between so the density of ones swings past 1/4 and 3/4.
* :func:`counterexample_pair` -- reals ``A``, ``B`` each incompressible
  relative to the other while ``A (+) B`` sits in a simple null set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from brk.core import (
    Dyadic,
    InvalidInput,
    Oracle,
    SequencePrefix,
    as_prefix,
    count_ones,
    interleave,
    strings_of_length,
    strings_up_to,
)
from brk.machines import DSLMachine, load_machine
from brk.mltests import BoundedTest, PredicateStage
from brk.schedules import LengthSchedule


class RegistryError(InvalidInput):
    pass


@dataclass
class RegistryEntry:
    name: str
    machine: object
    f: LengthSchedule
    source: Optional[str] = None

    def to_json(self) -> dict:
        return {"name": self.name, "program": self.source, "f": self.f.to_json()}


class Registry:
    """A finite ordered list of (machine, schedule) pairs.

    The constructions walk it cyclically, so entry ``k mod len`` serves
    stage ``k``.
    """

    def __init__(self, entries: list[RegistryEntry]):
        self.entries = list(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, k: int) -> RegistryEntry:
        return self.entries[k]

    def __iter__(self):
        return iter(self.entries)

    def entry_for(self, k: int) -> RegistryEntry:
        return self.entries[k % len(self.entries)]

    @classmethod
    def from_json(cls, data) -> "Registry":
        if isinstance(data, str):
            data = json.loads(data)
        entries = []
        for i, item in enumerate(data):
            name = item.get("name", f"M{i}")
            src = item["program"]
            entries.append(RegistryEntry(name, DSLMachine.parse(src, name),
                                         LengthSchedule.from_json(item["f"]), src))
        return cls(entries)

    @classmethod
    def of(cls, *pairs) -> "Registry":
        """``Registry.of((source, f), ...)`` with DSL source text and schedules."""
        entries = []
        for i, (src, f) in enumerate(pairs):
            if isinstance(f, str):
                f = LengthSchedule.from_json(f)
            entries.append(RegistryEntry(f"M{i}", load_machine(src, f"M{i}"), f, src if isinstance(src, str) else None))
        return cls(entries)

    def to_json(self) -> list:
        return [e.to_json() for e in self.entries]


def _stage_length(entry: RegistryEntry, c: int) -> int:
    L = entry.f(c)
    if L <= c:
        raise RegistryError(f"{entry.name}: f({c}) = {L} is not above {c}")
    return L


def _images(entry: RegistryEntry, max_len: int, length: int, prefix: str, oracle=None) -> set[str]:
    """Outputs of length ``length`` extending ``prefix`` on inputs of length ``<= max_len``."""
    out = set()
    for v in strings_up_to(max_len) if max_len >= 0 else ():
        res = entry.machine.execute(v, oracle)
        if res.status == "budget":
            raise RegistryError(f"{entry.name} ran out of budget on input {v!r}")
        if res.ok and len(res.output) == length and res.output.startswith(prefix):
            out.add(res.output)
    return out


def _avoid(prefix: str, width: int, taken: set[str]) -> str:
    """Lexicographically first ``u`` of length ``width`` with ``prefix + u`` not taken."""
    for u in strings_of_length(width):
        if prefix + u not in taken:
            return u
    raise AssertionError(f"every extension of length {width} is an output; counting says this cannot happen")


# ---------------------------------------------------------------------------
# diagonal reals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StageRecord:
    k: int
    entry: str
    c: int  # length before the stage
    length: int  # f_k(c), length after the stage
    tau: str  # bits added

    def to_json(self) -> dict:
        return {"k": self.k, "entry": self.entry, "c": self.c, "f": self.length, "tau": self.tau}


@dataclass
class StagedReal:
    """A prefix built in stages; ``bits`` may overrun the requested length."""

    bits: str
    length: int
    stages: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)  # (position, "low" | "high")

    @property
    def prefix(self) -> str:
        return self.bits[: self.length]

    def sequence(self) -> SequencePrefix:
        return SequencePrefix(self.bits, "staged")

    def log(self) -> dict:
        return {"length": self.length,
                "stages": [s.to_json() for s in self.stages],
                "checkpoints": [{"n": n, "kind": kind} for n, kind in self.checkpoints]}


def _diagonal_stage(R: Registry, k: int, x: str) -> StageRecord:
    entry = R.entry_for(k)
    c = len(x)
    L = _stage_length(entry, c)
    taken = _images(entry, L - c - 1, L, x)
    tau = _avoid(x, L - c, taken)
    return StageRecord(k, entry.name, c, L, tau)


def diagonal_real(R: Registry, length: int) -> StagedReal:
    """Stage ``k`` extends ``X | c`` to length ``f_k(c)`` by the lexicographically
    first string that no input of length ``<= f_k(c) - c - 1`` is mapped to by
    ``M_k``.  Hence ``C_{M_k}(X | f_k(c)) > f_k(c) - c - 1``."""
    if len(R) == 0:
        return StagedReal("0" * length, length)
    x = ""
    stages = []
    k = 0
    while len(x) < length:
        rec = _diagonal_stage(R, k, x)
        x += rec.tau
        stages.append(rec)
        k += 1
    return StagedReal(x, length, stages)


def oscillating_real(R: Registry, length: int, block: Optional[LengthSchedule] = None) -> StagedReal:
    """Diagonal stages separated by alternating blocks of 0s and 1s.

    After a prefix of length ``n`` the next block has length ``block(n)``
    (default ``3n + 1``), which pushes the density of ones below ``1/4``
    after a 0-block and above ``3/4`` after a 1-block.  A checkpoint is
    recorded at the end of each block.
    """
    block = block or LengthSchedule(lambda n: 3 * n + 1, "3n+1")
    x = ""
    stages = []
    checkpoints = []
    k = 0
    bit = "0"
    while len(x) < length:
        if len(R):
            rec = _diagonal_stage(R, k, x)
            x += rec.tau
            stages.append(rec)
            k += 1
        b = block(len(x))
        if b <= 0:
            raise InvalidInput(f"block length at {len(x)} must be positive")
        x += bit * b
        checkpoints.append((len(x), "low" if bit == "0" else "high"))
        bit = "1" if bit == "0" else "0"
    return StagedReal(x, length, stages, checkpoints)


# ---------------------------------------------------------------------------
# joins and densities
# ---------------------------------------------------------------------------

def join(a, b) -> str:
    """``(A (+) B)(2i) = A(i)`` and ``(A (+) B)(2i+1) = B(i)``; truncates to the shorter."""
    a = a.bits if isinstance(a, SequencePrefix) else a
    b = b.bits if isinstance(b, SequencePrefix) else b
    n = min(len(a), len(b))
    return interleave(a[:n], b[:n])


def unjoin(x: str) -> tuple[str, str]:
    return x[0::2], x[1::2]


@dataclass(frozen=True)
class DensityRow:
    n: int
    ones: int
    density: Fraction
    near_half: Optional[bool] = None


def density_report(x, checkpoints, eps=None) -> list[DensityRow]:
    """Exact density of ones in ``X | n`` at each checkpoint.

    With ``eps``, flags checkpoints whose density is within ``eps`` of 1/2.
    """
    x = as_prefix(x)
    eps = None if eps is None else Fraction(eps)
    rows = []
    for n in checkpoints:
        if n <= 0:
            raise InvalidInput(f"checkpoint {n} must be positive")
        ones = count_ones(x.prefix(n))
        d = Fraction(ones, n)
        rows.append(DensityRow(n, ones, d, None if eps is None else abs(d - Fraction(1, 2)) <= eps))
    return rows


# ---------------------------------------------------------------------------
# the counterexample pair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairStage:
    i: int  # stage number, 1-based
    j: int  # registry round
    side: str  # "A" (odd stages) or "B" (even stages)
    c: int
    length: int  # f_j(c)
    u: str
    h: int  # h(i)
    max_query: int

    def to_json(self) -> dict:
        return {"stage": self.i, "j": self.j, "side": self.side, "c": self.c,
                "f": self.length, "u": self.u, "h": self.h, "max_query": self.max_query}


@dataclass
class CounterexamplePair:
    a: str
    b: str
    h: list
    stages: list

    def joined(self) -> str:
        return join(self.a, self.b)

    def log(self) -> dict:
        return {"h": self.h, "stages": [s.to_json() for s in self.stages]}


def counterexample_pair(R: Registry, stages: int) -> CounterexamplePair:
    """``A`` and ``B`` through ``h(2 * stages)``.

    Round ``j`` uses entry ``j mod len(R)``.  Stage ``2j+1`` picks ``u`` so
    that ``A_{2j} u`` is no output of ``M_j`` with oracle ``B_{2j} 000...`` on
    inputs of length ``<= f_j(c) - c`` (``c = h(2j) + 1``), sets ``h(2j+1)``
    past every oracle position those runs read, and fills ``B`` with 0s.
    Stage ``2j+2`` does the same with the roles swapped.
    """
    if len(R) == 0:
        raise RegistryError("counterexample_pair needs a nonempty registry")
    a = b = ""
    h = [0]
    log = []
    for j in range(stages):
        entry = R.entry_for(j)
        for side in ("A", "B"):
            mine, other = (a, b) if side == "A" else (b, a)
            start = h[-1]
            c = start + 1
            L = _stage_length(entry, c)
            oracle = Oracle(other, pad_zeros=True)
            taken = _images(entry, L - c, L, mine, oracle)
            u = _avoid(mine, L - start, taken)
            top = max(L, oracle.max_query + 1)
            mine = mine + u + "0" * (top - L)
            other = other + "0" * (top - start)
            a, b = (mine, other) if side == "A" else (other, mine)
            h.append(top)
            log.append(PairStage(len(h) - 1, j, side, c, L, u, top, oracle.max_query))
    return CounterexamplePair(a, b, h, log)


def zero_block_test(h: list) -> BoundedTest:
    """Stage ``n`` holds every ``A (+) B`` of length ``2 h(n)`` with ``B`` zero on
    blocks ``[h(i), h(i+1))`` for even ``i < n`` and ``A`` zero on them for odd
    ``i < n``.  Its measure is ``2^-h(n)``."""
    h = list(h)
    if h[0] != 0 or any(y <= x for x, y in zip(h, h[1:])):
        raise InvalidInput("h must start at 0 and increase")
    levels = LengthSchedule.table([2 * v for v in h])

    def forced(n: int) -> list[int]:
        pos = []
        for i in range(n):
            offset = 1 if i % 2 == 0 else 0
            pos.extend(2 * m + offset for m in range(h[i], h[i + 1]))
        return pos

    def stage(n: int) -> PredicateStage:
        positions = forced(n)

        def pred(s: str) -> bool:
            return all(s[p] == "0" for p in positions)

        return PredicateStage(2 * h[n], pred, Dyadic.pow2(-h[n]), name=f"zero-blocks<{n}")

    return BoundedTest(levels, stage, name="zero-blocks", max_stage=len(h) - 1)
