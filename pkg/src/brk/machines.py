"""Machines: a small stack DSL, plain complexity, and the compressor constructions.

The DSL has one instruction per line; ``#`` starts a comment.  The stack
holds bitstrings and naturals.  Instructions:

=============  ==============================================================
``input``      push the input string
``push B``     push the literal bitstring ``B`` (``push`` alone pushes ``""``)
``empty``      push ``""``
``int K``      push the natural ``K``
``app0/app1``  append a bit to the top string
``cat``        ``a b -> a+b``
``dup drop swap over``  the usual
``len``        ``s -> |s|``
``eq``         ``a b -> 1 if a == b else 0``
``lt``         ``a b -> 1 if a < b else 0`` (naturals)
``add sub mul``  naturals; ``sub`` is truncated at 0
``not``        ``k -> 1 if k == 0 else 0``
``bit``        ``s i -> s[i]`` as a one-bit string, ``""`` past the end
``obit``       ``i -> Z(i)`` from the oracle, as a one-bit string
``take skip``  ``s k -> s[:k]`` and ``s k -> s[k:]``
``flip rev``   complement or reverse the top string
``repeat K``   run the body ``K`` times (``K`` fixed in the text)
``times``      pop ``k``, run the body ``k`` times
``index``      push the innermost loop counter
``if``         pop ``k``; run the branch if ``k != 0``, else the ``else`` part
``end``        closes ``repeat``, ``times`` and ``if``
``ret``        stop; the top of the stack is the output
``inf``        stop with the divergence token
=============  ==============================================================

The output is the top of the stack when the program ends (``""`` for an
empty stack).  Budgets count executed instructions (steps) and the largest
total size of the stack (space, in bits).  The environment variable
``BRK_MAX_BUDGET`` caps every step budget.
"""

from __future__ import annotations

import bisect
import os
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Protocol, Union

from brk.core import (
    ClopenSet,
    Dyadic,
    InvalidInput,
    Oracle,
    as_prefix,
    check_bits,
    is_antichain,
    strings_of_length,
    strings_up_to,
)
from brk.mltests import BoundedTest, InvalidTest, NotWeak, check_weak, is_nested
from brk.schedules import LengthSchedule

DEFAULT_STEPS = 100_000


class MachineError(InvalidInput):
    """A malformed program, or a run-time type error inside one."""


class BudgetExceeded(Exception):
    def __init__(self, steps: int, space: int):
        super().__init__(f"budget exceeded after {steps} steps, {space} bits of stack")
        self.steps = steps
        self.space = space


class _Infinity:
    """The divergence token.  Never equal to a bitstring."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    __str__ = __repr__


INF = _Infinity()
Output = Union[str, _Infinity]


def step_limit(requested: Optional[int] = None) -> int:
    limit = DEFAULT_STEPS if requested is None else requested
    cap = os.environ.get("BRK_MAX_BUDGET")
    if cap:
        try:
            limit = min(limit, int(cap))
        except ValueError:
            raise InvalidInput(f"BRK_MAX_BUDGET must be an integer, got {cap!r}") from None
    return limit


@dataclass(frozen=True)
class RunResult:
    status: str  # "ok", "diverged" or "budget"
    output: Optional[Output]
    steps: int = 0
    space: int = 0
    queries: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class Machine(Protocol):
    name: str

    def execute(self, sigma: str, oracle=None) -> RunResult: ...

    def run(self, sigma: str, oracle=None) -> Output: ...


def _oracle(z) -> Optional[Oracle]:
    if z is None or isinstance(z, Oracle):
        return z
    return Oracle(z)


class _Base:
    name = "machine"

    def execute(self, sigma: str, oracle=None) -> RunResult:
        raise NotImplementedError

    def run(self, sigma: str, oracle=None) -> Output:
        """``M(sigma)`` or ``INF``; raises :class:`BudgetExceeded`."""
        res = self.execute(sigma, oracle)
        if res.status == "budget":
            raise BudgetExceeded(res.steps, res.space)
        return res.output

    def __call__(self, sigma: str, oracle=None) -> Output:
        return self.run(sigma, oracle)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


# ---------------------------------------------------------------------------
# the DSL
# ---------------------------------------------------------------------------

_NO_ARG = {"input", "empty", "app0", "app1", "cat", "dup", "drop", "swap", "over",
           "len", "eq", "lt", "add", "sub", "mul", "not", "bit", "obit", "take",
           "skip", "flip", "rev", "times", "index", "if", "else", "end", "ret", "inf"}
_OPENERS = {"repeat", "times", "if"}


class DSLMachine(_Base):
    def __init__(self, program: list[tuple[str, object]], source: str = "", name: str = "dsl",
                 step_budget: Optional[int] = None, space_budget: Optional[int] = None):
        self.program = program
        self.source = source
        self.name = name
        self.step_budget = step_budget
        self.space_budget = space_budget
        self._match = self._link(program)
        self.uses_oracle = any(op == "obit" for op, _ in program)

    @classmethod
    def parse(cls, source: str, name: str = "dsl", **budgets) -> "DSLMachine":
        program: list[tuple[str, object]] = []
        for lineno, raw in enumerate(source.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            op = parts[0].lower()
            if op == "push":
                if len(parts) > 2:
                    raise MachineError(f"line {lineno}: push takes one bitstring")
                arg = parts[1] if len(parts) == 2 else ""
                try:
                    check_bits(arg)
                except InvalidInput:
                    raise MachineError(f"line {lineno}: {arg!r} is not a bitstring") from None
                program.append(("push", arg))
            elif op in ("int", "repeat"):
                if len(parts) != 2 or not parts[1].isdigit():
                    raise MachineError(f"line {lineno}: {op} needs a natural number")
                program.append((op, int(parts[1])))
            elif op in _NO_ARG:
                if len(parts) != 1:
                    raise MachineError(f"line {lineno}: {op} takes no argument")
                program.append((op, None))
            else:
                raise MachineError(f"line {lineno}: unknown instruction {parts[0]!r}")
        return cls(program, source, name, **budgets)

    @staticmethod
    def _link(program) -> dict[int, int]:
        """Match each opener with its ``end`` (and ``if`` with its ``else``)."""
        match: dict[int, int] = {}
        open_: list[int] = []
        for pc, (op, _) in enumerate(program):
            if op in _OPENERS:
                open_.append(pc)
            elif op == "else":
                if not open_ or program[open_[-1]][0] != "if" or open_[-1] in match:
                    raise MachineError(f"instruction {pc}: else without if")
                match[open_[-1]] = pc
            elif op == "end":
                if not open_:
                    raise MachineError(f"instruction {pc}: end without opener")
                start = open_.pop()
                if start in match:  # if ... else ... end
                    match[match[start]] = pc
                else:
                    match[start] = pc
                match[pc] = start
        if open_:
            raise MachineError(f"instruction {open_[-1]}: {program[open_[-1]][0]} is never closed")
        return match

    def execute(self, sigma: str, oracle=None) -> RunResult:
        check_bits(sigma)
        oracle = _oracle(oracle)
        if self.uses_oracle and oracle is None:
            raise MachineError(f"{self.name} reads an oracle but none was given")
        limit = step_limit(self.step_budget)
        prog, match = self.program, self._match
        stack: list = []
        loops: list[list[int]] = []  # [opener pc, count, index]
        steps = space = 0
        pc = 0

        def queries() -> tuple[int, ...]:
            return tuple(sorted(oracle.queries)) if oracle is not None else ()

        def pop(kind):
            if not stack:
                raise MachineError(f"{self.name}: stack underflow at instruction {pc} ({prog[pc][0]})")
            v = stack.pop()
            if not isinstance(v, kind):
                raise MachineError(f"{self.name}: instruction {pc} ({prog[pc][0]}) got {type(v).__name__}")
            return v

        while pc < len(prog):
            steps += 1
            if steps > limit:
                return RunResult("budget", None, steps, space, queries())
            op, arg = prog[pc]
            nxt = pc + 1
            if op == "input":
                stack.append(sigma)
            elif op == "push":
                stack.append(arg)
            elif op == "empty":
                stack.append("")
            elif op == "int":
                stack.append(arg)
            elif op in ("app0", "app1"):
                stack.append(pop(str) + op[-1])
            elif op == "cat":
                b = pop(str)
                stack.append(pop(str) + b)
            elif op == "dup":
                v = pop(object)
                stack += [v, v]
            elif op == "drop":
                pop(object)
            elif op == "swap":
                b, a = pop(object), pop(object)
                stack += [b, a]
            elif op == "over":
                b, a = pop(object), pop(object)
                stack += [a, b, a]
            elif op == "len":
                stack.append(len(pop(str)))
            elif op == "eq":
                b, a = pop(object), pop(object)
                stack.append(int(type(a) is type(b) and a == b))
            elif op == "lt":
                b, a = pop(int), pop(int)
                stack.append(int(a < b))
            elif op == "add":
                b = pop(int)
                stack.append(pop(int) + b)
            elif op == "sub":
                b = pop(int)
                stack.append(max(pop(int) - b, 0))
            elif op == "mul":
                b = pop(int)
                stack.append(pop(int) * b)
            elif op == "not":
                stack.append(int(pop(int) == 0))
            elif op == "bit":
                i = pop(int)
                s = pop(str)
                stack.append(s[i] if i < len(s) else "")
            elif op == "obit":
                stack.append(oracle(pop(int)))
            elif op == "take":
                k = pop(int)
                stack.append(pop(str)[:k])
            elif op == "skip":
                k = pop(int)
                stack.append(pop(str)[k:])
            elif op == "flip":
                stack.append(pop(str).translate(_FLIP))
            elif op == "rev":
                stack.append(pop(str)[::-1])
            elif op in ("repeat", "times"):
                count = arg if op == "repeat" else pop(int)
                if count == 0:
                    nxt = match[pc] + 1
                else:
                    loops.append([pc, count, 0])
            elif op == "index":
                if not loops:
                    raise MachineError(f"{self.name}: index outside a loop")
                stack.append(loops[-1][2])
            elif op == "if":
                if pop(int) == 0:
                    nxt = match[pc] + 1
            elif op == "else":
                nxt = match[pc] + 1
            elif op == "end":
                opener = match[pc]
                if prog[opener][0] in ("repeat", "times"):
                    frame = loops[-1]
                    frame[2] += 1
                    if frame[2] < frame[1]:
                        nxt = opener + 1
                    else:
                        loops.pop()
            elif op == "ret":
                break
            elif op == "inf":
                return RunResult("diverged", INF, steps, space, queries())
            used = sum(len(v) if isinstance(v, str) else max(v.bit_length(), 1) for v in stack)
            space = max(space, used)
            if self.space_budget is not None and space > self.space_budget:
                return RunResult("budget", None, steps, space, queries())
            pc = nxt
        out = stack[-1] if stack else ""
        if not isinstance(out, str):
            raise MachineError(f"{self.name}: program ended with a number on top of the stack")
        return RunResult("ok", out, steps, space, queries())


_FLIP = str.maketrans("01", "10")


class FunctionMachine(_Base):
    """A Python function ``sigma -> str | INF`` (or ``(sigma, oracle) -> ...``)."""

    def __init__(self, fn: Callable, name: str = "function", uses_oracle: bool = False):
        self._fn = fn
        self.name = name
        self.uses_oracle = uses_oracle

    def execute(self, sigma: str, oracle=None) -> RunResult:
        check_bits(sigma)
        if self.uses_oracle:
            oracle = _oracle(oracle)
            if oracle is None:
                raise MachineError(f"{self.name} reads an oracle but none was given")
            out = self._fn(sigma, oracle)
            q = tuple(sorted(oracle.queries))
        else:
            out = self._fn(sigma)
            q = ()
        if out is INF:
            return RunResult("diverged", INF, 1, 0, q)
        return RunResult("ok", check_bits(out), 1, len(out), q)


class TableMachine(_Base):
    """A finite lookup table; strings not in the table diverge."""

    def __init__(self, table: dict, name: str = "table"):
        self.table: dict[str, Output] = {}
        for k, v in table.items():
            self.table[check_bits(k)] = INF if v is INF or v == "inf" else check_bits(v)
        self.name = name

    @property
    def domain(self) -> list[str]:
        return sorted(k for k, v in self.table.items() if v is not INF)

    def execute(self, sigma: str, oracle=None) -> RunResult:
        out = self.table.get(check_bits(sigma), INF)
        return RunResult("diverged" if out is INF else "ok", out, 1)

    def to_json(self) -> dict:
        return {"name": self.name, "table": {k: str(v) for k, v in sorted(self.table.items())}}


def load_machine(data, name: str = "machine") -> _Base:
    """DSL source text, or a JSON table ``{"table": {sigma: tau | "inf"}}``."""
    if isinstance(data, str):
        return DSLMachine.parse(data, name)
    if "table" in data:
        return TableMachine(data["table"], data.get("name", name))
    if "program" in data:
        return DSLMachine.parse(data["program"], data.get("name", name))
    raise MachineError("machine file needs a program or a table")


# ---------------------------------------------------------------------------
# plain complexity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexityReport:
    target: str
    witness: Optional[str]
    value: Optional[int]  # None: no preimage of length <= searched
    searched: int

    def __str__(self) -> str:
        if self.value is None:
            return f"C_M({self.target}) > {self.searched} (no preimage found)"
        return f"C_M({self.target}) = {self.value} via {self.witness!r}"


def _output(M: _Base, sigma: str, oracle) -> Optional[Output]:
    res = M.execute(sigma, oracle)
    return res.output if res.ok else None


def plain_complexity(M: _Base, tau: str, max_len: int, oracle=None) -> ComplexityReport:
    """Shortest ``sigma`` (lexicographically first among shortest) with ``M(sigma) = tau``.

    Inputs where ``M`` diverges or runs out of budget are skipped.
    """
    check_bits(tau)
    for sigma in strings_up_to(max_len):
        if _output(M, sigma, oracle) == tau:
            return ComplexityReport(tau, sigma, len(sigma), max_len)
    return ComplexityReport(tau, None, None, max_len)


class ImageIndex:
    """All outputs of ``M`` on inputs of length ``<= max_len``, with their
    shortest lexicographically first preimages; answers many complexity
    queries after one sweep."""

    def __init__(self, M: _Base, max_len: int, oracle=None):
        self.max_len = max_len
        self.first: dict[str, str] = {}
        for sigma in strings_up_to(max_len):
            out = _output(M, sigma, oracle)
            if isinstance(out, str) and out not in self.first:
                self.first[out] = sigma

    def complexity(self, tau: str) -> ComplexityReport:
        w = self.first.get(tau)
        return ComplexityReport(tau, w, None if w is None else len(w), self.max_len)


@dataclass(frozen=True)
class CompressionRow:
    c: int
    length: int  # f(c)
    bound: int  # f(c) - c
    report: ComplexityReport

    @property
    def holds(self) -> bool:
        return self.report.value is not None and self.report.value <= self.bound


@dataclass(frozen=True)
class CompressionVerdict:
    rows: list

    @property
    def compressed(self) -> bool:
        return all(r.holds for r in self.rows)

    def first_failure(self) -> Optional[int]:
        for r in self.rows:
            if not r.holds:
                return r.c
        return None


def check_compression(M: _Base, f: LengthSchedule, x, c_max: int, oracle=None) -> CompressionVerdict:
    """``C_M(X | f(c)) <= f(c) - c`` for each ``c <= c_max``."""
    x = as_prefix(x)
    rows = []
    for c in range(c_max + 1):
        fc = f(c)
        bound = max(fc - c, -1)
        tau = x.prefix(fc)
        rep = plain_complexity(M, tau, bound, oracle) if bound >= 0 else ComplexityReport(tau, None, None, -1)
        rows.append(CompressionRow(c, fc, fc - c, rep))
    return CompressionVerdict(rows)


def test_from_compressor(M: _Base, f: LengthSchedule) -> BoundedTest:
    """Stage ``c``: outputs of length ``f(c+1)`` on inputs of length ``<= f(c+1) - c - 1``."""
    levels = LengthSchedule(lambda c: f(c + 1), f"{f.name}(c+1)")

    def stage(c: int) -> ClopenSet:
        L = f(c + 1)
        gens = set()
        for sigma in strings_up_to(L - c - 1) if L - c - 1 >= 0 else ():
            out = _output(M, sigma, None)
            if isinstance(out, str) and len(out) == L:
                gens.add(out)
        return ClopenSet.of(L, gens)

    return BoundedTest(levels, stage, name=f"images({M.name})")


test_from_compressor.__test__ = False  # not a pytest test


# ---------------------------------------------------------------------------
# test -> compressor
# ---------------------------------------------------------------------------

class OrderFunction:
    """A non-decreasing unbounded ``h``; ``fn`` is trusted, ``check`` verifies a range."""

    def __init__(self, fn: Callable[[int], int], name: str = "h"):
        self._fn = fn
        self.name = name

    def __call__(self, m: int) -> int:
        return self._fn(m)

    def check(self, upto: int) -> None:
        for m in range(upto):
            if self(m + 1) < self(m):
                raise InvalidInput(f"{self.name} decreases at {m}: {self(m)} -> {self(m + 1)}")


@dataclass
class Compressor:
    """A quick process machine built from a weak nested test.

    ``f`` is the (possibly repaired) level schedule, ``test`` the repaired
    test, ``repairs`` a log of every level change.
    """

    machine: FunctionMachine
    h: OrderFunction
    f: LengthSchedule
    test: BoundedTest
    depth: int
    repairs: list = field(default_factory=list)

    def __call__(self, sigma: str) -> str:
        return self.machine.run(sigma)

    def g(self, c: int) -> int:
        return self.f(c) - c

    def compile_to_dsl(self, max_len: Optional[int] = None, limit: int = 12) -> DSLMachine:
        """A DSL program computing the same function.

        It is a decision tree over the first ``K = g(depth)`` input bits, with
        the identity tail appended past ``K``.
        """
        K = self.g(self.depth) if max_len is None else max_len
        if K < self.g(self.depth):
            raise InvalidInput(f"need at least {self.g(self.depth)} tree levels")
        if K > limit:
            raise InvalidInput(f"decision tree of depth {K} is over the limit {limit}")
        lines: list[str] = []

        def emit(nu: str) -> None:
            d = len(nu)
            if d == K:
                lines.extend([f"push {self(nu)}", "input", f"int {K}", "skip", "cat", "ret"])
                return
            lines.extend(["input", "len", f"int {d}", "eq", "if", f"push {self(nu)}", "ret", "end",
                          "input", f"int {d}", "bit", "push 1", "eq", "if"])
            emit(nu + "1")
            lines.append("else")
            emit(nu + "0")
            lines.append("end")

        emit("")
        src = "\n".join(line.rstrip() for line in lines)
        return DSLMachine.parse(src, f"compiled({self.machine.name})")


def repair_levels(t: BoundedTest, depth: int) -> tuple[BoundedTest, LengthSchedule, list[str]]:
    """Make stage 0 the whole space at level 0 and ``f(c) - c`` strictly increasing.

    ``f'(c+1) = max(f(c+1), f'(c) + 2)``; stages are refined to the new
    levels.  Replacing stage 0 by the whole space keeps the failing reals of
    a nested test unchanged.
    """
    log: list[str] = []
    stages = [ClopenSet.full(0)]
    if t.level(0) != 0 or len(t.explicit(0)) != 1:
        log.append(f"stage 0: level {t.level(0)} -> 0 (whole space)")
    for c in range(1, depth + 1):
        s = t.explicit(c)
        want = max(s.level, stages[-1].level + 2)
        if want != s.level:
            log.append(f"stage {c}: level {s.level} -> {want}")
            s = s.refine(want)
        stages.append(s)
    repaired = BoundedTest.from_stages(stages, weak=True, name=f"repaired({t.name})")
    return repaired, repaired.levels, log


def compressor_from_test(t: BoundedTest, depth: int) -> Compressor:
    """The staged compressor of a weak nested test.

    At stage ``c+1`` the inputs of length ``g(c+1) = f(c+1) - c - 1``
    extending the preimage ``nu`` of a stage-``c`` generator ``tau`` are
    sent, in order, onto the stage-``(c+1)`` generators below ``tau``; the
    remaining ones go to ``tau 0...0``.  Inputs of length between ``g(c)``
    and ``g(c+1)`` copy the output of their length-``g(c)`` prefix.  Past
    ``g(depth)`` the input is copied through.
    """
    if not t.weak:
        raise NotWeak(f"{t.name} is not flagged weak")
    if not is_nested(t, depth):
        raise InvalidTest(f"{t.name} is not nested through {depth}")
    rt, f, log = repair_levels(t, depth)
    bad = check_weak(rt, depth)
    if bad is not None:
        raise NotWeak(f"after level repair, stage {bad.stage + 1} has mass {bad.mass} inside {bad.tau!r}")
    if not is_nested(rt, depth):
        raise InvalidTest("level repair broke nesting")

    g = [f(c) - c for c in range(depth + 1)]
    tails: list[dict[str, list[str]]] = []
    for c in range(depth):
        below: dict[str, list[str]] = {}
        Lc = f(c)
        for tau in rt.explicit(c).generators:
            found = [s[Lc:] for s in rt.explicit(c + 1).within(tau)]
            if found:
                below[tau] = found
        tails.append(below)

    def evaluate(sigma: str) -> str:
        out = ""
        for c in range(depth):
            if len(sigma) < g[c + 1]:
                return out
            block = f(c + 1) - f(c)
            part = sigma[g[c]: g[c + 1]]
            choices = tails[c].get(out, ())
            i = int(part, 2) if part else 0
            out += choices[i] if i < len(choices) else "0" * block
        return out + sigma[g[depth]:]

    def h(m: int) -> int:
        if m >= g[depth]:
            return f(depth) + m - g[depth]
        c = bisect.bisect_right(g, m) - 1
        return f(c)

    machine = FunctionMachine(evaluate, f"compressor({t.name})")
    return Compressor(machine, OrderFunction(h, "h"), f, rt, depth, log)


# ---------------------------------------------------------------------------
# test -> prefix-free machine
# ---------------------------------------------------------------------------

@dataclass
class PrefixFreeMachine:
    machine: TableMachine
    f: LengthSchedule
    test: BoundedTest
    depth: int
    assigned: dict  # stage c -> list of (input, generator)

    def __call__(self, sigma: str) -> Output:
        return self.machine.run(sigma)

    def defined_fraction(self, c: int) -> Fraction:
        g = self.f(c) - c
        return Fraction(len(self.assigned.get(c, ())), 1 << g)


def prefix_free_from_test(t: BoundedTest, depth: int, squared: bool = False) -> PrefixFreeMachine:
    """A partial machine with antichain domain describing each generator of
    ``V_c`` by an input of length ``f(c) - c``.

    ``V_c = U_{2c}`` so that ``mu(V_c) <= 2^-2c``, unless ``squared`` says
    the test already satisfies that bound.  Stages ``c >= 1`` are handled;
    every other input diverges.  Inputs are the lexicographically first
    strings of the right length that are incompatible with every input
    already used.
    """
    def v(c: int) -> ClopenSet:
        return t.explicit(c if squared else 2 * c)

    levels = LengthSchedule(lambda c: v(c).level, f"level(V_c of {t.name})")
    vt = BoundedTest(levels, v, name=f"squared({t.name})")
    used: list[str] = []
    table: dict[str, str] = {}
    assigned: dict[int, list] = {}
    for c in range(1, depth + 1):
        s = vt.explicit(c)
        if s.measure() > Dyadic.pow2(-2 * c):
            raise InvalidTest(f"stage {c} has measure {s.measure()} > 2^-{2 * c}")
        g = s.level - c
        if g < 0:
            raise InvalidTest(f"stage {c}: level {s.level} < {c}")
        need = len(s)
        fresh = []
        if need:
            for cand in strings_of_length(g):
                if any(cand.startswith(u) or u.startswith(cand) for u in used):
                    continue
                fresh.append(cand)
                if len(fresh) == need:
                    break
        if len(fresh) < need:
            raise AssertionError(f"stage {c}: only {len(fresh)} fresh inputs of length {g}, need {need}")
        pairs = list(zip(fresh, s.generators))
        for sigma, tau in pairs:
            table[sigma] = tau
        used.extend(fresh)
        assigned[c] = pairs
    if not is_antichain(table):
        raise AssertionError("prefix-free machine domain is not an antichain")
    machine = TableMachine(table, f"prefix-free({t.name})")
    return PrefixFreeMachine(machine, levels, vt, depth, assigned)


def domain_is_antichain(domain: Iterable[str]) -> bool:
    """Pairwise check, kept independent of :func:`brk.core.is_antichain`."""
    dom = list(domain)
    for i, a in enumerate(dom):
        for b in dom[i + 1:]:
            if a.startswith(b) or b.startswith(a):
                return False
    return True
