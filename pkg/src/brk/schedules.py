"""Length schedules ``n -> l(n)`` and order functions.

Serializable kinds (the JSON ``{"kind": ...}`` form):

* ``identity``
* ``affine`` with ``a``, ``b``: ``a*n + b``
* ``poly`` with ``coeffs`` (constant term first)
* ``table`` with ``values`` (defined for ``n < len(values)`` only)
* ``program`` with DSL ``source``: ``|M(1^n)|``

Derived schedules (compositions built by the constructions) carry no JSON
form unless they are compositions of serializable ones.
"""

from __future__ import annotations

import json
from functools import lru_cache
from typing import Callable, Optional

from brk.core import InvalidInput


class ScheduleError(InvalidInput):
    pass


class LengthSchedule:
    """A total function on the naturals, memoized.

    ``spec`` is the JSON description, or ``None`` for schedules that only
    exist in memory.
    """

    def __init__(self, fn: Callable[[int], int], name: str, spec: Optional[dict] = None):
        self._fn = lru_cache(maxsize=None)(fn)
        self.name = name
        self.spec = spec

    def __call__(self, n: int) -> int:
        if n < 0:
            raise ScheduleError(f"{self.name}: negative argument {n}")
        value = self._fn(n)
        if not isinstance(value, int) or value < 0:
            raise ScheduleError(f"{self.name}({n}) = {value!r} is not a natural number")
        return value

    def __repr__(self) -> str:
        return f"LengthSchedule({self.name})"

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls) -> "LengthSchedule":
        return cls(lambda n: n, "n", {"kind": "identity"})

    @classmethod
    def affine(cls, a: int, b: int = 0) -> "LengthSchedule":
        return cls(lambda n: a * n + b, f"{a}n+{b}", {"kind": "affine", "a": a, "b": b})

    @classmethod
    def poly(cls, coeffs: list[int]) -> "LengthSchedule":
        coeffs = list(coeffs)

        def fn(n: int) -> int:
            total = 0
            for c in reversed(coeffs):
                total = total * n + c
            return total

        return cls(fn, "poly" + str(coeffs), {"kind": "poly", "coeffs": coeffs})

    @classmethod
    def table(cls, values: list[int]) -> "LengthSchedule":
        values = list(values)

        def fn(n: int) -> int:
            if n >= len(values):
                raise ScheduleError(f"table schedule undefined at {n}")
            return values[n]

        return cls(fn, "table" + str(values), {"kind": "table", "values": values})

    @classmethod
    def from_program(cls, source: str) -> "LengthSchedule":
        from brk.machines import DSLMachine

        machine = DSLMachine.parse(source)

        def fn(n: int) -> int:
            out = machine.execute("1" * n)
            if not out.ok:
                raise ScheduleError(f"schedule program did not produce output at {n}: {out.status}")
            return len(out.output)

        return cls(fn, "program", {"kind": "program", "source": source})

    @classmethod
    def from_json(cls, spec) -> "LengthSchedule":
        if isinstance(spec, str):
            return parse_schedule(spec)
        kind = spec.get("kind")
        if kind == "identity":
            return cls.identity()
        if kind == "affine":
            return cls.affine(int(spec["a"]), int(spec.get("b", 0)))
        if kind == "poly":
            return cls.poly([int(c) for c in spec["coeffs"]])
        if kind == "table":
            return cls.table([int(v) for v in spec["values"]])
        if kind == "program":
            return cls.from_program(spec["source"])
        if kind == "compose":
            outer = cls.from_json(spec["outer"])
            inner = cls.from_json(spec["inner"])
            return outer.compose(inner)
        raise ScheduleError(f"unknown schedule kind {kind!r}")

    def to_json(self) -> dict:
        if self.spec is None:
            raise ScheduleError(f"schedule {self.name} has no serializable form")
        return self.spec

    # -- combinators --------------------------------------------------------

    def compose(self, inner: "LengthSchedule") -> "LengthSchedule":
        """``n -> self(inner(n))``."""
        spec = None
        if self.spec is not None and inner.spec is not None:
            spec = {"kind": "compose", "outer": self.spec, "inner": inner.spec}
        return LengthSchedule(lambda n: self(inner(n)), f"{self.name}o{inner.name}", spec)

    def map(self, fn: Callable[[int], int], name: str) -> "LengthSchedule":
        """``n -> fn(n)`` where ``fn`` may call this schedule (in-memory only)."""
        return LengthSchedule(fn, name)

    def check_increasing(self, upto: int, at_least_index: bool = True) -> None:
        """Verify strict increase on ``0..upto`` (and ``l(n) >= n`` if asked)."""
        prev = None
        for n in range(upto + 1):
            v = self(n)
            if prev is not None and v <= prev:
                raise ScheduleError(f"{self.name} not strictly increasing at {n}: {prev} -> {v}")
            if at_least_index and v < n:
                raise ScheduleError(f"{self.name}({n}) = {v} < {n}")
            prev = v


def parse_schedule(text: str) -> LengthSchedule:
    """Parse the compact command-line form.

    ``identity``, ``affine:A,B``, ``poly:C0,C1,...``, ``table:V0,V1,...``,
    or a JSON object.
    """
    text = text.strip()
    if text.startswith("{"):
        return LengthSchedule.from_json(json.loads(text))
    kind, _, rest = text.partition(":")
    nums = [int(x) for x in rest.split(",") if x.strip()] if rest else []
    if kind == "identity":
        return LengthSchedule.identity()
    if kind == "affine":
        if len(nums) != 2:
            raise ScheduleError("affine needs A,B")
        return LengthSchedule.affine(*nums)
    if kind == "poly":
        return LengthSchedule.poly(nums)
    if kind == "table":
        return LengthSchedule.table(nums)
    raise ScheduleError(f"cannot parse schedule {text!r}")
