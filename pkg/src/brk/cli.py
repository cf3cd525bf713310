"""The ``brk`` command line.

Exit codes: 0 on success, 2 when a checked invariant fails (the offending
datum is printed), 1 on usage errors and unreadable input.

Bitstring arguments are either literal words or paths to files holding one.
Martingale arguments are a JSON file, inline JSON, ``constant`` or
``all-in:PATTERN``.  Schedules use the compact forms of
:func:`brk.schedules.parse_schedule`.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import random
import sys
from fractions import Fraction
from typing import Optional

from brk.core import ClopenSet, Dyadic, InvalidInput, check_bits, strings_up_to
from brk.generators import (
    Registry,
    counterexample_pair,
    density_report,
    diagonal_real,
    join,
    oscillating_real,
    zero_block_test,
)
from brk.machines import (
    MachineError,
    check_compression,
    compressor_from_test,
    load_machine,
    plain_complexity,
    prefix_free_from_test,
    test_from_compressor,
)
from brk.martingales import (
    Martingale,
    check_martingale,
    first_hitting_test,
    kraft_exhaustive,
    kraft_sides,
    load_martingale,
    martingale_from_test,
    summed_martingale_from_test,
    test_from_martingale,
)
from brk.mltests import (
    BoundedTest,
    InvalidTest,
    NotWeak,
    chernoff_info,
    chernoff_test,
    check_weak,
    copy_oracle_test,
    immunity_test,
    lambalgen_join_test,
    normalize_to_exact,
    passes,
    random_test,
    ville_pullback,
    weaken_with_indices,
)
from brk.schedules import parse_schedule

__all__ = ["main", "density_report"]


class Violation(Exception):
    """A checked invariant does not hold; exit status 2."""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------

def _read_text(arg: str) -> str:
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def read_bits(arg: str) -> str:
    """A literal word, or a file with one (whitespace ignored, ``B*k`` runs expanded)."""
    text = _read_text(arg).strip()
    if "*" in text:
        return decode_runs(text)
    return check_bits("".join(text.split()))


def encode_runs(bits: str) -> str:
    """Run-length framing: ``0*12 1*3 ...``."""
    return " ".join(f"{b}*{len(list(g))}" for b, g in itertools.groupby(bits))


def decode_runs(text: str) -> str:
    runs = []
    for token in text.replace(",", " ").split():
        bit, star, count = token.partition("*")
        if not star or not count.isdigit():
            raise InvalidInput(f"bad run {token!r}; expected BIT*COUNT")
        runs.append(check_bits(bit) * int(count))
    return "".join(runs)


def read_json(arg: str):
    try:
        return json.loads(_read_text(arg))
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{arg}: not JSON ({exc})") from None


def read_test(arg: str) -> BoundedTest:
    return BoundedTest.from_json(read_json(arg))


def read_martingale(arg: str) -> Martingale:
    if arg == "constant":
        return Martingale.constant()
    if arg.startswith("all-in"):
        _, _, pattern = arg.partition(":")
        return Martingale.all_in(pattern or "0")
    return load_martingale(read_json(arg))


def read_machine(arg: str):
    text = _read_text(arg)
    name = os.path.basename(arg) if os.path.isfile(arg) else "machine"
    if text.lstrip().startswith("{"):
        return load_machine(json.loads(text), name)
    return load_machine(text, name)


def read_registry(arg: str) -> Registry:
    return Registry.from_json(read_json(arg))


def csv_bits(arg: str) -> list[str]:
    if arg in ("", "-"):
        return []
    return [check_bits("" if w == "e" else w) for w in arg.split(",")]


def csv_ints(arg: str) -> list[int]:
    return [int(v) for v in arg.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

class Out:
    def __init__(self, args):
        self.json = getattr(args, "json", False)
        self.decimal = getattr(args, "decimal", False)
        self.output = getattr(args, "output", None)

    def dyadic(self, d: Dyadic) -> str:
        if self.decimal:
            return f"{d} (~{float(d):.6g}, approximate)"
        return str(d)

    def ratio(self, q: Fraction) -> str:
        if self.decimal:
            return f"{q.numerator}/{q.denominator} (~{float(q):.6g}, approximate)"
        return f"{q.numerator}/{q.denominator}"

    def emit(self, text: str, data=None) -> None:
        """Print ``text``, or ``data`` as JSON under ``--json``."""
        if self.json and data is not None:
            text = json.dumps(data, indent=2, sort_keys=True)
        print(text)

    def artifact(self, data, text: Optional[str] = None) -> None:
        """Write a JSON artifact to ``--output`` (or stdout)."""
        body = text if text is not None else json.dumps(data, indent=2, sort_keys=True)
        if self.output:
            with open(self.output, "w", encoding="utf-8") as fh:
                fh.write(body + "\n")
        else:
            print(body)


def _stage_rows(t: BoundedTest, depth: int) -> list[dict]:
    rows = []
    for n in range(depth + 1):
        s = t.stage(n)
        rows.append({"n": n, "level": s.level, "measure": str(s.measure())})
    return rows


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_measure(args, out: Out) -> None:
    if args.set:
        s = ClopenSet.from_json(read_json(args.set))
    else:
        if args.level is None:
            raise UsageError("give a set file or --level with --gens")
        s = ClopenSet.of(args.level, csv_bits(args.gens or ""))
    m = s.measure()
    out.emit(out.dyadic(m), {"level": s.level, "generators": len(s), "measure": str(m)})


def cmd_normalize(args, out: Out) -> None:
    t = normalize_to_exact(read_test(args.test), args.depth)
    out.artifact(t.to_json(args.depth))


def cmd_weaken(args, out: Out) -> None:
    w = weaken_with_indices(read_test(args.test), args.depth)
    data = w.test.to_json(w.test.max_stage)
    data["h"] = w.h
    out.artifact(data)


def cmd_immunity(args, out: Out) -> None:
    t = immunity_test(parse_schedule(args.f))
    out.artifact(t.to_json(args.depth))


def cmd_chernoff(args, out: Out) -> None:
    f = parse_schedule(args.f)
    t = chernoff_test(args.m, f)
    rows = []
    for n in range(args.depth + 1):
        info = chernoff_info(args.m, f(n))
        measure = t.stage(n).measure()
        rows.append({"n": n, "block": info.block_length, "deviating": info.tail_count,
                     "measure": str(measure), "majorant": str(info.majorant)})
    lines = [f"stage {r['n']}: N={r['block']} deviating={r['deviating']} "
             f"measure={out.dyadic(Dyadic.parse(r['measure']))} majorant={r['majorant']}" for r in rows]
    out.emit("\n".join(lines), rows)


def cmd_ville(args, out: Out) -> None:
    t = ville_pullback(read_test(args.test), parse_schedule(args.g))
    rows = _stage_rows(t, args.depth)
    if args.explicit:
        out.artifact(t.to_json(args.depth))
    else:
        out.emit("\n".join(f"stage {r['n']}: level {r['level']} measure {r['measure']}" for r in rows), rows)


def cmd_join_test(args, out: Out) -> None:
    levels = parse_schedule(args.levels)
    t = lambalgen_join_test(copy_oracle_test(levels))
    out.artifact(t.to_json(args.depth))


def cmd_to_martingale(args, out: Out) -> None:
    t = read_test(args.test)
    d = martingale_from_test(t, args.depth)
    if args.table is not None:
        out.artifact(d.to_table(args.table))
    else:
        out.artifact({"construction": "from-test", "depth": args.depth, "test": t.to_json(args.depth)})


def cmd_to_test(args, out: Out) -> None:
    t = test_from_martingale(read_martingale(args.martingale), parse_schedule(args.f))
    out.artifact(t.to_json(args.depth))


def cmd_savings(args, out: Out) -> None:
    base = read_json(args.martingale) if args.martingale.strip().startswith("{") or os.path.isfile(args.martingale) \
        else _named_spec(args.martingale)
    spec = {"construction": "savings", "base": base, "quadrupling": args.quadrupling}
    d = load_martingale(spec)
    if args.table is not None:
        out.artifact(d.to_table(args.table))
    else:
        out.artifact(spec)


def _named_spec(name: str) -> dict:
    if name == "constant":
        return {"construction": "constant"}
    if name.startswith("all-in"):
        return {"construction": "all-in", "pattern": name.partition(":")[2] or "0"}
    raise UsageError(f"unknown martingale {name!r}")


def cmd_first_hitting(args, out: Out) -> None:
    t = first_hitting_test(read_martingale(args.martingale), parse_schedule(args.f))
    bad = check_weak(t, args.depth)
    if bad is not None:
        raise Violation(f"weakness fails at stage {bad.stage + 1} inside {bad.tau!r}: {bad.mass} > {bad.allowed}")
    out.artifact(t.to_json(args.depth))


def cmd_summed(args, out: Out) -> None:
    t = read_test(args.test)
    d = summed_martingale_from_test(t, args.depth)
    if args.table is not None:
        out.artifact(d.to_table(args.table))
    else:
        out.artifact({"construction": "summed", "depth": args.depth, "test": t.to_json(3 * args.depth - 1)})


def cmd_to_compressor(args, out: Out) -> None:
    comp = compressor_from_test(read_test(args.test), args.depth)
    for line in comp.repairs:
        print(f"repair: {line}", file=sys.stderr)
    if args.dsl:
        out.artifact(None, comp.compile_to_dsl().source)
        return
    K = comp.g(args.depth)
    table = {s: comp(s) for s in strings_up_to(K)}
    out.artifact({"f": [comp.f(c) for c in range(args.depth + 1)],
                  "h": [comp.h(m) for m in range(K + 1)],
                  "repairs": comp.repairs, "table": table})


def cmd_from_compressor(args, out: Out) -> None:
    t = test_from_compressor(read_machine(args.machine), parse_schedule(args.f))
    out.artifact(t.to_json(args.depth))


def cmd_prefix_free(args, out: Out) -> None:
    pf = prefix_free_from_test(read_test(args.test), args.depth, squared=args.squared)
    data = pf.machine.to_json()
    data["fractions"] = {str(c): out.ratio(pf.defined_fraction(c)) for c in range(1, args.depth + 1)}
    out.artifact(data)


def cmd_complexity(args, out: Out) -> None:
    M = read_machine(args.machine)
    oracle = read_bits(args.oracle) if args.oracle else None
    rep = plain_complexity(M, read_bits(args.target), args.max_len, oracle)
    out.emit(str(rep), {"target": rep.target, "witness": rep.witness, "value": rep.value,
                        "searched": rep.searched})


def cmd_check_compress(args, out: Out) -> None:
    x = read_bits(args.x)
    if args.registry:
        entries = [(e.name, e.machine, e.f) for e in read_registry(args.registry)]
    else:
        if not (args.machine and args.f):
            raise UsageError("give -r REGISTRY, or -m MACHINE with --f SCHEDULE")
        entries = [("machine", read_machine(args.machine), parse_schedule(args.f))]
    report = []
    for name, M, f in entries:
        c_max = args.c_max
        while c_max >= 0 and f(c_max) > len(x):
            c_max -= 1
        verdict = check_compression(M, f, x, c_max)
        witness = verdict.first_failure()
        report.append({"entry": name, "c_max": c_max, "compressed": verdict.compressed,
                       "not_compressed_at": witness})
    lines = [f"{r['entry']}: " + ("compressed through c=" + str(r["c_max"]) if r["compressed"]
                                  else f"not compressed at c={r['not_compressed_at']}") for r in report]
    out.emit("\n".join(lines), report)


def _write_real(real, args, out: Out) -> None:
    bits = real.prefix
    body = encode_runs(bits) if args.rle else bits
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(body + "\n")
    else:
        print(body)
    log = real.log()
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            json.dump(log, fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif args.output:
        print(json.dumps(log, indent=2, sort_keys=True) if out.json else f"{len(real.stages)} stages")


def cmd_diagonalize(args, out: Out) -> None:
    _write_real(diagonal_real(read_registry(args.registry), args.length), args, out)


def cmd_oscillate(args, out: Out) -> None:
    block = parse_schedule(args.block) if args.block else None
    _write_real(oscillating_real(read_registry(args.registry), args.length, block), args, out)


def cmd_join(args, out: Out) -> None:
    out.artifact(None, join(read_bits(args.a), read_bits(args.b)))


def cmd_counterexample(args, out: Out) -> None:
    pair = counterexample_pair(read_registry(args.registry), args.stages)
    test = zero_block_test(pair.h)
    joined = pair.joined()
    verdict = passes(test, joined, len(pair.h) - 1)
    if verdict.passed:
        raise Violation(f"A (+) B passes the zero-block test at stage {verdict.stage}")
    data = {"A": pair.a, "B": pair.b, "zero_block_test": str(verdict), **pair.log()}
    out.artifact(data)


def cmd_kraft(args, out: Out) -> None:
    d = read_martingale(args.martingale)
    if args.exhaustive is not None:
        bad = kraft_exhaustive(d, args.exhaustive)
        if bad is not None:
            raise Violation(f"Kraft fails below {bad.sigma!r}: {bad.best} > {bad.bound}")
        out.emit(f"holds for every antichain within length {args.exhaustive}",
                 {"max_len": args.exhaustive, "holds": True})
        return
    lhs, rhs = kraft_sides(d, args.sigma, csv_bits(args.H))
    if lhs > rhs:
        raise Violation(f"sum over H is {lhs} > {rhs}")
    word = "equality" if lhs == rhs else "strict"
    out.emit(word, {"lhs": str(lhs), "rhs": str(rhs), "result": word})


def cmd_check_martingale(args, out: Out) -> None:
    d = read_martingale(args.martingale)
    rep = check_martingale(d, args.depth)
    if not rep.ok:
        raise Violation(str(rep))
    out.emit(str(rep), {"ok": True, "depth": args.depth})


def cmd_density(args, out: Out) -> None:
    x = read_bits(args.x)
    eps = Fraction(args.eps) if args.eps else None
    rows = density_report(x, csv_ints(args.checkpoints), eps)
    lines = []
    for r in rows:
        flag = "" if r.near_half is None else ("  within eps of 1/2" if r.near_half else "")
        lines.append(f"{r.n}: {out.ratio(r.density)}{flag}")
    out.emit("\n".join(lines), [{"n": r.n, "ones": r.ones, "density": f"{r.density.numerator}/{r.density.denominator}",
                                 "near_half": r.near_half} for r in rows])


def cmd_eval_martingale(args, out: Out) -> None:
    d = read_martingale(args.martingale)
    x = read_bits(args.x)
    caps = d.along(x, len(x))
    out.emit("\n".join(f"{x[:i] or 'e'}: {out.dyadic(v)}" for i, v in enumerate(caps)),
             [{"prefix": x[:i], "capital": str(v)} for i, v in enumerate(caps)])


def cmd_random_test(args, out: Out) -> None:
    rng = random.Random(args.seed)
    t = random_test(rng, args.depth, args.max_level, nested=args.nested, weak=args.weak)
    out.artifact(t.to_json(args.depth))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--decimal", action="store_true", help="also show approximate decimals (non-normative)")
    common.add_argument("-o", "--output", help="write the artifact here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized test data")

    p = _Parser(prog="brk", description="Bounded algorithmic randomness toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(fn=fn)
        return sp

    sp = add("measure", cmd_measure, "measure of a clopen set")
    sp.add_argument("set", nargs="?", help="clopen set JSON (file or inline)")
    sp.add_argument("--level", type=int)
    sp.add_argument("--gens", help="comma-separated generators")

    for name, fn, help_ in (("normalize", cmd_normalize, "pad stages to measure exactly 2^-n"),
                            ("weaken", cmd_weaken, "convert to a weak test")):
        sp = add(name, fn, help_)
        sp.add_argument("--test", required=True)
        sp.add_argument("--depth", type=int, required=True)

    sp = add("immunity", cmd_immunity, "the immunity test for a schedule")
    sp.add_argument("--f", required=True)
    sp.add_argument("--depth", type=int, required=True)

    sp = add("chernoff", cmd_chernoff, "Chernoff stage table")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--f", default="identity")
    sp.add_argument("--depth", type=int, required=True)

    sp = add("ville", cmd_ville, "pull a test back along a subsequence")
    sp.add_argument("--test", required=True)
    sp.add_argument("--g", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--explicit", action="store_true", help="export the stages")

    sp = add("join-test", cmd_join_test, "join test of the oracle copy test")
    sp.add_argument("--levels", default="identity")
    sp.add_argument("--depth", type=int, required=True)

    sp = add("to-martingale", cmd_to_martingale, "martingale betting along a weak test")
    sp.add_argument("--test", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--table", type=int, help="emit the value table to this depth")

    sp = add("to-test", cmd_to_test, "threshold test of a martingale")
    sp.add_argument("--martingale", required=True)
    sp.add_argument("--f", required=True)
    sp.add_argument("--depth", type=int, required=True)

    sp = add("savings", cmd_savings, "savings-account transform")
    sp.add_argument("--martingale", required=True)
    sp.add_argument("--quadrupling", action="store_true")
    sp.add_argument("--table", type=int)

    sp = add("first-hitting", cmd_first_hitting, "weak test from first hitting times")
    sp.add_argument("--martingale", required=True)
    sp.add_argument("--f", required=True)
    sp.add_argument("--depth", type=int, required=True)

    sp = add("summed-martingale", cmd_summed, "weighted sum of per-stage martingales")
    sp.add_argument("--test", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--table", type=int)

    sp = add("to-compressor", cmd_to_compressor, "quick process machine from a weak nested test")
    sp.add_argument("--test", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--dsl", action="store_true", help="emit a DSL program")

    sp = add("from-compressor", cmd_from_compressor, "test from a compressor")
    sp.add_argument("-m", "--machine", required=True)
    sp.add_argument("--f", required=True)
    sp.add_argument("--depth", type=int, required=True)

    sp = add("prefix-free", cmd_prefix_free, "prefix-free machine from a test")
    sp.add_argument("--test", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--squared", action="store_true", help="stages already obey 2^-2c")

    sp = add("complexity", cmd_complexity, "plain complexity by exhaustive search")
    sp.add_argument("-m", "--machine", required=True)
    sp.add_argument("-t", "--target", required=True)
    sp.add_argument("--max-len", type=int, required=True)
    sp.add_argument("--oracle")

    sp = add("check-compress", cmd_check_compress, "compression report along a real")
    sp.add_argument("-x", required=True)
    sp.add_argument("-r", "--registry")
    sp.add_argument("-m", "--machine")
    sp.add_argument("--f")
    sp.add_argument("--c-max", type=int, default=64)

    for name, fn, help_ in (("diagonalize", cmd_diagonalize, "diagonal real against a registry"),
                            ("oscillate", cmd_oscillate, "diagonal real with density swings")):
        sp = add(name, fn, help_)
        sp.add_argument("-r", "--registry", required=True)
        sp.add_argument("-n", "--length", type=int, required=True)
        sp.add_argument("--log", help="write the stage log here")
        sp.add_argument("--rle", action="store_true", help="run-length framing")
        if name == "oscillate":
            sp.add_argument("--block", help="block length schedule (default 3n+1)")

    sp = add("join", cmd_join, "interleave two reals")
    sp.add_argument("-a", required=True)
    sp.add_argument("-b", required=True)

    sp = add("counterexample", cmd_counterexample, "reals whose join fails a zero-block test")
    sp.add_argument("-r", "--registry", required=True)
    sp.add_argument("--stages", type=int, default=2)

    sp = add("kraft", cmd_kraft, "Kraft's inequality for a martingale")
    sp.add_argument("--martingale", required=True)
    sp.add_argument("--sigma", default="")
    sp.add_argument("--H", default="", help="comma-separated antichain")
    sp.add_argument("--exhaustive", type=int, metavar="MAX_LEN")

    sp = add("check-martingale", cmd_check_martingale, "verify the martingale laws")
    sp.add_argument("--martingale", required=True)
    sp.add_argument("--depth", type=int, default=10)

    sp = add("density", cmd_density, "density of ones at checkpoints")
    sp.add_argument("-x", required=True)
    sp.add_argument("--checkpoints", required=True)
    sp.add_argument("--eps")

    sp = add("eval-martingale", cmd_eval_martingale, "capital along a prefix")
    sp.add_argument("--martingale", required=True)
    sp.add_argument("-x", required=True)

    sp = add("random-test", cmd_random_test, "random explicit test (seeded)")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--max-level", type=int, default=12)
    sp.add_argument("--nested", action="store_true")
    sp.add_argument("--weak", action="store_true")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    random.seed(args.seed)
    out = Out(args)
    try:
        args.fn(args, out)
    except (Violation, InvalidTest, NotWeak, AssertionError) as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return 2
    except (UsageError, InvalidInput, MachineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
