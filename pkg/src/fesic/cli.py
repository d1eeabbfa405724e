"""Command-line driver: compile, simulate, difftest and stats.

Exit codes: 0 success, 1 semantic failure (difftest divergence), 2 usage error.
"""

from __future__ import annotations

import argparse
import random
import re
import sys
from pathlib import Path

from . import designs
from .core import Regfile, leaf_types, value_from_leaves, zero_state
from .designs import stackmachine as sm
from .difftest import difftest, random_state
from .ir import dump_ir
from .lang import pretty
from .pipeline import STAGES, binding_counts, compile_stages
from .rtl import compile_block, dump_rtl
from .sem import input_indices, next_step, simulate
from .verilog import emit_testbench, emit_verilog


class UsageError(Exception):
    pass


def _add_common(p):
    p.add_argument("--example", required=True, choices=designs.EXAMPLES)
    p.add_argument("--n", type=int, default=None, help="size parameter (counter/stack machine width, sorter depth)")
    p.add_argument("--width", type=int, default=None, help="sorter word width")
    p.add_argument("--no-cse", dest="cse", action="store_false", help="skip common-subexpression elimination")
    p.add_argument("--no-bdd", dest="bdd", action="store_false", help="skip BDD simplification")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fesic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile an example to Verilog")
    _add_common(p)
    p.add_argument("-o", "--output", type=Path, help="Verilog output file")
    p.add_argument("--dump", action="append", default=[], choices=("source",) + STAGES,
                   help="print an intermediate program to standard output (repeatable)")
    p.add_argument("--module", default=None, help="Verilog module name")
    p.add_argument("--testbench", type=Path, help="also write a self-checking testbench")
    p.add_argument("--tb-cycles", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="run an example cycle by cycle")
    _add_common(p)
    p.add_argument("--trace", type=Path, help="input trace: one line per cycle, decimal values per input")
    p.add_argument("--cycles", type=int, default=None)
    p.add_argument("--program", help="assembler file (or bundled program name) loaded into the stack machine")
    p.add_argument("--watch", action="append", default=[], help="memory location to print, e.g. count or store[0]")
    p.add_argument("--engine", choices=("rtl", "source"), default="rtl")

    p = sub.add_parser("difftest", help="compare every compiler stage with the source semantics")
    _add_common(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("stats", help="binding counts after each stage")
    _add_common(p)
    return parser


def _circuit(args):
    try:
        return designs.build(args.example, args.n, args.width)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_compile(args, out) -> int:
    c = _circuit(args)
    stages = compile_stages(c.phi, c.action, use_cse=args.cse, use_bdd=args.bdd)
    for d in args.dump:
        if d == "source":
            out.write(pretty(c.action) + "\n")
        elif d == "ir":
            out.write(dump_ir(stages["ir"], c.names))
        else:
            out.write(dump_rtl(stages[d], c.names))
    module = args.module or c.name
    text = emit_verilog(c.phi, stages["bdd"], module)
    if args.output:
        args.output.write_text(text)
    elif not args.dump:
        out.write(text)
    if args.testbench:
        rng = random.Random(args.seed)
        ins = input_indices(c.phi)
        vectors = [[random_state(rng, [c.phi[i]])[0] for i in ins] for _ in range(args.tb_cycles)]
        args.testbench.write_text(emit_testbench(c.phi, stages["bdd"], module, vectors))
    return 0


def read_trace(path: Path, phi) -> list:
    """Parse a trace file into one list of input values per cycle."""
    ins = input_indices(phi)
    tys = [phi[i].ty for i in ins]
    counts = [len(leaf_types(t)) for t in tys]
    cycles = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0]
        if not line.strip():
            continue
        try:
            toks = [int(t) for t in line.split()]
        except ValueError:
            raise UsageError(f"{path}:{lineno}: values must be decimal integers") from None
        if len(toks) != sum(counts):
            raise UsageError(f"{path}:{lineno}: expected {sum(counts)} values, got {len(toks)}")
        vals, k = [], 0
        for t, cnt in zip(tys, counts):
            try:
                vals.append(value_from_leaves(toks[k:k + cnt], t))
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from None
            k += cnt
        cycles.append(vals)
    return cycles


_WATCH = re.compile(r"^(\w+)(?:\[(\d+)\])?$")


def _parse_watch(c, w):
    m = _WATCH.match(w)
    if not m:
        raise UsageError(f"bad watch expression {w!r}")
    try:
        idx = c.element(m.group(1))
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    addr = m.group(2)
    mem = c.phi[idx]
    if isinstance(mem, Regfile):
        if addr is None or int(addr) >= mem.size:
            raise UsageError(f"{w!r}: register file watches need an address below {mem.size}")
        return w, idx, int(addr)
    if addr is not None:
        raise UsageError(f"{w!r}: only register files take an address")
    return w, idx, None


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, tuple):
        return "(" + " ".join(_fmt_value(x) for x in v) + ")"
    return str(v)


def cmd_simulate(args, out) -> int:
    c = _circuit(args)
    phi = c.phi
    ins = input_indices(phi)
    trace = read_trace(args.trace, phi) if args.trace else []
    if args.cycles is None:
        if not args.trace:
            raise UsageError("--cycles is required without a trace")
        cycles = len(trace)
    else:
        cycles = args.cycles
    if cycles < 0:
        raise UsageError("--cycles must be non-negative")
    if ins and len(trace) < cycles:
        raise UsageError(f"trace covers {len(trace)} cycles, {cycles} requested")
    watches = [_parse_watch(c, w) for w in args.watch]

    st0 = zero_state(phi)
    if args.program:
        if args.example != "stackmachine":
            raise UsageError("--program only applies to the stack machine")
        p = Path(args.program)
        text = p.read_text() if p.exists() else _bundled(args.program)
        n = args.n or 8
        try:
            prog = sm.parse_program(text)
            st0 = sm.encode_state(sm.VmState(tuple(prog)), n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    if args.engine == "rtl":
        step = compile_block(phi, compile_stages(phi, c.action, use_cse=args.cse, use_bdd=args.bdd)["bdd"])
    else:
        step = lambda st: next_step(phi, st, c.action)
    traces = [[trace[k][j] for k in range(cycles)] for j in range(len(ins))]
    rows = simulate(phi, st0, c.action, traces, cycles, step=step)
    for k, (v, st) in enumerate(rows):
        parts = [f"cycle {k}", f"valid={0 if v is None else 1}", f"out={'-' if v is None else _fmt_value(v)}"]
        for w, idx, addr in watches:
            x = st[idx] if addr is None else st[idx][addr]
            parts.append(f"{w}={_fmt_value(x)}")
        out.write(" ".join(parts) + "\n")
    return 0


def _bundled(name):
    stem = Path(name).stem
    try:
        return designs.program_text(stem)
    except FileNotFoundError:
        raise UsageError(f"no such program file: {name}") from None


def cmd_difftest(args, out) -> int:
    c = _circuit(args)
    if args.trials < 0:
        raise UsageError("--trials must be non-negative")
    report = difftest(c, trials=args.trials, seed=args.seed, use_cse=args.cse, use_bdd=args.bdd)
    out.write(report.format())
    return 0 if report.ok else 1


def cmd_stats(args, out) -> int:
    c = _circuit(args)
    bdd_stats = {}
    stages = compile_stages(c.phi, c.action, use_cse=args.cse, use_bdd=args.bdd, bdd_stats=bdd_stats)
    counts = binding_counts(stages)
    out.write(f"{'circuit':<16}" + "".join(f"{s.upper():>8}" for s in STAGES) + "\n")
    out.write(f"{c.name:<16}" + "".join(f"{counts[s]:>8}" for s in STAGES) + "\n")
    if bdd_stats:
        out.write(f"bdd store nodes: {bdd_stats['store_size']}, variables: {bdd_stats['bdd_vars']}, "
                  f"bindings eliminated: {bdd_stats['eliminated']}\n")
    return 0


COMMANDS = {"compile": cmd_compile, "simulate": cmd_simulate, "difftest": cmd_difftest, "stats": cmd_stats}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"fesic: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fesic: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
