"""A small stack machine: reference VM, assembler, and the circuit that
executes one instruction per cycle.

The circuit state is ``[code, pc, stack, sp, store]``; code words are
``(opcode, operand)`` pairs with a 4-bit opcode.  A failed dynamic check
(stack underflow or overflow, unsigned overflow on ``add``, an unknown
opcode or ``halt``) aborts the cycle, so the machine stalls.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from ..core import IntTy, Reg, Regfile, TupleTy
from ..lang import (
    FALSE,
    Assert,
    Builder,
    Circuit,
    add,
    eq,
    fst,
    le,
    lt,
    mux,
    negb,
    snd,
    sub,
    word,
)

CODE, PC, STACK, SP, STORE = range(5)
NAMES = ("code", "pc", "stack", "sp", "store")

OPCODES = {
    "const": 0,
    "var": 1,
    "setvar": 2,
    "add": 3,
    "sub": 4,
    "bfwd": 5,
    "bbwd": 6,
    "bcond_eq": 7,
    "bcond_ne": 8,
    "bcond_le": 9,
    "bcond_gt": 10,
    "halt": 15,
}
CONDITIONS = ("eq", "ne", "le", "gt")
NO_OPERAND = ("add", "sub", "halt")


@dataclass(frozen=True)
class Instr:
    kind: str
    arg: int = 0
    cond: Optional[str] = None

    def __str__(self):
        if self.kind in NO_OPERAND:
            return self.kind
        if self.kind == "bcond":
            return f"bcond {self.cond} {self.arg}"
        return f"{self.kind} {self.arg}"


def _check_cond(c):
    if c not in CONDITIONS:
        raise ValueError(f"unknown branch condition {c!r}")


def holds(cond: str, n1: int, n2: int) -> bool:
    _check_cond(cond)
    return {"eq": n1 == n2, "ne": n1 != n2, "le": n1 <= n2, "gt": n1 > n2}[cond]


# -- encoding -----------------------------------------------------------------


def encode(i: Instr, width: int) -> Tuple[int, int]:
    key = f"bcond_{i.cond}" if i.kind == "bcond" else i.kind
    if key not in OPCODES:
        raise ValueError(f"unknown instruction {i}")
    if i.kind in NO_OPERAND and i.arg:
        raise ValueError(f"{i.kind} takes no operand")
    if not 0 <= i.arg < (1 << width):
        raise ValueError(f"operand {i.arg} does not fit in {width} bits")
    return OPCODES[key], i.arg


_DECODE = {v: k for k, v in OPCODES.items()}


def decode(word_: Tuple[int, int]) -> Optional[Instr]:
    """Inverse of :func:`encode`; None for opcodes with no instruction."""
    op, arg = word_
    key = _DECODE.get(op)
    if key is None:
        return None
    if key.startswith("bcond_"):
        return Instr("bcond", arg, key[len("bcond_"):])
    if key in NO_OPERAND:
        return Instr(key) if arg == 0 else None
    return Instr(key, arg)


def parse_program(text: str) -> list:
    """Parse ``mnemonic [operand]`` lines; ``#`` starts a comment."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        toks = line.split("#", 1)[0].split()
        if not toks:
            continue
        m, args = toks[0].lower(), toks[1:]
        try:
            if m in NO_OPERAND:
                if args:
                    raise ValueError(f"{m} takes no operand")
                out.append(Instr(m))
            elif m == "bcond":
                if len(args) != 2:
                    raise ValueError("bcond takes a condition and an offset")
                _check_cond(args[0])
                out.append(Instr("bcond", _int(args[1]), args[0]))
            elif m.startswith("bcond_") or m in ("beq", "bne", "ble", "bgt"):
                c = m[len("bcond_"):] if m.startswith("bcond_") else m[1:]
                _check_cond(c)
                if len(args) != 1:
                    raise ValueError(f"{m} takes one operand")
                out.append(Instr("bcond", _int(args[0]), c))
            elif m in ("const", "var", "setvar", "bfwd", "bbwd"):
                if len(args) != 1:
                    raise ValueError(f"{m} takes one operand")
                out.append(Instr(m, _int(args[0])))
            else:
                raise ValueError(f"unknown mnemonic {m!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out


def _int(tok: str) -> int:
    v = int(tok, 0)
    if v < 0:
        raise ValueError(f"negative operand {v}")
    return v


def assemble(text: str, width: int = 8) -> list:
    """Encode a program to ``(opcode, operand)`` words."""
    return [encode(i, width) for i in parse_program(text)]


def encoding_table() -> Dict[str, int]:
    return dict(OPCODES)


# -- reference machine --------------------------------------------------------


@dataclass(frozen=True)
class VmState:
    code: Tuple[Instr, ...]
    pc: int = 0
    stack: Tuple[int, ...] = ()  # head is the top
    store: Dict[int, int] = field(default_factory=dict, hash=False)

    def load(self, x: int) -> int:
        return self.store.get(x, 0)


def vm_step(s: VmState) -> Optional[VmState]:
    """One transition of the reference machine, or None when stuck.

    Values are naturals, so ``sub`` and ``bbwd`` truncate at zero.
    """
    if not 0 <= s.pc < len(s.code):
        return None
    i = s.code[s.pc]
    pc1 = s.pc + 1
    st = s.stack
    if i.kind == "const":
        return VmState(s.code, pc1, (i.arg,) + st, s.store)
    if i.kind == "var":
        return VmState(s.code, pc1, (s.load(i.arg),) + st, s.store)
    if i.kind == "setvar":
        if not st:
            return None
        return VmState(s.code, pc1, st[1:], {**s.store, i.arg: st[0]})
    if i.kind in ("add", "sub"):
        if len(st) < 2:
            return None
        n2, n1 = st[0], st[1]
        r = n1 + n2 if i.kind == "add" else max(n1 - n2, 0)
        return VmState(s.code, pc1, (r,) + st[2:], s.store)
    if i.kind == "bfwd":
        return VmState(s.code, pc1 + i.arg, st, s.store)
    if i.kind == "bbwd":
        return VmState(s.code, max(pc1 - i.arg, 0), st, s.store)
    if i.kind == "bcond":
        if len(st) < 2:
            return None
        n2, n1 = st[0], st[1]
        target = pc1 + i.arg if holds(i.cond, n1, n2) else pc1
        return VmState(s.code, target, st[2:], s.store)
    return None


def vm_run(s: VmState, max_steps: int):
    """Step until stuck or ``max_steps``; returns ``(final state, steps taken)``."""
    for k in range(max_steps):
        nxt = vm_step(s)
        if nxt is None:
            return s, k
        s = nxt
    return s, max_steps


def fits(s: VmState, n: int) -> bool:
    """Whether ``s`` is representable in the ``n``-bit circuit."""
    lim = 1 << n
    return (
        len(s.code) <= lim
        and all(0 <= i.arg < lim for i in s.code)
        and 0 <= s.pc < lim
        and len(s.stack) < lim
        and all(0 <= v < lim for v in s.stack)
        and all(0 <= x < lim and 0 <= v < lim for x, v in s.store.items())
    )


# -- circuit ------------------------------------------------------------------


def instr_ty(n: int):
    return TupleTy((IntTy(4), IntTy(n)))


def machine_phi(n: int):
    return (
        Regfile(n, instr_ty(n)),
        Reg(IntTy(n)),
        Regfile(n, IntTy(n)),
        Reg(IntTy(n)),
        Regfile(n, IntTy(n)),
    )


def stack_machine_circuit(n: int) -> Circuit:
    if not 2 <= n <= 16:
        raise ValueError(f"stack machine width must be in [2, 16], got {n}")
    phi = machine_phi(n)
    b = Builder(phi)
    W = lambda v: word(n, v)
    top = (1 << n) - 1

    def set_pc(e):
        return b.reg_write(PC, e)

    def push(v):
        return b.bind(b.reg_read(SP), lambda sp:
               b.seq(b.assert_(negb(eq(sp, W(top)))),
                     b.rf_write(STACK, sp, v),
                     b.reg_write(SP, add(sp, W(1)))))

    def pop():
        return b.bind(b.reg_read(SP), lambda sp:
               b.seq(b.assert_(negb(eq(sp, W(0)))),
                     b.bind(b.rf_read(STACK, sub(sp, W(1))), lambda x:
                     b.seq(b.reg_write(SP, sub(sp, W(1))), b.ret(x)))))

    def pop2(k):
        """Pop ``n2`` (top) and ``n1``; ``k(sp, n1, n2)`` must write SP itself."""
        return b.bind(b.reg_read(SP), lambda sp:
               b.seq(b.assert_(le(W(2), sp)),
                     b.bind(b.rf_read(STACK, sub(sp, W(1))), lambda n2:
                     b.bind(b.rf_read(STACK, sub(sp, W(2))), lambda n1:
                     k(sp, n1, n2)))))

    def arith(pc, op):
        def body(sp, n1, n2):
            if op == "add":
                r = add(n1, n2)
                check = [b.assert_(le(n1, r))]
            else:
                r = mux(lt(n1, n2), W(0), sub(n1, n2))
                check = []
            return b.seq(*check,
                         b.rf_write(STACK, sub(sp, W(2)), r),
                         b.reg_write(SP, sub(sp, W(1))),
                         set_pc(add(pc, W(1))))
        return pop2(body)

    def bcond(pc, arg, cond):
        def body(sp, n1, n2):
            c = {"eq": eq(n1, n2), "ne": negb(eq(n1, n2)), "le": le(n1, n2), "gt": lt(n2, n1)}[cond]
            nxt = add(pc, W(1))
            return b.seq(b.reg_write(SP, sub(sp, W(2))), set_pc(mux(c, add(nxt, arg), nxt)))
        return pop2(body)

    def bbwd_target(pc, arg):
        back = sub(arg, W(1))
        return mux(eq(arg, W(0)), add(pc, W(1)), mux(lt(pc, back), W(0), sub(pc, back)))

    def execute(pc, op, arg):
        nxt = add(pc, W(1))
        cases = [
            ("const", b.seq(push(arg), set_pc(nxt))),
            ("var", b.bind(b.rf_read(STORE, arg), lambda v: b.seq(push(v), set_pc(nxt)))),
            ("setvar", b.bind(pop(), lambda v: b.seq(b.rf_write(STORE, arg, v), set_pc(nxt)))),
            ("add", arith(pc, "add")),
            ("sub", arith(pc, "sub")),
            ("bfwd", set_pc(add(nxt, arg))),
            ("bbwd", set_pc(bbwd_target(pc, arg))),
        ] + [(f"bcond_{c}", bcond(pc, arg, c)) for c in CONDITIONS]
        out = Assert(FALSE)
        for name, act in reversed(cases):
            out = b.ifte(eq(op, word(4, OPCODES[name])), act, out)
        return out

    action = b.bind(b.reg_read(PC), lambda pc:
             b.bind(b.rf_read(CODE, pc), lambda i:
             execute(pc, fst(i), snd(i))))
    return Circuit(f"stackmachine{n}", phi, action, NAMES)


# -- relating the two machines ------------------------------------------------


def encode_state(s: VmState, n: int, fill=None):
    """Circuit state for ``s``; unused code words are ``halt`` unless ``fill`` is given."""
    size = 1 << n
    if not fits(s, n):
        raise ValueError("state does not fit the machine")
    halt = encode(Instr("halt"), n)
    code = [encode(i, n) for i in s.code]
    code += [fill(k) if fill else halt for k in range(len(code), size)]
    stack = list(reversed(s.stack))
    stack += [0] * (size - len(stack))
    store = [s.load(x) for x in range(size)]
    return (tuple(code), s.pc, tuple(stack), len(s.stack), tuple(store))


def states_related(s: VmState, st, n: int) -> bool:
    """The correspondence between a reference state and a circuit state."""
    if not fits(s, n):
        return False
    code, pc, stack, sp, store = st
    if any(decode(code[k]) != i for k, i in enumerate(s.code)):
        return False
    if pc != s.pc or sp != len(s.stack):
        return False
    if list(stack[:sp]) != list(reversed(s.stack)):
        return False
    return all(store[x] == s.load(x) for x in range(1 << n))


def random_program(rng: random.Random, length: int, n: int, nvars: int = 4, max_const: int = 12) -> list:
    """A random structured program of at most ``min(length, 32)`` instructions.

    Programs are sequences of stack-balanced blocks (assignments, guarded
    blocks, skipped blocks and counted loops) so that they run for a
    while and exercise every opcode before halting or falling off the end.
    Variables ``0 .. nvars-1`` hold data; loop counters live above them.
    """
    lim = 1 << n
    budget = min(length, 32)
    small = lambda: rng.randrange(min(max_const, lim))
    var = lambda: rng.randrange(min(nvars, lim))

    def operand():
        return Instr("const", small()) if rng.random() < 0.5 else Instr("var", var())

    def assign():
        if rng.random() < 0.3:
            return [operand(), Instr("setvar", var())]
        return [operand(), operand(), Instr(rng.choice(("add", "sub"))), Instr("setvar", var())]

    def guarded(body):
        return [operand(), operand(), Instr("bcond", len(body), rng.choice(CONDITIONS))] + body

    def skipped(body):
        return [Instr("bfwd", len(body))] + body

    def loop(body, counter):
        init = [Instr("const", rng.randrange(1, min(5, lim))), Instr("setvar", counter)]
        dec = [Instr("var", counter), Instr("const", 1), Instr("sub"), Instr("setvar", counter)]
        # head: var c; const 0; bcond le exit
        inner = body + dec
        head = [Instr("var", counter), Instr("const", 0), Instr("bcond", len(inner) + 1, "le")]
        back = Instr("bbwd", len(head) + len(inner) + 1)
        return init + head + inner + [back]

    out = []
    misses = 0
    while misses < 8:
        k = rng.random()
        if k < 0.35:
            blk = assign()
        elif k < 0.6:
            blk = guarded(assign())
        elif k < 0.7:
            blk = skipped(assign())
        else:
            blk = loop(assign() if rng.random() < 0.7 else guarded(assign()), min(nvars + rng.randrange(2), lim - 1))
        if len(out) + len(blk) > budget - 1:
            misses += 1
            continue
        out += blk
    if len(out) < budget and rng.random() < 0.5:
        out.append(Instr("halt"))
    return out
