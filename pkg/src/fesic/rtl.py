"""Register-transfer level blocks: three-address telescopes ending in a
guard, a result and at most one guarded write per memory element.

``compile_to_rtl`` performs the second and third passes: nested effect
trees are linearized with :func:`merge`, and compound expressions are
split so that every operand is a variable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

from . import ops
from .core import BOOL, ContractError, Input, IntTy, Mem, MemState, Reg, Regfile, Ty, commit
from .ir import Branch, Empty, EffTree, InputRd, IrBlock, RegRd, RfRd, Seq, Write
from .lang import Const, MemberRef, Op, Var, VarId, show_const


@dataclass(frozen=True)
class RConst:
    ty: Ty
    value: object


@dataclass(frozen=True)
class ROp:
    op: str
    args: Tuple[VarId, ...]
    ty: Ty
    index: Optional[int] = None


@dataclass(frozen=True)
class RInput:
    ref: MemberRef

    @property
    def ty(self):
        return self.ref.mem.ty


@dataclass(frozen=True)
class RRead:
    ref: MemberRef

    @property
    def ty(self):
        return self.ref.mem.ty


@dataclass(frozen=True)
class RReadRf:
    ref: MemberRef
    addr: VarId

    @property
    def ty(self):
        return self.ref.mem.ty


RtlExpr = Union[RConst, ROp, RInput, RRead, RReadRf]


@dataclass(frozen=True)
class RtlWrite:
    data: VarId
    addr: Optional[VarId]
    enable: VarId


@dataclass(frozen=True)
class RtlBlock:
    bindings: Tuple[Tuple[VarId, RtlExpr], ...]
    guard: VarId
    value: VarId
    effects: Tuple[Optional[RtlWrite], ...]


def expr_args(e: RtlExpr) -> Tuple[VarId, ...]:
    if isinstance(e, ROp):
        return e.args
    if isinstance(e, RReadRf):
        return (e.addr,)
    return ()


def map_args(e: RtlExpr, f: Callable[[VarId], VarId]) -> RtlExpr:
    if isinstance(e, ROp):
        return ROp(e.op, tuple(f(a) for a in e.args), e.ty, e.index)
    if isinstance(e, RReadRf):
        return RReadRf(e.ref, f(e.addr))
    return e


def map_write(w: Optional[RtlWrite], f) -> Optional[RtlWrite]:
    if w is None:
        return None
    return RtlWrite(f(w.data), None if w.addr is None else f(w.addr), f(w.enable))


# -- passes 2 and 3 -----------------------------------------------------------


class Emitter:
    """Appends fresh bindings to a telescope under construction."""

    def __init__(self, start: int):
        self.ids = itertools.count(start)
        self.bindings = []
        self._false = None

    def emit(self, e: RtlExpr, ty: Ty | None = None) -> VarId:
        x = VarId(next(self.ids), ty if ty is not None else e.ty)
        self.bindings.append((x, e))
        return x

    def op(self, name: str, *args: VarId, index=None) -> VarId:
        ty = ops.result_type(name, [a.ty for a in args], index)
        return self.emit(ROp(name, tuple(args), ty, index))

    def false(self) -> VarId:
        if self._false is None:
            self._false = self.emit(RConst(BOOL, False))
        return self._false


def merge(em: Emitter, mem: Mem, a: RtlWrite, b: RtlWrite) -> RtlWrite:
    """Collapse two writes to one element; ``a`` precedes ``b`` in program order."""
    if isinstance(mem, Input):
        raise ContractError("inputs are never written")
    for w in (a, b):
        if (w.addr is None) != isinstance(mem, Reg):
            raise ContractError(f"write shape does not match {mem}")
    enable = em.op("orb", a.enable, b.enable)
    data = em.op("mux", a.enable, a.data, b.data)
    addr = None if a.addr is None else em.op("mux", a.enable, a.addr, b.addr)
    return RtlWrite(data, addr, enable)


def linearize(em: Emitter, mem: Mem, t: EffTree, rename) -> Optional[RtlWrite]:
    """Flatten a nested effect tree into at most one guarded write."""
    if isinstance(t, Empty):
        return None
    if isinstance(t, Write):
        return RtlWrite(rename(t.data), None if t.addr is None else rename(t.addr), rename(t.enable))
    if isinstance(t, Seq):
        a = linearize(em, mem, t.first, rename)
        b = linearize(em, mem, t.second, rename)
        if a is None:
            return b
        if b is None:
            return a
        return merge(em, mem, a, b)
    if isinstance(t, Branch):
        c = rename(t.cond)
        a = linearize(em, mem, t.then, rename)
        b = linearize(em, mem, t.else_, rename)
        if a is None and b is None:
            return None
        if b is None:
            return RtlWrite(a.data, a.addr, em.op("mux", c, a.enable, em.false()))
        if a is None:
            return RtlWrite(b.data, b.addr, em.op("mux", c, em.false(), b.enable))
        data = em.op("mux", c, a.data, b.data)
        addr = None if a.addr is None else em.op("mux", c, a.addr, b.addr)
        return RtlWrite(data, addr, em.op("mux", c, a.enable, b.enable))
    raise TypeError(f"not an effect tree: {t!r}")


def compile_to_rtl(phi: Sequence[Mem], b: IrBlock) -> RtlBlock:
    phi = tuple(phi)
    start = 1 + max((x.id for x, _ in b.bindings), default=-1)
    em = Emitter(start)
    alias = {}

    def rename(v: VarId) -> VarId:
        return alias.get(v, v)

    def atom(e) -> VarId:
        if isinstance(e, Var):
            return rename(e.var)
        return em.emit(lower(e))

    def lower(e) -> RtlExpr:
        if isinstance(e, Const):
            return RConst(e.ty, e.value)
        if isinstance(e, Op):
            return ROp(e.op, tuple(atom(a) for a in e.args), e.ty, e.index)
        if isinstance(e, InputRd):
            return RInput(e.ref)
        if isinstance(e, RegRd):
            return RRead(e.ref)
        if isinstance(e, RfRd):
            return RReadRf(e.ref, atom(e.addr))
        raise TypeError(f"not an IR expression: {e!r}")

    for x, e in b.bindings:
        if isinstance(e, Var):
            alias[x] = rename(e.var)
        else:
            em.bindings.append((x, lower(e)))

    effects = tuple(linearize(em, m, t, rename) for m, t in zip(phi, b.effects))
    return RtlBlock(tuple(em.bindings), rename(b.guard), rename(b.value), effects)


# -- semantics ----------------------------------------------------------------


def eval_rtl_expr(env, st, e: RtlExpr):
    if isinstance(e, ROp):
        return ops.apply(e.op, [env[a] for a in e.args], e.ty, e.index)
    if isinstance(e, RConst):
        return e.value
    if isinstance(e, (RInput, RRead)):
        return st[e.ref.index]
    if isinstance(e, RReadRf):
        return st[e.ref.index][env[e.addr]]
    raise TypeError(f"not an RTL expression: {e!r}")


def rtl_next(phi: Sequence[Mem], st: MemState, b: RtlBlock):
    """Next-state function of a block: ``(value, state)`` or None when the guard is false."""
    env = {}
    for x, e in b.bindings:
        env[x] = eval_rtl_expr(env, st, e)
    if not env[b.guard]:
        return None
    delta = {}
    for i, w in enumerate(b.effects):
        if w is not None and env[w.enable]:
            delta[i] = (env[w.addr], env[w.data]) if w.addr is not None else env[w.data]
    return env[b.value], commit(phi, st, delta)


_PY_OPS = {
    "andb": "({0} and {1})",
    "orb": "({0} or {1})",
    "xorb": "({0} != {1})",
    "negb": "(not {0})",
    "eq": "({0} == {1})",
    "le": "({0} <= {1})",
    "lt": "({0} < {1})",
    "mux": "({1} if {0} else {2})",
}


def compile_block(phi: Sequence[Mem], b: RtlBlock) -> Callable[[MemState], Optional[tuple]]:
    """Translate a block to a Python function equivalent to :func:`rtl_next`.

    The generated code is straight-line, so it is much faster than the
    interpreter for bulk simulation.
    """
    phi = tuple(phi)
    name = lambda v: f"v{v.id}"
    lines = ["def step(st):"]
    for x, e in b.bindings:
        if isinstance(e, RConst):
            rhs = repr(e.value)
        elif isinstance(e, (RInput, RRead)):
            rhs = f"st[{e.ref.index}]"
        elif isinstance(e, RReadRf):
            rhs = f"st[{e.ref.index}][{name(e.addr)}]"
        elif e.op in ("add", "sub"):
            sign = "+" if e.op == "add" else "-"
            rhs = f"(({name(e.args[0])} {sign} {name(e.args[1])}) & {(1 << e.ty.width) - 1})"
        elif e.op == "tuple":
            rhs = "(" + "".join(f"{name(a)}, " for a in e.args) + ")"
        elif e.op == "proj":
            rhs = f"{name(e.args[0])}[{e.index}]"
        else:
            rhs = _PY_OPS[e.op].format(*(name(a) for a in e.args))
        lines.append(f"    {name(x)} = {rhs}")
    lines.append(f"    if not {name(b.guard)}:")
    lines.append("        return None")
    lines.append("    delta = {}")
    for i, w in enumerate(b.effects):
        if w is None:
            continue
        lines.append(f"    if {name(w.enable)}:")
        if w.addr is None:
            lines.append(f"        delta[{i}] = {name(w.data)}")
        else:
            lines.append(f"        delta[{i}] = ({name(w.addr)}, {name(w.data)})")
    lines.append(f"    return {name(b.value)}, commit(phi, st, delta)")
    src = "\n".join(lines) + "\n"
    scope = {"commit": commit, "phi": phi}
    exec(compile(src, "<rtl-block>", "exec"), scope)
    step = scope["step"]
    step.source = src
    return step


# -- structural checks --------------------------------------------------------


def check_block(phi: Sequence[Mem], b: RtlBlock) -> list:
    """Structural problems with ``b``; an empty list means it is well formed."""
    problems = []
    bound = {}
    for x, e in b.bindings:
        if x in bound:
            problems.append(f"{x} bound twice")
        for a in expr_args(e):
            if a not in bound:
                problems.append(f"{x} uses {a} before it is bound")
        if isinstance(e, ROp):
            try:
                ty = ops.result_type(e.op, [a.ty for a in e.args], e.index)
            except ops.OpTypeError as exc:
                problems.append(f"{x}: {exc}")
                ty = e.ty
            if ty != e.ty or ty != x.ty:
                problems.append(f"{x}: type {x.ty} does not match its expression")
        elif isinstance(e, (RInput, RRead, RReadRf, RConst)):
            if isinstance(e, RReadRf) and e.addr.ty != IntTy(e.ref.mem.addr_width):
                problems.append(f"{x}: bad register file address type")
            if e.ty != x.ty:
                problems.append(f"{x}: type {x.ty} does not match its expression")
        else:
            problems.append(f"{x}: not a three-address expression: {e!r}")
        bound[x] = e
    for v, what in ((b.guard, "guard"), (b.value, "value")):
        if v not in bound:
            problems.append(f"{what} {v} is not bound")
    if b.guard.ty != BOOL:
        problems.append("guard is not Boolean")
    if len(b.effects) != len(phi):
        problems.append("one effect slot per memory element required")
    for i, (m, w) in enumerate(zip(phi, b.effects)):
        if w is None:
            continue
        if isinstance(m, Input):
            problems.append(f"input m{i} is written")
            continue
        for v in (w.data, w.addr, w.enable):
            if v is not None and v not in bound:
                problems.append(f"write to m{i} uses unbound {v}")
        if w.data.ty != m.ty or w.enable.ty != BOOL:
            problems.append(f"write to m{i} has the wrong type")
        if isinstance(m, Regfile) != (w.addr is not None):
            problems.append(f"write to m{i} has the wrong shape")
        elif w.addr is not None and w.addr.ty != IntTy(m.addr_width):
            problems.append(f"write to m{i} has a bad address type")
    return problems


def show_rtl_expr(e: RtlExpr) -> str:
    if isinstance(e, RConst):
        return show_const(e.ty, e.value)
    if isinstance(e, RInput):
        return f"input {e.ref}"
    if isinstance(e, RRead):
        return f"read {e.ref}"
    if isinstance(e, RReadRf):
        return f"read {e.ref}[{e.addr}]"
    args = ", ".join(str(a) for a in e.args)
    if e.op == "proj":
        return f"proj{e.index}({args})"
    return f"{e.op}({args})"


def dump_rtl(b: RtlBlock, names: Sequence[str] = ()) -> str:
    lines = [f"{x} : {x.ty} := {show_rtl_expr(e)}" for x, e in b.bindings]
    lines.append(f"guard {b.guard}")
    lines.append(f"value {b.value}")
    for i, w in enumerate(b.effects):
        name = names[i] if i < len(names) else f"m{i}"
        if w is None:
            lines.append(f"effect {name}: -")
        else:
            at = "" if w.addr is None else f"[{w.addr}]"
            lines.append(f"effect {name}: write{at}({w.data}) when {w.enable}")
    return "\n".join(lines) + "\n"
