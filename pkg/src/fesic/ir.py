"""First pass: A-normal form with control flow turned into data flow.

An :class:`IrBlock` is a telescope of named expressions followed by a
guard, a result and one tree of nested writes per memory element.  Both
sides of every ``orElse`` are evaluated; the guard of the left side picks
which result and which effects survive.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

from . import ops
from .core import Mem, MemState, Regfile, commit
from .lang import (
    TRUE,
    UNIT_C,
    Action,
    Assert,
    Bind,
    Const,
    Expr,
    InputRead,
    MemberRef,
    Op,
    OrElse,
    RegfileRead,
    RegfileWrite,
    RegRead,
    RegWrite,
    Return,
    Var,
    VarId,
    show_expr,
    subst_expr,
)


@dataclass(frozen=True)
class InputRd:
    ref: MemberRef

    @property
    def ty(self):
        return self.ref.mem.ty


@dataclass(frozen=True)
class RegRd:
    ref: MemberRef

    @property
    def ty(self):
        return self.ref.mem.ty


@dataclass(frozen=True)
class RfRd:
    ref: MemberRef
    addr: Expr

    @property
    def ty(self):
        return self.ref.mem.ty


IrExpr = Union[Var, Const, Op, InputRd, RegRd, RfRd]


# -- nested effects -----------------------------------------------------------


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Write:
    data: VarId
    addr: Optional[VarId]
    enable: VarId


@dataclass(frozen=True)
class Branch:
    cond: VarId
    then: "EffTree"
    else_: "EffTree"


@dataclass(frozen=True)
class Seq:
    first: "EffTree"
    second: "EffTree"


EffTree = Union[Empty, Write, Branch, Seq]
EMPTY = Empty()


def seq(a: EffTree, b: EffTree) -> EffTree:
    if a is EMPTY or a == EMPTY:
        return b
    if b is EMPTY or b == EMPTY:
        return a
    return Seq(a, b)


def branch(c: VarId, a: EffTree, b: EffTree) -> EffTree:
    if a == EMPTY and b == EMPTY:
        return EMPTY
    return Branch(c, a, b)


@dataclass(frozen=True)
class IrBlock:
    bindings: Tuple[Tuple[VarId, IrExpr], ...]
    guard: VarId
    value: VarId
    effects: Tuple[EffTree, ...]


# -- compilation --------------------------------------------------------------


class _Compiler:
    def __init__(self, phi):
        self.phi = tuple(phi)
        self.ids = itertools.count()
        self.bindings = []

    def bind(self, e, ty=None) -> VarId:
        x = VarId(next(self.ids), ty if ty is not None else e.ty)
        self.bindings.append((x, e))
        return x

    def empty(self):
        return (EMPTY,) * len(self.phi)

    def expr(self, env, e):
        return subst_expr(e, lambda v: Var(env[v]))

    def action(self, a, g: VarId, env):
        """Compile ``a`` under guard ``g``: returns (guard, value, effects)."""
        if isinstance(a, Return):
            return g, self.bind(self.expr(env, a.expr)), self.empty()
        if isinstance(a, Assert):
            c = self.expr(env, a.cond)
            g2 = self.bind(Op("andb", (Var(g), c)))
            return g2, self.bind(UNIT_C), self.empty()
        if isinstance(a, Bind):
            g1, v1, e1 = self.action(a.first, g, env)
            g2, v2, e2 = self.action(a.rest, g1, {**env, a.binder: v1})
            return g2, v2, tuple(seq(x, y) for x, y in zip(e1, e2))
        if isinstance(a, OrElse):
            ga, va, ea = self.action(a.left, g, env)
            gb, vb, eb = self.action(a.right, g, env)
            g2 = self.bind(Op("orb", (Var(ga), Var(gb))))
            v = self.bind(Op("mux", (Var(ga), Var(va), Var(vb))))
            return g2, v, tuple(branch(ga, x, y) for x, y in zip(ea, eb))
        if isinstance(a, RegRead):
            return g, self.bind(RegRd(a.ref)), self.empty()
        if isinstance(a, InputRead):
            return g, self.bind(InputRd(a.ref)), self.empty()
        if isinstance(a, RegfileRead):
            return g, self.bind(RfRd(a.ref, self.expr(env, a.addr))), self.empty()
        if isinstance(a, (RegWrite, RegfileWrite)):
            if isinstance(a, RegWrite):
                addr = None
                data = self.bind(self.expr(env, a.expr))
            else:
                addr = self.bind(self.expr(env, a.addr))
                data = self.bind(self.expr(env, a.data))
            effects = list(self.empty())
            effects[a.ref.index] = Write(data, addr, g)
            return g, self.bind(UNIT_C), tuple(effects)
        raise TypeError(f"not an action: {a!r}")


def compile_to_ir(phi: Sequence[Mem], a: Action) -> IrBlock:
    c = _Compiler(phi)
    g0 = c.bind(TRUE)
    g, v, effects = c.action(a, g0, {})
    return IrBlock(tuple(c.bindings), g, v, effects)


# -- evaluation ---------------------------------------------------------------


def eval_ir_expr(env, st, e):
    if isinstance(e, Var):
        return env[e.var]
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Op):
        return ops.apply(e.op, [eval_ir_expr(env, st, x) for x in e.args], e.ty, e.index)
    if isinstance(e, (InputRd, RegRd)):
        return st[e.ref.index]
    if isinstance(e, RfRd):
        return st[e.ref.index][eval_ir_expr(env, st, e.addr)]
    raise TypeError(f"not an IR expression: {e!r}")


def fold_effect(env, t: EffTree):
    """The single write an effect tree performs: ``(data, addr)`` or None."""
    if isinstance(t, Empty):
        return None
    if isinstance(t, Write):
        if not env[t.enable]:
            return None
        return env[t.data], (None if t.addr is None else env[t.addr])
    if isinstance(t, Branch):
        return fold_effect(env, t.then if env[t.cond] else t.else_)
    if isinstance(t, Seq):
        r = fold_effect(env, t.first)
        return r if r is not None else fold_effect(env, t.second)
    raise TypeError(f"not an effect tree: {t!r}")


def eval_ir(phi: Sequence[Mem], st: MemState, b: IrBlock):
    env = {}
    for x, e in b.bindings:
        env[x] = eval_ir_expr(env, st, e)
    if not env[b.guard]:
        return None
    delta = {}
    for i, t in enumerate(b.effects):
        w = fold_effect(env, t)
        if w is not None:
            data, addr = w
            delta[i] = (addr, data) if isinstance(phi[i], Regfile) else data
    return env[b.value], commit(phi, st, delta)


# -- inspection ---------------------------------------------------------------


def expr_vars(e) -> list:
    if isinstance(e, Var):
        return [e.var]
    if isinstance(e, Op):
        return [v for a in e.args for v in expr_vars(a)]
    if isinstance(e, RfRd):
        return expr_vars(e.addr)
    return []


def tree_vars(t: EffTree) -> list:
    if isinstance(t, Write):
        return [v for v in (t.data, t.addr, t.enable) if v is not None]
    if isinstance(t, Branch):
        return [t.cond] + tree_vars(t.then) + tree_vars(t.else_)
    if isinstance(t, Seq):
        return tree_vars(t.first) + tree_vars(t.second)
    return []


def is_well_scoped(b: IrBlock) -> bool:
    bound = set()
    for x, e in b.bindings:
        if x in bound or any(v not in bound for v in expr_vars(e)):
            return False
        bound.add(x)
    used = [b.guard, b.value] + [v for t in b.effects for v in tree_vars(t)]
    return all(v in bound for v in used)


def show_ir_expr(e) -> str:
    if isinstance(e, InputRd):
        return f"input {e.ref}"
    if isinstance(e, RegRd):
        return f"read {e.ref}"
    if isinstance(e, RfRd):
        return f"read {e.ref}[{show_expr(e.addr)}]"
    return show_expr(e)


def show_tree(t: EffTree) -> str:
    if isinstance(t, Empty):
        return "-"
    if isinstance(t, Write):
        at = "" if t.addr is None else f"[{t.addr}]"
        return f"write{at}({t.data}) when {t.enable}"
    if isinstance(t, Branch):
        return f"({t.cond} ? {show_tree(t.then)} : {show_tree(t.else_)})"
    return f"{show_tree(t.first)}; {show_tree(t.second)}"


def dump_ir(b: IrBlock, names: Sequence[str] = ()) -> str:
    lines = [f"{x} : {x.ty} := {show_ir_expr(e)}" for x, e in b.bindings]
    lines.append(f"guard {b.guard}")
    lines.append(f"value {b.value}")
    for i, t in enumerate(b.effects):
        name = names[i] if i < len(names) else f"m{i}"
        lines.append(f"effect {name}: {show_tree(t)}")
    return "\n".join(lines) + "\n"
