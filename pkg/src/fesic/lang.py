"""Fe-Si abstract syntax, type checker and builder.

Binders are explicit: every variable is a :class:`VarId` carrying its
type, and a :class:`Builder` hands out fresh ones.  Programs are plain
immutable trees, so well-typedness is established by :func:`typecheck`
rather than by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

from . import ops
from .core import (
    BOOL,
    UNIT,
    BoolTy,
    Input,
    IntTy,
    Mem,
    Reg,
    Regfile,
    TupleTy,
    Ty,
    UnitTy,
    value_has_type,
)


@dataclass(frozen=True)
class VarId:
    id: int
    ty: Ty

    def __str__(self):
        return f"x{self.id}"


@dataclass(frozen=True)
class MemberRef:
    index: int
    mem: Mem

    def __str__(self):
        return f"m{self.index}"


# -- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    var: VarId

    @property
    def ty(self):
        return self.var.ty


@dataclass(frozen=True)
class Const:
    ty: Ty
    value: object


@dataclass(frozen=True)
class Op:
    op: str
    args: Tuple["Expr", ...]
    index: Optional[int] = None
    # synthesized result type, None when ill-typed
    ty: Optional[Ty] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        arg_tys = [a.ty for a in self.args]
        ty = None
        if all(t is not None for t in arg_tys):
            try:
                ty = ops.result_type(self.op, arg_tys, self.index)
            except ops.OpTypeError:
                ty = None
        object.__setattr__(self, "ty", ty)


Expr = Union[Var, Const, Op]

TRUE = Const(BOOL, True)
FALSE = Const(BOOL, False)
UNIT_C = Const(UNIT, ())


def const(ty: Ty, value) -> Const:
    return Const(ty, value)


def word(width: int, value: int) -> Const:
    return Const(IntTy(width), value)


def andb(a, b):
    return Op("andb", (a, b))


def orb(a, b):
    return Op("orb", (a, b))


def xorb(a, b):
    return Op("xorb", (a, b))


def negb(a):
    return Op("negb", (a,))


def add(a, b):
    return Op("add", (a, b))


def sub(a, b):
    return Op("sub", (a, b))


def eq(a, b):
    return Op("eq", (a, b))


def le(a, b):
    return Op("le", (a, b))


def lt(a, b):
    return Op("lt", (a, b))


def mux(c, t, f):
    return Op("mux", (c, t, f))


def tup(*elems):
    return Op("tuple", tuple(elems))


def proj(e, i: int):
    return Op("proj", (e,), i)


def fst(e):
    return proj(e, 0)


def snd(e):
    return proj(e, 1)


# -- actions ----------------------------------------------------------------


@dataclass(frozen=True)
class Return:
    expr: Expr


@dataclass(frozen=True)
class Bind:
    first: "Action"
    binder: VarId
    rest: "Action"


@dataclass(frozen=True)
class Assert:
    cond: Expr


@dataclass(frozen=True)
class OrElse:
    left: "Action"
    right: "Action"


@dataclass(frozen=True)
class RegRead:
    ref: MemberRef


@dataclass(frozen=True)
class RegWrite:
    ref: MemberRef
    expr: Expr


@dataclass(frozen=True)
class InputRead:
    ref: MemberRef


@dataclass(frozen=True)
class RegfileRead:
    ref: MemberRef
    addr: Expr


@dataclass(frozen=True)
class RegfileWrite:
    ref: MemberRef
    addr: Expr
    data: Expr


Action = Union[Return, Bind, Assert, OrElse, RegRead, RegWrite, InputRead, RegfileRead, RegfileWrite]


# -- type checking ----------------------------------------------------------


class FesiTypeError(TypeError):
    def __init__(self, node, message, expected=None, actual=None):
        self.node = node
        self.expected = expected
        self.actual = actual
        detail = ""
        if expected is not None or actual is not None:
            detail = f" (expected {expected}, got {actual})"
        super().__init__(f"{message}{detail}")


def _check_ref(phi, node, ref: MemberRef, kind):
    if not isinstance(ref, MemberRef) or not 0 <= ref.index < len(phi):
        raise FesiTypeError(node, f"member reference {ref} out of range for a {len(phi)}-element environment")
    if phi[ref.index] != ref.mem:
        raise FesiTypeError(node, f"member reference {ref} does not match the environment", phi[ref.index], ref.mem)
    if not isinstance(ref.mem, kind):
        raise FesiTypeError(node, f"member {ref} is a {type(ref.mem).__name__}", kind.__name__, type(ref.mem).__name__)
    return ref.mem


def check_expr(e: Expr, scope) -> Ty:
    """Type of ``e``; ``scope`` is a set of bound VarIds or None to allow free vars."""
    if isinstance(e, Var):
        if not isinstance(e.var, VarId):
            raise FesiTypeError(e, "variable is not a VarId")
        if scope is not None and e.var not in scope:
            raise FesiTypeError(e, f"variable {e.var} used before it is bound")
        return e.var.ty
    if isinstance(e, Const):
        if isinstance(e.ty, TupleTy) or not value_has_type(e.value, e.ty):
            raise FesiTypeError(e, f"constant {e.value!r} does not inhabit {e.ty}")
        return e.ty
    if isinstance(e, Op):
        arg_tys = [check_expr(a, scope) for a in e.args]
        try:
            return ops.result_type(e.op, arg_tys, e.index)
        except ops.OpTypeError as exc:
            raise FesiTypeError(e, str(exc)) from None
    raise FesiTypeError(e, f"not an expression: {type(e).__name__}")


def _check_addr(phi, node, rf: Regfile, addr, scope):
    t = check_expr(addr, scope)
    want = IntTy(rf.addr_width)
    if t != want:
        raise FesiTypeError(node, "register file address has the wrong type", want, t)


def _check_action(phi, a, scope, seen) -> Ty:
    if isinstance(a, Return):
        return check_expr(a.expr, scope)
    if isinstance(a, Bind):
        t = _check_action(phi, a.first, scope, seen)
        x = a.binder
        if not isinstance(x, VarId):
            raise FesiTypeError(a, "binder is not a VarId")
        if x.ty != t:
            raise FesiTypeError(a, f"binder {x} annotated with the wrong type", t, x.ty)
        if seen is not None:
            if x.id in seen:
                raise FesiTypeError(a, f"variable {x} bound twice")
            seen.add(x.id)
        inner = None if scope is None else scope | {x}
        return _check_action(phi, a.rest, inner, seen)
    if isinstance(a, Assert):
        t = check_expr(a.cond, scope)
        if not isinstance(t, BoolTy):
            raise FesiTypeError(a, "assert condition must be Boolean", BOOL, t)
        return UNIT
    if isinstance(a, OrElse):
        tl = _check_action(phi, a.left, scope, seen)
        tr = _check_action(phi, a.right, scope, seen)
        if tl != tr:
            raise FesiTypeError(a, "orElse branches have different types", tl, tr)
        return tl
    if isinstance(a, RegRead):
        return _check_ref(phi, a, a.ref, Reg).ty
    if isinstance(a, InputRead):
        return _check_ref(phi, a, a.ref, Input).ty
    if isinstance(a, RegWrite):
        m = _check_ref(phi, a, a.ref, Reg)
        t = check_expr(a.expr, scope)
        if t != m.ty:
            raise FesiTypeError(a, "register write of the wrong type", m.ty, t)
        return UNIT
    if isinstance(a, RegfileRead):
        m = _check_ref(phi, a, a.ref, Regfile)
        _check_addr(phi, a, m, a.addr, scope)
        return m.ty
    if isinstance(a, RegfileWrite):
        m = _check_ref(phi, a, a.ref, Regfile)
        _check_addr(phi, a, m, a.addr, scope)
        t = check_expr(a.data, scope)
        if t != m.ty:
            raise FesiTypeError(a, "register file write of the wrong type", m.ty, t)
        return UNIT
    raise FesiTypeError(a, f"not an action: {type(a).__name__}")


def typecheck(phi: Sequence[Mem], a: Action, params: Sequence[VarId] = ()) -> Ty:
    """Result type of ``a`` over ``phi``; raises :class:`FesiTypeError`.

    ``params`` are variables allowed to occur free (circuit arguments).
    """
    phi = tuple(phi)
    seen = {p.id for p in params}
    if len(seen) != len(params):
        raise FesiTypeError(None, "duplicate parameters")
    return _check_action(phi, a, frozenset(params), seen)


def infer(phi: Sequence[Mem], a: Action) -> Ty:
    """Result type of ``a`` without scoping checks."""
    return _check_action(tuple(phi), a, None, None)


# -- builder ----------------------------------------------------------------


class Builder:
    """Constructs actions over ``phi`` with automatically fresh variables."""

    def __init__(self, phi: Sequence[Mem] = (), start: int = 0):
        self.phi = tuple(phi)
        self._ids = itertools.count(start)
        self._types = {}

    def fresh(self, ty: Ty) -> VarId:
        return VarId(next(self._ids), ty)

    def param(self, ty: Ty) -> Var:
        """A fresh variable to be used as a circuit argument."""
        return Var(self.fresh(ty))

    def type_of(self, a: Action) -> Ty:
        key = id(a)
        hit = self._types.get(key)
        if hit is not None and hit[0] is a:
            return hit[1]
        t = infer(self.phi, a)
        self._types[key] = (a, t)
        return t

    def ref(self, index: int) -> MemberRef:
        return MemberRef(index, self.phi[index])

    def ret(self, e: Expr) -> Action:
        return Return(e)

    def bind(self, a: Action, k: Callable[[Var], Action]) -> Action:
        x = self.fresh(self.type_of(a))
        return Bind(a, x, k(Var(x)))

    def seq(self, *actions: Action) -> Action:
        """Run ``actions`` in order, returning the last one's result."""
        out = actions[-1]
        for a in reversed(actions[:-1]):
            out = Bind(a, self.fresh(self.type_of(a)), out)
        return out

    def assert_(self, e: Expr) -> Action:
        return Assert(e)

    def or_else(self, a: Action, b: Action) -> Action:
        return OrElse(a, b)

    def ifte(self, c: Expr, a: Action, b: Action) -> Action:
        return OrElse(self.seq(Assert(c), a), b)

    def when(self, c: Expr, a: Action) -> Action:
        """``a`` if ``c`` holds, otherwise return unit."""
        return self.ifte(c, a, Return(UNIT_C))

    def reg_read(self, index: int) -> Action:
        return RegRead(self.ref(index))

    def reg_write(self, index: int, e: Expr) -> Action:
        return RegWrite(self.ref(index), e)

    def input_read(self, index: int) -> Action:
        return InputRead(self.ref(index))

    def rf_read(self, index: int, addr: Expr) -> Action:
        return RegfileRead(self.ref(index), addr)

    def rf_write(self, index: int, addr: Expr, data: Expr) -> Action:
        return RegfileWrite(self.ref(index), addr, data)


# -- traversal helpers --------------------------------------------------------


def subst_expr(e: Expr, f: Callable[[VarId], Expr]) -> Expr:
    if isinstance(e, Var):
        return f(e.var)
    if isinstance(e, Op):
        return Op(e.op, tuple(subst_expr(a, f) for a in e.args), e.index)
    return e


def rename(a: Action, f: Callable[[VarId], VarId]) -> Action:
    """Apply ``f`` to every variable occurrence and binder of ``a``."""
    ex = lambda e: subst_expr(e, lambda v: Var(f(v)))
    if isinstance(a, Return):
        return Return(ex(a.expr))
    if isinstance(a, Bind):
        return Bind(rename(a.first, f), f(a.binder), rename(a.rest, f))
    if isinstance(a, Assert):
        return Assert(ex(a.cond))
    if isinstance(a, OrElse):
        return OrElse(rename(a.left, f), rename(a.right, f))
    if isinstance(a, RegWrite):
        return RegWrite(a.ref, ex(a.expr))
    if isinstance(a, RegfileRead):
        return RegfileRead(a.ref, ex(a.addr))
    if isinstance(a, RegfileWrite):
        return RegfileWrite(a.ref, ex(a.addr), ex(a.data))
    return a


def action_size(a: Action) -> int:
    """Number of action and expression nodes in ``a``."""

    def esize(e):
        return 1 + (sum(esize(x) for x in e.args) if isinstance(e, Op) else 0)

    if isinstance(a, Return):
        return 1 + esize(a.expr)
    if isinstance(a, Bind):
        return 1 + action_size(a.first) + action_size(a.rest)
    if isinstance(a, Assert):
        return 1 + esize(a.cond)
    if isinstance(a, OrElse):
        return 1 + action_size(a.left) + action_size(a.right)
    if isinstance(a, RegWrite):
        return 1 + esize(a.expr)
    if isinstance(a, RegfileRead):
        return 1 + esize(a.addr)
    if isinstance(a, RegfileWrite):
        return 1 + esize(a.addr) + esize(a.data)
    return 1


# -- printing ---------------------------------------------------------------


def show_const(ty: Ty, v) -> str:
    if isinstance(ty, UnitTy):
        return "()"
    if isinstance(ty, BoolTy):
        return "true" if v else "false"
    if isinstance(ty, IntTy):
        return f"{v}'{ty.width}"
    return repr(v)


def show_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return str(e.var)
    if isinstance(e, Const):
        return show_const(e.ty, e.value)
    args = ", ".join(show_expr(a) for a in e.args)
    if e.op == "proj":
        return f"proj{e.index}({args})"
    return f"{e.op}({args})"


def pretty(a: Action, indent: int = 0) -> str:
    """Deterministic multi-line rendering of an action."""
    pad = "  " * indent
    if isinstance(a, Bind):
        lines = []
        while isinstance(a, Bind):
            first = pretty(a.first, indent + 1).lstrip()
            lines.append(f"{pad}do {a.binder} : {a.binder.ty} <- {first};")
            a = a.rest
        lines.append(pretty(a, indent))
        return "\n".join(lines)
    if isinstance(a, Return):
        return f"{pad}ret {show_expr(a.expr)}"
    if isinstance(a, Assert):
        return f"{pad}assert {show_expr(a.cond)}"
    if isinstance(a, OrElse):
        return f"{pad}(\n{pretty(a.left, indent + 1)}\n{pad}) orElse (\n{pretty(a.right, indent + 1)}\n{pad})"
    if isinstance(a, RegRead):
        return f"{pad}!{a.ref}"
    if isinstance(a, InputRead):
        return f"{pad}input {a.ref}"
    if isinstance(a, RegWrite):
        return f"{pad}{a.ref} ::= {show_expr(a.expr)}"
    if isinstance(a, RegfileRead):
        return f"{pad}read {a.ref}[{show_expr(a.addr)}]"
    if isinstance(a, RegfileWrite):
        return f"{pad}write {a.ref}[{show_expr(a.addr)} <- {show_expr(a.data)}]"
    raise TypeError(f"not an action: {a!r}")


# -- circuits ---------------------------------------------------------------


@dataclass(frozen=True)
class Circuit:
    """A closed top-level design: memory environment plus one action.

    ``names`` labels the memory elements for dumps, traces and watches.
    """

    name: str
    phi: Tuple[Mem, ...]
    action: Action
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        names = tuple(self.names) or tuple(f"m{i}" for i in range(len(self.phi)))
        if len(names) != len(self.phi):
            raise ValueError("one name per memory element required")
        object.__setattr__(self, "names", names)

    @property
    def result_type(self) -> Ty:
        return typecheck(self.phi, self.action)

    def element(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no memory element named {name!r}") from None


def close_over(name, phi, action, params, names=(), param_names=()) -> Circuit:
    """Turn circuit arguments into input elements appended to ``phi``.

    Each parameter ``p`` is bound by reading a fresh ``Input p.ty`` so the
    existing member indices stay valid.
    """
    phi = tuple(phi)
    params = [p.var if isinstance(p, Var) else p for p in params]
    full = phi + tuple(Input(p.ty) for p in params)
    body = action
    for k in reversed(range(len(params))):
        body = Bind(InputRead(MemberRef(len(phi) + k, full[len(phi) + k])), params[k], body)
    names = tuple(names) or tuple(f"m{i}" for i in range(len(phi)))
    param_names = tuple(param_names) or tuple(f"in{k}" for k in range(len(params)))
    return Circuit(name, full, body, names + param_names)
