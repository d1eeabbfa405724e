"""Primitive operators: typing rules and evaluation.

Every language level (source, IR, RTL) uses the same operator set, so the
rules live here once.  ``index`` is only meaningful for ``proj``.
"""

from __future__ import annotations

from .core import BOOL, BoolTy, IntTy, TupleTy, Ty

BOOL_OPS = ("andb", "orb", "xorb", "negb")
WORD_OPS = ("add", "sub")
CMP_OPS = ("eq", "le", "lt")
ALL_OPS = BOOL_OPS + WORD_OPS + CMP_OPS + ("mux", "tuple", "proj")
COMMUTATIVE = frozenset({"andb", "orb", "xorb", "add", "eq"})


class OpTypeError(Exception):
    pass


def result_type(op: str, arg_tys, index: int | None = None) -> Ty:
    """Result type of ``op`` applied to ``arg_tys``; raises OpTypeError."""
    n = len(arg_tys)
    if op in BOOL_OPS:
        want = 1 if op == "negb" else 2
        if n != want or not all(isinstance(t, BoolTy) for t in arg_tys):
            raise OpTypeError(f"{op} expects {want} Boolean operand(s), got {_fmt(arg_tys)}")
        return BOOL
    if op in WORD_OPS or op in CMP_OPS:
        if n != 2 or not isinstance(arg_tys[0], IntTy) or arg_tys[0] != arg_tys[1]:
            raise OpTypeError(f"{op} expects two operands of one Int type, got {_fmt(arg_tys)}")
        return arg_tys[0] if op in WORD_OPS else BOOL
    if op == "mux":
        if n != 3 or not isinstance(arg_tys[0], BoolTy):
            raise OpTypeError(f"mux expects a Boolean selector, got {_fmt(arg_tys)}")
        if arg_tys[1] != arg_tys[2]:
            raise OpTypeError(f"mux branches differ: {arg_tys[1]} vs {arg_tys[2]}")
        return arg_tys[1]
    if op == "tuple":
        return TupleTy(tuple(arg_tys))
    if op == "proj":
        if n != 1 or not isinstance(arg_tys[0], TupleTy):
            raise OpTypeError(f"proj expects a tuple, got {_fmt(arg_tys)}")
        elems = arg_tys[0].elems
        if index is None or not 0 <= index < len(elems):
            raise OpTypeError(f"proj index {index} out of range for {arg_tys[0]}")
        return elems[index]
    raise OpTypeError(f"unknown operator {op!r}")


def _fmt(tys):
    return "[" + ", ".join(str(t) for t in tys) + "]"


def apply(op: str, args, ty: Ty, index: int | None = None):
    """Evaluate ``op`` on ``args``; ``ty`` is the result type of the node."""
    if op == "andb":
        return args[0] and args[1]
    if op == "orb":
        return args[0] or args[1]
    if op == "xorb":
        return args[0] != args[1]
    if op == "negb":
        return not args[0]
    if op == "add":
        return (args[0] + args[1]) & ((1 << ty.width) - 1)
    if op == "sub":
        return (args[0] - args[1]) & ((1 << ty.width) - 1)
    if op == "eq":
        return args[0] == args[1]
    if op == "le":
        return args[0] <= args[1]
    if op == "lt":
        return args[0] < args[1]
    if op == "mux":
        return args[1] if args[0] else args[2]
    if op == "tuple":
        return tuple(args)
    if op == "proj":
        return args[0][index]
    raise ValueError(f"unknown operator {op!r}")
