"""Syntactic common-subexpression elimination on RTL blocks.

Each binding gets a symbolic value built from the symbolic values of its
operands.  Operands are canonicalized to the first variable holding a
given symbolic value, so a symbolic value can be keyed by the operator
and its canonical operand variables alone.
"""

from __future__ import annotations

from .ops import COMMUTATIVE
from .rtl import RConst, RInput, ROp, RRead, RReadRf, RtlBlock, map_args, map_write


def symval(e):
    """Hashable key for a binding whose operands are already canonical."""
    if isinstance(e, RConst):
        return ("const", e.ty, e.value)
    if isinstance(e, RInput):
        return ("input", e.ref.index)
    if isinstance(e, RRead):
        return ("reg", e.ref.index)
    if isinstance(e, RReadRf):
        return ("rf", e.ref.index, e.addr)
    if isinstance(e, ROp):
        args = e.args
        if e.op in COMMUTATIVE:
            args = tuple(sorted(args, key=lambda v: v.id))
        return (e.op, e.index, e.ty, args)
    return ("opaque", id(e))


def cse(b: RtlBlock) -> RtlBlock:
    table = {}
    canon = {}
    kept = []

    def f(v):
        return canon.get(v, v)

    for x, e in b.bindings:
        e = map_args(e, f)
        key = symval(e)
        hit = table.get(key)
        if hit is not None:
            canon[x] = hit
        else:
            table[key] = x
            kept.append((x, e))
    return RtlBlock(tuple(kept), f(b.guard), f(b.value), tuple(map_write(w, f) for w in b.effects))


def symvals(b: RtlBlock) -> list:
    """Symbolic value of every binding of ``b`` (operands as given)."""
    return [symval(e) for _, e in b.bindings]
