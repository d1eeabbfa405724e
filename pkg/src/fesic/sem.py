"""Reference interpreter for Fe-Si actions.

This is the executable definition of a cycle: read the state, compute a
pending update, commit it.  Every compiled form is compared against
:func:`next_step`.
"""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from . import ops
from .core import EMPTY_DELTA, Delta, Input, Mem, MemState, Value, commit, delta_insert
from .lang import (
    Action,
    Assert,
    Bind,
    Const,
    Expr,
    InputRead,
    Op,
    OrElse,
    RegfileRead,
    RegfileWrite,
    RegRead,
    RegWrite,
    Return,
    Var,
    VarId,
)

Env = Mapping[VarId, Value]


def eval_expr(env: Env, st: MemState, e: Expr) -> Value:
    if isinstance(e, Var):
        return env[e.var]
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Op):
        return ops.apply(e.op, [eval_expr(env, st, a) for a in e.args], e.ty, e.index)
    raise TypeError(f"not an expression: {e!r}")


def eval_action(phi: Sequence[Mem], st: MemState, delta: Delta, env: Env, a: Action):
    """Big-step evaluation: ``None`` if ``a`` aborts, else ``(value, delta')``.

    Reads consult ``st`` only, never the pending ``delta``.
    """
    if isinstance(a, Return):
        return eval_expr(env, st, a.expr), delta
    if isinstance(a, Bind):
        r = eval_action(phi, st, delta, env, a.first)
        if r is None:
            return None
        v, delta = r
        return eval_action(phi, st, delta, {**env, a.binder: v}, a.rest)
    if isinstance(a, Assert):
        return ((), delta) if eval_expr(env, st, a.cond) else None
    if isinstance(a, OrElse):
        r = eval_action(phi, st, delta, env, a.left)
        if r is not None:
            return r
        return eval_action(phi, st, delta, env, a.right)
    if isinstance(a, (RegRead, InputRead)):
        return st[a.ref.index], delta
    if isinstance(a, RegWrite):
        v = eval_expr(env, st, a.expr)
        return (), delta_insert(phi, delta, a.ref.index, v)
    if isinstance(a, RegfileRead):
        addr = eval_expr(env, st, a.addr)
        return st[a.ref.index][addr], delta
    if isinstance(a, RegfileWrite):
        addr = eval_expr(env, st, a.addr)
        v = eval_expr(env, st, a.data)
        return (), delta_insert(phi, delta, a.ref.index, v, addr)
    raise TypeError(f"not an action: {a!r}")


def next_step(phi: Sequence[Mem], st: MemState, a: Action) -> Optional[tuple]:
    """One clock cycle: ``(value, new_state)``, or ``None`` if the action aborts."""
    r = eval_action(phi, st, EMPTY_DELTA, {}, a)
    if r is None:
        return None
    v, delta = r
    return v, commit(phi, st, delta)


def input_indices(phi: Sequence[Mem]) -> list:
    return [i for i, m in enumerate(phi) if isinstance(m, Input)]


def with_inputs(phi: Sequence[Mem], st: MemState, values: Sequence[Value]) -> MemState:
    """Overwrite the input elements of ``st`` with ``values`` (in Φ order)."""
    idx = input_indices(phi)
    if len(values) != len(idx):
        raise ValueError(f"expected {len(idx)} input values, got {len(values)}")
    out = list(st)
    for i, v in zip(idx, values):
        out[i] = v
    return tuple(out)


def simulate(phi: Sequence[Mem], st0: MemState, a: Action, traces: Sequence[Sequence[Value]], cycles: int, step=None):
    """Run ``cycles`` clock ticks, returning ``[(output or None, state)]``.

    ``traces`` holds one value list per input element, in Φ order.
    ``step`` maps a state (inputs already latched) to ``(value, state)``
    or None; it defaults to :func:`next_step` on ``a`` and may be, for
    example, a compiled RTL block.
    """
    if cycles < 0:
        raise ValueError("cycles must be non-negative")
    idx = input_indices(phi)
    if len(traces) != len(idx):
        raise ValueError(f"expected {len(idx)} input traces, got {len(traces)}")
    for k, tr in enumerate(traces):
        if len(tr) < cycles:
            raise ValueError(f"trace for input {idx[k]} has {len(tr)} values, need {cycles}")
    step = step or (lambda st: next_step(phi, st, a))
    out = []
    st = st0
    for c in range(cycles):
        st = with_inputs(phi, st, [tr[c] for tr in traces])
        r = step(st)
        if r is None:
            out.append((None, st))
        else:
            v, st = r
            out.append((v, st))
    return out
