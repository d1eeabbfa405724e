"""The two introductory circuits: a half adder and a counter."""

from __future__ import annotations

from ..core import BOOL, IntTy, Reg
from ..lang import UNIT_C, Builder, Circuit, Return, Var, add, andb, close_over, tup, word, xorb


def hadd(b: Builder, x: Var, y: Var):
    return b.bind(b.ret(andb(x, y)), lambda carry:
           b.bind(b.ret(xorb(x, y)), lambda s:
           b.ret(tup(carry, s))))


def hadd_circuit() -> Circuit:
    b = Builder(())
    x, y = b.param(BOOL), b.param(BOOL)
    return close_over("hadd", (), hadd(b, x, y), [x, y], param_names=("a", "b"))


def count(b: Builder, n: int, tick: Var):
    """Increment register 0 when ``tick`` holds; return its old value."""
    return b.bind(b.reg_read(0), lambda x:
           b.seq(b.ifte(tick, b.reg_write(0, add(x, word(n, 1))), Return(UNIT_C)),
                 b.ret(x)))


def counter_phi(n: int):
    return (Reg(IntTy(n)),)


def counter_circuit(n: int) -> Circuit:
    if not 1 <= n <= 64:
        raise ValueError(f"counter width must be in [1, 64], got {n}")
    phi = counter_phi(n)
    b = Builder(phi)
    tick = b.param(BOOL)
    return close_over(f"counter{n}", phi, count(b, n, tick), [tick], names=("count",), param_names=("tick",))
