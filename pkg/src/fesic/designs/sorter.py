"""Bitonic sorter: a tree-based specification and the circuit generator
that mirrors it.

Sequences of ``2**n`` elements are complete binary trees of depth ``n``.
The circuit takes one input whose type nests pairs ``n`` levels deep and
returns a value of the same type.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from ..core import IntTy, TupleTy, Ty
from ..lang import Builder, Circuit, Expr, close_over, lt, mux, proj, tup


@dataclass(frozen=True)
class Leaf:
    x: Any


@dataclass(frozen=True)
class Node:
    l: Any
    r: Any


def depth(t) -> int:
    return 0 if isinstance(t, Leaf) else 1 + depth(t.l)


def from_list(xs):
    if len(xs) == 1:
        return Leaf(xs[0])
    if len(xs) % 2:
        raise ValueError("length must be a power of two")
    h = len(xs) // 2
    return Node(from_list(xs[:h]), from_list(xs[h:]))


def to_list(t) -> list:
    return [t.x] if isinstance(t, Leaf) else to_list(t.l) + to_list(t.r)


def min_max(a, b):
    return (a, b) if a <= b else (b, a)


# -- specification ------------------------------------------------------------


def spec_reverse(t):
    if isinstance(t, Leaf):
        return t
    r = spec_reverse(t.r)
    l = spec_reverse(t.l)
    return Node(r, l)


def spec_min_max_swap(cmp, l, r):
    if isinstance(l, Leaf):
        x, y = cmp(l.x, r.x)
        return Leaf(x), Leaf(y)
    a, b = spec_min_max_swap(cmp, l.l, r.l)
    c, d = spec_min_max_swap(cmp, l.r, r.r)
    return Node(a, c), Node(b, d)


def spec_merge(cmp, t):
    """Sort a bitonic sequence."""
    if isinstance(t, Leaf):
        return t
    a, b = spec_min_max_swap(cmp, t.l, t.r)
    return Node(spec_merge(cmp, a), spec_merge(cmp, b))


def spec_sort(cmp, t):
    if isinstance(t, Leaf):
        return t
    l = spec_sort(cmp, t.l)
    r = spec_reverse(spec_sort(cmp, t.r))
    return spec_merge(cmp, Node(l, r))


# -- circuit ------------------------------------------------------------------


def domain(n: int, a: Ty) -> Ty:
    t = a
    for _ in range(n):
        t = TupleTy((t, t))
    return t


def tree_of(e: Expr, n: int):
    """Destructure a ``domain n`` expression into a tree of projections."""
    if n == 0:
        return Leaf(e)
    return Node(tree_of(proj(e, 0), n - 1), tree_of(proj(e, 1), n - 1))


def bind_tree(b: Builder, a, n: int, k: Callable):
    """Bind the result of ``a`` and hand ``k`` its tree structure."""
    return b.bind(a, lambda v: k(tree_of(v, n)))


def cmp_circuit(b: Builder, x: Expr, y: Expr):
    return b.bind(b.ret(lt(y, x)), lambda swap: b.ret(tup(mux(swap, y, x), mux(swap, x, y))))


def c_reverse(b: Builder, n: int, t):
    if isinstance(t, Leaf):
        return b.ret(t.x)
    return b.bind(c_reverse(b, n - 1, t.r), lambda r:
           b.bind(c_reverse(b, n - 1, t.l), lambda l:
           b.ret(tup(r, l))))


def c_min_max_swap(b: Builder, n: int, l, r):
    if n == 0:
        return cmp_circuit(b, l.x, r.x)
    return b.bind(c_min_max_swap(b, n - 1, l.l, r.l), lambda ab:
           b.bind(c_min_max_swap(b, n - 1, l.r, r.r), lambda cd:
           b.ret(tup(tup(proj(ab, 0), proj(cd, 0)), tup(proj(ab, 1), proj(cd, 1))))))


def c_merge(b: Builder, n: int, t):
    if n == 0:
        return b.ret(t.x)
    return b.bind(c_min_max_swap(b, n - 1, t.l, t.r), lambda ab:
           b.bind(c_merge(b, n - 1, tree_of(proj(ab, 0), n - 1)), lambda x:
           b.bind(c_merge(b, n - 1, tree_of(proj(ab, 1), n - 1)), lambda y:
           b.ret(tup(x, y)))))


def c_sort(b: Builder, n: int, t):
    if n == 0:
        return b.ret(t.x)
    return bind_tree(b, c_sort(b, n - 1, t.l), n - 1, lambda l:
           bind_tree(b, c_sort(b, n - 1, t.r), n - 1, lambda r:
           bind_tree(b, c_reverse(b, n - 1, r), n - 1, lambda rr:
           c_merge(b, n, Node(l, rr)))))


def sorter_action(n: int, width: int):
    """``(builder, input variable, action)`` over the empty environment."""
    b = Builder(())
    x = b.param(domain(n, IntTy(width)))
    return b, x, c_sort(b, n, tree_of(x, n))


def sorter_circuit(n: int, width: int) -> Circuit:
    if not 1 <= n <= 6:
        raise ValueError(f"sorter depth must be in [1, 6], got {n}")
    if not 1 <= width <= 64:
        raise ValueError(f"sorter width must be in [1, 64], got {width}")
    _, x, a = sorter_action(n, width)
    return close_over(f"sorter{n}_{width}", (), a, [x], param_names=("data",))


def value_to_tree(v, n: int):
    if n == 0:
        return Leaf(v)
    return Node(value_to_tree(v[0], n - 1), value_to_tree(v[1], n - 1))


def tree_to_value(t):
    if isinstance(t, Leaf):
        return t.x
    return (tree_to_value(t.l), tree_to_value(t.r))


def list_to_value(xs):
    return tree_to_value(from_list(list(xs)))


def value_to_list(v, n: int) -> list:
    return to_list(value_to_tree(v, n))
