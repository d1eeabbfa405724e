"""Reduced ordered BDDs with hash-consing, and the Boolean simplification
pass built on them.

Node ids 0 and 1 are the constants.  Variables with smaller indices sit
closer to the root.
"""

from __future__ import annotations

from .core import BOOL, BoolTy
from .rtl import RConst, ROp, RtlBlock, map_args, map_write

FALSE_ID = 0
TRUE_ID = 1
DEFAULT_BUDGET = 10**6


class BddOverflow(Exception):
    """The store reached its node budget."""


class BddStore:
    def __init__(self, budget: int = DEFAULT_BUDGET):
        self.budget = budget
        # terminals use var = +inf so every real variable orders above them
        self.nodes = [(float("inf"), None, None), (float("inf"), None, None)]
        self.unique = {}
        self.cache = {}

    def __len__(self):
        return len(self.nodes)

    def var(self, n: int) -> int:
        return self.nodes[n][0]

    def mk(self, v: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (v, lo, hi)
        n = self.unique.get(key)
        if n is None:
            if len(self.nodes) >= self.budget:
                raise BddOverflow(f"node budget of {self.budget} exhausted")
            n = len(self.nodes)
            self.nodes.append(key)
            self.unique[key] = n
        return n

    def mk_var(self, v: int) -> int:
        return self.mk(v, FALSE_ID, TRUE_ID)

    def ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE_ID:
            return g
        if f == FALSE_ID:
            return h
        if g == h:
            return g
        if g == TRUE_ID and h == FALSE_ID:
            return f
        key = (f, g, h)
        r = self.cache.get(key)
        if r is not None:
            return r
        v = min(self.var(f), self.var(g), self.var(h))
        f0, f1 = self._cofactors(f, v)
        g0, g1 = self._cofactors(g, v)
        h0, h1 = self._cofactors(h, v)
        lo = self.ite(f0, g0, h0)
        hi = self.ite(f1, g1, h1)
        r = self.mk(v, lo, hi)
        self.cache[key] = r
        return r

    def _cofactors(self, n: int, v: int):
        nv, lo, hi = self.nodes[n]
        if nv == v:
            return lo, hi
        return n, n

    def not_(self, x: int) -> int:
        return self.ite(x, FALSE_ID, TRUE_ID)

    def and_(self, x: int, y: int) -> int:
        return self.ite(x, y, FALSE_ID)

    def or_(self, x: int, y: int) -> int:
        return self.ite(x, TRUE_ID, y)

    def xor_(self, x: int, y: int) -> int:
        return self.ite(x, self.not_(y), y)

    def eval(self, n: int, assignment) -> bool:
        while n > TRUE_ID:
            v, lo, hi = self.nodes[n]
            n = hi if assignment[v] else lo
        return n == TRUE_ID

    def check_invariants(self, since: int = 2) -> list:
        """Violations of the reduction and ordering invariants (empty when sound).

        Nodes are immutable once created, so checking only the nodes added
        after index ``since`` is enough to keep a running store honest.
        """
        problems = []
        for n in range(max(since, 2), len(self.nodes)):
            v, lo, hi = self.nodes[n]
            if lo == hi:
                problems.append(f"node {n} has equal children")
            if not (lo < n and hi < n):
                problems.append(f"node {n} has a forward child")
            for c in (lo, hi):
                if not self.var(c) > v:
                    problems.append(f"node {n} breaks the variable order")
            if self.unique.get((v, lo, hi)) != n:
                problems.append(f"node {n} duplicates another node or is missing from the unique table")
        return problems


def eval_bdd(store: BddStore, n: int, assignment) -> bool:
    return store.eval(n, assignment)


_APPLY = {
    "andb": lambda s, a: s.and_(a[0], a[1]),
    "orb": lambda s, a: s.or_(a[0], a[1]),
    "xorb": lambda s, a: s.xor_(a[0], a[1]),
    "negb": lambda s, a: s.not_(a[0]),
    "mux": lambda s, a: s.ite(a[0], a[1], a[2]),
}


def bdd_pass(b: RtlBlock, budget: int = DEFAULT_BUDGET, stats: dict | None = None) -> RtlBlock:
    """Share and constant-fold Boolean bindings that denote the same function.

    Bindings that are not built from Boolean operators become fresh BDD
    variables, numbered in order of appearance.
    """
    store = BddStore(budget)
    node_of = {}
    rep = {}
    canon = {}
    kept = []
    nvars = 0
    overflows = 0

    def f(v):
        return canon.get(v, v)

    for x, e in b.bindings:
        e = map_args(e, f)
        if not isinstance(x.ty, BoolTy):
            kept.append((x, e))
            continue
        n = None
        if isinstance(e, RConst):
            n = TRUE_ID if e.value else FALSE_ID
        elif isinstance(e, ROp) and e.op in _APPLY and all(a in node_of for a in e.args):
            try:
                n = _APPLY[e.op](store, [node_of[a] for a in e.args])
            except BddOverflow:
                overflows += 1
        if n is None:
            try:
                n = store.mk_var(nvars)
                nvars += 1
            except BddOverflow:
                overflows += 1
                kept.append((x, e))
                continue
        hit = rep.get(n)
        if hit is not None:
            canon[x] = hit
            continue
        if n in (TRUE_ID, FALSE_ID):
            e = RConst(BOOL, n == TRUE_ID)
        rep[n] = x
        node_of[x] = n
        kept.append((x, e))

    if stats is not None:
        stats.update(store_size=len(store), bdd_vars=nvars, overflows=overflows,
                     eliminated=len(b.bindings) - len(kept))
    return RtlBlock(tuple(kept), f(b.guard), f(b.value), tuple(map_write(w, f) for w in b.effects))
