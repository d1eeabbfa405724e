"""Random well-typed Fe-Si programs for property tests."""

import random

from fesic.core import BOOL, UNIT, Input, IntTy, Reg, Regfile, TupleTy
from fesic import lang as L

I3, I4 = IntTy(3), IntTy(4)
PAIR = TupleTy((BOOL, I3))
TYPES = (BOOL, I3, I4, PAIR, UNIT)

PHI = (
    Input(BOOL),
    Input(I4),
    Reg(I4),
    Reg(BOOL),
    Regfile(2, I3),
    Reg(PAIR),
    Regfile(1, BOOL),
)


def gen_expr(rng, scope, ty, depth):
    vars_ = [v for v in scope if v.ty == ty]
    if vars_ and rng.random() < 0.4:
        return L.Var(rng.choice(vars_))
    if depth <= 0 or rng.random() < 0.2:
        if vars_:
            return L.Var(rng.choice(vars_))
        return _const(rng, ty)
    d = depth - 1
    if ty == UNIT:
        return L.UNIT_C
    if ty == BOOL:
        k = rng.randrange(7)
        if k == 0:
            return L.andb(gen_expr(rng, scope, BOOL, d), gen_expr(rng, scope, BOOL, d))
        if k == 1:
            return L.orb(gen_expr(rng, scope, BOOL, d), gen_expr(rng, scope, BOOL, d))
        if k == 2:
            return L.xorb(gen_expr(rng, scope, BOOL, d), gen_expr(rng, scope, BOOL, d))
        if k == 3:
            return L.negb(gen_expr(rng, scope, BOOL, d))
        if k == 4:
            t = rng.choice((I3, I4))
            op = rng.choice((L.eq, L.le, L.lt))
            return op(gen_expr(rng, scope, t, d), gen_expr(rng, scope, t, d))
        if k == 5:
            return L.proj(gen_expr(rng, scope, PAIR, d), 0)
        return L.mux(gen_expr(rng, scope, BOOL, d), gen_expr(rng, scope, BOOL, d), gen_expr(rng, scope, BOOL, d))
    if isinstance(ty, IntTy):
        k = rng.randrange(4)
        if k == 0:
            return L.add(gen_expr(rng, scope, ty, d), gen_expr(rng, scope, ty, d))
        if k == 1:
            return L.sub(gen_expr(rng, scope, ty, d), gen_expr(rng, scope, ty, d))
        if k == 2 and ty == I3:
            return L.proj(gen_expr(rng, scope, PAIR, d), 1)
        return L.mux(gen_expr(rng, scope, BOOL, d), gen_expr(rng, scope, ty, d), gen_expr(rng, scope, ty, d))
    if ty == PAIR:
        if rng.random() < 0.7:
            return L.tup(gen_expr(rng, scope, BOOL, d), gen_expr(rng, scope, I3, d))
        return L.mux(gen_expr(rng, scope, BOOL, d), gen_expr(rng, scope, PAIR, d), gen_expr(rng, scope, PAIR, d))
    raise AssertionError(ty)


def _const(rng, ty):
    if ty == UNIT:
        return L.UNIT_C
    if ty == BOOL:
        return L.Const(BOOL, rng.random() < 0.5)
    if ty == PAIR:
        return L.tup(L.Const(BOOL, rng.random() < 0.5), L.Const(I3, rng.randrange(8)))
    return L.Const(ty, rng.randrange(1 << ty.width))


def gen_action(rng, b, scope, ty, depth):
    """A random action of result type ``ty`` using variables in ``scope``."""
    phi = b.phi
    choices = ["ret"]
    if depth > 0:
        choices += ["bind", "bind", "bind", "orelse", "ifte"]
    if ty == UNIT:
        choices += ["assert", "write", "write"]
    if any(isinstance(m, (Reg, Input)) and m.ty == ty for m in phi):
        choices += ["read"]
    if any(isinstance(m, Regfile) and m.ty == ty for m in phi):
        choices += ["rfread"]
    k = rng.choice(choices)
    ed = 2
    if k == "ret":
        return b.ret(gen_expr(rng, scope, ty, ed))
    if k == "bind":
        t1 = rng.choice(TYPES)
        first = gen_action(rng, b, scope, t1, depth - 1)
        return b.bind(first, lambda v: gen_action(rng, b, scope + [v.var], ty, depth - 1))
    if k == "orelse":
        return b.or_else(gen_action(rng, b, scope, ty, depth - 1), gen_action(rng, b, scope, ty, depth - 1))
    if k == "ifte":
        c = gen_expr(rng, scope, BOOL, ed)
        return b.ifte(c, gen_action(rng, b, scope, ty, depth - 1), gen_action(rng, b, scope, ty, depth - 1))
    if k == "assert":
        # biased towards true so that programs do not abort all the time
        c = gen_expr(rng, scope, BOOL, ed)
        return b.assert_(L.orb(c, gen_expr(rng, scope, BOOL, 1)) if rng.random() < 0.5 else c)
    if k == "write":
        targets = [i for i, m in enumerate(phi) if isinstance(m, (Reg, Regfile))]
        i = rng.choice(targets)
        m = phi[i]
        if isinstance(m, Reg):
            return b.reg_write(i, gen_expr(rng, scope, m.ty, ed))
        return b.rf_write(i, gen_expr(rng, scope, IntTy(m.addr_width), ed), gen_expr(rng, scope, m.ty, ed))
    if k == "read":
        i = rng.choice([i for i, m in enumerate(phi) if isinstance(m, (Reg, Input)) and m.ty == ty])
        return b.reg_read(i) if isinstance(phi[i], Reg) else b.input_read(i)
    if k == "rfread":
        i = rng.choice([i for i, m in enumerate(phi) if isinstance(m, Regfile) and m.ty == ty])
        return b.rf_read(i, gen_expr(rng, scope, IntTy(phi[i].addr_width), ed))
    raise AssertionError(k)


def random_program(seed, depth=5, phi=PHI):
    rng = random.Random(seed)
    b = L.Builder(phi)
    ty = rng.choice(TYPES)
    return phi, gen_action(rng, b, [], ty, depth)
