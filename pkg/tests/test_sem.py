import random

import pytest
from hypothesis import given, settings, strategies as st

from fesic import lang as L
from fesic.core import IntTy, Reg, zero_state
from fesic.designs.basic import counter_circuit, hadd_circuit
from fesic.difftest import random_state, random_value
from fesic.sem import eval_action, eval_expr, next_step, simulate

from randprog import random_program

I4 = IntTy(4)
R = L.MemberRef(0, Reg(I4))


def modular_add_table(width):
    """(a + b) mod 2^width by counting successors with wrap-around."""
    top = 1 << width
    table = {}
    for a in range(top):
        x = a
        for b in range(top):
            table[a, b] = x
            x = 0 if x == top - 1 else x + 1
    return table


def test_eval_andb():
    assert eval_expr({}, (), L.andb(L.TRUE, L.FALSE)) is False


def test_eval_add_wraps():
    assert eval_expr({}, (), L.add(L.word(4, 12), L.word(4, 7))) == 3
    table = modular_add_table(4)
    for (a, b), want in table.items():
        assert eval_expr({}, (), L.add(L.word(4, a), L.word(4, b))) == want
        assert eval_expr({}, (), L.sub(L.word(4, want), L.word(4, b))) == a


def test_eval_mux_and_tuples():
    x, y = L.word(4, 3), L.word(4, 9)
    assert eval_expr({}, (), L.mux(L.TRUE, x, y)) == 3
    assert eval_expr({}, (), L.mux(L.FALSE, x, y)) == 9
    assert eval_expr({}, (), L.snd(L.tup(x, y))) == 9
    assert eval_expr({}, (), L.lt(y, x)) is False
    assert eval_expr({}, (), L.le(x, x)) is True


def test_assert_false_aborts():
    assert eval_action((), (), {}, {}, L.Assert(L.FALSE)) is None


def test_orelse_discards_left_writes():
    phi = (Reg(I4),)
    u = L.VarId(0, L.UNIT_C.ty)
    left = L.Bind(L.RegWrite(R, L.word(4, 1)), u, L.Assert(L.FALSE))
    a = L.OrElse(L.Bind(left, L.VarId(1, L.UNIT_C.ty), L.Return(L.word(4, 5))), L.Return(L.word(4, 0)))
    assert eval_action(phi, (7,), {}, {}, a) == (0, {})


def test_first_write_wins():
    phi = (Reg(I4),)
    a = L.Bind(L.RegWrite(R, L.word(4, 1)), L.VarId(0, L.UNIT_C.ty), L.RegWrite(R, L.word(4, 2)))
    assert eval_action(phi, (7,), {}, {}, a) == ((), {0: 1})
    assert next_step(phi, (7,), a) == ((), (1,))


def test_reads_see_old_state():
    phi = (Reg(I4),)
    x = L.VarId(1, I4)
    a = L.Bind(L.RegWrite(R, L.word(4, 1)), L.VarId(0, L.UNIT_C.ty), L.Bind(L.RegRead(R), x, L.Return(L.Var(x))))
    assert next_step(phi, (7,), a) == (7, (1,))


@pytest.mark.parametrize("tick, reg, out, new", [(True, 5, 5, 6), (False, 5, 5, 5), (True, 15, 15, 0)])
def test_counter_next(tick, reg, out, new):
    c = counter_circuit(4)
    assert next_step(c.phi, (reg, tick), c.action) == (out, (new, tick))


@pytest.mark.parametrize("a, b", [(x, y) for x in (False, True) for y in (False, True)])
def test_hadd_truth_table(a, b):
    c = hadd_circuit()
    v, st = next_step(c.phi, (a, b), c.action)
    assert v == (a and b, a != b)
    assert st == (a, b)


def test_simulate_counter():
    c = counter_circuit(4)
    rows = simulate(c.phi, zero_state(c.phi), c.action, [[True, True, False, True]], 4)
    assert [v for v, _ in rows] == [0, 1, 2, 2]
    assert rows[-1][1][0] == 3


def test_simulate_zero_cycles():
    c = counter_circuit(4)
    assert simulate(c.phi, zero_state(c.phi), c.action, [[]], 0) == []


def test_simulate_return_only_keeps_state():
    phi = (Reg(I4),)
    rows = simulate(phi, (9,), L.Return(L.TRUE), [], 5)
    assert [s for _, s in rows] == [(9,)] * 5


def test_simulate_short_trace():
    c = counter_circuit(4)
    with pytest.raises(ValueError):
        simulate(c.phi, zero_state(c.phi), c.action, [[True]], 2)


def test_simulate_abort_holds_state():
    phi = (Reg(I4),)
    a = L.Bind(L.RegWrite(R, L.word(4, 3)), L.VarId(0, L.UNIT_C.ty), L.Assert(L.FALSE))
    rows = simulate(phi, (9,), a, [], 2)
    assert rows == [(None, (9,)), (None, (9,))]


# -- properties over random programs ----------------------------------------------


def _case(seed):
    phi, a = random_program(seed)
    st = random_state(random.Random(seed), phi)
    return phi, a, st


def _writable(phi):
    return [i for i, m in enumerate(phi) if isinstance(m, Reg)]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.data())
def test_extra_writes_do_not_change_reads(seed, data):
    phi, a, s = _case(seed)
    i = data.draw(st.sampled_from(_writable(phi)))
    ty = phi[i].ty
    val = random_value(random.Random(seed + 1), ty)
    expr = L.Var(L.VarId(10**9, ty))
    pre = L.Bind(L.Return(_as_expr(val, ty)), expr.var, L.RegWrite(L.MemberRef(i, phi[i]), expr))
    b = L.Bind(pre, L.VarId(10**9 + 1, L.UNIT_C.ty), a)
    ra, rb = next_step(phi, s, a), next_step(phi, s, b)
    assert (ra is None) == (rb is None)
    if ra is not None:
        assert ra[0] == rb[0]


def _as_expr(v, ty):
    if isinstance(ty, L.TupleTy):
        return L.tup(*(_as_expr(x, t) for x, t in zip(v, ty.elems)))
    return L.Const(ty, v)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_orelse_left_bias(seed1, seed2):
    phi, a, s = _case(seed1)
    _, b = random_program(seed2)
    b = L.rename(b, lambda v: L.VarId(v.id + 10**6, v.ty))
    if L.typecheck(phi, a) != L.typecheck(phi, b):
        b = L.Bind(b, L.VarId(3 * 10**6, L.typecheck(phi, b)), a)
        b = L.rename(b, lambda v: v if v.id >= 10**6 else L.VarId(v.id + 2 * 10**6, v.ty))
    both = L.OrElse(a, b)
    L.typecheck(phi, both)
    ra = eval_action(phi, s, {}, {}, a)
    if ra is not None:
        assert eval_action(phi, s, {}, {}, both) == ra
    else:
        assert eval_action(phi, s, {}, {}, both) == eval_action(phi, s, {}, {}, b)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_abort_holds_state(seed):
    phi, a, s = _case(seed)
    rows = simulate(phi, s, a, [[s[i]] for i, m in enumerate(phi) if isinstance(m, L.Input)], 1)
    v, held = rows[0]
    if next_step(phi, s, a) is None:
        assert v is None and held == s


def subst_action(a, x, e):
    f = lambda v: e if v == x else L.Var(v)
    ex = lambda y: L.subst_expr(y, f)
    if isinstance(a, L.Return):
        return L.Return(ex(a.expr))
    if isinstance(a, L.Bind):
        return L.Bind(subst_action(a.first, x, e), a.binder, subst_action(a.rest, x, e))
    if isinstance(a, L.Assert):
        return L.Assert(ex(a.cond))
    if isinstance(a, L.OrElse):
        return L.OrElse(subst_action(a.left, x, e), subst_action(a.right, x, e))
    if isinstance(a, L.RegWrite):
        return L.RegWrite(a.ref, ex(a.expr))
    if isinstance(a, L.RegfileRead):
        return L.RegfileRead(a.ref, ex(a.addr))
    if isinstance(a, L.RegfileWrite):
        return L.RegfileWrite(a.ref, ex(a.addr), ex(a.data))
    return a


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_monad_laws(seed):
    phi, a, s = _case(seed)
    t = L.typecheck(phi, a)
    x = L.VarId(10**9, t)
    # right identity
    assert next_step(phi, s, L.Bind(a, x, L.Return(L.Var(x)))) == next_step(phi, s, a)
    # left identity, with the continuation being the program itself using x
    e = _as_expr(random_value(random.Random(seed), t), t)
    k = L.Bind(L.Return(L.Var(x)), L.VarId(10**9 + 1, t), a)
    lhs = L.Bind(L.Return(e), x, k)
    assert next_step(phi, s, lhs) == next_step(phi, s, subst_action(k, x, e))
