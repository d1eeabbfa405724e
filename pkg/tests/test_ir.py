import random

from hypothesis import given, settings, strategies as st

from fesic import lang as L
from fesic.core import BOOL, IntTy, Reg, Regfile
from fesic.designs.basic import counter_circuit
from fesic.difftest import random_state
from fesic.ir import (
    EMPTY, Branch, IrBlock, RegRd, Seq, Write, compile_to_ir, dump_ir, eval_ir, is_well_scoped,
)
from fesic.sem import next_step

from randprog import random_program

I4 = IntTy(4)


def test_return_true():
    b = compile_to_ir((), L.Return(L.TRUE))
    (g, ge), (v, ve) = b.bindings
    assert ge == L.TRUE and ve == L.TRUE
    assert b.guard == g and b.value == v and g != v
    assert b.effects == ()


def test_counter_exhaustive():
    c = counter_circuit(4)
    b = compile_to_ir(c.phi, c.action)
    for tick in (False, True):
        for r in range(16):
            st = (r, tick)
            assert eval_ir(c.phi, st, b) == next_step(c.phi, st, c.action)


def test_counter_effect_shape():
    c = counter_circuit(4)
    b = compile_to_ir(c.phi, c.action)
    t = b.effects[0]
    assert isinstance(t, Branch)
    assert b.effects[1] == EMPTY


def test_orelse_recovers():
    a = L.OrElse(L.Assert(L.FALSE), L.Bind(L.Return(L.UNIT_C), L.VarId(0, L.UNIT_C.ty), L.Return(L.UNIT_C)))
    b = compile_to_ir((), a)
    assert eval_ir((), (), b) == ((), ())
    a = L.OrElse(L.Assert(L.FALSE), L.Assert(L.TRUE))
    assert eval_ir((), (), compile_to_ir((), a)) == ((), ())
    a = L.OrElse(L.Assert(L.FALSE), L.Assert(L.FALSE))
    assert eval_ir((), (), compile_to_ir((), a)) is None


def _hand_block(tree):
    phi = (Reg(I4),)
    x = [L.VarId(i, t) for i, t in enumerate((BOOL, I4, I4, BOOL, BOOL))]
    bindings = (
        (x[0], L.TRUE), (x[1], L.word(4, 1)), (x[2], L.word(4, 2)), (x[3], L.FALSE), (x[4], RegRd(L.MemberRef(0, phi[0]))),
    )
    return phi, IrBlock(bindings, x[0], x[0], (tree(x),))


def test_seq_first_write_wins():
    phi, b = _hand_block(lambda x: Seq(Write(x[1], None, x[0]), Write(x[2], None, x[0])))
    assert eval_ir(phi, (9,), b) == (True, (1,))
    phi, b = _hand_block(lambda x: Seq(Write(x[1], None, x[3]), Write(x[2], None, x[0])))
    assert eval_ir(phi, (9,), b) == (True, (2,))


def test_branch_false_no_write():
    phi, b = _hand_block(lambda x: Branch(x[3], Write(x[1], None, x[0]), EMPTY))
    assert eval_ir(phi, (9,), b) == (True, (9,))
    phi, b = _hand_block(lambda x: Branch(x[3], EMPTY, Write(x[2], None, x[0])))
    assert eval_ir(phi, (9,), b) == (True, (2,))


def test_regfile_write():
    phi = (Regfile(2, I4),)
    bld = L.Builder(phi)
    a = bld.rf_write(0, L.word(2, 3), L.word(4, 9))
    assert eval_ir(phi, ((0, 0, 0, 0),), compile_to_ir(phi, a)) == ((), ((0, 0, 0, 9),))


def test_dump_is_deterministic():
    c = counter_circuit(4)
    d1 = dump_ir(compile_to_ir(c.phi, c.action), c.names)
    d2 = dump_ir(compile_to_ir(c.phi, c.action), c.names)
    assert d1 == d2 and "effect count" in d1


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_random_programs(seed):
    phi, a = random_program(seed)
    b = compile_to_ir(phi, a)
    assert is_well_scoped(b)
    ids = [x.id for x, _ in b.bindings]
    assert len(ids) == len(set(ids))
    assert len(b.bindings) <= 3 * L.action_size(a) + 1
    rng = random.Random(seed)
    for _ in range(10):
        s = random_state(rng, phi)
        assert eval_ir(phi, s, b) == next_step(phi, s, a)
