import io
import random

import pytest

import fesic.rtl
from fesic import designs, lang as L
from fesic.cli import main
from fesic.core import IntTy, Reg, Regfile
from fesic.difftest import difftest, minimize, random_state, random_value
from fesic.pipeline import compile_stages
from fesic.rtl import RtlWrite

I4 = IntTy(4)


def double_write_circuit():
    phi = (Reg(I4), Reg(I4))
    b = L.Builder(phi)
    a = b.bind(b.reg_read(1), lambda x: b.seq(b.reg_write(0, x), b.reg_write(0, L.add(x, L.word(4, 1)))))
    return L.Circuit("double", phi, a, ("r", "x"))


def last_write_wins(em, mem, a, b):
    enable = em.op("orb", a.enable, b.enable)
    data = em.op("mux", b.enable, b.data, a.data)
    addr = None if a.addr is None else em.op("mux", b.enable, b.addr, a.addr)
    return RtlWrite(data, addr, enable)


def test_clean_pipeline_passes():
    assert difftest(double_write_circuit(), trials=200).ok


def test_corrupted_merge_is_caught(monkeypatch):
    monkeypatch.setattr(fesic.rtl, "merge", last_write_wins)
    report = difftest(double_write_circuit(), trials=200, seed=5)
    assert not report.ok
    d = report.divergence
    assert d.stage == "rtl"
    # the minimized state keeps only what the divergence needs
    assert d.minimized[0] == 0
    text = report.format()
    assert "FAIL" in text and "counterexample" in text and "seed=5" in text


def test_cli_reports_divergence(monkeypatch):
    monkeypatch.setattr(fesic.rtl, "merge", last_write_wins)
    monkeypatch.setattr(designs, "build", lambda *a: double_write_circuit())
    out = io.StringIO()
    assert main(["difftest", "--example", "counter", "--trials", "100"], out=out) == 1
    assert "counterexample state" in out.getvalue()


def test_broken_stage_supplied_directly():
    c = designs.build("counter", 4, None)
    stages = compile_stages(c.phi, c.action)
    bdd = stages["bdd"]
    stages["bdd"] = bdd.__class__(bdd.bindings, bdd.guard, bdd.value, (None, None))
    report = difftest(c, trials=100, stages=stages)
    assert not report.ok and report.divergence.stage == "bdd"
    assert report.divergence.minimized == (0, True)


def test_reproducible_by_seed():
    c = designs.build("stackmachine", 8, None)
    r1 = difftest(c, trials=30, seed=9)
    r2 = difftest(c, trials=30, seed=9)
    assert r1.format() == r2.format()
    assert random_state(random.Random(1), c.phi) == random_state(random.Random(1), c.phi)


def test_random_values_have_their_type():
    rng = random.Random(0)
    for _ in range(100):
        v = random_value(rng, I4)
        assert type(v) is int and 0 <= v < 16
    st = random_state(rng, (Regfile(2, I4),))
    assert len(st[0]) == 4


def test_minimize_greedy():
    phi = (Reg(I4), Regfile(1, I4))
    st = (7, (3, 5))
    assert minimize(phi, st, lambda s: s[1][1] != 0) == (0, (0, 5))
    assert minimize(phi, st, lambda s: True) == (0, (0, 0))


@pytest.mark.parametrize("flags", [dict(use_cse=False), dict(use_bdd=False), dict(use_cse=False, use_bdd=False)])
def test_pass_toggles(flags):
    assert difftest(designs.build("counter", 4, None), trials=100, **flags).ok
