"""Differential testing of the compiler against the reference interpreter.

Random machine states are pushed through the source semantics and
through every intermediate program; any disagreement is reported with
the offending state, shrunk by greedy zeroing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .core import BoolTy, IntTy, Mem, MemState, Regfile, TupleTy, Ty, UnitTy, default_value
from .ir import eval_ir
from .lang import Circuit
from .pipeline import STAGES, compile_stages
from .rtl import rtl_next
from .sem import next_step


def random_value(rng: random.Random, t: Ty):
    if isinstance(t, UnitTy):
        return ()
    if isinstance(t, BoolTy):
        return rng.random() < 0.5
    if isinstance(t, IntTy):
        return rng.getrandbits(t.width)
    if isinstance(t, TupleTy):
        return tuple(random_value(rng, e) for e in t.elems)
    raise TypeError(f"not a type: {t!r}")


def random_state(rng: random.Random, phi: Sequence[Mem]) -> MemState:
    out = []
    for m in phi:
        if isinstance(m, Regfile):
            out.append(tuple(random_value(rng, m.ty) for _ in range(m.size)))
        else:
            out.append(random_value(rng, m.ty))
    return tuple(out)


def stage_evaluators(phi: Sequence[Mem], stages: dict) -> dict:
    """Next-state functions for each compiled stage."""
    phi = tuple(phi)
    out = {}
    for name in STAGES:
        if name not in stages:
            continue
        prog = stages[name]
        if name == "ir":
            out[name] = lambda st, p=prog: eval_ir(phi, st, p)
        else:
            out[name] = lambda st, p=prog: rtl_next(phi, st, p)
    return out


def minimize(phi: Sequence[Mem], st: MemState, diverges: Callable[[MemState], bool]) -> MemState:
    """Zero fields of ``st`` one at a time while the divergence persists."""
    st = list(st)
    for i, m in enumerate(phi):
        if isinstance(m, Regfile):
            zero = default_value(m.ty)
            for k in range(m.size):
                if st[i][k] == zero:
                    continue
                rf = list(st[i])
                rf[k] = zero
                cand = st[:i] + [tuple(rf)] + st[i + 1:]
                if diverges(tuple(cand)):
                    st = cand
        else:
            zero = default_value(m.ty)
            if st[i] == zero:
                continue
            cand = st[:i] + [zero] + st[i + 1:]
            if diverges(tuple(cand)):
                st = cand
    return tuple(st)


@dataclass
class Divergence:
    trial: int
    stage: str
    state: MemState
    expected: object
    actual: object
    minimized: Optional[MemState] = None


@dataclass
class Report:
    circuit: str
    seed: int
    trials: int
    stages: Sequence[str]
    aborted: int = 0
    divergence: Optional[Divergence] = None
    names: Sequence[str] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.divergence is None

    def format(self) -> str:
        lines = [
            f"difftest {self.circuit}: seed={self.seed} trials={self.trials} stages={','.join(self.stages)}",
            f"aborted steps in source semantics: {self.aborted}",
        ]
        d = self.divergence
        if d is None:
            lines.append("PASS")
        else:
            lines.append(f"FAIL at trial {d.trial}, stage {d.stage}")
            lines.append(f"  source : {_show_result(d.expected, self.names)}")
            lines.append(f"  {d.stage:<7}: {_show_result(d.actual, self.names)}")
            st = d.minimized if d.minimized is not None else d.state
            lines.append("  counterexample state (minimized):" if d.minimized is not None else "  state:")
            for name, v in zip(self.names, st):
                lines.append(f"    {name} = {v!r}")
        return "\n".join(lines) + "\n"


def _show_result(r, names) -> str:
    if r is None:
        return "abort (state held)"
    v, st = r
    return f"value {v!r}, state " + ", ".join(f"{n}={x!r}" for n, x in zip(names, st))


def difftest(
    circuit: Circuit,
    trials: int = 1000,
    seed: int = 0,
    use_cse: bool = True,
    use_bdd: bool = True,
    stages: Optional[dict] = None,
    shrink: bool = True,
) -> Report:
    """Compare source ``next`` with every stage on ``trials`` random states.

    ``stages`` may supply precompiled (or deliberately broken) programs.
    """
    phi = circuit.phi
    if stages is None:
        stages = compile_stages(phi, circuit.action, use_cse=use_cse, use_bdd=use_bdd)
    evals = stage_evaluators(phi, stages)
    rng = random.Random(seed)
    report = Report(circuit.name, seed, trials, tuple(evals), names=circuit.names)
    for trial in range(trials):
        st = random_state(rng, phi)
        want = next_step(phi, st, circuit.action)
        if want is None:
            report.aborted += 1
        for name, ev in evals.items():
            got = ev(st)
            if got != want or not _same_types(got, want):
                d = Divergence(trial, name, st, want, got)
                if shrink:
                    d.minimized = minimize(
                        phi, st, lambda s, ev=ev: ev(s) != next_step(phi, s, circuit.action)
                    )
                report.divergence = d
                return report
    return report


def _same_types(a, b) -> bool:
    # bool == int in Python, so compare structure strictly as well
    if type(a) is not type(b):
        return False
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_same_types(x, y) for x, y in zip(a, b))
    return True
