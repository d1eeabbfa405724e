"""The four-pass compiler from Fe-Si actions to RTL blocks."""

from __future__ import annotations

from typing import Sequence

from .bdd import bdd_pass
from .core import Mem
from .cse import cse
from .ir import compile_to_ir
from .lang import Action, typecheck
from .rtl import RtlBlock, compile_to_rtl

STAGES = ("ir", "rtl", "cse", "bdd")


def compile_stages(phi: Sequence[Mem], a: Action, use_cse: bool = True, use_bdd: bool = True, bdd_stats=None) -> dict:
    """Every intermediate program, keyed by stage name.

    A disabled optimization leaves its stage equal to the previous one.
    """
    typecheck(phi, a)
    out = {"ir": compile_to_ir(phi, a)}
    out["rtl"] = compile_to_rtl(phi, out["ir"])
    out["cse"] = cse(out["rtl"]) if use_cse else out["rtl"]
    out["bdd"] = bdd_pass(out["cse"], stats=bdd_stats) if use_bdd else out["cse"]
    return out


def fesic(phi: Sequence[Mem], a: Action) -> RtlBlock:
    return compile_stages(phi, a)["bdd"]


def binding_counts(stages: dict) -> dict:
    return {k: len(stages[k].bindings) for k in STAGES}
