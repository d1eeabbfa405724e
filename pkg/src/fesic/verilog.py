"""Verilog-2001 back-end for RTL blocks.

Tuples are packed little-endian: element 0 occupies the least-significant
bits.  Registers and register files reset synchronously to zero and commit
on the rising clock edge when both ``valid`` and their write-enable hold.
"""

from __future__ import annotations

import re
from typing import Sequence

from .core import BoolTy, Input, Mem, Reg, Regfile, Ty, flatten_width, pack_value, zero_state
from .rtl import RConst, RInput, RRead, RReadRf, RtlBlock, check_block, rtl_next

HEADER = (
    "// Generated by fesic. Tuples are packed little-endian: element 0\n"
    "// occupies the least-significant bits. Synchronous reset to zero.\n"
)

_BINOPS = {"andb": "&", "orb": "|", "xorb": "^", "add": "+", "sub": "-", "eq": "==", "le": "<=", "lt": "<"}


class VerilogError(ValueError):
    pass


def _range(w: int) -> str:
    return "" if w == 1 else f"[{w - 1}:0] "


def _lit(w: int, bits: int) -> str:
    return f"{w}'d{bits}"


def port_spec(phi: Sequence[Mem], result_ty: Ty) -> list:
    """Module ports as ``(direction, name, width)``; zero-width ports are dropped."""
    ports = [("input", "clk", 1), ("input", "rst", 1)]
    for i, m in enumerate(phi):
        if isinstance(m, Input) and flatten_width(m.ty):
            ports.append(("input", f"in{i}", flatten_width(m.ty)))
    ports.append(("output", "valid", 1))
    if flatten_width(result_ty):
        ports.append(("output", "out", flatten_width(result_ty)))
    return ports


def emit_verilog(phi: Sequence[Mem], b: RtlBlock, module_name: str) -> str:
    phi = tuple(phi)
    problems = check_block(phi, b)
    if problems:
        raise VerilogError("refusing to emit a malformed block: " + "; ".join(problems[:5]))
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", module_name):
        raise VerilogError(f"bad module name {module_name!r}")

    width = lambda v: flatten_width(v.ty)
    name = lambda v: f"v{v.id}"
    out = [HEADER]
    ports = port_spec(phi, b.value.ty)
    out.append(f"module {module_name} (")
    decls = [f"  {d} wire {_range(w)}{n}" for d, n, w in ports]
    out.append(",\n".join(decls))
    out.append(");")
    out.append("")

    mark = len(out)
    for i, m in enumerate(phi):
        w = flatten_width(m.ty)
        if isinstance(m, Reg) and w:
            out.append(f"  reg {_range(w)}r{i};")
        elif isinstance(m, Regfile) and w:
            out.append(f"  reg {_range(w)}rf{i} [0:{m.size - 1}];")
            out.append(f"  integer rf{i}_k;")
    if len(out) > mark:
        out.append("")

    for x, e in b.bindings:
        w = width(x)
        if not w:
            continue
        out.append(f"  wire {_range(w)}{name(x)};")
        out.append(f"  assign {name(x)} = {_expr(e, name)};")
    out.append("")

    out.append(f"  assign valid = {name(b.guard)};")
    if width(b.value):
        out.append(f"  assign out = {name(b.value)};")
    out.append("")

    for i, (m, wr) in enumerate(zip(phi, b.effects)):
        w = flatten_width(m.ty)
        if isinstance(m, Input) or not w:
            continue
        out.append("  always @(posedge clk) begin")
        if isinstance(m, Reg):
            out.append("    if (rst)")
            out.append(f"      r{i} <= {_lit(w, 0)};")
            if wr is not None:
                out.append(f"    else if (valid && {name(wr.enable)})")
                out.append(f"      r{i} <= {name(wr.data)};")
        else:
            out.append("    if (rst) begin")
            out.append(f"      for (rf{i}_k = 0; rf{i}_k < {m.size}; rf{i}_k = rf{i}_k + 1)")
            out.append(f"        rf{i}[rf{i}_k] <= {_lit(w, 0)};")
            if wr is not None:
                out.append(f"    end else if (valid && {name(wr.enable)})")
                out.append(f"      rf{i}[{name(wr.addr)}] <= {name(wr.data)};")
            else:
                out.append("    end")
        out.append("  end")
        out.append("")
    out.append("endmodule")
    return "\n".join(out) + "\n"


def _expr(e, name) -> str:
    if isinstance(e, RConst):
        if isinstance(e.ty, BoolTy):
            return "1'b1" if e.value else "1'b0"
        return _lit(e.ty.width, e.value)
    if isinstance(e, RInput):
        return f"in{e.ref.index}"
    if isinstance(e, RRead):
        return f"r{e.ref.index}"
    if isinstance(e, RReadRf):
        return f"rf{e.ref.index}[{name(e.addr)}]"
    a = [name(v) for v in e.args]
    if e.op in _BINOPS:
        return f"{a[0]} {_BINOPS[e.op]} {a[1]}"
    if e.op == "negb":
        return f"~{a[0]}"
    if e.op == "mux":
        return f"{a[0]} ? {a[1]} : {a[2]}"
    if e.op == "tuple":
        parts = [n for n, v in zip(a, e.args) if flatten_width(v.ty)]
        if len(parts) == 1:
            return parts[0]
        return "{" + ", ".join(reversed(parts)) + "}"
    if e.op == "proj":
        src = e.args[0]
        elems = src.ty.elems
        lo = sum(flatten_width(t) for t in elems[: e.index])
        w = flatten_width(elems[e.index])
        if w == flatten_width(src.ty):
            return a[0]
        if w == 1:
            return f"{a[0]}[{lo}]"
        return f"{a[0]}[{lo + w - 1}:{lo}]"
    raise VerilogError(f"cannot emit {e!r}")


# -- lint ---------------------------------------------------------------------

_KEYWORDS = {
    "module", "endmodule", "input", "output", "wire", "reg", "integer", "assign", "always",
    "posedge", "begin", "end", "if", "else", "for",
}
_IDENT = re.compile(r"\b[A-Za-z_][A-Za-z0-9_]*\b")


def lint_verilog(text: str) -> list:
    """Cheap structural checks on emitted Verilog; returns a list of problems."""
    problems = []
    code = "\n".join(line.split("//", 1)[0] for line in text.splitlines())
    if len(re.findall(r"\bmodule\b", code)) != len(re.findall(r"\bendmodule\b", code)):
        problems.append("unbalanced module/endmodule")
    if len(re.findall(r"\bbegin\b", code)) != len(re.findall(r"\bend\b", code)):
        problems.append("unbalanced begin/end")
    declared = set()
    wires = set()
    assigned = {}
    reg_owner = {}
    process = None
    nproc = 0
    for line in code.splitlines():
        s = re.sub(r"\d+'[bdh][0-9a-fA-F]+", " ", line.strip())
        if not s:
            continue
        m = re.match(r"(?:(input|output)\s+)?(wire|reg|integer)\b(.*)", s)
        if m:
            rest = re.sub(r"\[[^\]]*\]", " ", m.group(3))
            for ident in _IDENT.findall(rest):
                if ident in declared:
                    problems.append(f"{ident} declared twice")
                declared.add(ident)
                if m.group(2) == "wire":
                    wires.add(ident)
            continue
        if s.startswith("module"):
            continue
        if s.startswith("always"):
            nproc += 1
            process = nproc
        m = re.match(r"assign\s+(\w+)\s*=", s)
        if m:
            assigned[m.group(1)] = assigned.get(m.group(1), 0) + 1
        m = re.match(r"(\w+)\s*(?:\[[^\]]*\])?\s*<=", s)
        if m and process is not None:
            owner = reg_owner.setdefault(m.group(1), process)
            if owner != process:
                problems.append(f"{m.group(1)} assigned in more than one process")
        for ident in _IDENT.findall(s):
            if ident not in _KEYWORDS and ident not in declared:
                problems.append(f"{ident} used before declaration")
    for w in sorted(wires - {"clk", "rst"}):
        n = assigned.get(w, 0)
        if w.startswith("in") and n == 0:
            continue
        if n != 1:
            problems.append(f"wire {w} assigned {n} times")
    return problems


def count_processes(text: str) -> int:
    return len(re.findall(r"always @\(posedge clk\)", text))


# -- testbench ----------------------------------------------------------------


def emit_testbench(phi: Sequence[Mem], b: RtlBlock, module_name: str, input_vectors: Sequence[Sequence]) -> str:
    """A self-checking testbench replaying ``input_vectors`` from reset.

    Expected outputs come from :func:`rtl_next` starting at the all-zero
    state the reset produces.  Values are given per input element in Φ
    order.
    """
    phi = tuple(phi)
    ports = port_spec(phi, b.value.ty)
    inputs = [i for i, m in enumerate(phi) if isinstance(m, Input)]
    lines = [HEADER, "`timescale 1ns/1ps", f"module {module_name}_tb;", "  reg clk = 1'b0;", "  reg rst = 1'b1;"]
    for d, n, w in ports[2:]:
        kind = "reg" if d == "input" else "wire"
        lines.append(f"  {kind} {_range(w)}{n};")
    lines.append("  integer errors = 0;")
    conns = ", ".join(f".{n}({n})" for _, n, _ in ports)
    lines.append(f"  {module_name} dut ({conns});")
    lines.append("  initial begin")
    lines.append("    #5 clk = 1'b1; #5 clk = 1'b0; rst = 1'b0;")
    st = zero_state(phi)
    out_w = flatten_width(b.value.ty)
    for c, vec in enumerate(input_vectors):
        st = list(st)
        for i, v in zip(inputs, vec):
            st[i] = v
            w = flatten_width(phi[i].ty)
            if w:
                lines.append(f"    in{i} = {_lit(w, pack_value(v, phi[i].ty))};")
        st = tuple(st)
        r = rtl_next(phi, st, b)
        lines.append("    #1;")
        if r is None:
            lines.append(f"    if (valid !== 1'b0) begin $display(\"FAIL cycle {c}: valid\"); errors = errors + 1; end")
        else:
            v, st = r
            cond = "valid !== 1'b1"
            if out_w:
                cond += f" || out !== {_lit(out_w, pack_value(v, b.value.ty))}"
            lines.append(f"    if ({cond}) begin $display(\"FAIL cycle {c}\"); errors = errors + 1; end")
        lines.append("    #4 clk = 1'b1; #5 clk = 1'b0;")
    lines.append("    if (errors == 0) $display(\"PASS\");")
    lines.append("    $finish;")
    lines.append("  end")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"
