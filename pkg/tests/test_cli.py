import io
import subprocess
import sys
from pathlib import Path

import pytest

from fesic.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_compile_writes_file(tmp_path):
    target = tmp_path / "sorter.v"
    code, out = run("compile", "--example", "sorter", "--n", "3", "--width", "8", "-o", str(target))
    assert code == 0 and out == ""
    text = target.read_text()
    assert text.startswith("// Generated by fesic") and "module sorter3_8" in text


def test_compile_golden(tmp_path):
    target = tmp_path / "c.v"
    assert run("compile", "--example", "counter", "--n", "4", "-o", str(target))[0] == 0
    assert target.read_text() == (GOLDEN / "counter4.v").read_text()


def test_compile_dump_rtl():
    code, out = run("compile", "--example", "counter", "--n", "4", "--dump", "rtl")
    assert code == 0
    assert "guard" in out and "effect count: write" in out and "module" not in out


def test_compile_testbench(tmp_path):
    tb = tmp_path / "tb.v"
    code, _ = run("compile", "--example", "hadd", "-o", str(tmp_path / "h.v"), "--testbench", str(tb))
    assert code == 0 and "hadd dut" in tb.read_text()


@pytest.mark.parametrize("argv", [
    ["compile", "--example", "sorter", "--n", "0"],
    ["compile", "--example", "stackmachine", "--n", "40"],
    ["simulate", "--example", "counter"],
    ["simulate", "--example", "counter", "--cycles", "-1"],
])
def test_usage_errors(argv):
    assert run(*argv)[0] == 2


def test_argparse_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["compile", "--example", "nope"])
    assert exc.value.code == 2


def test_simulate_counter(tmp_path):
    trace = tmp_path / "ticks.txt"
    trace.write_text("1\n1\n0\n1\n")
    code, out = run("simulate", "--example", "counter", "--n", "4", "--trace", str(trace), "--watch", "count")
    assert code == 0
    lines = out.splitlines()
    assert [l.split()[3] for l in lines] == ["out=0", "out=1", "out=2", "out=2"]
    assert lines[-1].endswith("count=3")


@pytest.mark.parametrize("engine", ["rtl", "source"])
def test_simulate_fibonacci(engine):
    code, out = run("simulate", "--example", "stackmachine", "--program", "fibonacci.asm",
                    "--watch", "store[0]", "--cycles", "200", "--engine", engine)
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 200 and lines[-1].endswith("store[0]=55")
    assert "valid=0" in lines[-1]


@pytest.mark.parametrize("content", ["1 1\n", "x\n", "2\n"])
def test_simulate_malformed_trace(tmp_path, content):
    trace = tmp_path / "bad.txt"
    trace.write_text(content)
    assert run("simulate", "--example", "counter", "--trace", str(trace))[0] == 2


def test_simulate_short_trace(tmp_path):
    trace = tmp_path / "t.txt"
    trace.write_text("1\n")
    assert run("simulate", "--example", "counter", "--trace", str(trace), "--cycles", "3")[0] == 2


def test_simulate_zero_cycles(tmp_path):
    trace = tmp_path / "empty.txt"
    trace.write_text("")
    assert run("simulate", "--example", "counter", "--trace", str(trace), "--cycles", "0") == (0, "")


def test_simulate_bad_watch():
    assert run("simulate", "--example", "counter", "--cycles", "0", "--watch", "nothing")[0] == 2
    assert run("simulate", "--example", "stackmachine", "--cycles", "0", "--watch", "store")[0] == 2


@pytest.mark.parametrize("argv", [
    ["--example", "counter"],
    ["--example", "sorter", "--n", "2", "--width", "4"],
])
def test_difftest_pass(argv):
    code, out = run("difftest", *argv, "--trials", "1000")
    assert code == 0 and out.splitlines()[-1] == "PASS"
    assert "seed=0" in out


def test_difftest_reproducible():
    a = run("difftest", "--example", "stackmachine", "--trials", "50", "--seed", "4")
    b = run("difftest", "--example", "stackmachine", "--trials", "50", "--seed", "4")
    assert a == b


def test_stats():
    code, out = run("stats", "--example", "counter", "--n", "4")
    assert code == 0
    header, row = out.splitlines()[:2]
    assert header.split() == ["circuit", "IR", "RTL", "CSE", "BDD"]
    ir, rtl, cse, bdd = map(int, row.split()[1:])
    assert cse <= rtl and bdd <= cse
    assert run("stats", "--example", "counter", "--n", "4") == (code, out)


@pytest.mark.parametrize("example", ["hadd", "counter", "sorter", "stackmachine"])
def test_stats_columns_non_increasing(example):
    _, out = run("stats", "--example", example)
    _, rtl, cse, bdd = map(int, out.splitlines()[1].split()[1:])
    assert bdd <= cse <= rtl


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "fesic.cli", "stats", "--example", "hadd"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "hadd" in r.stdout
