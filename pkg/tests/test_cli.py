import shutil
from pathlib import Path

import pytest

from gemini.cli import EMIT_STAGES, run
from gemini.netsim import read_emitted_verilog, simulate

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def workdir(tmp_path, program_text):
    (tmp_path / "adder.gem").write_text(program_text("adder.gem"))
    shutil.copy(GOLDEN / "inv.gem", tmp_path / "inv.gem")
    (tmp_path / "bad.gem").write_text('let module m (x: bit) = x in 42 * "a" end\n')
    return tmp_path


def test_build_writes_verilog(workdir, capsys):
    assert run(["build", str(workdir / "adder.gem")]) == 0
    text = (workdir / "adder.v").read_text()
    assert text.startswith("module adder(input [1:0] a, input [1:0] b, output reg [1:0] out);")
    n = read_emitted_verilog(text)
    assert simulate(n, {"a": 2, "b": 1})["out"] == 3


def test_output_path_and_module_name(workdir):
    out = workdir / "x" / "y.v"
    out.parent.mkdir()
    assert run(["build", str(workdir / "adder.gem"), "-o", str(out), "--module-name", "add2"]) == 0
    assert out.read_text().startswith("module add2(")


def test_type_error_exit_code_and_location(workdir, capsys):
    assert run(["build", str(workdir / "bad.gem")]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    assert err[0].startswith(f"{workdir / 'bad.gem'}:1:")
    assert "error[E201]: TypeError:" in err[0]
    assert not (workdir / "bad.v").exists()


@pytest.mark.parametrize("stage", EMIT_STAGES)
def test_emit_stages_match_golden(workdir, capsys, stage):
    src = workdir / "inv.gem"
    assert run(["build", str(src), "--emit", stage]) == 0
    got = capsys.readouterr().out.replace(str(src), "inv.gem")
    assert got == (GOLDEN / f"inv.{stage}.txt").read_text()
    assert not (workdir / "inv.v").exists()


def test_rebuilds_are_identical(workdir):
    src = str(workdir / "adder.gem")
    run(["build", src])
    first = (workdir / "adder.v").read_text()
    run(["build", src])
    assert (workdir / "adder.v").read_text() == first


def test_sim_source_and_verilog(workdir, capsys):
    assert run(["sim", str(workdir / "adder.gem"), "--inputs", "a=0b10,b=0b01"]) == 0
    assert capsys.readouterr().out == "out=0b11\n"
    run(["build", str(workdir / "adder.gem")])
    assert run(["sim", str(workdir / "adder.v"), "--inputs", "a=3,b=3"]) == 0
    assert capsys.readouterr().out == "out=0b10\n"


def test_sim_cycles(tmp_path, capsys):
    (tmp_path / "d.gem").write_text("let module m (x: bit) = HW.dff (!x) in m end\n")
    assert run(["sim", str(tmp_path / "d.gem"), "--inputs", "x=0", "--cycles", "3"]) == 0
    assert capsys.readouterr().out == "cycle 0: out=0b0\ncycle 1: out=0b1\ncycle 2: out=0b1\n"


def test_sim_with_unknown_input(workdir, capsys):
    assert run(["sim", str(workdir / "adder.gem"), "--inputs", "a=1,b=1,c=0"]) == 1
    assert "error[E502]" in capsys.readouterr().err


def test_warning_does_not_fail_without_werror(tmp_path, capsys):
    src = tmp_path / "w.gem"
    src.write_text("let fun f x = case x of 0 => 1\nval k = f 0\nmodule m (y: bit) = y in m end\n")
    assert run(["build", str(src)]) == 0
    assert "warning[W001]" in capsys.readouterr().err
    assert run(["build", str(src), "--werror"]) == 1


@pytest.mark.parametrize("argv", [[], ["build"], ["frob"], ["build", "x.gem", "--nope"],
                                  ["build", "x.gem", "--emit", "pdf"]])
def test_usage_errors(argv, capsys):
    assert run(argv) == 2
    assert "usage:" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert run(["build", str(tmp_path / "none.gem")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_metatheory_summary(capsys):
    assert run(["metatheory", "--seeds", "20", "--depth", "4"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ["terms", "20"]
    assert "stuck" in out and "preservation violations" in out
