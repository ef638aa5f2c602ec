import json

import pytest

from abelcon.cli import main

GAMMA1 = """vertex a inf
vertex b inf
vertex c inf
vertex d inf
edge a b
edge b c
edge c d
"""

GAMMA2 = """vertex a inf
vertex b inf
vertex c inf
vertex d inf
edge a b
edge a c
edge b c
edge c d
"""

F2 = "vertex a inf\nvertex b inf\n"


@pytest.fixture()
def files(tmp_path):
    (tmp_path / "gamma1.graph").write_text(GAMMA1)
    (tmp_path / "gamma2.graph").write_text(GAMMA2)
    (tmp_path / "f2.graph").write_text(F2)
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_normalize(files, capsys):
    code, out, _ = run(capsys, "normalize", files / "gamma1.graph", "a", "b", "a^-1")
    assert code == 0 and out == "b\n"


def test_length_and_absum(files, capsys):
    code, out, _ = run(capsys, "length", files / "gamma1.graph", "a", "c")
    assert code == 0 and out == "2\n"
    code, out, _ = run(capsys, "absum", files / "f2.graph", "a", "a b a^-1 b^2")
    assert code == 0 and out == "0\n"


def test_weak_modules_output(files, capsys):
    code, out, _ = run(capsys, "weak-modules", files / "gamma1.graph")
    assert code == 0 and out == "{a}\n{d}\n"
    code, out, _ = run(capsys, "weak-modules", files / "gamma2.graph")
    assert code == 0 and out == "{a,b}\n{d}\n"


def test_decompose(files, capsys):
    (files / "edge.graph").write_text("vertex a inf\nvertex b inf\nedge a b\n")
    code, out, _ = run(capsys, "decompose", files / "edge.graph")
    assert code == 0 and out == "{a}\n{b}\n"


def test_centralizer(files, capsys):
    code, out, _ = run(capsys, "centralizer", files / "gamma1.graph", "a")
    assert code == 0
    assert out == "conjugator 1\ncyclic a exponent 1\nlink {b}\n"


def test_solve_witness(files, capsys):
    inst = files / "x1.inst"
    inst.write_text("group f2.graph\nvars X1\ndisjunct {\n  eq X1^2 ( a b a b )^-1 = 1\n}\n")
    code, out, err = run(capsys, "solve", inst, "--bound", "2")
    assert code == 0
    assert out == "X1 = a b\n"
    assert err.startswith("stats nodes=")


def test_solve_unsat_by_shadow(files, capsys):
    inst = files / "item3.inst"
    inst.write_text("group f2.graph\nvars X Y\ndisjunct {\n"
                    "  eq X a Y^2 b Y^-1 = 1\n  ab: X = 3*Y\n}\n")
    code, out, _ = run(capsys, "solve", inst, "--bound", "4")
    assert code == 1 and "UNSAT" in out


def test_solve_unknown(files, capsys):
    inst = files / "hard.inst"
    inst.write_text("group f2.graph\nvars X\ndisjunct {\n  eq X X ( a^2 b^2 )^-1 = 1\n}\n")
    code, out, _ = run(capsys, "solve", inst, "--bound", "2")
    assert code == 2 and "no solution up to bound 2" in out


def test_flatten_and_shadow(files, capsys):
    inst = files / "long.inst"
    inst.write_text("group f2.graph\nvars X Y Z W\ndisjunct {\n  eq X Y Z W = 1\n}\n")
    code, out, _ = run(capsys, "flatten", inst)
    assert code == 0 and "_f0" in out
    code, out, _ = run(capsys, "shadow", inst)
    assert code == 0 and out.startswith("disjunct 0: SAT")


def test_usage_error_exit_code(files, capsys):
    assert main(["solve"]) == 3
    capsys.readouterr()


def test_unknown_file_exit_code(files, capsys):
    code, _, err = run(capsys, "normalize", files / "missing.graph", "a")
    assert code == 3 and "error" in err


def test_compile_verify_pipeline(files, capsys):
    h10 = files / "xyz.h10"
    h10.write_text("1*x*y -1*z = 0\n")
    code, out, _ = run(capsys, "compile-h10", h10, "--target", files / "f2.graph",
                       "--out", files / "compiled.inst", "--sidecar", files / "compiled.dec")
    assert code == 0
    code, out, err = run(capsys, "verify", files / "compiled.inst", files / "compiled.dec",
                         "--bound", "2", "--hint", "x=2,y=3,z=6")
    assert code == 0
    assert out.splitlines()[0] == "(2,3,6)"
    assert out.splitlines()[-1] == "OK"


def test_witness_and_decode_commands(files, capsys):
    h10 = files / "sum.h10"
    h10.write_text("1*x 1*y -5 = 0\n")
    run(capsys, "compile-h10", h10, "--target", files / "f2.graph",
        "--out", files / "s.inst", "--sidecar", files / "s.dec")
    code, out, _ = run(capsys, "witness", files / "s.inst", files / "s.dec",
                       "--solution", "x=2,y=3")
    assert code == 0
    (files / "asg.txt").write_text(out)
    code, out, _ = run(capsys, "decode", files / "s.inst", files / "s.dec",
                       "--assignment", files / "asg.txt")
    assert code == 0
    assert out == "x = 2\ny = 3\n"


def test_compile_raag_cli(files, capsys):
    h10 = files / "xyz.h10"
    h10.write_text("1*x*y -1*z = 0\n")
    code, out, _ = run(capsys, "compile-h10-raag", h10, "--target", files / "gamma1.graph",
                       "--out", files / "r.inst", "--sidecar", files / "r.dec")
    assert code == 0
    code, out, _ = run(capsys, "verify", files / "r.inst", files / "r.dec",
                       "--bound", "1", "--hint", "x=1,y=1,z=1")
    assert code == 0
    assert out.splitlines()[0] == "(1,1,1)"
    assert out.splitlines()[-1] == "OK"


def test_reduce_finite_ab_cli(files, capsys):
    pent = files / "pent.graph"
    pent.write_text("vertex a 2\nvertex b 2\nvertex c 2\nvertex d 2\nvertex e 2\n"
                    "edge a b\nedge b c\nedge c d\nedge d e\nedge e a\n")
    inst = files / "coset.inst"
    inst.write_text("group pent.graph\nvars X\ndisjunct {\n  eq X X = 1\n  ab: X = ( a b )\n}\n")
    code, out, _ = run(capsys, "reduce-finite-ab", inst)
    assert code == 0 and "coset: X in a b * G'" in out


def test_deterministic_output(files, capsys):
    code1, out1, _ = run(capsys, "weak-modules", files / "gamma1.graph")
    code2, out2, _ = run(capsys, "weak-modules", files / "gamma1.graph")
    assert (code1, out1) == (code2, out2)
    inst = files / "x1.inst"
    inst.write_text("group f2.graph\nvars X1\ndisjunct {\n  eq X1^2 ( a b a b )^-1 = 1\n}\n")
    _, out1, _ = run(capsys, "solve", inst, "--bound", "2")
    _, out2, _ = run(capsys, "solve", inst, "--bound", "2")
    assert out1 == out2
