import random
from itertools import product

import pytest

from abelcon.abelian import solve_linear_system
from abelcon.errors import (
    IncompleteAssignment,
    InfiniteAbelianisation,
    ParseError,
    UnknownVariable,
)
from abelcon.instances import (
    AbEq,
    ConstAtom,
    Coset,
    Disjunct,
    ExpSumEq,
    GroupTerm,
    Instance,
    LengthEq,
    VarAtom,
    abelian_shadow,
    const_term,
    evaluate,
    flatten,
    forced_extension,
    format_term,
    is_short,
    parse_instance,
    print_instance,
    var_term,
)
from abelcon.words import Presentation, ball, parse_word


def W(p, text):
    return parse_word(p, text)


F2_HEADER = "graph {\n  vertex a inf\n  vertex b inf\n}\n"

X1_SQUARED = F2_HEADER + """
vars X1
disjunct {
  eq X1^2 ( a b a b )^-1 = 1
}
"""

PAPER_23 = F2_HEADER + """
vars X Y
disjunct {
  eq X a Y^2 b Y^-1 = 1
  %s
}
"""


def test_parse_x1_squared():
    inst = parse_instance(X1_SQUARED)
    assert inst.variables == ("X1",)
    assert len(inst.disjuncts) == 1
    d = inst.disjuncts[0]
    assert len(d.equations) == 1 and not d.constraints
    term = d.equations[0]
    assert term.atoms[0] == VarAtom("X1") and term.atoms[1] == VarAtom("X1")
    assert isinstance(term.atoms[2], ConstAtom)


def test_parse_rejects_empty_equations():
    with pytest.raises(ParseError):
        parse_instance(F2_HEADER + "vars X\ndisjunct {\n}\n")


def test_parse_ab_scalar_multiple():
    inst = parse_instance(F2_HEADER + "vars X Y\ndisjunct {\n  eq X = 1\n  ab: X = 3*Y\n}\n")
    con = inst.disjuncts[0].constraints[0]
    assert isinstance(con, AbEq)
    assert con.lhs == var_term("X")
    assert con.rhs.atoms == (VarAtom("Y"),) * 3


def test_parse_errors_have_lines():
    bad = F2_HEADER + "vars X\ndisjunct {\n  eq Z = 1\n}\n"
    with pytest.raises(ParseError):
        parse_instance(bad)
    with pytest.raises(ParseError):
        parse_instance(F2_HEADER + "vars X\nnonsense\n")


def test_round_trip(tmp_path):
    text = F2_HEADER + """
vars X Y
disjunct {
  eq X a Y^2 b Y^-1 = 1
  ab: X = 3*Y
  expsum: 1 |X|_a -2 |Y|_a -1 |Y|_b = 0
  len: 1 |X| -1 |Y| = 2
}
disjunct {
  eq X Y ( a b ) = 1
}
"""
    inst = parse_instance(text)
    assert parse_instance(print_instance(inst)) == inst


def test_round_trip_group_file(tmp_path, gamma1):
    (tmp_path / "g.graph").write_text(gamma1.to_text())
    text = "group g.graph\nvars X\ndisjunct {\n  eq X a = 1\n}\n"
    inst = parse_instance(text, base_dir=str(tmp_path))
    assert inst.presentation == gamma1
    assert inst.graph_ref == "g.graph"
    assert parse_instance(print_instance(inst), base_dir=str(tmp_path)) == inst


def test_coset_requires_finite_ab(pentagon, f2):
    text = "vars X\ndisjunct {\n  eq X = 1\n  coset: X in a b * G'\n}\n"
    inst = parse_instance(text, presentation=pentagon)
    assert isinstance(inst.disjuncts[0].constraints[0], Coset)
    with pytest.raises(InfiniteAbelianisation):
        parse_instance(text, presentation=f2)


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_x1_squared(f2):
    inst = parse_instance(X1_SQUARED)
    good = evaluate(inst, {"X1": W(inst.presentation, "a b")})
    assert good and good.disjunct == 0
    bad = evaluate(inst, {"X1": W(inst.presentation, "a")})
    assert not bad
    assert bad.reports[0].equations == (False,)


def test_evaluate_paper_length_item(f2):
    inst = parse_instance(PAPER_23 % "len: 1 |X| -1 |Y| = 2")
    p = inst.presentation
    res = evaluate(inst, {"X": W(p, "b^-1 a^-1"), "Y": p.identity()})
    assert res.satisfied


def test_evaluate_incomplete(f2):
    inst = parse_instance(X1_SQUARED)
    with pytest.raises(IncompleteAssignment):
        evaluate(inst, {})


def test_evaluate_representative_invariance(gamma1):
    inst = parse_instance("vars X\ndisjunct {\n  eq X ( b a c ) = 1\n}\n",
                          presentation=gamma1)
    v1 = parse_word(gamma1, "c^-1 a^-1 b^-1")
    assert evaluate(inst, {"X": v1}).satisfied
    # same element spelled differently (b a b^-1 collapses because a, b commute)
    w1 = parse_word(gamma1, "b a b^-1 c")
    w2 = parse_word(gamma1, "a c")
    assert w1 == w2
    inst2 = parse_instance("vars X\ndisjunct {\n  eq X ( a c )^-1 = 1\n}\n",
                           presentation=gamma1)
    assert evaluate(inst2, {"X": w1}).satisfied


# ---------------------------------------------------------------------------
# flattening


def test_flatten_long_equation(f2):
    # x y z = 1 splits into w = x y and w z = 1
    inst = parse_instance(F2_HEADER + "vars x y z\ndisjunct {\n  eq x y z = 1\n}\n")
    flat = flatten(inst)
    d = flat.disjuncts[0]
    assert all(is_short(t) for t in d.equations)
    assert flat.variables == ("x", "y", "z", "_f0")
    assert d.equations == (
        GroupTerm((VarAtom("x"), VarAtom("y"), VarAtom("_f0", True))),
        GroupTerm((VarAtom("_f0"), VarAtom("z"))),
    )
    inst4 = parse_instance(F2_HEADER + "vars x y z w\ndisjunct {\n  eq x y z w = 1\n}\n")
    flat4 = flatten(inst4)
    assert "_f0" in flat4.variables
    assert all(is_short(t) for t in flat4.disjuncts[0].equations)


def test_flatten_short_unchanged(f2):
    inst = parse_instance(F2_HEADER + "vars x y\ndisjunct {\n  eq x y^-1 = 1\n}\n")
    assert flatten(inst) == inst


def test_flatten_abeq_argument(f2):
    inst = parse_instance(
        F2_HEADER + "vars X Y Z\ndisjunct {\n  eq X = 1\n  ab: X Y = Z\n}\n")
    flat = flatten(inst)
    con = flat.disjuncts[0].constraints[0]
    assert isinstance(con, AbEq)
    assert con.lhs == var_term("_f0")
    assert con.rhs == var_term("Z")


def _solution_set(inst, bound, variables):
    elems = ball(inst.presentation, bound)
    sols = set()
    for values in product(elems, repeat=len(inst.variables)):
        asg = dict(zip(inst.variables, values))
        if evaluate(inst, asg):
            sols.add(tuple(asg[v] for v in variables))
    return sols


def _projected_flat_solutions(inst, flat, bound):
    elems = ball(inst.presentation, bound)
    sols = set()
    for values in product(elems, repeat=len(inst.variables)):
        base = dict(zip(inst.variables, values))
        for di in range(len(flat.disjuncts)):
            ext = forced_extension(flat, di, base, inst.variables)
            if ext is not None and evaluate(flat, ext).reports[di].ok:
                sols.add(tuple(base[v] for v in inst.variables))
                break
    return sols


def _random_instance(rng, p, nvars=2, const_len=2):
    names = ["X", "Y"][:nvars]
    letters = [v for v in p.vertices]

    def rand_term(max_atoms):
        atoms = []
        for _ in range(rng.randrange(1, max_atoms + 1)):
            if rng.random() < 0.5:
                atoms.append(VarAtom(rng.choice(names), rng.random() < 0.4))
            else:
                raw = [(rng.choice(letters), rng.choice([-1, 1]))
                       for _ in range(rng.randrange(1, const_len + 1))]
                w = parse_word(p, " ".join(f"{v}^{e}" for v, e in raw))
                if not w.is_identity():
                    atoms.append(ConstAtom(w))
        return GroupTerm(tuple(atoms))

    eqs = tuple(rand_term(5) for _ in range(rng.randrange(1, 3)))
    cons = []
    if rng.random() < 0.7:
        cons.append(AbEq(rand_term(3), rand_term(3)))
    return Instance(p, tuple(names), (Disjunct(eqs, tuple(cons)),))


def test_flatten_preserves_solution_sets(f2):
    rng = random.Random(13)
    for _ in range(12):
        inst = _random_instance(rng, f2)
        flat = flatten(inst)
        assert _solution_set(inst, 2, inst.variables) == _projected_flat_solutions(inst, flat, 2)


# ---------------------------------------------------------------------------
# abelian shadow


def test_shadow_simple_sat(f2):
    inst = parse_instance(F2_HEADER + "vars X\ndisjunct {\n  eq X = 1\n}\n")
    systems = abelian_shadow(inst)
    assert len(systems) == 1
    assert solve_linear_system(systems[0]).status == "SAT"


def test_shadow_paper_items_unsat():
    item3 = parse_instance(PAPER_23 % "ab: X = 3*Y")
    assert solve_linear_system(abelian_shadow(item3)[0]).status == "UNSAT"
    item2 = parse_instance(
        PAPER_23 % "expsum: 1 |X|_a -2 |Y|_a -1 |Y|_b = 0 ; expsum: 1 |X|_b -3 |Y|_b = 0")
    assert solve_linear_system(abelian_shadow(item2)[0]).status == "UNSAT"


def test_shadow_soundness_exhaustive(f2):
    rng = random.Random(17)
    for _ in range(15):
        inst = _random_instance(rng, f2)
        shadow = abelian_shadow(inst)[0]
        if solve_linear_system(shadow).status == "UNSAT":
            assert not _solution_set(inst, 2, inst.variables)


def test_shadow_refuted_paper_item_has_no_solutions_at_bound_4():
    inst = parse_instance(PAPER_23 % "ab: X = 3*Y")
    assert solve_linear_system(abelian_shadow(inst)[0]).status == "UNSAT"
    assert not _solution_set(inst, 4, inst.variables)


def test_shadow_torsion_congruences(pentagon):
    # X must map to ab = (1,1,0,0,0); X = a b works, X = a does not
    inst = parse_instance(
        "vars X\ndisjunct {\n  eq X X = 1\n  ab: X = ( a b )\n}\n",
        presentation=pentagon)
    systems = abelian_shadow(inst)
    res = solve_linear_system(systems[0])
    assert res.status == "SAT"
    for var, value in res.witness.items():
        if var.startswith("X."):
            assert value % 2 == (1 if var in ("X.a", "X.b") else 0)
