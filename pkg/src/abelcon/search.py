"""Bounded exhaustive satisfiability search over Cayley balls.

The search space is (ball of the bound)^#variables in mixed-radix order:
variables in declaration order, values in length-then-lex ball order. The
implementation walks that order depth-first and prunes subtrees with sound
checks only (ground equations and constraints, and the abelian shadow with
assigned values substituted), so the witness returned is exactly the first
satisfying assignment in enumeration order. The compiled problems this runs
on are undecidable in general; exhausting a bound proves nothing beyond it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from itertools import product as _iproduct

from .abelian import LinearSystem, abelianize, solve_linear_system
from .errors import AbelconError, RadiusCapExceeded
from .instances import (
    AbEq,
    ConstAtom,
    Coset,
    Disjunct,
    ExpSumEq,
    GroupTerm,
    Instance,
    LengthEq,
    VarAtom,
    _commutator_shape,
    disjunct_shadow,
    evaluate,
    shadow_unknown,
)
from .words import (
    NormalWord,
    Presentation,
    ball as cayley_ball,
    centralizer_generators,
    geodesic_length,
    induced_subpresentation,
    multiply,
    normalize,
)

DEFAULT_CAP = 12

WITNESS = "Witness"
NO_SOLUTION_UP_TO_BOUND = "NoSolutionUpToBound"
UNSAT_BY_SHADOW = "UnsatByShadow"


@dataclass(frozen=True)
class SearchReport:
    verdict: str
    bound: int
    assignment: Optional[dict[str, NormalWord]] = None
    disjunct: Optional[int] = None
    nodes: int = 0
    millis: int = 0

    def __bool__(self):
        return self.verdict == WITNESS


def enumerate_ball(p: Presentation, radius: int, cap: int = DEFAULT_CAP) -> list[NormalWord]:
    """All elements of geodesic length <= radius in length-then-lex order."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius > cap:
        raise RadiusCapExceeded(f"radius {radius} exceeds cap {cap}")
    return cayley_ball(p, radius)


def _constraint_vars(con) -> set[str]:
    if isinstance(con, AbEq):
        return con.lhs.variables() | con.rhs.variables()
    if isinstance(con, ExpSumEq):
        return {var for _, var, _ in con.terms}
    if isinstance(con, LengthEq):
        return {var for _, var in con.terms}
    if isinstance(con, Coset):
        return {con.variable}
    raise TypeError(con)


def _substitute_term(term: GroupTerm, ground: dict[str, NormalWord]) -> GroupTerm:
    atoms = []
    for a in term.atoms:
        if isinstance(a, VarAtom) and a.name in ground:
            w = ground[a.name]
            atoms.append(ConstAtom(w.inverse() if a.inverse else w))
        else:
            atoms.append(a)
    return GroupTerm(tuple(atoms))


def _solved_value_set(p: Presentation, term: GroupTerm, var: str,
                      elem_set: frozenset) -> Optional[frozenset]:
    """If var occurs exactly once, the equation pins it to one value."""
    hits = [k for k, a in enumerate(term.atoms)
            if isinstance(a, VarAtom) and a.name == var]
    if len(hits) != 1:
        return None
    k = hits[0]
    prefix = GroupTerm(term.atoms[:k]).evaluate(p, {})
    suffix = GroupTerm(term.atoms[k + 1:]).evaluate(p, {})
    val = multiply(p, prefix.inverse(), suffix.inverse())
    if term.atoms[k].inverse:
        val = val.inverse()
    return frozenset([val]) if val in elem_set else frozenset()


def _centralizer_in_ball(p: Presentation, w: NormalWord, bound: int,
                         elem_set: frozenset) -> Optional[frozenset]:
    """All ball elements commuting with w, generated from the centralizer description."""
    if w.is_identity():
        return elem_set
    try:
        desc = centralizer_generators(p, w)
    except AbelconError:
        return None
    budget = bound + 2 * geodesic_length(p, desc.conjugator)
    link_pres = induced_subpresentation(p, desc.link_vertices)
    link_elems = [normalize(p, [(v, e) for v, e in x.syllables])
                  for x in cayley_ball(link_pres, budget)]
    root_lens = [geodesic_length(p, b) for b in desc.cyclic_parts]
    ranges = [range(-(budget // L), budget // L + 1) for L in root_lens]
    h, hinv = desc.conjugator, desc.conjugator.inverse()
    out = []
    for ms in _iproduct(*ranges):
        used = sum(abs(m) * L for m, L in zip(ms, root_lens))
        if used > budget:
            continue
        core = p.identity()
        for b, m in zip(desc.cyclic_parts, ms):
            core = multiply(p, core, b ** m)
        for l in link_elems:
            if used + geodesic_length(p, l) > budget:
                continue
            x = multiply(p, multiply(p, h, multiply(p, core, l)), hinv)
            if x in elem_set:
                out.append(x)
    return frozenset(out)


class _DisjunctState:
    """Per-disjunct pruning data threaded through the depth-first walk."""

    def __init__(self, inst: Instance, index: int, elems: list[NormalWord],
                 bound: int, use_shadow: bool):
        p = inst.presentation
        self.p = p
        self.index = index
        self.disjunct = inst.disjuncts[index]
        self.variables = inst.variables
        self.elems = elems
        self.bound = bound
        self._elem_set = frozenset(elems)
        d = self.disjunct
        self.eq_vars = [t.variables() for t in d.equations]
        self.con_vars = [_constraint_vars(c) for c in d.constraints]
        # items become checkable at the depth where their last variable gets a value
        depth_of = {v: i for i, v in enumerate(inst.variables)}
        self.eq_at = [[] for _ in inst.variables]
        self.con_at = [[] for _ in inst.variables]
        for i, vs in enumerate(self.eq_vars):
            if vs:
                self.eq_at[max(depth_of[v] for v in vs)].append(i)
        for i, vs in enumerate(self.con_vars):
            if vs:
                self.con_at[max(depth_of[v] for v in vs)].append(i)
        self.ground_eq_failed = any(
            not t.evaluate(p, {}).is_identity() for t, vs in zip(d.equations, self.eq_vars) if not vs)
        self.shadow = disjunct_shadow(p, d) if use_shadow else None
        self._memo: dict[tuple, frozenset] = {}

    def shadow_ok(self, asg: dict[str, NormalWord]) -> bool:
        if self.shadow is None:
            return True
        values = {}
        for var, w in asg.items():
            vec = abelianize(self.p, w)
            for v in self.p.vertices:
                values[shadow_unknown(var, v)] = vec[v]
        return bool(solve_linear_system(self.shadow.substitute(values)))

    def _equation_pass_set(self, i: int, var: str, asg: dict[str, NormalWord]) -> frozenset:
        """Values of var satisfying equation i given the other variables; cached.

        The cache pays off whenever the same ground context recurs in sibling
        subtrees (domain equations recur with an empty context every time).
        Two shapes avoid scanning the whole ball: an equation with a single
        occurrence of var is solved for it outright, and a commutator with a
        ground other side enumerates the centralizer inside the ball.
        """
        others = tuple(sorted((v, asg[v]) for v in self.eq_vars[i] if v != var))
        key = (i, var, others)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        term = self.disjunct.equations[i]
        ground = dict(others)
        substituted = _substitute_term(term, ground)
        cached = _solved_value_set(self.p, substituted, var, self._elem_set)
        if cached is None:
            shape = _commutator_shape(substituted)
            if shape is not None and shape[0] == var:
                cached = _centralizer_in_ball(self.p, shape[1], self.bound, self._elem_set)
        if cached is None:
            trial = dict(ground)
            passing = []
            for val in self.elems:
                trial[var] = val
                if term.evaluate(self.p, trial).is_identity():
                    passing.append(val)
            cached = frozenset(passing)
        self._memo[key] = cached
        return cached

    def admits(self, depth: int, asg: dict[str, NormalWord], val: NormalWord) -> bool:
        """Check every item that becomes ground when variables[depth] := val."""
        from .instances import _constraint_holds

        var = self.variables[depth]
        for i in self.eq_at[depth]:
            if val not in self._equation_pass_set(i, var, asg):
                return False
        if self.con_at[depth]:
            trial = asg | {var: val}
            for i in self.con_at[depth]:
                if not _constraint_holds(self.p, self.disjunct.constraints[i], trial):
                    return False
        return True


def search(inst: Instance, bound: int, cap: int = DEFAULT_CAP,
           use_shadow: bool = True) -> SearchReport:
    """Find the first satisfying assignment with all values in the bound ball.

    Returns UnsatByShadow (a sound, definitive no) when every disjunct's
    abelian shadow is unsolvable over Z, NoSolutionUpToBound when the walk
    exhausts the ball, and a re-verified Witness otherwise.
    """
    start = time.monotonic()
    elems = enumerate_ball(inst.presentation, bound, cap)
    states = [_DisjunctState(inst, i, elems, bound, use_shadow)
              for i in range(len(inst.disjuncts))]
    live0 = []
    for st in states:
        if st.ground_eq_failed:
            continue
        if st.shadow is not None and not solve_linear_system(st.shadow):
            continue
        live0.append(st)
    if use_shadow and not live0 and all(
            st.shadow is not None and not solve_linear_system(st.shadow) for st in states):
        millis = int((time.monotonic() - start) * 1000)
        return SearchReport(UNSAT_BY_SHADOW, bound, nodes=0, millis=millis)

    variables = inst.variables
    nodes = 0
    found: Optional[dict[str, NormalWord]] = None

    def walk(depth: int, asg: dict[str, NormalWord], live: list[_DisjunctState]):
        nonlocal nodes, found
        if found is not None:
            return
        if depth == len(variables):
            res = evaluate(inst, asg)
            if res.satisfied:
                found = dict(asg)
            return
        for val in elems:
            if found is not None:
                return
            admitted = [st for st in live if st.admits(depth, asg, val)]
            if not admitted:
                continue
            asg[variables[depth]] = val
            nodes += 1
            still = [st for st in admitted if st.shadow_ok(asg)]
            if still:
                walk(depth + 1, asg, still)
            del asg[variables[depth]]

    if live0:
        walk(0, {}, live0)
    millis = int((time.monotonic() - start) * 1000)
    if found is not None:
        res = evaluate(inst, found)
        assert res.satisfied, "pruned search returned a non-solution"
        return SearchReport(WITNESS, bound, assignment=found, disjunct=res.disjunct,
                            nodes=nodes, millis=millis)
    return SearchReport(NO_SOLUTION_UP_TO_BOUND, bound, nodes=nodes, millis=millis)


def naive_search(inst: Instance, bound: int, cap: int = DEFAULT_CAP) -> SearchReport:
    """Reference enumeration without any pruning; for cross-checking only."""
    start = time.monotonic()
    elems = enumerate_ball(inst.presentation, bound, cap)
    variables = inst.variables
    nodes = 0

    def rec(depth: int, asg: dict[str, NormalWord]):
        nonlocal nodes
        if depth == len(variables):
            nodes += 1
            res = evaluate(inst, asg)
            return dict(asg) if res.satisfied else None
        for val in elems:
            asg[variables[depth]] = val
            hit = rec(depth + 1, asg)
            del asg[variables[depth]]
            if hit is not None:
                return hit
        return None

    found = rec(0, {})
    millis = int((time.monotonic() - start) * 1000)
    if found is not None:
        return SearchReport(WITNESS, bound, assignment=found,
                            disjunct=evaluate(inst, found).disjunct,
                            nodes=nodes, millis=millis)
    return SearchReport(NO_SOLUTION_UP_TO_BOUND, bound, nodes=nodes, millis=millis)
