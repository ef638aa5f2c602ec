"""The instance language: equation systems with constraints over a graph product.

An instance is a disjunction of systems; each system has group equations
(terms required to equal the identity) and constraints of four kinds:
abelianisation equalities, linear exponent-sum equations, linear length
equations, and commutator-subgroup coset membership. Instances are immutable;
evaluation is pure.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .abelian import AbelVector, abelianize, exponent_sum, is_abelian_primitive
from .errors import (
    IncompleteAssignment,
    InfiniteAbelianisation,
    NotAbelianPrimitive,
    ParseError,
    UnknownVariable,
    UnknownVertex,
)
from .abelian import LinearEquation, LinearSystem
from .words import (
    NormalWord,
    Presentation,
    format_word,
    geodesic_length,
    multiply,
    normalize,
    parse_word,
)

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class VarAtom:
    name: str
    inverse: bool = False


@dataclass(frozen=True)
class ConstAtom:
    word: NormalWord


Atom = Union[VarAtom, ConstAtom]


@dataclass(frozen=True)
class GroupTerm:
    """A product of variables, inverted variables, and constant words."""
    atoms: tuple[Atom, ...]

    def variables(self) -> set[str]:
        return {a.name for a in self.atoms if isinstance(a, VarAtom)}

    def evaluate(self, p: Presentation, asg: dict[str, NormalWord]) -> NormalWord:
        out = p.identity()
        for a in self.atoms:
            if isinstance(a, VarAtom):
                w = asg[a.name]
                out = multiply(p, out, w.inverse() if a.inverse else w)
            else:
                out = multiply(p, out, a.word)
        return out

    def inverse(self) -> "GroupTerm":
        inv = []
        for a in reversed(self.atoms):
            if isinstance(a, VarAtom):
                inv.append(VarAtom(a.name, not a.inverse))
            else:
                inv.append(ConstAtom(a.word.inverse()))
        return GroupTerm(tuple(inv))

    def __mul__(self, other: "GroupTerm") -> "GroupTerm":
        return GroupTerm(self.atoms + other.atoms)


def var_term(name: str, inverse: bool = False) -> GroupTerm:
    return GroupTerm((VarAtom(name, inverse),))


def const_term(word: NormalWord) -> GroupTerm:
    return GroupTerm((ConstAtom(word),)) if not word.is_identity() else GroupTerm(())


def commutator_term(x: str, w: NormalWord) -> GroupTerm:
    """[x, w] = x w x^-1 w^-1 as a term; equals 1 iff x commutes with w."""
    return GroupTerm((VarAtom(x), ConstAtom(w), VarAtom(x, True), ConstAtom(w.inverse())))


@dataclass(frozen=True)
class AbEq:
    """ab(lhs) = ab(rhs) in the abelianisation."""
    lhs: GroupTerm
    rhs: GroupTerm


@dataclass(frozen=True)
class ExpSumEq:
    """sum(coeff * |var|_vertex) = constant over abelian-primitive vertices."""
    terms: tuple[tuple[int, str, str], ...]  # (coeff, variable, vertex)
    constant: int


@dataclass(frozen=True)
class LengthEq:
    """sum(coeff * |var|) = constant in geodesic length; evaluable but never pruned on."""
    terms: tuple[tuple[int, str], ...]
    constant: int


@dataclass(frozen=True)
class Coset:
    """variable lies in rep * G' (commutator subgroup coset)."""
    variable: str
    rep: NormalWord


Constraint = Union[AbEq, ExpSumEq, LengthEq, Coset]


@dataclass(frozen=True)
class Disjunct:
    equations: tuple[GroupTerm, ...]
    constraints: tuple[Constraint, ...]


@dataclass(frozen=True)
class Instance:
    presentation: Presentation
    variables: tuple[str, ...]
    disjuncts: tuple[Disjunct, ...]
    graph_ref: Optional[str] = None

    def __post_init__(self):
        if not self.disjuncts:
            raise ParseError("instance needs at least one disjunct")
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise ParseError("duplicate variable names")
        for v in self.variables:
            if not _NAME_RE.match(v):
                raise ParseError(f"bad variable name {v!r}")
            if v in self.presentation.index:
                raise ParseError(f"variable {v!r} collides with a vertex name")
        for d in self.disjuncts:
            for term in d.equations:
                self._check_term(term, declared)
            for con in d.constraints:
                self._check_constraint(con, declared)

    def _check_term(self, term: GroupTerm, declared: set[str]) -> None:
        for a in term.atoms:
            if isinstance(a, VarAtom) and a.name not in declared:
                raise UnknownVariable(f"undeclared variable {a.name!r}")

    def _check_constraint(self, con: Constraint, declared: set[str]) -> None:
        if isinstance(con, AbEq):
            self._check_term(con.lhs, declared)
            self._check_term(con.rhs, declared)
        elif isinstance(con, ExpSumEq):
            for _, var, vertex in con.terms:
                if var not in declared:
                    raise UnknownVariable(f"undeclared variable {var!r}")
                if not is_abelian_primitive(self.presentation, vertex):
                    raise NotAbelianPrimitive(
                        f"exponent-sum constraint at finite-order vertex {vertex!r}")
        elif isinstance(con, LengthEq):
            for _, var in con.terms:
                if var not in declared:
                    raise UnknownVariable(f"undeclared variable {var!r}")
        elif isinstance(con, Coset):
            if con.variable not in declared:
                raise UnknownVariable(f"undeclared variable {con.variable!r}")
            if not self.presentation.has_finite_abelianisation():
                raise InfiniteAbelianisation(
                    "coset constraints need every vertex order finite")


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class DisjunctReport:
    equations: tuple[bool, ...]
    constraints: tuple[bool, ...]

    @property
    def ok(self) -> bool:
        return all(self.equations) and all(self.constraints)


@dataclass(frozen=True)
class EvalResult:
    satisfied: bool
    disjunct: Optional[int]
    reports: tuple[DisjunctReport, ...]

    def __bool__(self):
        return self.satisfied


def _constraint_holds(p: Presentation, con: Constraint, asg: dict[str, NormalWord]) -> bool:
    if isinstance(con, AbEq):
        return abelianize(p, con.lhs.evaluate(p, asg)) == abelianize(p, con.rhs.evaluate(p, asg))
    if isinstance(con, ExpSumEq):
        total = sum(c * exponent_sum(p, asg[var], vertex) for c, var, vertex in con.terms)
        return total == con.constant
    if isinstance(con, LengthEq):
        total = sum(c * geodesic_length(p, asg[var]) for c, var in con.terms)
        return total == con.constant
    if isinstance(con, Coset):
        return abelianize(p, asg[con.variable]) == abelianize(p, con.rep)
    raise TypeError(f"unknown constraint {con!r}")


def evaluate(inst: Instance, asg: dict[str, NormalWord]) -> EvalResult:
    """Check the assignment against each disjunct; report per-item outcomes."""
    missing = [v for v in inst.variables if v not in asg]
    if missing:
        raise IncompleteAssignment(f"missing values for {missing}")
    p = inst.presentation
    reports = []
    satisfied = None
    for i, d in enumerate(inst.disjuncts):
        eq_ok = tuple(t.evaluate(p, asg).is_identity() for t in d.equations)
        con_ok = tuple(_constraint_holds(p, c, asg) for c in d.constraints)
        rep = DisjunctReport(eq_ok, con_ok)
        reports.append(rep)
        if rep.ok and satisfied is None:
            satisfied = i
    return EvalResult(satisfied is not None, satisfied, tuple(reports))


# ---------------------------------------------------------------------------
# flattening


def is_short(term: GroupTerm) -> bool:
    """Short forms: z = x y (three atoms ending in an inverted variable),
    x = y, and x = h (at most two atoms)."""
    if len(term.atoms) <= 2:
        return True
    return (len(term.atoms) == 3 and isinstance(term.atoms[2], VarAtom)
            and term.atoms[2].inverse)


class _FreshNames:
    def __init__(self, taken: Iterable[str], prefix: str = "_f"):
        self.taken = set(taken)
        self.prefix = prefix
        self.counter = 0

    def next(self) -> str:
        while True:
            name = f"{self.prefix}{self.counter}"
            self.counter += 1
            if name not in self.taken:
                self.taken.add(name)
                return name


def flatten(inst: Instance) -> Instance:
    """Rewrite every equation into short form and every AbEq side into a variable.

    Fresh variables `_f0, _f1, ...` are introduced deterministically left to
    right; projecting the flattened solution set onto the original variables
    is exactly the original solution set.
    """
    fresh = _FreshNames(inst.variables)
    new_disjuncts = []
    new_vars = list(inst.variables)

    def flatten_term(term: GroupTerm, out_eqs: list[GroupTerm]) -> GroupTerm:
        atoms = list(term.atoms)
        while not is_short(GroupTerm(tuple(atoms))):
            w = fresh.next()
            new_vars.append(w)
            out_eqs.append(GroupTerm((atoms[0], atoms[1], VarAtom(w, True))))
            atoms = [VarAtom(w)] + atoms[2:]
        return GroupTerm(tuple(atoms))

    def as_variable(term: GroupTerm, out_eqs: list[GroupTerm]) -> GroupTerm:
        if len(term.atoms) == 1 and isinstance(term.atoms[0], VarAtom) and not term.atoms[0].inverse:
            return term
        w = fresh.next()
        new_vars.append(w)
        short = flatten_term(term * var_term(w, inverse=True), out_eqs)
        out_eqs.append(short)
        return var_term(w)

    for d in inst.disjuncts:
        eqs: list[GroupTerm] = []
        cons: list[Constraint] = []
        for term in d.equations:
            short = flatten_term(term, eqs)
            eqs.append(short)
        for con in d.constraints:
            if isinstance(con, AbEq):
                lhs = as_variable(con.lhs, eqs)
                rhs = as_variable(con.rhs, eqs)
                cons.append(AbEq(lhs, rhs))
            else:
                cons.append(con)
        new_disjuncts.append(Disjunct(tuple(eqs), tuple(cons)))
    return Instance(inst.presentation, tuple(new_vars), tuple(new_disjuncts), inst.graph_ref)


def forced_extension(inst_flat: Instance, disjunct: int, base: dict[str, NormalWord],
                     original_vars: Iterable[str]) -> Optional[dict[str, NormalWord]]:
    """Extend an assignment of the original variables to the flattening's fresh ones.

    Fresh variables are definitionally determined (each first occurs in an
    equation whose other atoms are already ground); returns None only if some
    defining equation never becomes ground, which flatten's output never does.
    """
    p = inst_flat.presentation
    asg = dict(base)
    pending = list(inst_flat.disjuncts[disjunct].equations)
    progress = True
    while pending and progress:
        progress = False
        rest = []
        for term in pending:
            unknown = [a for a in term.atoms
                       if isinstance(a, VarAtom) and a.name not in asg]
            names = {a.name for a in unknown}
            if not names:
                continue
            if len(names) == 1 and len(unknown) == 1:
                a = unknown[0]
                prefix, suffix = [], []
                target = prefix
                for b in term.atoms:
                    if b is a:
                        target = suffix
                        continue
                    target.append(b)
                # term = P * a * S = 1  =>  a = P^-1 * S^-1
                pw = GroupTerm(tuple(prefix)).evaluate(p, asg)
                sw = GroupTerm(tuple(suffix)).evaluate(p, asg)
                val = multiply(p, pw.inverse(), sw.inverse())
                asg[a.name] = val if not a.inverse else val.inverse()
                progress = True
            else:
                rest.append(term)
        pending = rest
    if any(v not in asg for v in inst_flat.variables):
        return None
    return asg


# ---------------------------------------------------------------------------
# abelian shadow


def shadow_unknown(var: str, vertex: str) -> str:
    return f"{var}.{vertex}"


def _term_rows(p: Presentation, terms: list[tuple[GroupTerm, int]]) -> list[LinearEquation]:
    """Linear rows stating sum(sign * ab(term)) = 0, one row per vertex."""
    var_counts: dict[tuple[str, str], int] = {}
    const = AbelVector.zero(p)
    for term, sign in terms:
        for a in term.atoms:
            if isinstance(a, VarAtom):
                s = -sign if a.inverse else sign
                for v in p.vertices:
                    var_counts[(a.name, v)] = var_counts.get((a.name, v), 0) + s
            else:
                const = const + abelianize(p, a.word).scale(sign)
    rows = []
    for v in p.vertices:
        coeffs = tuple((shadow_unknown(name, u), c)
                       for (name, u), c in var_counts.items() if u == v and c)
        k = p.order[v]
        rows.append(LinearEquation(coeffs, -const[v], modulus=k))
    return rows


def _centralizer_lattice_rows(p: Presentation, var: str, w: NormalWord,
                              tag: str) -> list[LinearEquation]:
    """Rows confining ab(var) to the lattice spanned by ab of C(w)'s generators.

    Sound strengthening of the shadow for a commutator equation [var, w] = 1;
    only emitted when the centralizer description applies.
    """
    from .words import centralizer_generators  # local import to avoid cycles

    try:
        desc = centralizer_generators(p, w)
    except Exception:
        return []
    gens = desc.generators(p)
    rows = []
    for v in p.vertices:
        coeffs = [(shadow_unknown(var, v), 1)]
        for j, g in enumerate(gens):
            c = abelianize(p, g)[v]
            if c:
                coeffs.append((f"{tag}.lam{j}", -c))
        rows.append(LinearEquation(tuple(coeffs), 0, modulus=p.order[v]))
    return rows


def _commutator_shape(term: GroupTerm):
    """Detect [X, w] = 1 with w constant; returns (var, word) or None."""
    if len(term.atoms) != 4:
        return None
    a0, a1, a2, a3 = term.atoms
    if (isinstance(a0, VarAtom) and isinstance(a2, VarAtom) and a0.name == a2.name
            and a0.inverse != a2.inverse and isinstance(a1, ConstAtom)
            and isinstance(a3, ConstAtom) and multiply(a1.word.pres, a1.word, a3.word).is_identity()):
        return a0.name, a1.word
    if (isinstance(a1, VarAtom) and isinstance(a3, VarAtom) and a1.name == a3.name
            and a1.inverse != a3.inverse and isinstance(a0, ConstAtom)
            and isinstance(a2, ConstAtom) and multiply(a0.word.pres, a0.word, a2.word).is_identity()):
        return a1.name, a0.word
    return None


def disjunct_shadow(p: Presentation, d: Disjunct, with_lattice: bool = True) -> LinearSystem:
    """Necessary linear conditions on the ab coordinates of a disjunct's solutions."""
    rows: list[LinearEquation] = []
    identity_term = GroupTerm(())
    for i, term in enumerate(d.equations):
        rows.extend(_term_rows(p, [(term, 1)]))
        if with_lattice:
            shape = _commutator_shape(term)
            if shape is not None and not shape[1].is_identity():
                rows.extend(_centralizer_lattice_rows(p, shape[0], shape[1], f"eq{i}"))
    for j, con in enumerate(d.constraints):
        if isinstance(con, AbEq):
            rows.extend(_term_rows(p, [(con.lhs, 1), (con.rhs, -1)]))
        elif isinstance(con, ExpSumEq):
            coeffs = {}
            for c, var, vertex in con.terms:
                key = shadow_unknown(var, vertex)
                coeffs[key] = coeffs.get(key, 0) + c
            rows.append(LinearEquation(tuple(coeffs.items()), con.constant))
        elif isinstance(con, Coset):
            rep = abelianize(p, con.rep)
            rows.extend(_term_rows(p, [(var_term(con.variable), 1),
                                       (const_term(con.rep), -1)]))
        # LengthEq contributes nothing: lengths are not linear in ab coordinates
    rows = [r for r in rows if r.coeffs or r.constant]
    return LinearSystem(tuple(rows))


def abelian_shadow(inst: Instance) -> list[LinearSystem]:
    """One linear system per disjunct; an UNSAT shadow refutes its disjunct."""
    return [disjunct_shadow(inst.presentation, d) for d in inst.disjuncts]


# ---------------------------------------------------------------------------
# textual format


def format_term(p: Presentation, term: GroupTerm) -> str:
    if not term.atoms:
        return "1"
    parts = []
    i = 0
    atoms = term.atoms
    while i < len(atoms):
        a = atoms[i]
        if isinstance(a, VarAtom):
            j = i
            while j + 1 < len(atoms) and atoms[j + 1] == a:
                j += 1
            count = j - i + 1
            exp = -count if a.inverse else count
            parts.append(a.name if exp == 1 else f"{a.name}^{exp}")
            i = j + 1
        else:
            body = format_word(a.word)
            if len(a.word.syllables) <= 1:
                parts.append(body)
            else:
                parts.append(f"( {body} )")
            i += 1
    return " ".join(parts)


def _format_constraint(p: Presentation, con: Constraint) -> str:
    if isinstance(con, AbEq):
        return f"ab: {format_term(p, con.lhs)} = {format_term(p, con.rhs)}"
    if isinstance(con, ExpSumEq):
        body = " ".join(f"{c} |{var}|_{vertex}" for c, var, vertex in con.terms)
        return f"expsum: {body} = {con.constant}"
    if isinstance(con, LengthEq):
        body = " ".join(f"{c} |{var}|" for c, var in con.terms)
        return f"len: {body} = {con.constant}"
    if isinstance(con, Coset):
        return f"coset: {con.variable} in {format_word(con.rep)} * G'"
    raise TypeError(f"unknown constraint {con!r}")


def print_instance(inst: Instance) -> str:
    lines = []
    if inst.graph_ref is not None:
        lines.append(f"group {inst.graph_ref}")
    else:
        lines.append("graph {")
        for raw in inst.presentation.to_text().strip().splitlines():
            lines.append("  " + raw)
        lines.append("}")
    lines.append("vars " + " ".join(inst.variables))
    for d in inst.disjuncts:
        lines.append("disjunct {")
        for term in d.equations:
            lines.append(f"  eq {format_term(inst.presentation, term)} = 1")
        for con in d.constraints:
            lines.append("  " + _format_constraint(inst.presentation, con))
        lines.append("}")
    return "\n".join(lines) + "\n"


class _Parser:
    def __init__(self, text: str, base_dir: Optional[str], presentation: Optional[Presentation]):
        self.lines = text.splitlines()
        self.base_dir = base_dir or "."
        self.pres = presentation
        self.graph_ref: Optional[str] = None
        self.variables: list[str] = []
        self.disjuncts: list[Disjunct] = []

    def fail(self, msg: str, ln: int) -> None:
        raise ParseError(msg, line=ln)

    def parse(self) -> Instance:
        i = 0
        n = len(self.lines)
        while i < n:
            line = self.lines[i].split("#", 1)[0].strip()
            i += 1
            if not line:
                continue
            if line.startswith("group "):
                self.graph_ref = line[len("group "):].strip()
                path = os.path.join(self.base_dir, self.graph_ref)
                try:
                    with open(path, encoding="utf-8") as fh:
                        self.pres = Presentation.from_text(fh.read())
                except OSError as exc:
                    self.fail(f"cannot read graph file {path!r}: {exc}", i)
            elif line == "graph {":
                block = []
                while i < n and self.lines[i].split("#", 1)[0].strip() != "}":
                    block.append(self.lines[i])
                    i += 1
                if i >= n:
                    self.fail("unterminated graph block", i)
                i += 1
                self.pres = Presentation.from_text("\n".join(block))
            elif line.startswith("vars"):
                self.variables.extend(line.split()[1:])
            elif line == "disjunct {" or line.startswith("disjunct"):
                if not line.endswith("{"):
                    self.fail("expected 'disjunct {'", i)
                stmts: list[tuple[str, int]] = []
                while i < n:
                    body = self.lines[i].split("#", 1)[0].strip()
                    i += 1
                    if body == "}":
                        break
                    for stmt in body.split(";"):
                        stmt = stmt.strip()
                        if stmt:
                            stmts.append((stmt, i))
                else:
                    self.fail("unterminated disjunct block", i)
                self.disjuncts.append(self.parse_disjunct(stmts))
            else:
                self.fail(f"unrecognized line {line!r}", i)
        if self.pres is None:
            raise ParseError("no group/graph section and no presentation supplied")
        return Instance(self.pres, tuple(self.variables), tuple(self.disjuncts), self.graph_ref)

    # -- statement level -----------------------------------------------------

    def parse_disjunct(self, stmts: list[tuple[str, int]]) -> Disjunct:
        if self.pres is None:
            self.fail("group/graph section must precede disjuncts",
                      stmts[0][1] if stmts else 0)
        eqs: list[GroupTerm] = []
        cons: list[Constraint] = []
        has_eq_section = False
        for stmt, ln in stmts:
            if stmt.startswith("eq "):
                has_eq_section = True
                body = stmt[3:]
                if not body.rstrip().endswith("= 1"):
                    self.fail("equation must end with '= 1'", ln)
                eqs.append(self.parse_term(body.rstrip()[:-3], ln))
            elif stmt.startswith("ab:"):
                lhs, _, rhs = stmt[3:].partition("=")
                if not _:
                    self.fail("ab constraint needs '='", ln)
                cons.append(AbEq(self.parse_term(lhs, ln), self.parse_term(rhs, ln)))
            elif stmt.startswith("expsum:"):
                cons.append(self.parse_expsum(stmt[7:], ln))
            elif stmt.startswith("len:"):
                cons.append(self.parse_len(stmt[4:], ln))
            elif stmt.startswith("coset:"):
                cons.append(self.parse_coset(stmt[6:], ln))
            else:
                self.fail(f"unrecognized statement {stmt!r}", ln)
        if not has_eq_section:
            self.fail("disjunct has no equations section", stmts[0][1] if stmts else 0)
        return Disjunct(tuple(eqs), tuple(cons))

    def parse_term(self, text: str, ln: int) -> GroupTerm:
        tokens = text.replace("(", " ( ").replace(")", " ) ").split()
        atoms: list[Atom] = []
        pos = 0

        def take_factor():
            nonlocal pos
            coeff = 1
            tok = tokens[pos]
            if "*" in tok and not tok.startswith("("):
                left, _, rest = tok.partition("*")
                try:
                    coeff = int(left)
                except ValueError:
                    self.fail(f"bad integer multiplier in {tok!r}", ln)
                if rest:
                    tokens[pos] = rest
                else:
                    pos += 1
            tok = tokens[pos]
            if tok == "(":
                pos += 1
                inner = []
                while pos < len(tokens) and tokens[pos] != ")":
                    inner.append(tokens[pos])
                    pos += 1
                if pos >= len(tokens):
                    self.fail("unbalanced parenthesis", ln)
                pos += 1
                exp = 1
                if pos < len(tokens) and tokens[pos].startswith("^"):
                    try:
                        exp = int(tokens[pos][1:])
                    except ValueError:
                        self.fail(f"bad exponent {tokens[pos]!r}", ln)
                    pos += 1
                word = parse_word(self.pres, " ".join(inner)) ** exp
                return ([ConstAtom(word)] if not word.is_identity() else []), coeff
            pos += 1
            name, _, exps = tok.partition("^")
            exp = 1
            if exps:
                try:
                    exp = int(exps)
                except ValueError:
                    self.fail(f"bad exponent in {tok!r}", ln)
            if name in self.variables:
                if exp == 0:
                    return [], coeff
                return [VarAtom(name, exp < 0)] * abs(exp), coeff
            if name == "1":
                return [], coeff
            try:
                word = parse_word(self.pres, tok)
            except UnknownVertex:
                self.fail(f"unknown variable or vertex {name!r}", ln)
            return [ConstAtom(word)] if not word.is_identity() else [], coeff

        while pos < len(tokens):
            factors, coeff = take_factor()
            reps = abs(coeff)
            flip = coeff < 0
            for _ in range(reps):
                for a in factors:
                    if not flip:
                        atoms.append(a)
                if flip:
                    for a in reversed(factors):
                        if isinstance(a, VarAtom):
                            atoms.append(VarAtom(a.name, not a.inverse))
                        else:
                            atoms.append(ConstAtom(a.word.inverse()))
        return GroupTerm(tuple(atoms))

    def parse_expsum(self, text: str, ln: int) -> ExpSumEq:
        tokens = text.split()
        if "=" not in tokens:
            self.fail("expsum constraint needs '='", ln)
        at = tokens.index("=")
        if len(tokens) != at + 2:
            self.fail("expsum right-hand side must be one integer", ln)
        try:
            constant = int(tokens[at + 1])
        except ValueError:
            self.fail(f"bad constant {tokens[at + 1]!r}", ln)
        items = tokens[:at]
        if len(items) % 2:
            self.fail("expsum needs coefficient |Var|_vertex pairs", ln)
        terms = []
        for i in range(0, len(items), 2):
            try:
                c = int(items[i])
            except ValueError:
                self.fail(f"bad coefficient {items[i]!r}", ln)
            m = re.match(r"\|([A-Za-z_][A-Za-z0-9_]*)\|_(\S+)$", items[i + 1])
            if not m:
                self.fail(f"expected |Var|_vertex, got {items[i + 1]!r}", ln)
            terms.append((c, m.group(1), m.group(2)))
        return ExpSumEq(tuple(terms), constant)

    def parse_len(self, text: str, ln: int) -> LengthEq:
        tokens = text.split()
        if "=" not in tokens:
            self.fail("len constraint needs '='", ln)
        at = tokens.index("=")
        try:
            constant = int(tokens[at + 1])
        except (ValueError, IndexError):
            self.fail("len right-hand side must be one integer", ln)
        items = tokens[:at]
        if len(items) % 2:
            self.fail("len needs coefficient |Var| pairs", ln)
        terms = []
        for i in range(0, len(items), 2):
            try:
                c = int(items[i])
            except ValueError:
                self.fail(f"bad coefficient {items[i]!r}", ln)
            m = re.match(r"\|([A-Za-z_][A-Za-z0-9_]*)\|$", items[i + 1])
            if not m:
                self.fail(f"expected |Var|, got {items[i + 1]!r}", ln)
            terms.append((c, m.group(1)))
        return LengthEq(tuple(terms), constant)

    def parse_coset(self, text: str, ln: int) -> Coset:
        m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s+in\s+(.*?)\s*\*\s*G'\s*$", text)
        if not m:
            self.fail(f"expected 'X in <word> * G'', got {text!r}", ln)
        return Coset(m.group(1), parse_word(self.pres, m.group(2)))


def parse_instance(text: str, base_dir: Optional[str] = None,
                   presentation: Optional[Presentation] = None) -> Instance:
    """Parse the instance grammar; graph files resolve relative to base_dir."""
    return _Parser(text, base_dir, presentation).parse()
