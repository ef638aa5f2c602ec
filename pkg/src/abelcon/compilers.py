"""Compilers from integer Diophantine problems to group instances.

The encodings land in two targets. Over a free group of rank >= 2 with
distinguished generators s1, s2, integer n is represented by s1^n: the
domain is cut out by [x, s1] = 1, addition is plain multiplication on the
domain, and multiplication n1*n2 is expressed through witnesses b in <s2>
and c commuting with s1*b, tied together by exponent-sum conditions. In
pure-ab mode every exponent-sum condition is further rewritten into
commutation equations plus abelianisation equalities, so the output uses
only the language of equations with ab constraints.

Over a nonabelian right-angled Artin target the rigid generator pair is
replaced by the diagonal elements h1, h2 of two non-adjacent weak modules
(recursing into a direct factor when the graph is a join), every variable
is relativized to the subgroup where all module coordinates agree, and
zero-exponent-sum conditions become star-cover gadgets: |g|_s = 0 for all
s in S iff ab(g) matches ab of a product of elements commuting with cover
vertices whose stars exhaust the remaining graph.

Every compiled instance carries a decode map (read integers back off
exponent sums) and a witness recipe: a small serializable expression
per group variable that rebuilds a satisfying assignment from any integer
solution of the source.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .abelian import abelianize, exponent_sum
from .errors import (
    AbelianTarget,
    DecodeInconsistency,
    InfiniteAbelianisation,
    InvalidPresentation,
    NotAnIntegerSolution,
    NotASolution,
    NotFlattened,
    ParseError,
    RankTooSmall,
)
from .graphs import direct_product_decomposition, nonadjacent_weak_module_pair, star_link
from .instances import (
    AbEq,
    ConstAtom,
    Coset,
    Disjunct,
    ExpSumEq,
    GroupTerm,
    Instance,
    VarAtom,
    commutator_term,
    const_term,
    evaluate,
    is_short,
    var_term,
)
from .words import (
    NormalWord,
    Presentation,
    cyclically_reduce,
    format_word,
    induced_subpresentation,
    multiply,
    multiply_all,
    normalize,
    parse_word,
)

_VAR_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


# ---------------------------------------------------------------------------
# polynomial systems


@dataclass(frozen=True)
class Monomial:
    coeff: int
    vars: tuple[str, ...]  # with repetition for powers

    def evaluate(self, values: dict[str, int]) -> int:
        out = self.coeff
        for v in self.vars:
            out *= values[v]
        return out


@dataclass(frozen=True)
class Polynomial:
    """Sum of monomials, constrained to equal zero."""
    monomials: tuple[Monomial, ...]

    def evaluate(self, values: dict[str, int]) -> int:
        return sum(m.evaluate(values) for m in self.monomials)


@dataclass(frozen=True)
class H10Instance:
    polynomials: tuple[Polynomial, ...]

    def __post_init__(self):
        if not self.polynomials:
            raise ParseError("at least one polynomial equation required")
        for v in self.variables():
            if not _VAR_RE.match(v):
                raise ParseError(f"bad integer variable name {v!r}")

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for poly in self.polynomials:
            for m in poly.monomials:
                for v in m.vars:
                    seen.setdefault(v)
        return tuple(seen)

    def holds(self, values: dict[str, int]) -> bool:
        return all(poly.evaluate(values) == 0 for poly in self.polynomials)


def parse_h10(text: str) -> H10Instance:
    """One equation per line in expanded monomial form: ``1*x*y -1*z = 0``."""
    polys = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.endswith("= 0"):
            raise ParseError("polynomial line must end with '= 0'", line=ln)
        monomials = []
        for tok in line[:-3].split():
            parts = tok.split("*")
            try:
                coeff = int(parts[0])
            except ValueError:
                raise ParseError(f"monomial must start with an integer: {tok!r}", line=ln) from None
            monomials.append(Monomial(coeff, tuple(parts[1:])))
        polys.append(Polynomial(tuple(m for m in monomials if m.coeff)))
    return H10Instance(tuple(polys))


def print_h10(h: H10Instance) -> str:
    lines = []
    for poly in h.polynomials:
        toks = ["*".join([str(m.coeff)] + list(m.vars)) for m in poly.monomials] or ["0"]
        lines.append(" ".join(toks) + " = 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# atomization


@dataclass(frozen=True)
class ConstDef:
    var: str
    value: int


@dataclass(frozen=True)
class SumDef:
    var: str  # var = left + right
    left: str
    right: str


@dataclass(frozen=True)
class ProdDef:
    var: str  # var = left * right
    left: str
    right: str


@dataclass(frozen=True)
class EqDef:
    left: str
    right: str


H10Atom = Union[ConstDef, SumDef, ProdDef, EqDef]


@dataclass(frozen=True)
class AtomizedH10:
    source_vars: tuple[str, ...]
    all_vars: tuple[str, ...]  # source first, fresh in creation order
    atoms: tuple[H10Atom, ...]

    def extend_solution(self, values: dict[str, int]) -> dict[str, int]:
        """Evaluate fresh variables from a source solution; atoms are ordered."""
        out = dict(values)
        for atom in self.atoms:
            if isinstance(atom, ConstDef):
                if atom.var in out:
                    if out[atom.var] != atom.value:
                        raise NotAnIntegerSolution(
                            f"{atom.var} = {out[atom.var]} but must equal {atom.value}")
                else:
                    out[atom.var] = atom.value
            elif isinstance(atom, (SumDef, ProdDef)):
                left, right = out[atom.left], out[atom.right]
                val = left + right if isinstance(atom, SumDef) else left * right
                if atom.var in out:
                    if out[atom.var] != val:
                        raise NotAnIntegerSolution(f"inconsistent value for {atom.var}")
                else:
                    out[atom.var] = val
            else:
                a, b = out.get(atom.left), out.get(atom.right)
                if a is None and b is not None:
                    out[atom.left] = b
                elif b is None and a is not None:
                    out[atom.right] = a
                elif a != b:
                    raise NotAnIntegerSolution(f"{atom.left} != {atom.right}")
        return out

    def holds(self, values: dict[str, int]) -> bool:
        for atom in self.atoms:
            if isinstance(atom, ConstDef):
                if values[atom.var] != atom.value:
                    return False
            elif isinstance(atom, SumDef):
                if values[atom.var] != values[atom.left] + values[atom.right]:
                    return False
            elif isinstance(atom, ProdDef):
                if values[atom.var] != values[atom.left] * values[atom.right]:
                    return False
            elif values[atom.left] != values[atom.right]:
                return False
        return True


def atomize(h: H10Instance) -> AtomizedH10:
    """Decompose polynomials into atoms x = c, x = y + z, x = y * z, x = y.

    Each polynomial is split into its positive and negative parts and both
    sides are chained left to right, so the result is equisatisfiable with
    the source and fresh variables are determined by the source variables.
    """
    atoms: list[H10Atom] = []
    fresh_vars: list[str] = []
    counters = {"p": 0, "s": 0, "k": 0}

    def fresh(kind: str) -> str:
        name = f"_{kind}{counters[kind]}"
        counters[kind] += 1
        fresh_vars.append(name)
        return name

    def const_var(value: int) -> str:
        v = fresh("k")
        atoms.append(ConstDef(v, value))
        return v

    def monomial_value(m: Monomial) -> str:
        assert m.coeff > 0
        if not m.vars:
            return const_var(m.coeff)
        chain = m.vars[0]
        for v in m.vars[1:]:
            t = fresh("p")
            atoms.append(ProdDef(t, chain, v))
            chain = t
        if m.coeff != 1:
            c = const_var(m.coeff)
            t = fresh("p")
            atoms.append(ProdDef(t, c, chain))
            chain = t
        return chain

    def side_value(monomials: list[Monomial]) -> str:
        vals = [monomial_value(m) for m in monomials]
        acc = vals[0]
        for v in vals[1:]:
            t = fresh("s")
            atoms.append(SumDef(t, acc, v))
            acc = t
        return acc

    for poly in h.polynomials:
        pos = [m for m in poly.monomials if m.coeff > 0]
        neg = [Monomial(-m.coeff, m.vars) for m in poly.monomials if m.coeff < 0]
        if not pos and not neg:
            continue
        if not neg:
            atoms.append(ConstDef(side_value(pos), 0))
        elif not pos:
            atoms.append(ConstDef(side_value(neg), 0))
        elif len(neg) == 1 and not neg[0].vars:
            atoms.append(ConstDef(side_value(pos), neg[0].coeff))
        elif len(pos) == 1 and not pos[0].vars:
            atoms.append(ConstDef(side_value(neg), pos[0].coeff))
        else:
            left = side_value(pos)
            right = side_value(neg)
            atoms.append(EqDef(left, right))
    source = h.variables()
    return AtomizedH10(source, source + tuple(fresh_vars), tuple(atoms))


# ---------------------------------------------------------------------------
# witness recipes: serializable expressions rebuilding group assignments


class RecipeError(Exception):
    pass


def _int_expr(expr, ints: dict[str, int], groups: dict[str, NormalWord], p: Presentation) -> int:
    op = expr["op"]
    if op == "const":
        return expr["value"]
    if op == "var":
        return ints[expr["name"]]
    if op == "add":
        return sum(_int_expr(a, ints, groups, p) for a in expr["args"])
    if op == "mul":
        out = 1
        for a in expr["args"]:
            out *= _int_expr(a, ints, groups, p)
        return out
    if op == "expsum":
        return exponent_sum(p, groups[expr["group"]], expr["vertex"])
    raise RecipeError(f"unknown integer op {op!r}")


def _word_expr(expr, ints, groups, p: Presentation) -> NormalWord:
    op = expr["op"]
    if op == "word":
        return parse_word(p, expr["text"])
    if op == "ref":
        return groups[expr["name"]]
    if op == "pow":
        return _word_expr(expr["base"], ints, groups, p) ** _int_expr(expr["exp"], ints, groups, p)
    if op == "concat":
        return multiply_all(p, [_word_expr(a, ints, groups, p) for a in expr["args"]])
    if op == "inv":
        return _word_expr(expr["arg"], ints, groups, p).inverse()
    if op == "conj":  # h^-1 x h
        x = _word_expr(expr["arg"], ints, groups, p)
        h = _word_expr(expr["by"], ints, groups, p)
        return x.conjugate_by(h)
    if op == "cyclic_conjugator":
        _, h = cyclically_reduce(p, _word_expr(expr["arg"], ints, groups, p))
        return h
    if op == "ab_cover_split":
        arg = _word_expr(expr["arg"], ints, groups, p)
        vec = abelianize(p, arg)
        exclude = set(expr["exclude"])
        cover = expr["cover"]
        parts: list[list[tuple[str, int]]] = [[] for _ in cover]
        for v in p.vertices:
            e = vec[v]
            if not e:
                continue
            if v in exclude:
                raise RecipeError(f"cover split argument has nonzero coordinate at {v}")
            for j, u in enumerate(cover):
                if v == u or p.adjacent(v, u):
                    parts[j].append((v, e))
                    break
            else:
                raise RecipeError(f"vertex {v} not covered")
        return normalize(p, parts[expr["index"]])
    raise RecipeError(f"unknown word op {op!r}")


def w_word(w: NormalWord) -> dict:
    return {"op": "word", "text": format_word(w)}


def w_ref(name: str) -> dict:
    return {"op": "ref", "name": name}


def w_pow(base: dict, exp: dict) -> dict:
    return {"op": "pow", "base": base, "exp": exp}


def w_concat(*args: dict) -> dict:
    return {"op": "concat", "args": list(args)}


def w_inv(arg: dict) -> dict:
    return {"op": "inv", "arg": arg}


def w_conj(arg: dict, by: dict) -> dict:
    return {"op": "conj", "arg": arg, "by": by}


def w_cyclic_conjugator(arg: dict) -> dict:
    return {"op": "cyclic_conjugator", "arg": arg}


def w_cover_split(arg: dict, exclude: Iterable[str], cover: Iterable[str], index: int) -> dict:
    return {"op": "ab_cover_split", "arg": arg, "exclude": sorted(exclude),
            "cover": list(cover), "index": index}


def i_const(c: int) -> dict:
    return {"op": "const", "value": c}


def i_var(name: str) -> dict:
    return {"op": "var", "name": name}


def i_add(*args: dict) -> dict:
    return {"op": "add", "args": list(args)}


def i_mul(*args: dict) -> dict:
    return {"op": "mul", "args": list(args)}


def _term_wexpr(term: GroupTerm) -> dict:
    parts = []
    for a in term.atoms:
        if isinstance(a, VarAtom):
            parts.append(w_inv(w_ref(a.name)) if a.inverse else w_ref(a.name))
        else:
            parts.append(w_word(a.word))
    return w_concat(*parts)


# ---------------------------------------------------------------------------
# compiled reductions


@dataclass
class CompiledReduction:
    instance: Instance
    decode: dict[str, tuple[str, str]]  # integer var -> (group var, reference vertex)
    recipes: tuple[tuple[str, dict], ...]  # (group var, word expression) in order
    atomized: AtomizedH10
    source: H10Instance
    mode: str

    def sidecar_json(self) -> str:
        atoms = []
        for a in self.atomized.atoms:
            if isinstance(a, ConstDef):
                atoms.append({"kind": "const", "var": a.var, "value": a.value})
            elif isinstance(a, SumDef):
                atoms.append({"kind": "sum", "var": a.var, "left": a.left, "right": a.right})
            elif isinstance(a, ProdDef):
                atoms.append({"kind": "prod", "var": a.var, "left": a.left, "right": a.right})
            else:
                atoms.append({"kind": "eq", "left": a.left, "right": a.right})
        doc = {
            "format": "h10-reduction-sidecar-v1",
            "mode": self.mode,
            "h10": print_h10(self.source),
            "source_vars": list(self.atomized.source_vars),
            "all_vars": list(self.atomized.all_vars),
            "atoms": atoms,
            "decode": {k: list(v) for k, v in self.decode.items()},
            "recipes": [[name, expr] for name, expr in self.recipes],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_sidecar_json(cls, text: str, instance: Instance) -> "CompiledReduction":
        doc = json.loads(text)
        if doc.get("format") != "h10-reduction-sidecar-v1":
            raise ParseError("unrecognized sidecar format")
        atoms = []
        for a in doc["atoms"]:
            if a["kind"] == "const":
                atoms.append(ConstDef(a["var"], a["value"]))
            elif a["kind"] == "sum":
                atoms.append(SumDef(a["var"], a["left"], a["right"]))
            elif a["kind"] == "prod":
                atoms.append(ProdDef(a["var"], a["left"], a["right"]))
            else:
                atoms.append(EqDef(a["left"], a["right"]))
        atomized = AtomizedH10(tuple(doc["source_vars"]), tuple(doc["all_vars"]), tuple(atoms))
        return cls(
            instance=instance,
            decode={k: (v[0], v[1]) for k, v in doc["decode"].items()},
            recipes=tuple((name, expr) for name, expr in doc["recipes"]),
            atomized=atomized,
            source=parse_h10(doc["h10"]),
            mode=doc["mode"],
        )


def witness_h10(cr: CompiledReduction, int_solution: dict[str, int]) -> dict[str, NormalWord]:
    """Build a satisfying assignment of the compiled instance from an integer solution."""
    missing = [v for v in cr.atomized.source_vars if v not in int_solution]
    if missing:
        raise NotAnIntegerSolution(f"missing integer values for {missing}")
    if not cr.source.holds(int_solution):
        raise NotAnIntegerSolution("values do not solve the source polynomial system")
    ints = cr.atomized.extend_solution({v: int_solution[v] for v in cr.atomized.source_vars})
    p = cr.instance.presentation
    groups: dict[str, NormalWord] = {}
    for name, expr in cr.recipes:
        groups[name] = _word_expr(expr, ints, groups, p)
    result = evaluate(cr.instance, groups)
    if not result.satisfied:
        raise AssertionError("witness recipe produced a non-solution; compiler bug")
    return groups


def decode_solution(cr: CompiledReduction, asg: dict[str, NormalWord]) -> dict[str, int]:
    """Read integers off exponent sums; verify they solve the source system."""
    if not evaluate(cr.instance, asg).satisfied:
        raise NotASolution("assignment does not satisfy the compiled instance")
    p = cr.instance.presentation
    decoded = {x: exponent_sum(p, asg[gvar], ref) for x, (gvar, ref) in cr.decode.items()}
    if not cr.source.holds(decoded):
        raise DecodeInconsistency(f"decoded values {decoded} fail the source system")
    return decoded


# ---------------------------------------------------------------------------
# free-group compiler


class _Emitter:
    """Accumulates variables, equations, constraints, and recipes in order."""

    def __init__(self):
        self.variables: list[str] = []
        self.equations: list[GroupTerm] = []
        self.constraints: list = []
        self.recipes: list[tuple[str, dict]] = []
        self.counter = 0

    def fresh(self, role: str) -> str:
        name = f"_{role}{self.counter}"
        self.counter += 1
        return name

    def add_var(self, name: str, recipe: dict) -> str:
        self.variables.append(name)
        self.recipes.append((name, recipe))
        return name


def compile_h10_free(h: H10Instance, target: Presentation, mode: str = "pure-ab",
                     s1: Optional[str] = None, s2: Optional[str] = None) -> CompiledReduction:
    """Encode an integer polynomial system over a free group of rank >= 2.

    ``native-expsum`` keeps linear exponent-sum constraints in the output;
    ``pure-ab`` rewrites them into commutation equations plus abelianisation
    equalities, so the instance only uses ab constraints.
    """
    if mode not in ("pure-ab", "native-expsum"):
        raise ValueError(f"unknown mode {mode!r}")
    if target.edges or not target.is_raag():
        raise RankTooSmall("target must be a free presentation (no edges, all orders infinite)")
    if len(target.vertices) < 2:
        raise RankTooSmall("free target needs rank >= 2")
    s1 = s1 or target.vertices[0]
    s2 = s2 or target.vertices[1]
    if s1 == s2:
        raise RankTooSmall("distinguished generators must be distinct")
    p = target
    ws1 = parse_word(p, s1)
    ws2 = parse_word(p, s2)
    ws1s2 = multiply(p, ws1, ws2)
    atomized = atomize(h)
    em = _Emitter()
    avar: dict[str, str] = {}

    def ensure(intvar: str) -> str:
        if intvar not in avar:
            name = f"A_{intvar}"
            avar[intvar] = name
            em.add_var(name, w_pow(w_word(ws1), i_var(intvar)))
            em.equations.append(commutator_term(name, ws1))
        return avar[intvar]

    def expsum_or_gadget(items: list[tuple[int, str, str]], zero_term: GroupTerm,
                         pinned: str, witness: dict) -> None:
        """One |.|-condition: native mode emits the linear row, pure-ab a K gadget.

        ``zero_term`` must have zero exponent sum at ``pinned`` (s1 or s2) iff
        the condition holds; the gadget asserts ab(zero_term) = ab(u) with u
        confined to the complementary cyclic subgroup.
        """
        if mode == "native-expsum":
            em.constraints.append(ExpSumEq(tuple(items), 0))
            return
        other = ws2 if pinned == s1 else ws1
        u = em.add_var(em.fresh("u"), witness)
        em.equations.append(commutator_term(u, other))
        em.constraints.append(AbEq(zero_term, var_term(u)))

    for atom in atomized.atoms:
        if isinstance(atom, ConstDef):
            ax = ensure(atom.var)
            em.equations.append(var_term(ax) * const_term(ws1 ** (-atom.value)))
        elif isinstance(atom, EqDef):
            al = ensure(atom.left)
            ar = ensure(atom.right)
            em.equations.append(GroupTerm((VarAtom(al), VarAtom(ar, True))))
        elif isinstance(atom, SumDef):
            ay = ensure(atom.left)
            az = ensure(atom.right)
            ax = ensure(atom.var)
            zero = GroupTerm((VarAtom(ay), VarAtom(az), VarAtom(ax, True)))
            expsum_or_gadget(
                [(1, ay, s1), (1, az, s1), (-1, ax, s1)], zero, s1,
                w_pow(w_word(ws2), i_const(0)))
        elif isinstance(atom, ProdDef):
            t1, t2, t3 = atom.left, atom.right, atom.var
            a1 = ensure(t1)
            b = em.add_var(em.fresh("b"), w_pow(w_word(ws2), i_var(t1)))
            em.equations.append(commutator_term(b, ws2))
            # |a1|_s1 = |b|_s2; both sides are domain-pinned, one diagonal witness
            if mode == "native-expsum":
                em.constraints.append(ExpSumEq(((1, a1, s1), (-1, b, s2)), 0))
            else:
                w = em.add_var(em.fresh("w"), w_pow(w_word(ws1s2), i_var(t1)))
                em.equations.append(commutator_term(w, ws1s2))
                em.constraints.append(AbEq(GroupTerm((VarAtom(a1), VarAtom(b))), var_term(w)))
            a2 = ensure(t2)
            c = em.add_var(em.fresh("c"),
                           w_pow(w_concat(w_word(ws1), w_ref(b)), i_var(t2)))
            # [c, s1 b] = 1 with b a variable
            em.equations.append(GroupTerm((
                VarAtom(c), ConstAtom(ws1), VarAtom(b),
                VarAtom(c, True), VarAtom(b, True), ConstAtom(ws1.inverse()))))
            # |a2|_s1 = |c|_s1
            expsum_or_gadget(
                [(1, a2, s1), (-1, c, s1)],
                GroupTerm((VarAtom(a2), VarAtom(c, True))), s1,
                w_pow(w_word(ws2), i_mul(i_const(-1), i_var(t1), i_var(t2))))
            a3 = ensure(t3)
            # |a3|_s1 = |c|_s2 through a diagonal witness w2
            if mode == "native-expsum":
                em.constraints.append(ExpSumEq(((1, a3, s1), (-1, c, s2)), 0))
            else:
                w2 = em.add_var(em.fresh("w"), w_pow(w_word(ws1s2), i_var(t3)))
                em.equations.append(commutator_term(w2, ws1s2))
                u2 = em.add_var(em.fresh("u"),
                                w_pow(w_word(ws2), i_mul(i_const(-1), i_var(t3))))
                em.equations.append(commutator_term(u2, ws2))
                em.constraints.append(AbEq(GroupTerm((VarAtom(a3), VarAtom(w2, True))),
                                           var_term(u2)))
                u3 = em.add_var(em.fresh("u"),
                                w_pow(w_word(ws1),
                                      i_add(i_var(t2), i_mul(i_const(-1), i_var(t3)))))
                em.equations.append(commutator_term(u3, ws1))
                em.constraints.append(AbEq(GroupTerm((VarAtom(c), VarAtom(w2, True))),
                                           var_term(u3)))

    for v in atomized.source_vars:
        ensure(v)
    inst = Instance(p, tuple(em.variables),
                    (Disjunct(tuple(em.equations), tuple(em.constraints)),))
    decode = {v: (avar[v], s1) for v in atomized.source_vars}
    return CompiledReduction(inst, decode, tuple(em.recipes), atomized, h, mode)


# ---------------------------------------------------------------------------
# right-angled Artin compiler


def _compile_factor(p: Presentation) -> Presentation:
    """Descend into join factors until the graph is join-indecomposable."""
    current = p
    while True:
        comps = direct_product_decomposition(current)
        if len(comps) == 1:
            return current
        for comp in comps:
            sub = induced_subpresentation(current, comp)
            if len(sub.edges) < len(sub.vertices) * (len(sub.vertices) - 1) // 2:
                current = sub
                break
        else:
            raise AssertionError("nonabelian graph decomposed into complete factors")


def compile_h10_raag(h: H10Instance, target: Presentation) -> CompiledReduction:
    """Encode an integer polynomial system over a nonabelian right-angled Artin group.

    Pipeline: recurse into a nonabelian join factor; take two non-adjacent
    weak modules S1, S2 of that factor and their diagonal products h1, h2;
    relativize every variable to the diagonal subgroup (equal exponent sums
    inside each module); express integer arithmetic on the h1 coordinate,
    with multiplication through the centralizer-of-h1*b gadget modulo the
    kernel of both module coordinates.
    """
    if not target.is_raag():
        raise InvalidPresentation("target must be a right-angled Artin presentation")
    nv = len(target.vertices)
    if len(target.edges) == nv * (nv - 1) // 2:
        raise AbelianTarget("complete graph: the target group is abelian")

    factor = _compile_factor(target)
    pair = nonadjacent_weak_module_pair(factor)
    assert pair is not None, "join-indecomposable nonabelian graph must have a non-adjacent pair"
    mod1, mod2 = pair
    S1, S2 = mod1.vertices, mod2.vertices
    p = target
    h1 = normalize(p, [(v, 1) for v in S1])
    h2 = normalize(p, [(v, 1) for v in S2])
    h1h2 = multiply(p, h1, h2)
    ref = S1[0]
    _, link1 = star_link(factor, set(S1))
    _, link2 = star_link(factor, set(S2))
    cover1 = [v for v in factor.vertices if v not in S1 and v not in link1]
    cover2 = [v for v in factor.vertices if v not in S2 and v not in link2]
    assert cover1 and cover2, "non-adjacent modules guarantee nonempty star covers"

    atomized = atomize(h)
    em = _Emitter()
    avar: dict[str, str] = {}

    def zero_gadget(term: GroupTerm, module: tuple[str, ...], cover: list[str]) -> None:
        """|term|_s = 0 for all s in the module, via the star cover of its complement."""
        zs = []
        arg = _term_wexpr(term)
        for j, u in enumerate(cover):
            z = em.add_var(em.fresh("z"), w_cover_split(arg, module, cover, j))
            em.equations.append(commutator_term(z, parse_word(p, u)))
            zs.append(z)
        em.constraints.append(AbEq(term, GroupTerm(tuple(VarAtom(z) for z in zs))))

    def relativize(name: str) -> None:
        """Confine a variable to the diagonal subgroup of both modules."""
        for module, cover, other in ((S1, cover1, S2), (S2, cover2, S1)):
            if len(module) == 1:
                continue  # a single vertex is trivially diagonal
            w = multiply(p, normalize(p, [(v, 1) for v in module]),
                         parse_word(p, other[0]))
            y = em.add_var(em.fresh("y"),
                           w_pow(w_word(w), {"op": "expsum", "group": name,
                                             "vertex": module[0]}))
            em.equations.append(commutator_term(y, w))
            zero_gadget(GroupTerm((VarAtom(name), VarAtom(y, True))), module, cover)

    def ensure(intvar: str) -> str:
        if intvar not in avar:
            name = f"A_{intvar}"
            avar[intvar] = name
            em.add_var(name, w_pow(w_word(h1), i_var(intvar)))
            relativize(name)
        return avar[intvar]

    for atom in atomized.atoms:
        if isinstance(atom, ConstDef):
            ax = ensure(atom.var)
            zero_gadget(var_term(ax) * const_term(h1 ** (-atom.value)), S1, cover1)
        elif isinstance(atom, EqDef):
            al = ensure(atom.left)
            ar = ensure(atom.right)
            zero_gadget(GroupTerm((VarAtom(al), VarAtom(ar, True))), S1, cover1)
        elif isinstance(atom, SumDef):
            ay = ensure(atom.left)
            az = ensure(atom.right)
            ax = ensure(atom.var)
            zero_gadget(GroupTerm((VarAtom(ay), VarAtom(az), VarAtom(ax, True))), S1, cover1)
        elif isinstance(atom, ProdDef):
            t1, t2, t3 = atom.left, atom.right, atom.var
            a1 = ensure(t1)
            b = em.add_var(em.fresh("b"), w_pow(w_word(h2), i_var(t1)))
            relativize(b)
            zero_gadget(var_term(b), S1, cover1)  # b in the kernel of the h1 coordinate
            # |a1|_h1 = |b|_h2 through a diagonal witness
            w = em.add_var(em.fresh("w"), w_pow(w_word(h1h2), i_var(t1)))
            em.equations.append(commutator_term(w, h1h2))
            zero_gadget(GroupTerm((VarAtom(a1), VarAtom(w, True))), S1, cover1)
            zero_gadget(GroupTerm((VarAtom(b), VarAtom(w, True))), S2, cover2)
            a2 = ensure(t2)
            # c = c1 c2 with c1 centralizing h1 b and c2 in both kernels
            hb = w_cyclic_conjugator(w_concat(w_word(h1), w_ref(b)))
            c1 = em.add_var(em.fresh("c"),
                            w_conj(w_pow(w_concat(w_word(h1), w_ref(b)), i_var(t2)), hb))
            relativize(c1)
            em.equations.append(GroupTerm((
                VarAtom(c1), ConstAtom(h1), VarAtom(b),
                VarAtom(c1, True), VarAtom(b, True), ConstAtom(h1.inverse()))))
            c2 = em.add_var(em.fresh("c"), w_word(p.identity()))
            zero_gadget(var_term(c2), S1, cover1)
            zero_gadget(var_term(c2), S2, cover2)
            c = em.add_var(em.fresh("c"), w_concat(w_ref(c1), w_ref(c2)))
            relativize(c)
            em.equations.append(GroupTerm((VarAtom(c), VarAtom(c2, True), VarAtom(c1, True))))
            # |a2|_h1 = |c|_h1
            zero_gadget(GroupTerm((VarAtom(a2), VarAtom(c, True))), S1, cover1)
            a3 = ensure(t3)
            # |a3|_h1 = |c|_h2 through a second diagonal witness
            w2 = em.add_var(em.fresh("w"), w_pow(w_word(h1h2), i_var(t3)))
            em.equations.append(commutator_term(w2, h1h2))
            zero_gadget(GroupTerm((VarAtom(a3), VarAtom(w2, True))), S1, cover1)
            zero_gadget(GroupTerm((VarAtom(c), VarAtom(w2, True))), S2, cover2)

    for v in atomized.source_vars:
        ensure(v)
    inst = Instance(p, tuple(em.variables),
                    (Disjunct(tuple(em.equations), tuple(em.constraints)),))
    decode = {v: (avar[v], ref) for v in atomized.source_vars}
    return CompiledReduction(inst, decode, tuple(em.recipes), atomized, h, "raag")


# ---------------------------------------------------------------------------
# finite abelianisation: ab constraints to commutator-subgroup cosets


def reduce_finite_ab(inst: Instance) -> Instance:
    """Rewrite every ab constraint as a coset-of-G' constraint.

    Requires every vertex order to be finite. Each ab(lhs) = ab(rhs) becomes
    W(x) = alpha with W the variable part; a fresh variable Z = W(x) (reused
    when W is a single variable) then carries Coset(Z, representative).
    """
    p = inst.presentation
    if not p.has_finite_abelianisation():
        raise InfiniteAbelianisation("reduction requires every vertex order finite")
    fresh_counter = 0
    taken = set(inst.variables)
    new_vars = list(inst.variables)
    new_disjuncts = []
    for d in inst.disjuncts:
        eqs = list(d.equations)
        cons = []
        for con in d.constraints:
            if not isinstance(con, AbEq):
                cons.append(con)
                continue
            combined = con.lhs * con.rhs.inverse()
            var_atoms = [a for a in combined.atoms if isinstance(a, VarAtom)]
            const_vec = abelianize(p, GroupTerm(
                tuple(a for a in combined.atoms if isinstance(a, ConstAtom))).evaluate(p, {}))
            target = -const_vec
            rep = normalize(p, [(v, target[v]) for v in p.vertices])
            if len(var_atoms) == 1 and not var_atoms[0].inverse:
                cons.append(Coset(var_atoms[0].name, rep))
                continue
            if len(var_atoms) == 1 and var_atoms[0].inverse:
                cons.append(Coset(var_atoms[0].name, rep.inverse()))
                continue
            while True:
                z = f"_z{fresh_counter}"
                fresh_counter += 1
                if z not in taken:
                    taken.add(z)
                    break
            new_vars.append(z)
            eqs.append(GroupTerm(tuple(var_atoms) + (VarAtom(z, True),)))
            cons.append(Coset(z, rep))
        new_disjuncts.append(Disjunct(tuple(eqs), tuple(cons)))
    return Instance(p, tuple(new_vars), tuple(new_disjuncts), inst.graph_ref)


# ---------------------------------------------------------------------------
# generic positive-existential interpretation rewriting


PLACEHOLDER = "$"


@dataclass(frozen=True)
class TemplateDisjunct:
    equations: tuple[GroupTerm, ...]  # VarAtoms named "$0".."$k-1" are placeholders
    locals: tuple[str, ...] = ()


@dataclass(frozen=True)
class FormulaTemplate:
    arity: int
    disjuncts: tuple[TemplateDisjunct, ...]


@dataclass(frozen=True)
class Interpretation:
    """Interpret a target group inside a source group by equations.

    The domain formula has one argument; multiplication means
    arg0 * arg1 = arg2; equality means arg0 = arg1. Constants of the target
    are translated by mapping each target vertex to a source word.
    """
    source: Presentation
    target: Presentation
    domain: FormulaTemplate
    multiplication: FormulaTemplate
    equality: FormulaTemplate
    vertex_map: tuple[tuple[str, str], ...]  # target vertex -> source word text

    def map_constant(self, w: NormalWord) -> NormalWord:
        table = {v: parse_word(self.source, text) for v, text in self.vertex_map}
        out = self.source.identity()
        for v, e in w.syllables:
            out = multiply(self.source, out, table[v] ** e)
        return out


def integers_into_free_interpretation(source: Presentation, s: str,
                                      target: Optional[Presentation] = None) -> Interpretation:
    """The infinite cyclic subgroup <s> of a free group as a copy of (Z, +)."""
    source.check_vertex(s)
    target = target or Presentation.free(["n"])
    ws = parse_word(source, s)
    dom = FormulaTemplate(1, (TemplateDisjunct((
        GroupTerm((VarAtom("$0"), ConstAtom(ws), VarAtom("$0", True), ConstAtom(ws.inverse()))),),),))
    mult = FormulaTemplate(3, (TemplateDisjunct((
        GroupTerm((VarAtom("$0"), VarAtom("$1"), VarAtom("$2", True))),),),))
    eq = FormulaTemplate(2, (TemplateDisjunct((
        GroupTerm((VarAtom("$0"), VarAtom("$1", True))),),),))
    return Interpretation(source, target, dom, mult, eq, ((target.vertices[0], s),))


def _substitute(template: FormulaTemplate, args: list[Optional[VarAtom | ConstAtom]],
                fresh, interp: Interpretation) -> list[tuple[tuple[GroupTerm, ...], tuple[str, ...]]]:
    """Instantiate the template on argument atoms (None means the identity)."""
    out = []
    for td in template.disjuncts:
        rename = {loc: fresh() for loc in td.locals}
        eqs = []
        for term in td.equations:
            atoms = []
            for a in term.atoms:
                if isinstance(a, VarAtom) and a.name.startswith(PLACEHOLDER):
                    arg = args[int(a.name[1:])]
                    if arg is None:
                        continue
                    if isinstance(arg, VarAtom):
                        atoms.append(VarAtom(arg.name, arg.inverse != a.inverse))
                    else:
                        atoms.append(ConstAtom(arg.word.inverse() if a.inverse else arg.word))
                elif isinstance(a, VarAtom) and a.name in rename:
                    atoms.append(VarAtom(rename[a.name], a.inverse))
                else:
                    atoms.append(a)
            eqs.append(GroupTerm(tuple(atoms)))
        out.append((tuple(eqs), tuple(rename.values())))
    return out


def rewrite_under_interpretation(interp: Interpretation, inst: Instance) -> Instance:
    """Translate a flattened instance over the target into one over the source.

    Every variable receives the domain gadget; each short equation becomes
    the corresponding defining formula. Disjunctions multiply out, so the
    result is again a plain disjunction of systems.
    """
    for d in inst.disjuncts:
        for term in d.equations:
            if not is_short(term):
                raise NotFlattened("rewrite needs short-form equations; call flatten first")
        if d.constraints:
            raise NotFlattened("constraint rewriting is not defined for this interpretation")
    if inst.presentation != interp.target:
        raise InvalidPresentation("instance is not over the interpretation's target")

    counter = 0

    def fresh() -> str:
        nonlocal counter
        name = f"_i{counter}"
        counter += 1
        return name

    def map_atom(a) -> Optional[VarAtom | ConstAtom]:
        if isinstance(a, VarAtom):
            return a
        mapped = interp.map_constant(a.word)
        return ConstAtom(mapped) if not mapped.is_identity() else None

    new_disjuncts = []
    for d in inst.disjuncts:
        items: list[list[tuple[tuple[GroupTerm, ...], tuple[str, ...]]]] = []
        for v in inst.variables:
            items.append(_substitute(interp.domain, [VarAtom(v)], fresh, interp))
        for term in d.equations:
            atoms = [map_atom(a) for a in term.atoms]
            atoms = [a for a in atoms if a is not None]
            if not atoms:
                continue
            if len(atoms) == 1:
                items.append(_substitute(interp.equality, [atoms[0], None], fresh, interp))
            elif len(atoms) == 2:
                inv = (VarAtom(atoms[1].name, not atoms[1].inverse)
                       if isinstance(atoms[1], VarAtom) else ConstAtom(atoms[1].word.inverse()))
                items.append(_substitute(interp.equality, [atoms[0], inv], fresh, interp))
            else:
                inv = (VarAtom(atoms[2].name, not atoms[2].inverse)
                       if isinstance(atoms[2], VarAtom) else ConstAtom(atoms[2].word.inverse()))
                items.append(_substitute(interp.multiplication, [atoms[0], atoms[1], inv],
                                         fresh, interp))
        from itertools import product as iproduct
        for choice in iproduct(*items) if items else [()]:
            eqs: list[GroupTerm] = []
            local_names: list[str] = []
            for ceqs, clocals in choice:
                eqs.extend(ceqs)
                local_names.extend(clocals)
            new_disjuncts.append((tuple(eqs), tuple(local_names)))

    all_locals: list[str] = []
    for _, locs in new_disjuncts:
        all_locals.extend(locs)
    variables = tuple(inst.variables) + tuple(all_locals)
    return Instance(interp.source, variables,
                    tuple(Disjunct(eqs, ()) for eqs, _ in new_disjuncts))
