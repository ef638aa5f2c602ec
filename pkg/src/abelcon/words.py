"""Exact arithmetic in graph products of cyclic groups.

A presentation is a finite simple graph with a cyclic group attached to each
vertex (infinite, or finite of order k >= 2); adjacent vertex groups commute.
Elements are stored as canonical geodesic syllable sequences, so two elements
are equal in the group iff their normal forms are identical tuples.

The canonical form is the lexicographically least geodesic: repeatedly emit
the least vertex (in declaration order) whose syllable can be commuted to the
front of the remaining word.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import (
    FiniteOrderVertexInSupport,
    IdentityElement,
    InvalidPresentation,
    NotCyclicallyReduced,
    ParseError,
    PresentationMismatch,
    UnknownVertex,
)


class Syllable(NamedTuple):
    vertex: str
    exponent: int


class Presentation:
    """Graph product of cyclic groups over a finite simple graph.

    ``vertices`` fixes the canonical total order used for all tie-breaking.
    ``order`` maps each vertex to its cyclic order (``None`` means infinite).
    Instances are immutable after construction and safe to share.
    """

    def __init__(self, vertices: Sequence[str], edges: Iterable[tuple[str, str]],
                 order: Optional[dict[str, Optional[int]]] = None):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidPresentation("duplicate vertex names")
        for v in self.vertices:
            bad = not v or v == "1" or any(ch.isspace() or ch in "^(){};*=|.#@" for ch in v)
            if bad:
                raise InvalidPresentation(f"bad vertex name {v!r}")
        self.index = {v: i for i, v in enumerate(self.vertices)}
        order = dict(order or {})
        self.order: dict[str, Optional[int]] = {}
        for v in self.vertices:
            k = order.pop(v, None)
            if k is not None and (not isinstance(k, int) or k < 2):
                raise InvalidPresentation(f"vertex order must be an integer >= 2 or None, got {k!r}")
            self.order[v] = k
        if order:
            raise UnknownVertex(f"order given for undeclared vertices {sorted(order)}")
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        canon_edges = set()
        for u, v in edges:
            if u not in self.index or v not in self.index:
                raise UnknownVertex(f"edge ({u}, {v}) uses undeclared vertex")
            if u == v:
                raise InvalidPresentation(f"loop at vertex {u}")
            adj[u].add(v)
            adj[v].add(u)
            canon_edges.add((min(u, v, key=self.index.__getitem__),
                             max(u, v, key=self.index.__getitem__)))
        self.edges = frozenset(canon_edges)
        self.adj = {v: frozenset(adj[v]) for v in self.vertices}
        self._key = (self.vertices, self.edges, tuple(self.order[v] for v in self.vertices))
        self._hash = hash(self._key)
        self._identity = NormalWord(self, ())

    # -- constructors ------------------------------------------------------

    @classmethod
    def free(cls, names: Sequence[str]) -> "Presentation":
        return cls(names, [])

    @classmethod
    def raag(cls, names: Sequence[str], edges: Iterable[tuple[str, str]]) -> "Presentation":
        return cls(names, edges)

    @classmethod
    def racg(cls, names: Sequence[str], edges: Iterable[tuple[str, str]]) -> "Presentation":
        return cls(names, edges, {v: 2 for v in names})

    @classmethod
    def from_text(cls, text: str) -> "Presentation":
        """Parse the graph file format: ``vertex <name> <order|inf>`` / ``edge <u> <v>`` lines."""
        vertices: list[str] = []
        order: dict[str, Optional[int]] = {}
        edges: list[tuple[str, str]] = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "vertex" and len(parts) == 3:
                name, k = parts[1], parts[2]
                vertices.append(name)
                if k in ("inf", "oo", "∞"):
                    order[name] = None
                else:
                    try:
                        order[name] = int(k)
                    except ValueError:
                        raise ParseError(f"bad vertex order {k!r}", line=ln) from None
            elif parts[0] == "edge" and len(parts) == 3:
                edges.append((parts[1], parts[2]))
            else:
                raise ParseError(f"unrecognized graph line {line!r}", line=ln)
        return cls(vertices, edges, order)

    def to_text(self) -> str:
        lines = [f"vertex {v} {self.order[v] if self.order[v] is not None else 'inf'}"
                 for v in self.vertices]
        lines += [f"edge {u} {v}" for u, v in sorted(self.edges, key=lambda e: (self.index[e[0]], self.index[e[1]]))]
        return "\n".join(lines) + "\n"

    # -- graph structure ---------------------------------------------------

    def adjacent(self, u: str, v: str) -> bool:
        return v in self.adj[u]

    def link(self, v: str) -> frozenset[str]:
        return self.adj[v]

    def star(self, v: str) -> frozenset[str]:
        return self.adj[v] | {v}

    def check_vertex(self, v: str) -> None:
        if v not in self.index:
            raise UnknownVertex(f"unknown vertex {v!r}")

    def is_raag(self) -> bool:
        return all(k is None for k in self.order.values())

    def has_finite_abelianisation(self) -> bool:
        return all(k is not None for k in self.order.values())

    # -- syllable helpers --------------------------------------------------

    def reduce_exponent(self, v: str, e: int) -> int:
        """Reduce e into the symmetric range {-floor(k/2), ..., ceil(k/2)-1} for finite order k."""
        k = self.order[v]
        if k is None:
            return e
        r = e % k
        return r if r <= (k - 1) // 2 else r - k

    def syllable_cost(self, v: str, e: int) -> int:
        k = self.order[v]
        if k is None:
            return abs(e)
        r = e % k
        return min(r, k - r)

    def identity(self) -> "NormalWord":
        return self._identity

    def __eq__(self, other):
        return isinstance(other, Presentation) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        orders = ",".join(f"{v}:{self.order[v] or 'inf'}" for v in self.vertices)
        return f"Presentation({orders}; {len(self.edges)} edges)"


class NormalWord:
    """Canonical geodesic representative of a group element.

    Never build one directly except through :func:`normalize` and friends;
    equality and hashing are syntactic on the syllable tuple.
    """

    __slots__ = ("pres", "syllables", "_hash")

    def __init__(self, pres: Presentation, syllables: tuple[Syllable, ...]):
        self.pres = pres
        self.syllables = syllables
        self._hash = hash((pres._hash, syllables))

    def __eq__(self, other):
        return (isinstance(other, NormalWord) and self.pres == other.pres
                and self.syllables == other.syllables)

    def __hash__(self):
        return self._hash

    def __bool__(self):
        return bool(self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def __mul__(self, other: "NormalWord") -> "NormalWord":
        return multiply(self.pres, self, other)

    def inverse(self) -> "NormalWord":
        return invert(self.pres, self)

    def __pow__(self, n: int) -> "NormalWord":
        if n == 0:
            return self.pres.identity()
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = multiply(self.pres, out, base)
        return out

    def conjugate_by(self, h: "NormalWord") -> "NormalWord":
        """Return h^-1 * self * h."""
        return h.inverse() * self * h

    def __str__(self):
        return format_word(self)

    def __repr__(self):
        return f"<{format_word(self)}>"


def format_word(w: NormalWord) -> str:
    """Render a word in the ``name`` / ``name^k`` syntax; identity prints as 1."""
    if not w.syllables:
        return "1"
    parts = []
    for v, e in w.syllables:
        if e == 1 or w.pres.order[v] == 2:
            parts.append(v)
        else:
            parts.append(f"{v}^{e}")
    return " ".join(parts)


def parse_word(p: Presentation, text: str) -> NormalWord:
    """Parse whitespace-separated ``name`` / ``name^k`` / ``name^-k`` tokens.

    A run of single-character vertex names without separators (like ``abab``)
    is accepted as shorthand. ``1`` denotes the identity.
    """
    pairs: list[tuple[str, int]] = []
    for tok in text.split():
        if tok == "1":
            continue
        name, _, exp = tok.partition("^")
        if exp:
            try:
                e = int(exp)
            except ValueError:
                raise ParseError(f"bad exponent in token {tok!r}") from None
        else:
            e = 1
        if name in p.index:
            pairs.append((name, e))
        elif name and all(ch in p.index for ch in name):
            letters = [(ch, 1) for ch in name]
            if e != 1:
                if len(letters) > 1:
                    # (abab)^k must be written with parentheses at instance level;
                    # at word level an exponent applies to the last letter only.
                    raise ParseError(f"exponent on multi-letter run {tok!r}")
                letters = [(name, e)]
            pairs.extend(letters)
        else:
            raise UnknownVertex(f"unknown vertex in token {tok!r}")
    return normalize(p, pairs)


# ---------------------------------------------------------------------------
# normalization


def _push(p: Presentation, syllables: list[list], v: str, e: int) -> None:
    """Right-multiply the reduced syllable list by v^e, keeping it reduced."""
    e = p.reduce_exponent(v, e)
    if e == 0:
        return
    j = len(syllables) - 1
    while j >= 0:
        sv = syllables[j][0]
        if sv == v:
            merged = p.reduce_exponent(v, syllables[j][1] + e)
            if merged == 0:
                del syllables[j]
            else:
                syllables[j][1] = merged
            return
        if not p.adjacent(sv, v):
            break
        j -= 1
    syllables.append([v, e])


def _canonical_order(p: Presentation, syllables: list[list]) -> tuple[Syllable, ...]:
    """Sort a reduced syllable list into its lexicographically least shuffle."""
    rest = list(syllables)
    out = []
    index = p.index
    while rest:
        best_i = 0
        best_vi = index[rest[0][0]]
        # a later syllable is available iff it commutes with everything before it
        seen: list[str] = [rest[0][0]]
        for i in range(1, len(rest)):
            v = rest[i][0]
            vi = index[v]
            if vi < best_vi and all(p.adjacent(u, v) for u in seen):
                best_i, best_vi = i, vi
            seen.append(v)
        v, e = rest.pop(best_i)
        out.append(Syllable(v, e))
    return tuple(out)


def normalize(p: Presentation, word: Iterable[tuple[str, int]]) -> NormalWord:
    """Canonical form of a raw word given as (vertex, exponent) pairs."""
    syllables: list[list] = []
    for v, e in word:
        if v not in p.index:
            raise UnknownVertex(f"unknown vertex {v!r}")
        if not isinstance(e, int):
            raise ParseError(f"exponent must be an integer, got {e!r}")
        _push(p, syllables, v, e)
    return NormalWord(p, _canonical_order(p, syllables))


def _check(p: Presentation, *words: NormalWord) -> None:
    for w in words:
        if w.pres != p:
            raise PresentationMismatch("word built over a different presentation")


def multiply(p: Presentation, a: NormalWord, b: NormalWord) -> NormalWord:
    """Canonical form of the product a*b."""
    _check(p, a, b)
    syllables = [list(s) for s in a.syllables]
    for v, e in b.syllables:
        _push(p, syllables, v, e)
    return NormalWord(p, _canonical_order(p, syllables))


def multiply_all(p: Presentation, words: Iterable[NormalWord]) -> NormalWord:
    out = p.identity()
    for w in words:
        out = multiply(p, out, w)
    return out


def invert(p: Presentation, a: NormalWord) -> NormalWord:
    """Canonical form of the inverse."""
    _check(p, a)
    syllables = [[v, p.reduce_exponent(v, -e)] for v, e in reversed(a.syllables)]
    return NormalWord(p, _canonical_order(p, syllables))


def geodesic_length(p: Presentation, a: NormalWord) -> int:
    """Minimal number of generator/inverse letters spelling the element."""
    _check(p, a)
    return sum(p.syllable_cost(v, e) for v, e in a.syllables)


def support(p: Presentation, a: NormalWord) -> frozenset[str]:
    """Vertices occurring in any geodesic for the element."""
    _check(p, a)
    return frozenset(v for v, _ in a.syllables)


def exponent_pairs(a: NormalWord) -> list[tuple[str, int]]:
    return [(v, e) for v, e in a.syllables]


def _letter_key(p: Presentation, w: NormalWord) -> tuple:
    """Length-then-lex comparison key; positive letters sort before inverses."""
    letters = []
    for v, e in w.syllables:
        letters.extend([(p.index[v], 0 if e > 0 else 1)] * p.syllable_cost(v, e))
    return (len(letters), tuple(letters))


def sort_key(w: NormalWord) -> tuple:
    return _letter_key(w.pres, w)


# ---------------------------------------------------------------------------
# Cayley balls (length-then-lex ordered BFS)

_BALL_CACHE: dict[tuple, list] = {}


def generator_words(p: Presentation) -> list[NormalWord]:
    """All length-one group elements, deduplicated, in canonical order."""
    gens = []
    seen = set()
    for v in p.vertices:
        for e in (1, -1):
            g = normalize(p, [(v, e)])
            if g.syllables and g not in seen:
                seen.add(g)
                gens.append(g)
    gens.sort(key=sort_key)
    return gens


def ball(p: Presentation, radius: int) -> list[NormalWord]:
    """All elements of geodesic length <= radius, in length-then-lex order."""
    if radius < 0:
        return []
    key = (p._key, radius)
    if key in _BALL_CACHE:
        return _BALL_CACHE[key]
    gens = generator_words(p)
    elements = [p.identity()]
    frontier = [p.identity()]
    seen = {p.identity()}
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for g in gens:
                x = multiply(p, w, g)
                if x not in seen:
                    seen.add(x)
                    nxt.append(x)
        nxt.sort(key=sort_key)
        elements.extend(nxt)
        frontier = nxt
    _BALL_CACHE[key] = elements
    return elements


def sphere(p: Presentation, radius: int) -> list[NormalWord]:
    """Elements of geodesic length exactly radius."""
    if radius == 0:
        return [p.identity()]
    inner = len(ball(p, radius - 1))
    return ball(p, radius)[inner:]


# ---------------------------------------------------------------------------
# cyclic reduction


def _trace_initial_final(p: Presentation, w: NormalWord):
    """Positions of syllables movable to the front resp. back of the word."""
    sy = w.syllables
    n = len(sy)
    initial, final = [], []
    for i in range(n):
        if all(p.adjacent(sy[j].vertex, sy[i].vertex) for j in range(i)):
            initial.append(i)
        if all(p.adjacent(sy[j].vertex, sy[i].vertex) for j in range(i + 1, n)):
            final.append(i)
    return initial, final


def is_cyclically_reduced(p: Presentation, w: NormalWord) -> bool:
    """True iff no cyclic permutation plus relations shortens the element."""
    _check(p, w)
    return _cyclic_step(p, w) is None


def _cyclic_step(p: Presentation, w: NormalWord):
    """One strictly shortening conjugation (new_word, step_conjugator), or None."""
    sy = w.syllables
    initial, final = _trace_initial_final(p, w)
    final_set = set(final)
    for i in initial:
        v, e = sy[i]
        for j in final:
            if j == i or sy[j].vertex != v:
                continue
            f = sy[j].exponent
            if p.syllable_cost(v, e + f) < p.syllable_cost(v, e) + p.syllable_cost(v, f):
                # conjugating by v^-f moves the final syllable to the front
                step = normalize(p, [(v, -f)])
                conj = normalize(p, [(v, f)] + exponent_pairs(w) + [(v, -f)])
                return conj, step
    return None


def cyclically_reduce(p: Presentation, g: NormalWord) -> tuple[NormalWord, NormalWord]:
    """Return (core, h) with h^-1 g h = core cyclically reduced.

    Among all valid pairs, h has minimal geodesic length and is
    lexicographically least; this makes downstream output reproducible.
    """
    _check(p, g)
    core = g
    h = p.identity()
    while True:
        step = _cyclic_step(p, core)
        if step is None:
            break
        core, conj = step
        h = multiply(p, h, conj)
    if h.is_identity():
        return core, h
    target_len = geodesic_length(p, core)
    for cand in ball(p, geodesic_length(p, h)):
        c = g.conjugate_by(cand)
        if geodesic_length(p, c) == target_len:
            return c, cand
    raise AssertionError("greedy conjugator disappeared from its own ball")


# ---------------------------------------------------------------------------
# block decomposition and centralizers


class BlockDecomposition(NamedTuple):
    """Pairwise commuting non-power roots with exponents; product equals the input."""
    blocks: tuple[tuple[NormalWord, int], ...]


def _noncommutation_components(p: Presentation, vertices: frozenset[str]) -> list[frozenset[str]]:
    """Connected components of the non-commutation graph induced on the set."""
    remaining = set(vertices)
    comps = []
    while remaining:
        seed = min(remaining, key=p.index.__getitem__)
        comp = {seed}
        stack = [seed]
        remaining.discard(seed)
        while stack:
            u = stack.pop()
            for v in list(remaining):
                if not p.adjacent(u, v):
                    comp.add(v)
                    remaining.discard(v)
                    stack.append(v)
        comps.append(frozenset(comp))
    comps.sort(key=lambda c: min(p.index[v] for v in c))
    return comps


def induced_subpresentation(p: Presentation, vertices) -> Presentation:
    """Presentation on a vertex subset with the induced edges and orders."""
    keep = set(vertices)
    names = [v for v in p.vertices if v in keep]
    edges = [(u, v) for u, v in p.edges if u in keep and v in keep]
    return Presentation(names, edges, {v: p.order[v] for v in names})


_induced = induced_subpresentation


def _lift(p: Presentation, w: NormalWord) -> NormalWord:
    return normalize(p, exponent_pairs(w))


def _extract_root(p: Presentation, w: NormalWord) -> tuple[NormalWord, int]:
    """Maximal n with w = u^n; brute force over shorter words in the support subgroup."""
    total = geodesic_length(p, w)
    if total == 0:
        raise IdentityElement("identity has no root decomposition")
    sub = _induced(p, support(p, w))
    for n in range(total, 1, -1):
        if total % n:
            continue
        d = total // n
        for cand in sphere(sub, d):
            u = _lift(p, cand)
            if u ** n == w:
                return u, n
    return w, 1


def block_decomposition(p: Presentation, c: NormalWord) -> BlockDecomposition:
    """Split a cyclically reduced element into commuting maximal-root blocks."""
    _check(p, c)
    if not is_cyclically_reduced(p, c):
        raise NotCyclicallyReduced("block decomposition needs a cyclically reduced input")
    supp = support(p, c)
    for v in supp:
        if p.order[v] is not None:
            raise FiniteOrderVertexInSupport(
                f"block decomposition is only defined for infinite-order support; {v} has order {p.order[v]}")
    blocks = []
    for comp in _noncommutation_components(p, supp):
        word = normalize(p, [(v, e) for v, e in c.syllables if v in comp])
        root, n = _extract_root(p, word)
        blocks.append((root, n))
    out = BlockDecomposition(tuple(blocks))
    assert multiply_all(p, [r ** n for r, n in out.blocks]) == c
    return out


class CentralizerDesc(NamedTuple):
    """Conjugated description of a centralizer.

    The centralizer is ``h (prod_i <cyclic_parts[i]> x <link_vertices>) h^-1``
    where h is ``conjugator`` (so g = h core h^-1 with core cyclically reduced).
    ``exponents[i]`` is the block exponent of cyclic_parts[i] in the core.
    """
    conjugator: NormalWord
    cyclic_parts: tuple[NormalWord, ...]
    exponents: tuple[int, ...]
    link_vertices: frozenset[str]

    def generators(self, p: Presentation) -> list[NormalWord]:
        """Group elements generating the centralizer."""
        h = self.conjugator
        hinv = h.inverse()
        gens = [multiply(p, multiply(p, h, b), hinv) for b in self.cyclic_parts]
        for v in sorted(self.link_vertices, key=p.index.__getitem__):
            gens.append(multiply(p, multiply(p, h, normalize(p, [(v, 1)])), hinv))
        return gens

    def contains(self, p: Presentation, x: NormalWord) -> bool:
        """Exact membership test for the described centralizer.

        Conjugate x back, split its syllables by block support (the pieces
        pairwise commute), and require each piece to be a power of its root
        with the remainder supported on the link.
        """
        y = x.conjugate_by(self.conjugator)
        supports = [support(p, b) for b in self.cyclic_parts]
        allowed = frozenset().union(*supports, self.link_vertices) if supports else self.link_vertices
        if not support(p, y) <= allowed:
            return False
        for b, vs in zip(self.cyclic_parts, supports):
            piece = normalize(p, [(v, e) for v, e in y.syllables if v in vs])
            if piece.is_identity():
                continue
            lb, lp = geodesic_length(p, b), geodesic_length(p, piece)
            if lp % lb:
                return False
            m = lp // lb
            if piece != b ** m and piece != b ** (-m):
                return False
        return True


def centralizer_generators(p: Presentation, g: NormalWord) -> CentralizerDesc:
    """Describe C(g) via the block decomposition of a cyclically reduced conjugate.

    Only valid when every support vertex has infinite order (the block
    machinery is a right-angled Artin group theorem); callers in the general
    case must fall back to :func:`is_in_centralizer`.
    """
    _check(p, g)
    if g.is_identity():
        raise IdentityElement("centralizer description needs g != 1")
    for v in support(p, g):
        if p.order[v] is not None:
            raise FiniteOrderVertexInSupport(
                f"centralizer theorem needs infinite-order support; {v} is finite")
    core, h = cyclically_reduce(p, g)
    dec = block_decomposition(p, core)
    roots = tuple(r for r, _ in dec.blocks)
    exps = tuple(n for _, n in dec.blocks)
    link = frozenset.intersection(*[p.adj[v] for v in support(p, core)]) if core.syllables else frozenset()
    desc = CentralizerDesc(h, roots, exps, link)
    for x in desc.generators(p):
        assert is_in_centralizer(p, g, x)
    return desc


def is_in_centralizer(p: Presentation, g: NormalWord, x: NormalWord) -> bool:
    """Direct commutator test: true iff x g x^-1 g^-1 = 1."""
    _check(p, g, x)
    return multiply(p, x, g) == multiply(p, g, x)
