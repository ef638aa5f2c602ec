import random

import pytest
from hypothesis import given, settings, strategies as st

from abelcon.errors import (
    FiniteOrderVertexInSupport,
    IdentityElement,
    NotCyclicallyReduced,
    PresentationMismatch,
    UnknownVertex,
)
from abelcon.words import (
    Presentation,
    ball,
    block_decomposition,
    centralizer_generators,
    cyclically_reduce,
    format_word,
    geodesic_length,
    invert,
    is_cyclically_reduced,
    is_in_centralizer,
    multiply,
    normalize,
    parse_word,
    support,
)

from .oracle import Piling, all_raw_words, bfs_ball_normal_forms, oracle_normal_form


def W(p, text):
    return parse_word(p, text)


# ---------------------------------------------------------------------------
# normalize


def test_normalize_commuting_cancellation(gamma1):
    assert format_word(W(gamma1, "a b a^-1")) == "b"


def test_normalize_non_adjacent_irreducible(gamma1):
    assert format_word(W(gamma1, "a c")) == "a c"


def test_normalize_involution(pentagon):
    assert W(pentagon, "a a").is_identity()


def test_normalize_unknown_vertex(gamma1):
    with pytest.raises(UnknownVertex):
        normalize(gamma1, [("q", 1)])


def test_normalize_idempotent_samples(gamma1, pentagon, f2):
    rng = random.Random(7)
    for p in (gamma1, pentagon, f2):
        for _ in range(200):
            raw = [(rng.choice(p.vertices), rng.choice([-3, -2, -1, 1, 2, 3]))
                   for _ in range(rng.randrange(0, 9))]
            w = normalize(p, raw)
            assert normalize(p, [(s.vertex, s.exponent) for s in w.syllables]) == w


@st.composite
def raw_words(draw):
    verts = "abcd"
    n = draw(st.integers(0, 8))
    return [(draw(st.sampled_from(verts)), draw(st.integers(-3, 3).filter(bool)))
            for _ in range(n)]


@given(raw_words(), raw_words(), raw_words())
@settings(max_examples=120, deadline=None)
def test_multiply_associative(u, v, w):
    p = Presentation.raag("abcd", [("a", "b"), ("b", "c"), ("c", "d")])
    x, y, z = normalize(p, u), normalize(p, v), normalize(p, w)
    assert multiply(p, multiply(p, x, y), z) == multiply(p, x, multiply(p, y, z))
    e = p.identity()
    assert multiply(p, x, e) == x and multiply(p, e, x) == x


def test_multiply_examples(fxy, gamma1, z2):
    assert multiply(fxy, W(fxy, "x"), W(fxy, "x^-1")).is_identity()
    assert format_word(multiply(gamma1, W(gamma1, "a b"), W(gamma1, "a"))) == "a^2 b"
    assert format_word(multiply(z2, W(z2, "a b"), W(z2, "a b"))) == "a^2 b^2"


def test_multiply_mismatch(gamma1, f2):
    with pytest.raises(PresentationMismatch):
        multiply(gamma1, W(gamma1, "a"), W(f2, "a"))


def test_invert(fxy, c2_free_square):
    w = W(fxy, "x y")
    assert format_word(invert(fxy, w)) == "y^-1 x^-1"
    assert multiply(fxy, w, invert(fxy, w)).is_identity()
    e = fxy.identity()
    assert invert(fxy, e) == e
    ab = W(c2_free_square, "a b")
    assert format_word(invert(c2_free_square, ab)) == "b a"
    assert multiply(c2_free_square, ab, invert(c2_free_square, ab)).is_identity()


# ---------------------------------------------------------------------------
# equality vs the piling oracle, exhaustively on short words


@pytest.mark.parametrize("pres_name,maxlen", [("gamma1", 4), ("pentagon", 4), ("f2", 4)])
def test_canonicity_matches_oracle(request, pres_name, maxlen):
    p = request.getfixturevalue(pres_name)
    by_normalize = {}
    by_oracle = {}
    for raw in all_raw_words(p, maxlen):
        nf = normalize(p, list(raw)).syllables
        onf = oracle_normal_form(p, list(raw))
        by_normalize.setdefault(nf, set()).add(onf)
        by_oracle.setdefault(onf, set()).add(nf)
    assert all(len(s) == 1 for s in by_normalize.values())
    assert all(len(s) == 1 for s in by_oracle.values())


# ---------------------------------------------------------------------------
# lengths and support


def test_geodesic_length_examples(z2, gamma1):
    assert geodesic_length(z2, W(z2, "a b a^-1")) == 1
    assert geodesic_length(z2, z2.identity()) == 0
    assert geodesic_length(gamma1, W(gamma1, "a c")) == 2


def test_geodesic_length_is_bfs_distance(gamma1, pentagon, c2_free_square):
    for p, radius in ((gamma1, 5), (pentagon, 5), (c2_free_square, 6)):
        dist = bfs_ball_normal_forms(p, radius)
        for nf, d in dist.items():
            assert geodesic_length(p, normalize(p, list(nf))) == d


def test_finite_order_syllable_cost():
    p = Presentation(["v"], [], {"v": 5})
    assert geodesic_length(p, normalize(p, [("v", 3)])) == 2  # v^3 = v^-2
    assert geodesic_length(p, normalize(p, [("v", 2)])) == 2


def test_support(gamma1):
    assert support(gamma1, W(gamma1, "a c")) == {"a", "c"}
    assert support(gamma1, W(gamma1, "a b a^-1")) == {"b"}
    assert support(gamma1, gamma1.identity()) == frozenset()


def test_ball_sizes(f2, z2, c2_free_square):
    assert len(ball(f2, 1)) == 5
    assert [format_word(w) for w in ball(f2, 1)] == ["1", "a", "a^-1", "b", "b^-1"]
    assert len(ball(z2, 1)) == 5
    assert len(ball(c2_free_square, 2)) == 5
    for r in range(6):  # radii 0 through 5
        assert len(ball(f2, r)) == 2 * 3 ** r - 1


# ---------------------------------------------------------------------------
# cyclic reduction


def test_cyclically_reduce_one_step(fxy):
    core, h = cyclically_reduce(fxy, W(fxy, "x y x^-1"))
    assert format_word(core) == "y"
    assert format_word(h) == "x"
    assert multiply(fxy, multiply(fxy, invert(fxy, h), W(fxy, "x y x^-1")), h) == core


def test_cyclically_reduce_already_reduced(fxy):
    w = W(fxy, "x y")
    core, h = cyclically_reduce(fxy, w)
    assert core == w and h.is_identity()


def test_cyclically_reduce_through_commuting_screen(gamma1):
    g = W(gamma1, "b a c a^-1 b^-1")
    core, h = cyclically_reduce(gamma1, g)
    assert format_word(core) == "c"
    assert g.conjugate_by(h) == core


def test_cyclic_core_minimal_over_conjugates(gamma1, pentagon):
    for p in (gamma1, pentagon):
        for g in ball(p, 3):
            core, h = cyclically_reduce(p, g)
            assert g.conjugate_by(h) == core
            assert is_cyclically_reduced(p, core)
            for x in ball(p, 2):
                assert geodesic_length(p, core) <= geodesic_length(p, g.conjugate_by(x))


# ---------------------------------------------------------------------------
# block decomposition


def test_blocks_commuting_vertices(gamma1):
    dec = block_decomposition(gamma1, W(gamma1, "a^2 b^3"))
    assert [(format_word(r), n) for r, n in dec.blocks] == [("a", 2), ("b", 3)]


def test_blocks_primitive_free(fxy):
    dec = block_decomposition(fxy, W(fxy, "x y"))
    assert [(format_word(r), n) for r, n in dec.blocks] == [("x y", 1)]


def test_blocks_root_extraction(gamma1):
    dec = block_decomposition(gamma1, W(gamma1, "a c a c"))
    assert [(format_word(r), n) for r, n in dec.blocks] == [("a c", 2)]


def test_blocks_require_cyclically_reduced(fxy):
    with pytest.raises(NotCyclicallyReduced):
        block_decomposition(fxy, W(fxy, "x y x^-1"))


def test_blocks_reject_finite_order(pentagon):
    with pytest.raises(FiniteOrderVertexInSupport):
        block_decomposition(pentagon, W(pentagon, "a c"))


# ---------------------------------------------------------------------------
# centralizers


def test_centralizer_vertex(gamma1):
    desc = centralizer_generators(gamma1, W(gamma1, "a"))
    assert [format_word(w) for w in desc.cyclic_parts] == ["a"]
    assert desc.link_vertices == {"b"}
    assert desc.conjugator.is_identity()


def test_centralizer_ad(gamma1):
    desc = centralizer_generators(gamma1, W(gamma1, "a d"))
    assert [format_word(w) for w in desc.cyclic_parts] == ["a d"]
    assert desc.link_vertices == frozenset()


def test_centralizer_square(fxy):
    desc = centralizer_generators(fxy, W(fxy, "x^2"))
    assert [format_word(w) for w in desc.cyclic_parts] == ["x"]
    assert desc.exponents == (2,)
    assert desc.link_vertices == frozenset()


def test_centralizer_rejects_identity_and_torsion(gamma1, pentagon):
    with pytest.raises(IdentityElement):
        centralizer_generators(gamma1, gamma1.identity())
    with pytest.raises(FiniteOrderVertexInSupport):
        centralizer_generators(pentagon, parse_word(pentagon, "a"))


def test_is_in_centralizer(gamma1):
    a, b, c = W(gamma1, "a"), W(gamma1, "b"), W(gamma1, "c")
    assert is_in_centralizer(gamma1, a, b)
    assert not is_in_centralizer(gamma1, a, c)
    g = W(gamma1, "a b c")
    assert is_in_centralizer(gamma1, g, g)


def _expressible_by_short_products(p, desc, x):
    """Reconstruct x as h (prod roots^m_i * link word) h^-1 with small exponents."""
    y = x.conjugate_by(desc.conjugator)
    budget = geodesic_length(p, y)
    vectors = [()]
    for b in desc.cyclic_parts:
        lb = geodesic_length(p, b)
        vectors = [v + (m,) for v in vectors for m in range(-budget // lb, budget // lb + 1)]
    for vec in vectors:
        prod = p.identity()
        for b, m in zip(desc.cyclic_parts, vec):
            prod = multiply(p, prod, b ** m)
        rest = multiply(p, invert(p, prod), y)
        if support(p, rest) <= desc.link_vertices:
            return True
    return False


def test_centralizer_description_matches_commutator_test(gamma1):
    radius = 3
    elements = ball(gamma1, radius)
    for g in elements:
        if g.is_identity():
            continue
        desc = centralizer_generators(gamma1, g)
        for x in desc.generators(gamma1):
            assert is_in_centralizer(gamma1, g, x)
        for x in elements:
            assert desc.contains(gamma1, x) == is_in_centralizer(gamma1, g, x), (
                format_word(g), format_word(x))


def test_centralizer_membership_reconstructed_from_generators(gamma1):
    rng = random.Random(11)
    elements = ball(gamma1, 3)
    sample = rng.sample(elements, 40)
    for g in sample:
        if g.is_identity():
            continue
        desc = centralizer_generators(gamma1, g)
        for x in rng.sample(elements, 30):
            if is_in_centralizer(gamma1, g, x):
                assert _expressible_by_short_products(gamma1, desc, x)
