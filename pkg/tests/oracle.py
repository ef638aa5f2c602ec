"""Independent oracles used to cross-check the package.

The normal-form oracle is a heaps-of-pieces piling: each vertex keeps a pile
receiving its own exponents and anonymous blockers from non-commuting
syllables. Depiling greedily by least vertex yields a canonical word. This is
deliberately a different algorithm (and a different data layout) from the
package's scanning normalizer, so agreement between the two is evidence.
"""

from collections import deque
from itertools import product

BLOCK = "#"  # anonymous blocker entry


class Piling:
    def __init__(self, pres):
        self.pres = pres
        self.vertices = pres.vertices
        self.order = pres.order
        self.blockers = {
            v: [u for u in self.vertices if u != v and not pres.adjacent(u, v)]
            for v in self.vertices
        }

    def _reduce(self, v, e):
        k = self.order[v]
        if k is None:
            return e
        r = e % k
        return r if r <= (k - 1) // 2 else r - k

    def pile(self, pairs):
        piles = {v: deque() for v in self.vertices}
        for v, e in pairs:
            e = self._reduce(v, e)
            if e == 0:
                continue
            q = piles[v]
            if q and q[-1] is not BLOCK:
                merged = self._reduce(v, q[-1] + e)
                if merged == 0:
                    q.pop()
                    for u in self.blockers[v]:
                        piles[u].pop()
                else:
                    q[-1] = merged
            else:
                q.append(e)
                for u in self.blockers[v]:
                    piles[u].append(BLOCK)
        return piles

    def normal_pairs(self, pairs):
        """Canonical (vertex, exponent) list via greedy least-vertex depiling."""
        piles = self.pile(pairs)
        out = []
        while True:
            for v in self.vertices:
                q = piles[v]
                if q and q[0] is not BLOCK:
                    out.append((v, q[0]))
                    q.popleft()
                    for u in self.blockers[v]:
                        piles[u].popleft()
                    break
            else:
                break
        assert all(not piles[v] for v in self.vertices), "stranded pile content"
        return out


def oracle_normal_form(pres, pairs):
    return tuple(Piling(pres).normal_pairs(pairs))


def oracle_equal(pres, pairs_a, pairs_b):
    pil = Piling(pres)
    return tuple(pil.normal_pairs(pairs_a)) == tuple(pil.normal_pairs(pairs_b))


def letter_alphabet(pres):
    """One-letter words as (vertex, exponent) pairs, deduplicated as elements."""
    letters = []
    seen = set()
    pil = Piling(pres)
    for v in pres.vertices:
        for e in (1, -1):
            nf = tuple(pil.normal_pairs([(v, e)]))
            if nf and nf not in seen:
                seen.add(nf)
                letters.append((v, e))
    return letters


def bfs_ball_normal_forms(pres, radius):
    """Map oracle normal form -> BFS distance from the identity."""
    pil = Piling(pres)
    letters = letter_alphabet(pres)
    dist = {(): 0}
    frontier = [()]
    for d in range(1, radius + 1):
        nxt = []
        for nf in frontier:
            for (v, e) in letters:
                new = tuple(pil.normal_pairs(list(nf) + [(v, e)]))
                if new not in dist:
                    dist[new] = d
                    nxt.append(new)
        frontier = nxt
    return dist


def all_raw_words(pres, max_len):
    """Every raw word (tuple of one-letter pairs) of length <= max_len."""
    letters = letter_alphabet(pres)
    words = [()]
    for n in range(1, max_len + 1):
        words.extend(product(letters, repeat=n))
    return words
