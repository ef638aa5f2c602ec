"""Abelianisation map, exponent-sum homomorphisms, and exact linear systems.

The abelianisation of a graph product of cyclic groups is the direct product
of the vertex groups: one Z coordinate per infinite-order vertex and one
Z/k coordinate per finite-order vertex. A vertex induces a well-defined
exponent-sum homomorphism to Z exactly when its order is infinite (its image
then generates a Z direct factor); we treat the remaining coordinates as the
fixed complement.

Linear systems mix exact equations with congruences; solvability over Z is
decided by diagonalizing the integer matrix with unimodular row and column
operations (congruences get slack columns), so witnesses are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import NotAbelianPrimitive, ParseError
from .words import NormalWord, Presentation, _check


class AbelVector:
    """Image of a group element in the abelianisation.

    Stored as one integer per vertex in declaration order; coordinates at
    finite-order vertices are kept reduced into [0, k).
    """

    __slots__ = ("pres", "coords")

    def __init__(self, pres: Presentation, coords: Iterable[int]):
        reduced = []
        for v, c in zip(pres.vertices, coords):
            k = pres.order[v]
            reduced.append(c if k is None else c % k)
        self.pres = pres
        self.coords = tuple(reduced)
        if len(self.coords) != len(pres.vertices):
            raise ValueError("coordinate count does not match the presentation")

    @classmethod
    def zero(cls, pres: Presentation) -> "AbelVector":
        return cls(pres, [0] * len(pres.vertices))

    def __getitem__(self, vertex: str) -> int:
        return self.coords[self.pres.index[vertex]]

    @property
    def free_part(self) -> dict[str, int]:
        return {v: self[v] for v in self.pres.vertices if self.pres.order[v] is None}

    @property
    def torsion_part(self) -> dict[str, int]:
        return {v: self[v] for v in self.pres.vertices if self.pres.order[v] is not None}

    def __add__(self, other: "AbelVector") -> "AbelVector":
        return AbelVector(self.pres, [a + b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "AbelVector":
        return AbelVector(self.pres, [-a for a in self.coords])

    def __sub__(self, other: "AbelVector") -> "AbelVector":
        return self + (-other)

    def scale(self, n: int) -> "AbelVector":
        return AbelVector(self.pres, [n * a for a in self.coords])

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __eq__(self, other):
        return (isinstance(other, AbelVector) and self.pres == other.pres
                and self.coords == other.coords)

    def __hash__(self):
        return hash((self.pres, self.coords))

    def __repr__(self):
        inner = ", ".join(f"{v}:{c}" for v, c in zip(self.pres.vertices, self.coords))
        return f"AbelVector({inner})"


def abelianize(p: Presentation, a: NormalWord) -> AbelVector:
    """Sum of syllable exponents per vertex, reduced at finite-order vertices."""
    _check(p, a)
    coords = [0] * len(p.vertices)
    for v, e in a.syllables:
        coords[p.index[v]] += e
    return AbelVector(p, coords)


def is_abelian_primitive(p: Presentation, v: str) -> bool:
    """In a graph product of cyclic groups a vertex generates a Z factor iff it has infinite order."""
    p.check_vertex(v)
    return p.order[v] is None


def _require_primitive(p: Presentation, v: str) -> None:
    if not is_abelian_primitive(p, v):
        raise NotAbelianPrimitive(f"vertex {v!r} has finite order {p.order[v]}")


def exponent_sum(p: Presentation, a: NormalWord, v: str) -> int:
    """The Z coordinate of ab(a) at an infinite-order vertex; additive in a."""
    _check(p, a)
    _require_primitive(p, v)
    return sum(e for u, e in a.syllables if u == v)


def in_K(p: Presentation, a: NormalWord, vertices) -> bool:
    """Membership in the normal subgroup of elements with zero exponent-sum on the set."""
    return all(exponent_sum(p, a, v) == 0 for v in vertices)


@dataclass(frozen=True)
class SameExpSums:
    """|g|_x = |h|_x for every x in the vertex tuple."""
    vertices: tuple[str, ...]
    g: NormalWord
    h: NormalWord


@dataclass(frozen=True)
class CrossExpSum:
    """|g|_s = |h|_t for two distinct distinguished vertices."""
    s: str
    t: str
    g: NormalWord
    h: NormalWord


@dataclass(frozen=True)
class DiagonalExpSums:
    """|g|_u = |g|_v for every pair u, v in the vertex tuple."""
    vertices: tuple[str, ...]
    g: NormalWord


def relation_holds(p: Presentation, rel) -> bool:
    """Evaluate one of the exponent-sum relations exactly."""
    if isinstance(rel, SameExpSums):
        return all(exponent_sum(p, rel.g, v) == exponent_sum(p, rel.h, v)
                   for v in rel.vertices)
    if isinstance(rel, CrossExpSum):
        return exponent_sum(p, rel.g, rel.s) == exponent_sum(p, rel.h, rel.t)
    if isinstance(rel, DiagonalExpSums):
        sums = [exponent_sum(p, rel.g, v) for v in rel.vertices]
        return all(s == sums[0] for s in sums)
    raise TypeError(f"unknown relation {rel!r}")


# ---------------------------------------------------------------------------
# integer linear systems


@dataclass(frozen=True)
class LinearEquation:
    """sum(coeffs[x] * x) = constant, exactly or modulo a fixed modulus."""
    coeffs: tuple[tuple[str, int], ...]
    constant: int
    modulus: Optional[int] = None

    def substitute(self, values: dict[str, int]) -> "LinearEquation":
        coeffs = []
        constant = self.constant
        for var, c in self.coeffs:
            if var in values:
                constant -= c * values[var]
            else:
                coeffs.append((var, c))
        return LinearEquation(tuple(coeffs), constant, self.modulus)

    def holds(self, values: dict[str, int]) -> bool:
        total = sum(c * values[var] for var, c in self.coeffs)
        if self.modulus is None:
            return total == self.constant
        return (total - self.constant) % self.modulus == 0


@dataclass(frozen=True)
class LinearSystem:
    equations: tuple[LinearEquation, ...]

    def variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for eq in self.equations:
            for var, _ in eq.coeffs:
                seen.setdefault(var)
        return list(seen)

    def substitute(self, values: dict[str, int]) -> "LinearSystem":
        return LinearSystem(tuple(eq.substitute(values) for eq in self.equations))

    def holds(self, values: dict[str, int]) -> bool:
        return all(eq.holds(values) for eq in self.equations)


@dataclass(frozen=True)
class SolvabilityResult:
    status: str  # "SAT" | "UNSAT"
    witness: Optional[dict[str, int]] = None

    def __bool__(self):
        return self.status == "SAT"


def parse_linear_system(text: str) -> LinearSystem:
    """One equation per line: ``3 x -1 y = 5`` optionally followed by ``mod 4``."""
    eqs = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        modulus = None
        if len(tokens) >= 2 and tokens[-2] == "mod":
            try:
                modulus = int(tokens[-1])
            except ValueError:
                raise ParseError(f"bad modulus {tokens[-1]!r}", line=ln) from None
            if modulus < 2:
                raise ParseError("modulus must be >= 2", line=ln)
            tokens = tokens[:-2]
        if "=" not in tokens:
            raise ParseError("missing '=' in equation", line=ln)
        eq_at = tokens.index("=")
        lhs, rhs = tokens[:eq_at], tokens[eq_at + 1:]
        if len(rhs) != 1:
            raise ParseError("right-hand side must be a single integer", line=ln)
        try:
            constant = int(rhs[0])
        except ValueError:
            raise ParseError(f"bad constant {rhs[0]!r}", line=ln) from None
        if len(lhs) % 2:
            raise ParseError("left-hand side must be coefficient/variable pairs", line=ln)
        coeffs = []
        for i in range(0, len(lhs), 2):
            try:
                c = int(lhs[i])
            except ValueError:
                raise ParseError(f"bad coefficient {lhs[i]!r}", line=ln) from None
            coeffs.append((lhs[i + 1], c))
        eqs.append(LinearEquation(tuple(coeffs), constant, modulus))
    return LinearSystem(tuple(eqs))


def format_linear_system(sys: LinearSystem) -> str:
    lines = []
    for eq in sys.equations:
        parts = [f"{c} {v}" for v, c in eq.coeffs] or ["0 _"]
        line = " ".join(parts) + f" = {eq.constant}"
        if eq.modulus is not None:
            line += f" mod {eq.modulus}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def _diagonalize(matrix: list[list[int]]):
    """Return (D, U, V) with D = U @ M @ V diagonal and U, V unimodular."""
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    D = [row[:] for row in matrix]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # dst += q * src
        D[dst] = [a + q * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, q):
        for row in D:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero magnitude in the remaining block
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] and (pivot is None or abs(D[i][j]) < abs(D[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        dirty = False
        for i in range(t + 1, m):
            if D[i][t]:
                q = -(D[i][t] // D[t][t])
                add_row(t, i, q)
                if D[i][t]:
                    dirty = True
        for j in range(t + 1, n):
            if D[t][j]:
                q = -(D[t][j] // D[t][t])
                add_col(t, j, q)
                if D[t][j]:
                    dirty = True
        if dirty:
            continue  # remainder left behind; pick a smaller pivot
        t += 1
    return D, U, V


def solve_linear_system(sys: LinearSystem) -> SolvabilityResult:
    """Decide exact solvability over Z; a SAT result carries a verified witness."""
    variables = sys.variables()
    var_index = {v: i for i, v in enumerate(variables)}
    rows = []
    rhs = []
    slack = 0
    slack_cols: list[int] = []
    for eq in sys.equations:
        row = [0] * len(variables)
        for var, c in eq.coeffs:
            row[var_index[var]] += c
        if eq.modulus is not None:
            slack_cols.append(eq.modulus)
            row_slack_index = slack
            slack += 1
        else:
            row_slack_index = None
        rows.append((row, row_slack_index))
        rhs.append(eq.constant)
    n = len(variables) + slack
    matrix = []
    for row, slack_idx in rows:
        full = row + [0] * slack
        if slack_idx is not None:
            full[len(variables) + slack_idx] = slack_cols[slack_idx]
        matrix.append(full)
    if not matrix:
        return SolvabilityResult("SAT", {})
    if n == 0:
        if all(c == 0 for c in rhs):
            return SolvabilityResult("SAT", {})
        return SolvabilityResult("UNSAT")

    D, U, V = _diagonalize(matrix)
    m = len(matrix)
    # transformed right-hand side
    c = [sum(U[i][j] * rhs[j] for j in range(m)) for i in range(m)]
    z = [0] * n
    for i in range(m):
        d = D[i][i] if i < n else 0
        if d == 0:
            if c[i] != 0:
                return SolvabilityResult("UNSAT")
        else:
            if c[i] % d:
                return SolvabilityResult("UNSAT")
            z[i] = c[i] // d
    y = [sum(V[i][j] * z[j] for j in range(n)) for i in range(n)]
    witness = {v: y[var_index[v]] for v in variables}
    if not sys.holds(witness):
        raise AssertionError("diagonalization produced a bad witness")
    return SolvabilityResult("SAT", witness)
