"""Finite-dimensional Lie algebras with exterior algebra and
Chevalley-Eilenberg (co)homology.

Chains in Lambda^k g and cochains in Lambda^k g* are sparse maps from
strictly increasing index tuples to rationals.  The boundary on a
decomposable chain xi_1 ^ ... ^ xi_k is

    sum_{i<j} (-1)^(i+j) [xi_i, xi_j] ^ xi_1 ^ ... ^i ... ^j ... ^ xi_k

(1-based positions, hatted factors removed), the differential on cochains
is precomposition with the boundary, and the action of a basis element on
a wedge extends the bracket as a derivation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, gcd
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import ExactMatrix, kernel_exact, rank_exact, solve_exact
from .errors import CapExceeded, DimensionMismatch, NotACocycle

Matrix = Tuple[Tuple[Fraction, ...], ...]

DEFAULT_DEGREE_CAP = 10_000


def degree_cap() -> int:
    value = os.environ.get("MSK_MAX_DIM")
    return int(value) if value else DEFAULT_DEGREE_CAP


def sort_tuple(indices: Sequence[int]) -> Tuple[Optional[Tuple[int, ...]], int]:
    """Sort wedge factors, returning (tuple, permutation sign); repeated
    factors give (None, 0)."""
    items = list(indices)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(items, items[1:]):
        if a == b:
            return None, 0
    return tuple(items), sign


class MultiVector:
    """Sparse element of Lambda^k g in a fixed basis."""

    __slots__ = ("degree", "terms")

    def __init__(self, degree: int, terms: Optional[Dict[Tuple[int, ...], Fraction]] = None):
        self.degree = degree
        self.terms: Dict[Tuple[int, ...], Fraction] = {}
        if terms:
            for key, val in terms.items():
                self.add_term(key, val)

    @classmethod
    def basis(cls, indices: Sequence[int]) -> "MultiVector":
        out = cls(len(indices))
        out.add_term(tuple(indices), Fraction(1))
        return out

    def add_term(self, key: Sequence[int], value) -> None:
        value = Fraction(value)
        if not value:
            return
        key, sign = sort_tuple(key)
        if key is None:
            return
        cur = self.terms.get(key, Fraction(0)) + sign * value
        if cur:
            self.terms[key] = cur
        else:
            self.terms.pop(key, None)

    def __add__(self, other: "MultiVector") -> "MultiVector":
        if self.degree != other.degree:
            raise DimensionMismatch("degree mismatch")
        out = MultiVector(self.degree, dict(self.terms))
        for k, v in other.terms.items():
            out.add_term(k, v)
        return out

    def __neg__(self) -> "MultiVector":
        return MultiVector(self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "MultiVector") -> "MultiVector":
        return self + (-other)

    def scale(self, c) -> "MultiVector":
        c = Fraction(c)
        out = MultiVector(self.degree)
        if c:
            out.terms = {k: v * c for k, v in self.terms.items()}
        return out

    def wedge(self, other: "MultiVector") -> "MultiVector":
        out = MultiVector(self.degree + other.degree)
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                out.add_term(k1 + k2, v1 * v2)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiVector)
            and self.degree == other.degree
            and self.terms == other.terms
        )

    __hash__ = None

    def sorted_terms(self):
        return sorted(self.terms.items())

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{v}*e{list(k)}" for k, v in self.sorted_terms())


class Cochain(MultiVector):
    """Sparse element of Lambda^k g*; pairs with MultiVector of equal degree."""

    def pair(self, mv: MultiVector) -> Fraction:
        if self.degree != mv.degree:
            raise DimensionMismatch("pairing degrees differ")
        total = Fraction(0)
        small, large = (self.terms, mv.terms) if len(self.terms) <= len(mv.terms) else (mv.terms, self.terms)
        for k, v in small.items():
            w = large.get(k)
            if w:
                total += v * w
        return total


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n))
        for i in range(n)
    )


def _mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _commutator(a: Matrix, b: Matrix) -> Matrix:
    return _mat_sub(_mat_mul(a, b), _mat_mul(b, a))


def _freeze(rows: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


class LieAlgebra:
    """Structure constants plus an optional faithful matrix representation."""

    def __init__(self, labels: Sequence[str],
                 brackets: Dict[Tuple[int, int], Dict[int, Fraction]],
                 representation: Optional[Sequence[Matrix]] = None,
                 name: str = ""):
        self.labels = list(labels)
        self.dim = len(self.labels)
        self.name = name or "lie"
        self.brackets = {}
        for (i, j), comp in brackets.items():
            if i >= j:
                raise DimensionMismatch("brackets must be keyed by i < j")
            clean = {k: Fraction(v) for k, v in comp.items() if Fraction(v)}
            if clean:
                self.brackets[i, j] = clean
        self.representation = tuple(_freeze(mat) for mat in representation) if representation else None
        self._boundary_cache: Dict[int, Tuple[ExactMatrix, List[Tuple[int, ...]], List[Tuple[int, ...]]]] = {}
        self._validate()

    # -- basic structure ------------------------------------------------

    def bracket_basis(self, i: int, j: int) -> Dict[int, Fraction]:
        if i == j:
            return {}
        if i < j:
            return self.brackets.get((i, j), {})
        return {k: -v for k, v in self.brackets.get((j, i), {}).items()}

    def bracket(self, x: MultiVector, y: MultiVector) -> MultiVector:
        if x.degree != 1 or y.degree != 1:
            raise DimensionMismatch("bracket takes degree-1 elements")
        out = MultiVector(1)
        for (i,), a in x.terms.items():
            for (j,), b in y.terms.items():
                for k, c in self.bracket_basis(i, j).items():
                    out.add_term((k,), a * b * c)
        return out

    def _validate(self) -> None:
        if not self.jacobi_holds():
            raise DimensionMismatch(f"Jacobi identity fails for {self.name}")
        if self.representation is not None:
            if len(self.representation) != self.dim:
                raise DimensionMismatch("representation size != dimension")
            for i in range(self.dim):
                for j in range(i + 1, self.dim):
                    expected = self._rep_combination(self.bracket_basis(i, j))
                    actual = _commutator(self.representation[i], self.representation[j])
                    if expected != actual:
                        raise DimensionMismatch(
                            f"representation does not match brackets at ({i},{j})")

    def _rep_combination(self, comp: Dict[int, Fraction]) -> Matrix:
        size = len(self.representation[0])
        rows = [[Fraction(0)] * size for _ in range(size)]
        for k, c in comp.items():
            mk = self.representation[k]
            for a in range(size):
                for b in range(size):
                    rows[a][b] += c * mk[a][b]
        return _freeze(rows)

    def jacobi_holds(self) -> bool:
        for i, j, k in combinations(range(self.dim), 3):
            acc: Dict[int, Fraction] = {}
            for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
                for m, cab in self.bracket_basis(a, b).items():
                    for l, cmc in self.bracket_basis(m, c).items():
                        acc[l] = acc.get(l, Fraction(0)) + cab * cmc
            if any(acc.values()):
                return False
        return True

    def to_json(self):
        return {
            "name": self.name,
            "dim": self.dim,
            "labels": self.labels,
            "brackets": [
                {"i": i, "j": j, "coeffs": {str(k): str(v) for k, v in sorted(comp.items())}}
                for (i, j), comp in sorted(self.brackets.items())
            ],
        }

    def __repr__(self) -> str:
        return f"LieAlgebra({self.name}, dim={self.dim})"

    # -- boundary matrices -----------------------------------------------

    def boundary_matrix(self, k: int, cap: Optional[int] = None):
        """Matrix of the boundary Lambda^k -> Lambda^(k-1) with tuple bases."""
        if k in self._boundary_cache:
            return self._boundary_cache[k]
        cap = cap if cap is not None else degree_cap()
        if comb(self.dim, k) > cap or comb(self.dim, max(k - 1, 0)) > cap:
            raise CapExceeded(
                f"C({self.dim},{k}) exceeds cap {cap}; raise MSK_MAX_DIM to proceed")
        cols = list(combinations(range(self.dim), k))
        rows = list(combinations(range(self.dim), max(k - 1, 0)))
        row_index = {t: i for i, t in enumerate(rows)}
        mat = ExactMatrix(len(rows), len(cols))
        for cj, tup in enumerate(cols):
            image = ce_boundary(self, MultiVector.basis(tup))
            for t, v in image.terms.items():
                mat[row_index[t], cj] = mat[row_index[t], cj] + v
        self._boundary_cache[k] = (mat, rows, cols)
        return self._boundary_cache[k]


# -- Chevalley-Eilenberg operators ------------------------------------------


def ce_boundary(algebra: LieAlgebra, p: MultiVector) -> MultiVector:
    """Boundary of a chain; zero on degrees 0 and 1."""
    out = MultiVector(max(p.degree - 1, 0))
    if p.degree <= 1:
        return out
    for tup, coeff in p.terms.items():
        for a in range(len(tup)):
            for b in range(a + 1, len(tup)):
                sign = (-1) ** ((a + 1) + (b + 1))
                rest = tuple(t for idx, t in enumerate(tup) if idx not in (a, b))
                for m, c in algebra.bracket_basis(tup[a], tup[b]).items():
                    out.add_term((m,) + rest, coeff * sign * c)
    return out


def ce_differential(algebra: LieAlgebra, c: Cochain, cap: Optional[int] = None) -> Cochain:
    """Differential on cochains: (dc)(p) = c(boundary p)."""
    k = c.degree + 1
    cap = cap if cap is not None else degree_cap()
    if comb(algebra.dim, k) > cap:
        raise CapExceeded(f"C({algebra.dim},{k}) exceeds cap {cap}")
    out = Cochain(k)
    for tup in combinations(range(algebra.dim), k):
        val = c.pair(ce_boundary(algebra, MultiVector.basis(tup)))
        if val:
            out.add_term(tup, val)
    return out


def adjoint_action(algebra: LieAlgebra, xi: int, b: MultiVector) -> MultiVector:
    """Derivation extension of ad(xi) to Lambda^k g."""
    out = MultiVector(b.degree)
    for tup, coeff in b.terms.items():
        for pos, t in enumerate(tup):
            for m, c in algebra.bracket_basis(xi, t).items():
                out.add_term(tup[:pos] + (m,) + tup[pos + 1:], coeff * c)
    return out


@dataclass
class HomologyReport:
    degree: int
    dim_chains: int
    dim_cycles: int
    dim_boundaries: int
    dim_homology: int

    def to_json(self):
        return {
            "degree": self.degree,
            "dim_chains": self.dim_chains,
            "dim_cycles": self.dim_cycles,
            "dim_boundaries": self.dim_boundaries,
            "dim_homology": self.dim_homology,
        }


def homology(algebra: LieAlgebra, k: int, cap: Optional[int] = None) -> HomologyReport:
    """Dimensions of cycles, boundaries and homology in degree k."""
    if not 0 <= k <= algebra.dim:
        raise DimensionMismatch(f"degree {k} outside 0..{algebra.dim}")
    chains = comb(algebra.dim, k)
    rank_k = rank_exact(algebra.boundary_matrix(k, cap)[0]) if k >= 1 else 0
    cycles = chains - rank_k
    if k + 1 <= algebra.dim:
        boundaries = rank_exact(algebra.boundary_matrix(k + 1, cap)[0])
    else:
        boundaries = 0
    return HomologyReport(k, chains, cycles, boundaries, cycles - boundaries)


def find_primitive(algebra: LieAlgebra, p: MultiVector, cap: Optional[int] = None) -> Optional[MultiVector]:
    """Some q with boundary q = p, or None when p is not a boundary.

    Deterministic: the solution comes from elimination with lexicographic
    tuple order and zero free variables.
    """
    if p.is_zero():
        return MultiVector(p.degree + 1)
    mat, rows, cols = algebra.boundary_matrix(p.degree + 1, cap)
    row_index = {t: i for i, t in enumerate(rows)}
    rhs = [Fraction(0)] * len(rows)
    for t, v in p.terms.items():
        rhs[row_index[t]] = v
    sol = solve_exact(mat, rhs)
    if sol is None:
        return None
    out = MultiVector(p.degree + 1)
    for j, v in enumerate(sol):
        if v:
            out.add_term(cols[j], v)
    return out


def is_coboundary(algebra: LieAlgebra, c: Cochain, cap: Optional[int] = None) -> Optional[Cochain]:
    """Some b with db = c, or None; raises NotACocycle when dc != 0."""
    if c.degree < algebra.dim and not ce_differential(algebra, c, cap).is_zero():
        raise NotACocycle("cochain is not closed")
    if c.is_zero():
        return Cochain(max(c.degree - 1, 0))
    if c.degree == 0:
        return None
    mat, rows, cols = algebra.boundary_matrix(c.degree, cap)
    # (db)(T) = b(boundary T): unknowns indexed by rows of the boundary matrix,
    # one equation per degree-k tuple T, i.e. the transposed matrix.
    trans = ExactMatrix(len(cols), len(rows))
    for (i, j), v in mat.entries.items():
        trans[j, i] = v
    col_index = {t: i for i, t in enumerate(cols)}
    rhs = [Fraction(0)] * len(cols)
    for t, v in c.terms.items():
        rhs[col_index[t]] = v
    sol = solve_exact(trans, rhs)
    if sol is None:
        return None
    out = Cochain(c.degree - 1)
    for j, v in enumerate(sol):
        if v:
            out.add_term(rows[j], v)
    return out


def random_multivector(rng, algebra: LieAlgebra, k: int, terms: int = 3) -> MultiVector:
    out = MultiVector(k)
    for _ in range(terms):
        tup = tuple(sorted(rng.sample(range(algebra.dim), k)))
        out.add_term(tup, Fraction(rng.randint(-9, 9), rng.randint(1, 9)))
    return out


def random_cochain(rng, algebra: LieAlgebra, k: int, terms: int = 3) -> Cochain:
    out = Cochain(k)
    for _ in range(terms):
        tup = tuple(sorted(rng.sample(range(algebra.dim), k)))
        out.add_term(tup, Fraction(rng.randint(-9, 9), rng.randint(1, 9)))
    return out


# -- constructors -------------------------------------------------------------


def _so_basis_matrices(n: int) -> Tuple[List[str], List[Matrix], List[Tuple[int, int]]]:
    labels, mats, pairs = [], [], []
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            sign = (-1) ** (1 + a + b)
            rows = [[Fraction(0)] * n for _ in range(n)]
            rows[a - 1][b - 1] = Fraction(sign)
            rows[b - 1][a - 1] = Fraction(-sign)
            labels.append(f"A{a}{b}" if n < 10 else f"A{a},{b}")
            mats.append(_freeze(rows))
            pairs.append((a, b))
    return labels, mats, pairs


def _so_decompose(m: Matrix, pairs: Sequence[Tuple[int, int]]) -> Dict[int, Fraction]:
    comp = {}
    for idx, (a, b) in enumerate(pairs):
        sign = (-1) ** (1 + a + b)
        v = m[a - 1][b - 1] * sign
        if v:
            comp[idx] = v
    return comp


def make_so(n: int) -> LieAlgebra:
    """Skew-symmetric matrices acting on R^n, with the signed pair basis."""
    if n < 2:
        raise DimensionMismatch("so(n) needs n >= 2")
    labels, mats, pairs = _so_basis_matrices(n)
    brackets = {}
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            comp = _so_decompose(_commutator(mats[i], mats[j]), pairs)
            if comp:
                brackets[i, j] = comp
    algebra = LieAlgebra(labels, brackets, mats, name=f"so({n})")
    algebra.so_n = n
    algebra.so_pairs = pairs
    return algebra


def so_pair_index(algebra: LieAlgebra, a: int, b: int) -> int:
    """Index of the (a, b) pair generator of make_so output, 1-based a < b."""
    return algebra.so_pairs.index((a, b))


def _realify(re: Matrix, im: Matrix) -> Matrix:
    n = len(re)
    rows = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            a, b = re[i][j], im[i][j]
            rows[2 * i][2 * j] = a
            rows[2 * i][2 * j + 1] = -b
            rows[2 * i + 1][2 * j] = b
            rows[2 * i + 1][2 * j + 1] = a
    return _freeze(rows)


def make_su_realified(n: int) -> LieAlgebra:
    """Traceless anti-Hermitian matrices, realified to act on R^(2n)."""
    if n < 2:
        raise DimensionMismatch("su(n) needs n >= 2")
    zero = tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))

    def elem(i, j, v=1):
        rows = [[Fraction(0)] * n for _ in range(n)]
        rows[i][j] = Fraction(v)
        return _freeze(rows)

    def madd(a, b):
        return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))

    labels: List[str] = []
    mats: List[Matrix] = []
    for i in range(n):
        for j in range(i + 1, n):
            labels.append(f"X{i + 1}{j + 1}")
            mats.append(_realify(madd(elem(i, j), elem(j, i, -1)), zero))
            labels.append(f"Y{i + 1}{j + 1}")
            mats.append(_realify(zero, madd(elem(i, j), elem(j, i))))
    for l in range(n - 1):
        labels.append(f"H{l + 1}")
        mats.append(_realify(zero, madd(elem(l, l), elem(l + 1, l + 1, -1))))

    # decompose commutators over the realified basis by exact solving
    dim = len(mats)
    size = 2 * n
    columns = ExactMatrix(size * size, dim)
    for idx, m in enumerate(mats):
        for i in range(size):
            for j in range(size):
                if m[i][j]:
                    columns[i * size + j, idx] = m[i][j]
    brackets = {}
    for i in range(dim):
        for j in range(i + 1, dim):
            cm = _commutator(mats[i], mats[j])
            rhs = [cm[a][b] for a in range(size) for b in range(size)]
            sol = solve_exact(columns, rhs)
            if sol is None:
                raise DimensionMismatch("su(n) commutator left the span")
            comp = {k: v for k, v in enumerate(sol) if v}
            if comp:
                brackets[i, j] = comp
    return LieAlgebra(labels, brackets, mats, name=f"su({n})R")


# Seven signed coordinate triples of the stable 3-form on R^7 (0-based).
G2_FORM_TERMS: Dict[Tuple[int, int, int], Fraction] = {
    (0, 1, 2): Fraction(1),
    (0, 3, 4): Fraction(1),
    (0, 5, 6): Fraction(1),
    (1, 3, 5): Fraction(1),
    (1, 4, 6): Fraction(-1),
    (2, 4, 5): Fraction(-1),
    (2, 3, 6): Fraction(-1),
}


def _g2_constraint_matrix() -> ExactMatrix:
    """Linear conditions on A in gl(7) for the stable 3-form to be preserved.

    The derivative of the form along the linear field of E_ij is
    dx^j ^ (contraction of the form with d/dx_i); each matrix entry
    contributes constant coefficients in the 35 coordinate 3-forms.
    """
    triples = list(combinations(range(7), 3))
    triple_index = {t: i for i, t in enumerate(triples)}
    mat = ExactMatrix(35, 49)
    for i in range(7):
        for j in range(7):
            col = i * 7 + j
            # contraction d/dx_i . phi, then wedge with dx^j
            for (a, b, c), coeff in G2_FORM_TERMS.items():
                for pos, idx in enumerate((a, b, c)):
                    if idx != i:
                        continue
                    rest = tuple(x for x in (a, b, c) if x != i)
                    csign = coeff * (-1) ** pos
                    key, sign = sort_tuple((j,) + rest)
                    if key is None:
                        continue
                    row = triple_index[key]
                    mat[row, col] = mat[row, col] + csign * sign
    return mat


def make_g2() -> LieAlgebra:
    """Stabiliser algebra of the stable 3-form on R^7 (dimension 14).

    Computed as the exact kernel of the 35x49 constraint system; the raw
    kernel vectors, integer scaled, form the basis.
    """
    mat = _g2_constraint_matrix()
    kernel = kernel_exact(mat)
    mats: List[Matrix] = []
    for vec in kernel:
        lcm = 1
        for v in vec:
            lcm = lcm * v.denominator // gcd(lcm, v.denominator)
        rows = [[vec[i * 7 + j] * lcm for j in range(7)] for i in range(7)]
        mats.append(_freeze(rows))
    dim = len(mats)
    columns = ExactMatrix(49, dim)
    for idx, m in enumerate(mats):
        for i in range(7):
            for j in range(7):
                if m[i][j]:
                    columns[i * 7 + j, idx] = m[i][j]
    brackets = {}
    for i in range(dim):
        for j in range(i + 1, dim):
            cm = _commutator(mats[i], mats[j])
            rhs = [cm[a][b] for a in range(7) for b in range(7)]
            sol = solve_exact(columns, rhs)
            if sol is None:
                raise DimensionMismatch("g2 kernel is not closed under commutators")
            comp = {k: v for k, v in enumerate(sol) if v}
            if comp:
                brackets[i, j] = comp
    labels = [f"G{k + 1}" for k in range(dim)]
    return LieAlgebra(labels, brackets, mats, name="g2")
