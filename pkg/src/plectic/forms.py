"""Exact exterior calculus on R^m: differential forms, multivector fields,
fundamental fields of matrix actions, rational sphere points, and tangential
evaluation.

Contraction follows the convention

    i(v_1 ^ ... ^ v_k) = i_{v_k} ... i_{v_1},

the Lie derivative along a degree-m multivector field is the graded
commutator d i_Y - (-1)^m i_Y d, and fundamental fields of matrices are

    v_A = sum_ij A[i][j] x^j d/dx^i.

With that orientation the field map reverses brackets:
[v_A, v_B] = FUNDAMENTAL_BRACKET_SIGN * v_[A,B].  The constant is fixed
empirically by the bracket tests and every sign downstream uses it.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import mpmath

from .algebra import Expr, PointContext
from .errors import ArityMismatch, DimensionMismatch
from .lie import sort_tuple

# [v_A, v_B] = FUNDAMENTAL_BRACKET_SIGN * v_[A,B] for the component formula above.
FUNDAMENTAL_BRACKET_SIGN = -1

Scalar = Union[int, Fraction]


class DiffForm:
    """Sparse differential form with Expr coefficients."""

    __slots__ = ("arity", "degree", "terms")

    def __init__(self, arity: int, degree: int,
                 terms: Optional[Dict[Tuple[int, ...], Expr]] = None):
        if degree < 0:
            raise DimensionMismatch("negative form degree")
        self.arity = arity
        self.degree = degree
        self.terms: Dict[Tuple[int, ...], Expr] = {}
        if terms:
            for key, val in terms.items():
                self.add_term(key, val)

    def _coerce(self, value) -> Expr:
        if isinstance(value, Expr):
            if value.arity != self.arity:
                raise ArityMismatch("coefficient arity mismatch")
            return value
        return Expr.const(value, self.arity)

    def add_term(self, key: Sequence[int], value) -> None:
        value = self._coerce(value)
        if value.is_zero():
            return
        if len(key) != self.degree:
            raise DimensionMismatch(f"index tuple {key} has wrong length")
        if any(not 0 <= i < self.arity for i in key):
            raise DimensionMismatch(f"index tuple {key} out of range")
        key, sign = sort_tuple(key)
        if key is None:
            return
        cur = self.terms.get(key)
        new = value if sign == 1 else -value
        if cur is not None:
            new = cur + new
        if new.is_zero():
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    @classmethod
    def zero(cls, arity: int, degree: int) -> "DiffForm":
        return cls(arity, degree)

    @classmethod
    def function(cls, value, arity: int) -> "DiffForm":
        out = cls(arity, 0)
        out.add_term((), value)
        return out

    def __add__(self, other: "DiffForm") -> "DiffForm":
        if self.arity != other.arity:
            raise ArityMismatch("form arity mismatch")
        if self.degree != other.degree:
            raise DimensionMismatch("form degree mismatch")
        out = DiffForm(self.arity, self.degree, dict(self.terms))
        for k, v in other.terms.items():
            out.add_term(k, v)
        return out

    def __neg__(self) -> "DiffForm":
        return DiffForm(self.arity, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self + (-other)

    def scale(self, c) -> "DiffForm":
        c = self._coerce(c)
        out = DiffForm(self.arity, self.degree)
        for k, v in self.terms.items():
            out.add_term(k, v * c)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def has_tau(self) -> bool:
        return any(v.has_tau() for v in self.terms.values())

    def sorted_terms(self):
        return sorted(self.terms.items())

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for key, val in self.sorted_terms():
            dx = "^".join(f"dx{i}" for i in key) if key else "1"
            bits.append(f"({val!r}) {dx}")
        return " + ".join(bits)

    def to_json(self):
        return {
            "arity": self.arity,
            "degree": self.degree,
            "terms": [{"indices": list(k), "coeff": v.to_json()} for k, v in self.sorted_terms()],
        }


def dx(indices: Sequence[int], arity: int) -> DiffForm:
    """Coordinate form dx^{i1} ^ ... ^ dx^{ik}."""
    out = DiffForm(arity, len(indices))
    out.add_term(tuple(indices), Expr.one(arity))
    return out


def volume_form(arity: int) -> DiffForm:
    return dx(tuple(range(arity)), arity)


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    if a.arity != b.arity:
        raise ArityMismatch("form arity mismatch")
    out = DiffForm(a.arity, a.degree + b.degree)
    for k1, v1 in a.terms.items():
        for k2, v2 in b.terms.items():
            out.add_term(k1 + k2, v1 * v2)
    return out


def exterior_d(a: DiffForm) -> DiffForm:
    out = DiffForm(a.arity, a.degree + 1)
    for key, val in a.terms.items():
        for i in range(a.arity):
            dv = val.diff(i)
            if not dv.is_zero():
                out.add_term((i,) + key, dv)
    return out


class VectorField:
    """Vector field with Expr components; may carry a Lie algebra tag."""

    __slots__ = ("arity", "components", "tag")

    def __init__(self, arity: int, components: Optional[Dict[int, Expr]] = None, tag=None):
        self.arity = arity
        self.components: Dict[int, Expr] = {}
        if components:
            for i, v in components.items():
                self.set_component(i, v)
        self.tag = tag

    def set_component(self, i: int, value) -> None:
        if not 0 <= i < self.arity:
            raise DimensionMismatch(f"component {i} out of range")
        if isinstance(value, Expr):
            if value.arity != self.arity:
                raise ArityMismatch("component arity mismatch")
        else:
            value = Expr.const(value, self.arity)
        if value.is_zero():
            self.components.pop(i, None)
        else:
            self.components[i] = value

    def component(self, i: int) -> Expr:
        return self.components.get(i, Expr.zero(self.arity))

    def apply(self, f: Expr) -> Expr:
        """Directional derivative of a scalar."""
        out = Expr.zero(self.arity)
        for i, v in self.components.items():
            out = out + v * f.diff(i)
        return out

    def scale(self, c) -> "VectorField":
        out = VectorField(self.arity)
        for i, v in self.components.items():
            out.set_component(i, v * (c if isinstance(c, Expr) else Expr.const(c, self.arity)))
        return out

    def __add__(self, other: "VectorField") -> "VectorField":
        out = VectorField(self.arity, dict(self.components))
        for i, v in other.components.items():
            out.set_component(i, out.component(i) + v)
        return out

    def is_zero(self) -> bool:
        return not self.components

    def values_at(self, point: Sequence[Scalar]) -> List[Fraction]:
        """Exact component values at a rational point (polynomial fields)."""
        return [self.component(i).eval(point) for i in range(self.arity)]

    def __repr__(self) -> str:
        if not self.components:
            return "0"
        return " + ".join(f"({v!r}) d_{i}" for i, v in sorted(self.components.items()))


class MultiVectorField:
    """Formal rational combination of wedges of vector fields."""

    __slots__ = ("arity", "degree", "summands")

    def __init__(self, arity: int, degree: int,
                 summands: Optional[List[Tuple[Fraction, Tuple[VectorField, ...]]]] = None):
        self.arity = arity
        self.degree = degree
        self.summands: List[Tuple[Fraction, Tuple[VectorField, ...]]] = []
        if summands:
            for coeff, factors in summands:
                self.add_wedge(coeff, factors)

    def add_wedge(self, coeff, factors: Sequence[VectorField]) -> None:
        coeff = Fraction(coeff)
        if not coeff:
            return
        if len(factors) != self.degree:
            raise DimensionMismatch("wrong number of wedge factors")
        for f in factors:
            if f.arity != self.arity:
                raise ArityMismatch("field arity mismatch")
            if f.is_zero():
                return
        self.summands.append((coeff, tuple(factors)))

    @classmethod
    def from_fields(cls, fields: Sequence[VectorField]) -> "MultiVectorField":
        arity = fields[0].arity
        out = cls(arity, len(fields))
        out.add_wedge(Fraction(1), fields)
        return out

    def __add__(self, other: "MultiVectorField") -> "MultiVectorField":
        if (self.arity, self.degree) != (other.arity, other.degree):
            raise DimensionMismatch("multivector field mismatch")
        out = MultiVectorField(self.arity, self.degree, list(self.summands))
        out.summands.extend(other.summands)
        return out

    def scale(self, c) -> "MultiVectorField":
        c = Fraction(c)
        out = MultiVectorField(self.arity, self.degree)
        for coeff, factors in self.summands:
            out.add_wedge(coeff * c, factors)
        return out


def interior_single(x: VectorField, a: DiffForm) -> DiffForm:
    if x.arity != a.arity:
        raise ArityMismatch("field/form arity mismatch")
    if a.degree == 0:
        raise DimensionMismatch("cannot contract a function")
    out = DiffForm(a.arity, a.degree - 1)
    for key, val in a.terms.items():
        for pos, idx in enumerate(key):
            comp = x.components.get(idx)
            if comp is None:
                continue
            rest = key[:pos] + key[pos + 1:]
            term = val * comp
            if pos % 2:
                term = -term
            out.add_term(rest, term)
    return out


Contractible = Union[VectorField, MultiVectorField, Sequence[VectorField]]


def interior_product(y: Contractible, a: DiffForm) -> DiffForm:
    """Iterated contraction i(v_1 ^ ... ^ v_k) = i_{v_k} ... i_{v_1}."""
    if isinstance(y, VectorField):
        return interior_single(y, a)
    if isinstance(y, MultiVectorField):
        if y.degree > a.degree:
            raise DimensionMismatch("multivector degree exceeds form degree")
        out = DiffForm(a.arity, a.degree - y.degree)
        for coeff, factors in y.summands:
            part = a
            for f in factors:
                part = interior_single(f, part)
            out = out + part.scale(coeff)
        return out
    fields = list(y)
    if len(fields) > a.degree:
        raise DimensionMismatch("more fields than form slots")
    part = a
    for f in fields:
        part = interior_single(f, part)
    return part


def lie_derivative(y: Contractible, a: DiffForm) -> DiffForm:
    """Graded commutator d i_Y - (-1)^deg(Y) i_Y d."""
    if isinstance(y, VectorField):
        degree = 1
    elif isinstance(y, MultiVectorField):
        degree = y.degree
    else:
        y = list(y)
        degree = len(y)
    out_degree = a.degree + 1 - degree
    if out_degree < 0:
        raise DimensionMismatch("derivative degree would be negative")
    da = exterior_d(a)
    second = interior_product(y, da)
    if degree <= a.degree:
        first = exterior_d(interior_product(y, a))
    else:
        first = DiffForm(a.arity, out_degree)
    if degree % 2 == 0:
        return first - second
    return first + second


def vf_bracket(x: VectorField, y: VectorField) -> VectorField:
    """Lie bracket of vector fields, componentwise."""
    if x.arity != y.arity:
        raise ArityMismatch("field arity mismatch")
    out = VectorField(x.arity)
    for i in range(x.arity):
        term = x.apply(y.component(i)) - y.apply(x.component(i))
        if not term.is_zero():
            out.set_component(i, term)
    return out


def fundamental_vf(matrix: Sequence[Sequence], arity: int, tag=None) -> VectorField:
    """Linear field sum_ij A[i][j] x^j d/dx^i of a square matrix."""
    if len(matrix) != arity or any(len(row) != arity for row in matrix):
        raise DimensionMismatch("matrix size must match the ambient arity")
    out = VectorField(arity, tag=tag)
    for i in range(arity):
        comp = Expr.zero(arity)
        for j in range(arity):
            c = Fraction(matrix[i][j])
            if c:
                comp = comp + Expr.x(j, arity) * Expr.const(c, arity)
        if not comp.is_zero():
            out.set_component(i, comp)
    return out


def euler_field(arity: int) -> VectorField:
    out = VectorField(arity)
    for i in range(arity):
        out.set_component(i, Expr.x(i, arity))
    return out


def fundamental_fields(algebra, arity: int) -> List[VectorField]:
    """Fundamental fields of all basis matrices, tagged with (algebra, index)."""
    cache = getattr(algebra, "_fvf_cache", None)
    if cache is None:
        cache = {}
        algebra._fvf_cache = cache
    if arity not in cache:
        if algebra.representation is None:
            raise DimensionMismatch("algebra has no matrix representation")
        if len(algebra.representation[0]) != arity:
            raise DimensionMismatch("representation size != ambient arity")
        cache[arity] = [
            fundamental_vf(mat, arity, tag=(algebra, idx))
            for idx, mat in enumerate(algebra.representation)
        ]
    return cache[arity]


# -- sphere points -------------------------------------------------------------


class SpherePoint:
    """Exact rational point of the unit sphere with an exact tangent frame."""

    __slots__ = ("coords", "frame")

    def __init__(self, coords: Sequence[Fraction], frame: Sequence[Sequence[Fraction]]):
        self.coords = tuple(Fraction(c) for c in coords)
        if sum(c * c for c in self.coords) != 1:
            raise DimensionMismatch("point is not on the unit sphere")
        self.frame = tuple(tuple(Fraction(v) for v in vec) for vec in frame)
        for vec in self.frame:
            if sum(v * p for v, p in zip(vec, self.coords)) != 0:
                raise DimensionMismatch("frame vector not tangent")

    @property
    def arity(self) -> int:
        return len(self.coords)

    def __repr__(self) -> str:
        return f"SpherePoint({[str(c) for c in self.coords]})"


def _stereographic(u: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    s = sum(v * v for v in u)
    denom = s + 1
    return tuple(2 * v / denom for v in u) + (Fraction(s - 1, 1) / denom,)


def _tangent_frame(p: Sequence[Fraction]) -> List[Tuple[Fraction, ...]]:
    m = len(p)
    skip = max(range(m), key=lambda i: abs(p[i]))
    frame = []
    for i in range(m):
        if i == skip:
            continue
        vec = [-p[i] * p[k] for k in range(m)]
        vec[i] += 1
        lcm = 1
        for v in vec:
            lcm = lcm * v.denominator // _gcd(lcm, v.denominator)
        frame.append(tuple(Fraction(v * lcm) for v in vec))
    return frame


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def sphere_sample(seed: int, m: int, avoid_axis: bool = True) -> SpherePoint:
    """Pseudo-random rational point of S^(m-1) via the stereographic map
    u -> (2u, |u|^2 - 1)/(|u|^2 + 1), with an exact tangent frame.

    With ``avoid_axis`` points on the x0 axis complement r = 0 are rejected
    (arctan coefficients are singular there)."""
    if m < 2:
        raise DimensionMismatch("need m >= 2")
    rng = random.Random(seed)
    while True:
        u = [Fraction(rng.randint(-100, 100), rng.randint(1, 100)) for _ in range(m - 1)]
        p = _stereographic(u)
        if avoid_axis and all(c == 0 for c in p[1:]):
            continue
        return SpherePoint(p, _tangent_frame(p))


def sphere_points(seed: int, count: int, m: int) -> List[SpherePoint]:
    return [sphere_sample(seed * 100_003 + k, m) for k in range(count)]


def form_value(a: DiffForm, coords: Sequence[Fraction], vectors: Sequence[Sequence[Fraction]],
               digits: int = 50, ctx: Optional[PointContext] = None):
    """Value a(v_1, ..., v_q) at a rational point on rational vectors.

    Exact (Fraction) when every needed coefficient evaluates exactly,
    otherwise an mpmath float at the requested precision.
    """
    if len(vectors) != a.degree:
        raise DimensionMismatch(
            f"form of degree {a.degree} needs exactly {a.degree} vector slots")
    if ctx is None:
        ctx = PointContext(coords, digits)
    exact_total = Fraction(0)
    float_total = None
    for key, coeff in a.terms.items():
        minor = _det([[vec[i] for i in key] for vec in vectors])
        if not minor:
            continue
        val = coeff.eval(coords, digits, ctx)
        if isinstance(val, Fraction):
            exact_total += val * minor
        else:
            with mpmath.workdps(digits + 15):
                inc = val * mpmath.mpf(minor.numerator) / minor.denominator
            float_total = inc if float_total is None else float_total + inc
    if float_total is None:
        return exact_total
    with mpmath.workdps(digits + 15):
        total = float_total + mpmath.mpf(exact_total.numerator) / exact_total.denominator
    with mpmath.workdps(digits):
        return +total


def tangential_eval(a: DiffForm, point: SpherePoint, selector: Sequence[int],
                    digits: int = 50, ctx: Optional[PointContext] = None):
    """Value of the form at the point on the selected tangent frame vectors."""
    if a.arity != point.arity:
        raise ArityMismatch("form/point arity mismatch")
    if a.degree > len(point.frame):
        raise DimensionMismatch("degree exceeds the tangent dimension")
    vectors = [point.frame[s] for s in selector]
    return form_value(a, point.coords, vectors, digits, ctx)


def _det(rows: List[List[Fraction]]) -> Fraction:
    n = len(rows)
    if n == 0:
        return Fraction(1)
    rows = [list(r) for r in rows]
    det = Fraction(1)
    for c in range(n):
        piv = None
        for r in range(c, n):
            if rows[r][c]:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            det = -det
        det *= rows[c][c]
        inv = 1 / rows[c][c]
        for r in range(c + 1, n):
            if rows[r][c]:
                f = rows[r][c] * inv
                for j in range(c, n):
                    rows[r][j] -= f * rows[c][j]
    return det


# NOTE: the transposed evaluation convention: dx^I(w_1, .., w_q) is the minor
# with rows indexed by I and columns by the vectors, i.e. det[w_t[i_l]]_{l,t}.


def mvf_adjoint(v: VectorField, fields: Sequence[VectorField]) -> MultiVectorField:
    """Derivation action of a field on a wedge, with honest field brackets."""
    arity = v.arity
    out = MultiVectorField(arity, len(fields))
    for pos in range(len(fields)):
        replaced = vf_bracket(v, fields[pos])
        if replaced.is_zero():
            continue
        factors = list(fields)
        factors[pos] = replaced
        out.add_wedge(Fraction(1), factors)
    return out


def _tagged_boundary(fields: Sequence[VectorField]) -> MultiVectorField:
    """Boundary of a wedge of tagged fundamental fields, in field terms.

    Field brackets are expanded through the tagged algebra's structure
    constants with the empirical orientation FUNDAMENTAL_BRACKET_SIGN.
    """
    arity = fields[0].arity
    out = MultiVectorField(arity, len(fields) - 1)
    for a in range(len(fields)):
        for b in range(a + 1, len(fields)):
            alg_a, ia = fields[a].tag
            alg_b, ib = fields[b].tag
            if alg_a is not alg_b:
                raise DimensionMismatch("fields tagged by different algebras")
            rest = [f for k, f in enumerate(fields) if k not in (a, b)]
            basis_fields = fundamental_fields(alg_a, arity)
            sign = (-1) ** ((a + 1) + (b + 1)) * FUNDAMENTAL_BRACKET_SIGN
            for m, c in alg_a.bracket_basis(ia, ib).items():
                out.add_wedge(Fraction(c) * sign, [basis_fields[m]] + rest)
    return out


def multicartan_residual(fields: Sequence[VectorField], a: DiffForm) -> DiffForm:
    """Difference of the two sides of the contraction/differential exchange
    rule for a wedge of fundamental fields; the contract is the zero form.

    (-1)^k d i(x_1^..^x_k) w  =  i(x_1^..^x_k) dw + i(boundary) w
                                 + sum_l (-1)^l i(x_1^..^l..^x_k) L_{x_l} w
    """
    k = len(fields)
    if k == 0:
        raise DimensionMismatch("need at least one field")
    for f in fields:
        if f.tag is None:
            raise DimensionMismatch("multicartan needs tagged fundamental fields")
    lhs = exterior_d(interior_product(fields, a))
    if k % 2:
        lhs = -lhs
    rhs = interior_product(fields, exterior_d(a))
    if k >= 2:
        rhs = rhs + interior_product(_tagged_boundary(fields), a)
    for l in range(k):
        others = [f for j, f in enumerate(fields) if j != l]
        term = interior_product(others, lie_derivative(fields[l], a))
        if (l + 1) % 2:
            term = -term
        rhs = rhs + term
    return lhs - rhs
