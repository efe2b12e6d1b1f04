"""Exact sparse linear algebra over the rationals.

Elimination is fraction-free on integer-scaled rows (cross-multiplication
updates with content reduction), so ranks, kernels and solutions are exact.
Rank computations first split the matrix into connected blocks of the
row/column incidence graph; boundary operators of exterior algebras fall
apart into many small blocks under this splitting.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import DimensionMismatch

Entry = Tuple[int, int]


class ExactMatrix:
    """Sparse rational matrix keyed by (row, col)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Optional[Dict[Entry, Fraction]] = None):
        self.rows = rows
        self.cols = cols
        self.entries: Dict[Entry, Fraction] = {}
        if entries:
            for (i, j), v in entries.items():
                self[i, j] = v

    def __setitem__(self, key: Entry, value) -> None:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise DimensionMismatch(f"index {key} out of bounds for {self.rows}x{self.cols}")
        value = Fraction(value)
        if value:
            self.entries[i, j] = value
        else:
            self.entries.pop((i, j), None)

    def __getitem__(self, key: Entry) -> Fraction:
        return self.entries.get(key, Fraction(0))

    @classmethod
    def from_rows(cls, data: Sequence[Sequence]) -> "ExactMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        out = cls(rows, cols)
        for i, row in enumerate(data):
            if len(row) != cols:
                raise DimensionMismatch("ragged rows")
            for j, v in enumerate(row):
                out[i, j] = v
        return out

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        out = cls(n, n)
        for i in range(n):
            out[i, i] = Fraction(1)
        return out

    def row_dicts(self) -> List[Dict[int, Fraction]]:
        rows: List[Dict[int, Fraction]] = [dict() for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            rows[i][j] = v
        return rows

    def to_json(self):
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [
                {"i": i, "j": j, "v": str(v)}
                for (i, j), v in sorted(self.entries.items())
            ],
        }

    def __repr__(self) -> str:
        return f"ExactMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


def _integer_rows(rows: List[Dict[int, Fraction]]) -> List[Dict[int, int]]:
    out = []
    for row in rows:
        if not row:
            out.append({})
            continue
        lcm = 1
        for v in row.values():
            lcm = lcm * v.denominator // gcd(lcm, v.denominator)
        scaled = {j: int(v * lcm) for j, v in row.items()}
        g = 0
        for v in scaled.values():
            g = gcd(g, abs(v))
        if g > 1:
            scaled = {j: v // g for j, v in scaled.items()}
        out.append(scaled)
    return out


def _reduce_content(row: Dict[int, int]) -> None:
    g = 0
    for v in row.values():
        g = gcd(g, abs(v))
        if g == 1:
            return
    if g > 1:
        for j in row:
            row[j] //= g


def _eliminate(rows: List[Dict[int, int]], cols: Sequence[int]) -> List[Tuple[int, int]]:
    """In-place forward elimination; returns [(row_index, pivot_col)] pivots.

    Column order follows ``cols``; pivot rows are chosen by minimal fill.
    """
    pivots: List[Tuple[int, int]] = []
    live = list(range(len(rows)))
    col_rows: Dict[int, set] = {}
    for idx in live:
        for j in rows[idx]:
            col_rows.setdefault(j, set()).add(idx)
    pivoted: set = set()
    for col in cols:
        candidates = [idx for idx in col_rows.get(col, ()) if idx not in pivoted and rows[idx].get(col)]
        if not candidates:
            continue
        piv = min(candidates, key=lambda idx: (len(rows[idx]), idx))
        pivots.append((piv, col))
        pivoted.add(piv)
        pval = rows[piv][col]
        targets = [idx for idx in col_rows.get(col, ()) if idx != piv and idx not in pivoted]
        for idx in targets:
            row = rows[idx]
            mval = row.get(col)
            if not mval:
                continue
            # row <- pval * row - mval * pivot_row
            new_row = {j: pval * v for j, v in row.items()}
            for j, v in rows[piv].items():
                cur = new_row.get(j, 0) - mval * v
                if cur:
                    new_row[j] = cur
                    col_rows.setdefault(j, set()).add(idx)
                else:
                    new_row.pop(j, None)
                    if j in col_rows:
                        col_rows[j].discard(idx)
            _reduce_content(new_row)
            rows[idx] = new_row
    return pivots


def _components(rows: List[Dict[int, int]]) -> List[List[int]]:
    """Group row indices into connected components of shared columns."""
    parent: Dict[int, int] = {}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    col_owner: Dict[int, int] = {}
    for idx, row in enumerate(rows):
        parent[idx] = idx
        for j in row:
            if j in col_owner:
                union(idx, col_owner[j])
            else:
                col_owner[j] = idx
    groups: Dict[int, List[int]] = {}
    for idx, row in enumerate(rows):
        if row:
            groups.setdefault(find(idx), []).append(idx)
    return list(groups.values())


def rank_exact(a: ExactMatrix) -> int:
    rows = _integer_rows(a.row_dicts())
    total = 0
    for group in _components(rows):
        block = [rows[i] for i in group]
        seen = sorted({j for row in block for j in row})
        total += len(_eliminate(block, seen))
    return total


def kernel_exact(a: ExactMatrix) -> List[Tuple[Fraction, ...]]:
    """Basis of the right kernel, one vector per free column, in column order."""
    rows = _integer_rows(a.row_dicts())
    pivots = _eliminate(rows, range(a.cols))
    pivot_of_col = {col: idx for idx, col in pivots}
    free_cols = [j for j in range(a.cols) if j not in pivot_of_col]
    basis = []
    ordered = sorted(pivots, key=lambda rc: rc[1], reverse=True)
    for f in free_cols:
        vec = [Fraction(0)] * a.cols
        vec[f] = Fraction(1)
        for idx, col in ordered:
            row = rows[idx]
            acc = Fraction(0)
            for j, v in row.items():
                if j != col:
                    if vec[j]:
                        acc += v * vec[j]
            vec[col] = -acc / row[col]
        basis.append(tuple(vec))
    return basis


def solve_exact(a: ExactMatrix, b: Sequence) -> Optional[Tuple[Fraction, ...]]:
    """One exact solution of A x = b, or None when inconsistent.

    Deterministic: free variables are set to zero, pivot order is the
    natural column order.
    """
    if len(b) != a.rows:
        raise DimensionMismatch(f"rhs length {len(b)} != {a.rows} rows")
    rows = a.row_dicts()
    rhs_col = a.cols
    for i, v in enumerate(b):
        v = Fraction(v)
        if v:
            rows[i][rhs_col] = v
    irows = _integer_rows(rows)
    pivots = _eliminate(irows, range(a.cols))
    pivot_rows = {idx for idx, _ in pivots}
    for idx, row in enumerate(irows):
        if idx not in pivot_rows and row.get(rhs_col):
            if all(j == rhs_col for j in row):
                return None
    vec = [Fraction(0)] * (a.cols + 1)
    vec[rhs_col] = Fraction(-1)
    for idx, col in sorted(pivots, key=lambda rc: rc[1], reverse=True):
        row = irows[idx]
        acc = Fraction(0)
        for j, v in row.items():
            if j != col and vec[j]:
                acc += v * vec[j]
        vec[col] = -acc / row[col]
    return tuple(vec[: a.cols])
