"""Exact scalars and exact sparse linear algebra."""

from .expr import Expr, PointContext, RadPoly, random_expr, random_rational
from .linalg import ExactMatrix, kernel_exact, rank_exact, solve_exact

__all__ = [
    "Expr",
    "ExactMatrix",
    "PointContext",
    "RadPoly",
    "kernel_exact",
    "random_expr",
    "random_rational",
    "rank_exact",
    "solve_exact",
]
