"""Exact Gaussian elimination over rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class LinearSolution:
    """Verdict of an exact solve.

    status is "unique", "inconsistent" or "underdetermined". For the
    underdetermined case ``solution`` is the particular solution with all
    free variables at zero and ``nullspace`` a basis of the homogeneous
    solutions, one vector per free variable.
    """

    status: str
    solution: tuple[Fraction, ...] | None = None
    nullspace: tuple[tuple[Fraction, ...], ...] = ()


def solve_linear_system_exact(a, b) -> LinearSolution:
    """Solve A x = b exactly via Gauss-Jordan elimination."""
    rows = [list(map(_frac, row)) for row in a]
    rhs = [_frac(v) for v in b]
    if len(rows) != len(rhs):
        raise ValueError("matrix and right-hand side have different heights")
    m = len(rows)
    n = len(rows[0]) if rows else 0
    for row in rows:
        if len(row) != n:
            raise ValueError("ragged matrix")

    pivots: list[int] = []  # column of the pivot in each reduced row
    r = 0
    for col in range(n):
        pivot_row = next((i for i in range(r, m) if rows[i][col] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        rhs[r], rhs[pivot_row] = rhs[pivot_row], rhs[r]
        inv = Fraction(1) / rows[r][col]
        rows[r] = [c * inv for c in rows[r]]
        rhs[r] = rhs[r] * inv
        for i in range(m):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [ci - f * cr for ci, cr in zip(rows[i], rows[r])]
                rhs[i] = rhs[i] - f * rhs[r]
        pivots.append(col)
        r += 1
        if r == m:
            break

    for i in range(r, m):
        if rhs[i] != 0:
            return LinearSolution("inconsistent")

    particular = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        particular[col] = rhs[i]

    free = [c for c in range(n) if c not in set(pivots)]
    if not free:
        return LinearSolution("unique", tuple(particular))

    basis = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for i, col in enumerate(pivots):
            vec[col] = -rows[i][fc]
        basis.append(tuple(vec))
    return LinearSolution("underdetermined", tuple(particular), tuple(basis))
