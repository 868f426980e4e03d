"""Exact rational linear programming.

Dense two-phase simplex over :class:`fractions.Fraction` using Bland's
anti-cycling rule, so termination is guaranteed on the degenerate
polytopes that probability constraints produce. Sized for desk-scale
problems (tens of variables); deliberately no sparse or revised-simplex
machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

LE = "<="
EQ = "="
GE = ">="

_REL_FLIP = {LE: GE, GE: LE, EQ: EQ}


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    rel: str
    rhs: Fraction

    @classmethod
    def of(cls, coeffs: Iterable, rel: str, rhs) -> "Constraint":
        if rel not in (LE, EQ, GE):
            raise ValueError(f"unknown relation {rel!r}")
        return cls(tuple(_frac(c) for c in coeffs), rel, _frac(rhs))


@dataclass(frozen=True)
class LinearProgram:
    """maximize ``objective . x`` subject to the constraint rows.

    ``lower[k]`` is the lower bound of variable ``k``; ``None`` marks a
    free variable. When ``lower`` is omitted every variable is bounded
    below by 0, the natural frame for probability coordinates.
    """

    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...]
    lower: tuple[Fraction | None, ...] | None = None

    @classmethod
    def of(cls, objective, constraints, lower=None) -> "LinearProgram":
        obj = tuple(_frac(c) for c in objective)
        rows = tuple(
            c if isinstance(c, Constraint) else Constraint.of(*c) for c in constraints
        )
        for row in rows:
            if len(row.coeffs) != len(obj):
                raise ValueError("constraint width differs from objective width")
        low = None
        if lower is not None:
            low = tuple(None if v is None else _frac(v) for v in lower)
            if len(low) != len(obj):
                raise ValueError("bound width differs from objective width")
        return cls(obj, rows, low)

    @property
    def n_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    point: tuple[Fraction, ...] | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(A, b, basis, leave, enter):
    piv = A[leave][enter]
    if piv != 1:
        A[leave] = [c / piv for c in A[leave]]
        b[leave] = b[leave] / piv
    row_l = A[leave]
    rhs_l = b[leave]
    total = len(row_l)
    m = len(A)
    for i in range(m):
        if i == leave:
            continue
        f = A[i][enter]
        if f:
            row_i = A[i]
            for j in range(total):
                if row_l[j]:
                    row_i[j] -= f * row_l[j]
            b[i] -= f * rhs_l
    basis[leave] = enter


def _run_simplex(A, b, basis, zrow, zval):
    """Loop of entering/leaving steps; returns (status, value)."""
    m = len(A)
    total = len(zrow)
    while True:
        enter = -1
        for j in range(total):
            if zrow[j] > 0:
                enter = j
                break
        if enter < 0:
            return "optimal", zval
        leave = -1
        best = None
        for i in range(m):
            a = A[i][enter]
            if a > 0:
                ratio = b[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded", zval
        gain = zrow[enter]
        _pivot(A, b, basis, leave, enter)
        row_l = A[leave]
        for j in range(total):
            if row_l[j]:
                zrow[j] -= gain * row_l[j]
        zval += gain * b[leave]


def lp_solve_exact(lp: LinearProgram) -> LpResult:
    """Solve the LP exactly; every returned coordinate is a Fraction."""
    n = lp.n_vars
    lower = lp.lower if lp.lower is not None else (Fraction(0),) * n
    if len(lower) != n:
        raise ValueError("bound width differs from objective width")

    # Column layout: bounded x_k becomes one shifted nonnegative column,
    # free x_k a (positive, negative) pair.
    col_of = []
    ncols = 0
    for k in range(n):
        if lower[k] is None:
            col_of.append(("split", ncols, ncols + 1))
            ncols += 2
        else:
            col_of.append(("shift", ncols, lower[k]))
            ncols += 1

    def to_cols(coeffs):
        row = [Fraction(0)] * ncols
        const = Fraction(0)
        for k, c in enumerate(coeffs):
            if not c:
                continue
            spec = col_of[k]
            if spec[0] == "split":
                row[spec[1]] += c
                row[spec[2]] -= c
            else:
                row[spec[1]] += c
                const += c * spec[2]
        return row, const

    prepared = []
    for con in lp.constraints:
        row, const = to_cols(con.coeffs)
        rhs = con.rhs - const
        rel = con.rel
        if rhs < 0:
            row = [-c for c in row]
            rhs = -rhs
            rel = _REL_FLIP[rel]
        prepared.append((row, rel, rhs))

    m = len(prepared)
    nslack = sum(1 for _, rel, _ in prepared if rel != EQ)
    A = []
    b = []
    basis: list[int | None] = []
    scol = ncols
    for row, rel, rhs in prepared:
        r = row + [Fraction(0)] * nslack
        if rel == LE:
            r[scol] = Fraction(1)
            basis.append(scol)
            scol += 1
        elif rel == GE:
            r[scol] = Fraction(-1)
            basis.append(None)
            scol += 1
        else:
            basis.append(None)
        A.append(r)
        b.append(rhs)

    nreal = ncols + nslack
    art = []
    for i in range(m):
        if basis[i] is None:
            for r in A:
                r.append(Fraction(0))
            A[i][-1] = Fraction(1)
            basis[i] = nreal + len(art)
            art.append(nreal + len(art))

    if art:
        total = nreal + len(art)
        zrow = [Fraction(0)] * total
        zval = Fraction(0)
        for j in art:
            zrow[j] = Fraction(-1)
        for i, bi in enumerate(basis):
            if bi in art:  # basic artificial, cost -1: price it out
                zval += -b[i]
                for j in range(total):
                    if A[i][j]:
                        zrow[j] += A[i][j]
        status, zval = _run_simplex(A, b, basis, zrow, zval)
        if zval != 0:
            return LpResult("infeasible")
        # Drive leftover zero-level artificials out of the basis; rows that
        # cannot pivot onto a real column are redundant and dropped.
        art_set = set(art)
        drop = []
        for i in range(m):
            if basis[i] in art_set:
                for j in range(nreal):
                    if A[i][j]:
                        _pivot(A, b, basis, i, j)
                        break
                else:
                    drop.append(i)
        if drop:
            for i in reversed(drop):
                del A[i], b[i], basis[i]
            m = len(A)
        A = [row[:nreal] for row in A]

    # Phase 2.
    obj_row, obj_const = to_cols(lp.objective)
    cost = obj_row + [Fraction(0)] * nslack
    zrow = cost[:]
    zval = Fraction(0)
    for i, bi in enumerate(basis):
        cbi = cost[bi]
        if cbi:
            zval += cbi * b[i]
            for j in range(nreal):
                if A[i][j]:
                    zrow[j] -= cbi * A[i][j]
    status, zval = _run_simplex(A, b, basis, zrow, zval)
    if status == "unbounded":
        return LpResult("unbounded")

    colval = [Fraction(0)] * nreal
    for i, bi in enumerate(basis):
        colval[bi] = b[i]
    point = []
    for k in range(n):
        spec = col_of[k]
        if spec[0] == "split":
            point.append(colval[spec[1]] - colval[spec[2]])
        else:
            point.append(colval[spec[1]] + spec[2])
    return LpResult("optimal", zval + obj_const, tuple(point))


def _solve_min_coordinate(region: LinearProgram, coords: Iterable[int]) -> LpResult:
    """Maximize an auxiliary lower bound on the listed coordinates."""
    n = region.n_vars
    idx = sorted(set(coords))
    if not idx:
        raise ValueError("coords must be nonempty")
    if idx[0] < 0 or idx[-1] >= n:
        raise ValueError("coordinate index out of range")
    zero = Fraction(0)
    cons = [Constraint(c.coeffs + (zero,), c.rel, c.rhs) for c in region.constraints]
    for k in idx:
        row = [zero] * (n + 1)
        row[k] = Fraction(1)
        row[n] = Fraction(-1)
        cons.append(Constraint(tuple(row), GE, zero))
    lower = region.lower if region.lower is not None else (zero,) * n
    aug = LinearProgram(
        tuple([zero] * n + [Fraction(1)]),
        tuple(cons),
        tuple(lower) + (None,),
    )
    res = lp_solve_exact(aug)
    if res.status == "unbounded":
        raise ValueError("region is unbounded on the listed coordinates")
    return res


def max_min_coordinate(region: LinearProgram, coords: Iterable[int]) -> Fraction | None:
    """Largest delta for which the region holds a point with every listed
    coordinate >= delta; None when the region is empty.

    A strictly positive return certifies a relative-interior point over the
    listed coordinates. The region's objective, if any, is ignored.
    """
    res = _solve_min_coordinate(region, coords)
    return None if res.status == "infeasible" else res.value


def max_min_coordinate_point(
    region: LinearProgram, coords: Iterable[int]
) -> tuple[Fraction, tuple[Fraction, ...]] | None:
    """Like :func:`max_min_coordinate`, but also return an attaining point."""
    res = _solve_min_coordinate(region, coords)
    if res.status == "infeasible":
        return None
    return res.value, res.point[: region.n_vars]
