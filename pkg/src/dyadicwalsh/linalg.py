"""Exact rational Gaussian elimination for the falsifier's linear systems.

Pivoting prefers the entry of smallest |numerator| * |denominator| in the
pivot column (keeps the fractions balanced), breaking ties toward the
lowest row index, so eliminations are deterministic and reproducible.
"""

from __future__ import annotations

from fractions import Fraction


def _complexity(x: Fraction) -> int:
    return abs(x.numerator) * x.denominator


def rref(rows: list[list[Fraction]], ncols: int) -> list[int]:
    """Reduce `rows` in place to reduced row echelon form; returns pivot columns."""
    pivots = []
    r = 0
    for col in range(ncols):
        if r >= len(rows):
            break
        best = None
        for i in range(r, len(rows)):
            v = rows[i][col]
            if v != 0 and (best is None or _complexity(v) < _complexity(rows[best][col])):
                best = i
        if best is None:
            continue
        rows[r], rows[best] = rows[best], rows[r]
        piv = rows[r][col]
        if piv != 1:
            rows[r] = [v / piv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    return pivots


def nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of the solution space of rows * x = 0, one vector per free column."""
    work = [list(row) for row in rows if any(v != 0 for v in row)]
    pivots = rref(work, ncols)
    pivot_set = set(pivots)
    free_cols = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for fc in free_cols:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -work[r][fc]
        basis.append(vec)
    return basis
