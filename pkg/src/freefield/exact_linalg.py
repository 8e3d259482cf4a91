"""Exact linear algebra over any field-like elements (Fractions or Scalars):
row reduction, rank, nullspace.  Small dense matrices only."""

from __future__ import annotations

from fractions import Fraction


def rref(matrix):
    """Reduced row echelon form; returns (rows, pivot column indices).
    The input is not modified.  Entries must support +,-,*,/ and truthiness."""
    rows = [list(r) for r in matrix]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(matrix):
    return len(rref(matrix)[1])


def nullspace(matrix):
    """Basis of the right nullspace of the matrix (list of coefficient
    vectors c with sum_j c_j row_j... columns convention: M c = 0 where M is
    rows x cols; here the matrix rows are the vectors being combined, so we
    compute the LEFT nullspace of the row-matrix by transposing)."""
    if not matrix:
        return []
    nrows = len(matrix)
    ncols = len(matrix[0]) if matrix[0] else 0
    # combinations c over rows with sum_i c_i M[i][j] = 0 for all j:
    # solve the transposed homogeneous system
    trans = [[matrix[i][j] for i in range(nrows)] for j in range(ncols)]
    if not trans:
        # no constraints: every unit vector works
        one = Fraction(1)
        return [[one if i == j else Fraction(0) for i in range(nrows)]
                for j in range(nrows)]
    rows, pivots = rref(trans)
    free = [j for j in range(nrows) if j not in pivots]
    basis = []
    for fj in free:
        vec = [Fraction(0)] * nrows
        vec[fj] = Fraction(1)
        for ri, pc in enumerate(pivots):
            vec[pc] = -rows[ri][fj]
        basis.append(vec)
    return basis
