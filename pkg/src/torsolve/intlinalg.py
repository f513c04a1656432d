"""Exact integer matrix algebra: Smith normal form, unimodular inverses, ranks.

All arithmetic uses Python's arbitrary-precision integers; intermediate
entries of an elimination can grow well past 64 bits even for small inputs,
so nothing here may round-trip through floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import NotUnimodularError, ZeroMatrixError


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix, row-major."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.entries or not self.entries[0]:
            raise ValueError("matrix dimensions must be positive")
        width = len(self.entries[0])
        for row in self.entries:
            if len(row) != width:
                raise ValueError("rows have inconsistent lengths")
            for e in row:
                if not isinstance(e, int):
                    raise TypeError(f"entries must be int, got {type(e).__name__}")

    @classmethod
    def from_rows(cls, rows) -> IntMatrix:
        return cls(tuple(tuple(int(e) for e in row) for row in rows))

    @classmethod
    def from_columns(cls, columns) -> IntMatrix:
        return cls.from_rows(zip(*columns))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> IntMatrix:
        return IntMatrix.from_rows(zip(*self.entries))

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        cols = other.transpose().entries
        return IntMatrix.from_rows(
            [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.entries]
        )

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        """Matrix times column vector."""
        if len(vector) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(row, vector)) for row in self.entries)

    def is_identity(self) -> bool:
        return self.rows == self.cols and all(
            e == (1 if i == j else 0)
            for i, row in enumerate(self.entries)
            for j, e in enumerate(row)
        )

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant requires a square matrix")
        return _bareiss_det([list(r) for r in self.entries])

    def rank(self) -> int:
        """Rank by fraction-free Gaussian elimination."""
        return _bareiss_rank([list(r) for r in self.entries])


def _bareiss_det(m: list[list[int]]) -> int:
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _bareiss_rank(m: list[list[int]]) -> int:
    rows = len(m)
    cols = len(m[0])
    prev = 1
    r = 0  # current pivot row
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                m[i][j] = (m[i][j] * m[r][c] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        if r == rows:
            break
    return r


@dataclass(frozen=True)
class SmithForm:
    """Factorization A = P @ D @ Q with P, Q unimodular and D diagonal.

    The nonzero diagonal entries of D are the invariant factors and divide
    one another in order: d_1 | d_2 | ... | d_k.
    """

    P: IntMatrix
    D: IntMatrix
    Q: IntMatrix
    invariant_factors: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)


def smith_normal_form(A: IntMatrix) -> SmithForm:
    """Smith normal form of a nonzero integer matrix.

    Pivoting always picks the entry of smallest nonzero absolute value in
    the trailing block; P and Q are accumulated as products of elementary
    unimodular operations so the factorization is exact by construction.
    """
    if all(e == 0 for row in A.entries for e in row):
        raise ZeroMatrixError("Smith normal form of the zero matrix")

    n, m = A.rows, A.cols
    S = [list(row) for row in A.entries]
    P = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    Q = [[1 if i == j else 0 for j in range(m)] for i in range(m)]

    # Invariant maintained by every operation below: A == P @ S @ Q.
    def row_swap(i, j):
        S[i], S[j] = S[j], S[i]
        for r in P:
            r[i], r[j] = r[j], r[i]

    def col_swap(i, j):
        for r in S:
            r[i], r[j] = r[j], r[i]
        Q[i], Q[j] = Q[j], Q[i]

    def row_negate(i):
        S[i] = [-e for e in S[i]]
        for r in P:
            r[i] = -r[i]

    def row_addmul(i, j, q):
        # row_i of S -= q * row_j;  col_j of P += q * col_i
        S[i] = [a - q * b for a, b in zip(S[i], S[j])]
        for r in P:
            r[j] += q * r[i]

    def col_addmul(j, i, q):
        # col_j of S -= q * col_i;  row_i of Q += q * row_j
        for r in S:
            r[j] -= q * r[i]
        Q[i] = [a + q * b for a, b in zip(Q[i], Q[j])]

    def move_min_pivot(k):
        """Move the smallest-abs nonzero entry of S[k:, k:] to (k, k)."""
        best = None
        for i in range(k, n):
            for j in range(k, m):
                if S[i][j] != 0 and (best is None or abs(S[i][j]) < abs(S[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            return False
        if best[0] != k:
            row_swap(k, best[0])
        if best[1] != k:
            col_swap(k, best[1])
        if S[k][k] < 0:
            row_negate(k)
        return True

    for k in range(min(n, m)):
        if not move_min_pivot(k):
            break
        while True:
            # Clear column k, then row k; a nonzero remainder becomes the
            # next, strictly smaller pivot, so this terminates.
            dirty = False
            for i in range(k + 1, n):
                if S[i][k] != 0:
                    q = S[i][k] // S[k][k]
                    row_addmul(i, k, q)
                    if S[i][k] != 0:
                        dirty = True
            for j in range(k + 1, m):
                if S[k][j] != 0:
                    q = S[k][j] // S[k][k]
                    col_addmul(j, k, q)
                    if S[k][j] != 0:
                        dirty = True
            if dirty:
                move_min_pivot(k)
                continue
            # Divisibility fix: drag a non-multiple into row k and restart.
            bad = next(
                ((i, j) for i in range(k + 1, n) for j in range(k + 1, m)
                 if S[i][j] % S[k][k] != 0),
                None,
            )
            if bad is None:
                break
            row_addmul(k, bad[0], -1)
            move_min_pivot(k)

    factors = []
    for k in range(min(n, m)):
        if S[k][k] != 0:
            factors.append(S[k][k])
    D = [[S[i][j] if i == j else 0 for j in range(m)] for i in range(n)]

    form = SmithForm(
        P=IntMatrix.from_rows(P),
        D=IntMatrix.from_rows(D),
        Q=IntMatrix.from_rows(Q),
        invariant_factors=tuple(factors),
    )
    _check_smith(A, form)
    return form


def _check_smith(A: IntMatrix, form: SmithForm):
    if (form.P @ form.D @ form.Q).entries != A.entries:
        raise AssertionError("Smith normal form reconstruction failed")
    if abs(form.P.det()) != 1 or abs(form.Q.det()) != 1:
        raise AssertionError("Smith normal form transform not unimodular")
    f = form.invariant_factors
    for a, b in zip(f, f[1:]):
        if b % a != 0:
            raise AssertionError("invariant factor divisibility violated")


def unimodular_inverse(U: IntMatrix) -> IntMatrix:
    """Exact integer inverse of a unimodular matrix."""
    if U.rows != U.cols:
        raise NotUnimodularError("matrix is not square")
    if abs(U.det()) != 1:
        raise NotUnimodularError("determinant is not +-1")
    n = U.rows
    aug = [[Fraction(e) for e in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(U.entries)]
    for c in range(n):
        pivot = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[pivot] = aug[pivot], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [e * inv for e in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    out = []
    for row in aug:
        vals = row[n:]
        if any(v.denominator != 1 for v in vals):
            raise AssertionError("inverse of unimodular matrix must be integral")
        out.append([int(v) for v in vals])
    result = IntMatrix.from_rows(out)
    if not (U @ result).is_identity():
        raise AssertionError("inverse verification failed")
    return result


def lattice_index(A: IntMatrix) -> int | float:
    """Index of the column lattice of A inside Z^rows.

    Returns the product of the invariant factors when the columns span a
    full-rank sublattice, and math.inf otherwise.
    """
    if all(e == 0 for row in A.entries for e in row):
        return math.inf
    form = smith_normal_form(A)
    if form.rank < A.rows:
        return math.inf
    return math.prod(form.invariant_factors)


def solve_integer(A: IntMatrix, rhs: Sequence[int]) -> tuple[int, ...] | None:
    """Solve A x = rhs exactly over the integers.

    Requires A to have full column rank (the solution, if any, is unique).
    Returns None when the system is inconsistent or the unique rational
    solution is not integral.
    """
    n, m = A.rows, A.cols
    if len(rhs) != n:
        raise ValueError("right-hand side length mismatch")
    aug = [[Fraction(e) for e in row] + [Fraction(int(b))]
           for row, b in zip(A.entries, rhs)]
    pivots = []
    r = 0
    for c in range(m):
        pivot = next((i for i in range(r, n) if aug[i][c] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [e * inv for e in aug[r]]
        for i in range(n):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    if r < m:
        raise ValueError("matrix does not have full column rank")
    for i in range(r, n):
        if aug[i][m] != 0:
            return None  # inconsistent
    x = [aug[i][m] for i in range(m)]
    if any(v.denominator != 1 for v in x):
        return None
    return tuple(int(v) for v in x)
