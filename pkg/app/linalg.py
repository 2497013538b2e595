from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

logger = logging.getLogger(__name__)


@dataclass
class IntegerMatrix:
    rows: int
    cols: int
    entries: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[int]]) -> "IntegerMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        entries = {
            (i, j): int(v) for i, row in enumerate(data) for j, v in enumerate(row) if v
        }
        return cls(rows, cols, entries)

    def to_dense(self) -> List[List[int]]:
        dense = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            dense[i][j] = v
        return dense

    def nnz(self) -> int:
        return len(self.entries)

    def transpose(self) -> "IntegerMatrix":
        flipped = {(j, i): v for (i, j), v in self.entries.items()}
        return IntegerMatrix(self.cols, self.rows, flipped)

    def permuted(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> "IntegerMatrix":
        """Row i moves to row_perm[i], column j to col_perm[j]."""
        return IntegerMatrix(
            self.rows,
            self.cols,
            {(row_perm[i], col_perm[j]): v for (i, j), v in self.entries.items()},
        )

    def matmul(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise ValueError(f"Shape mismatch: {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        by_row: Dict[int, Dict[int, int]] = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, {})[j] = v
        result: Dict[Tuple[int, int], int] = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, {}).items():
                result[(i, j)] = result.get((i, j), 0) + a * b
        return IntegerMatrix(self.rows, other.cols, {k: v for k, v in result.items() if v})

    def is_zero(self) -> bool:
        return not self.entries

    def to_domain_matrix(self) -> DomainMatrix:
        dok = {key: QQ(v) for key, v in self.entries.items()}
        return DomainMatrix.from_dok(dok, (self.rows, self.cols), QQ)


@dataclass(frozen=True)
class SmithResult:
    invariant_factors: Tuple[int, ...]
    left: Optional[List[List[int]]] = None
    right: Optional[List[List[int]]] = None

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def torsion(self) -> Tuple[int, ...]:
        return tuple(d for d in self.invariant_factors if d > 1)


def normalize_divisibility(diagonal: Sequence[int]) -> Tuple[int, ...]:
    """Turn any nonzero diagonal into the d1 | d2 | ... chain with the same product structure."""
    values = [abs(d) for d in diagonal if d]
    changed = True
    while changed:
        changed = False
        for i in range(len(values)):
            for j in range(i + 1, len(values)):
                a, b = values[i], values[j]
                if b % a:
                    g = gcd(a, b)
                    values[i], values[j] = g, a * b // g
                    changed = True
    return tuple(sorted(values))


def _sparse_unit_elimination(M: IntegerMatrix) -> Tuple[int, Dict[int, Dict[int, int]]]:
    """Eliminate unit pivots; returns the number of pivots and the leftover rows."""
    rows: Dict[int, Dict[int, int]] = {}
    cols: Dict[int, set] = {}
    for (i, j), v in M.entries.items():
        if v:
            rows.setdefault(i, {})[j] = v
            cols.setdefault(j, set()).add(i)

    pivots = 0
    progress = True
    while progress:
        progress = False
        for c in sorted(cols, key=lambda k: (len(cols[k]), k)):
            if c not in cols:
                continue
            units = [r for r in cols[c] if abs(rows[r][c]) == 1]
            if not units:
                continue
            r = min(units, key=lambda k: (len(rows[k]), k))
            pivot_row = rows.pop(r)
            p = pivot_row[c]
            for c2 in pivot_row:
                cols[c2].discard(r)
            for r2 in sorted(cols[c]):
                target = rows[r2]
                factor = target[c] * p
                for c2, v in pivot_row.items():
                    updated = target.get(c2, 0) - factor * v
                    if updated:
                        if c2 not in target:
                            cols[c2].add(r2)
                        target[c2] = updated
                    elif c2 in target:
                        del target[c2]
                        cols[c2].discard(r2)
                if not target:
                    del rows[r2]
            for c2 in list(pivot_row):
                if c2 in cols and not cols[c2]:
                    del cols[c2]
            cols.pop(c, None)
            pivots += 1
            progress = True
    return pivots, rows


def _dense_snf(
    A: List[List[int]], track: bool
) -> Tuple[List[int], Optional[List[List[int]]], Optional[List[List[int]]]]:
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)] if track else None
    V = [[int(i == j) for j in range(n)] for i in range(n)] if track else None

    def swap_rows(i: int, j: int) -> None:
        A[i], A[j] = A[j], A[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i: int, j: int) -> None:
        for row in A:
            row[i], row[j] = row[j], row[i]
        if V is not None:
            for row in V:
                row[i], row[j] = row[j], row[i]

    def add_row(target: int, source: int, k: int) -> None:
        if k:
            A[target] = [a + k * b for a, b in zip(A[target], A[source])]
            if U is not None:
                U[target] = [a + k * b for a, b in zip(U[target], U[source])]

    def add_col(target: int, source: int, k: int) -> None:
        if k:
            for row in A:
                row[target] += k * row[source]
            if V is not None:
                for row in V:
                    row[target] += k * row[source]

    diagonal: List[int] = []
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = A[i][j]
                if v and (best is None or abs(v) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            pivot = A[t][t]
            smaller = None
            for i in range(t + 1, m):
                add_row(i, t, -(A[i][t] // pivot))
                if A[i][t] and (smaller is None or abs(A[i][t]) < abs(A[smaller][t])):
                    smaller = i
            if smaller is not None:
                swap_rows(t, smaller)
                continue
            for j in range(t + 1, n):
                add_col(j, t, -(A[t][j] // pivot))
                if A[t][j] and (smaller is None or abs(A[t][j]) < abs(A[t][smaller])):
                    smaller = j
            if smaller is not None:
                swap_cols(t, smaller)
                continue
            offender = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % pivot),
                None,
            )
            if offender is not None:
                add_row(t, offender, 1)
                continue
            break
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            if U is not None:
                U[t] = [-a for a in U[t]]
        diagonal.append(A[t][t])
        t += 1
    return diagonal, U, V


def smith_normal_form(M: IntegerMatrix, with_transforms: bool = False) -> SmithResult:
    """Invariant factors of M; with transforms, U and V satisfy U * M * V = diag(d_i)."""
    if with_transforms:
        dense = M.to_dense()
        diagonal, U, V = _dense_snf(dense, track=True)
        return SmithResult(tuple(diagonal), U, V)

    pivots, leftover = _sparse_unit_elimination(M)
    factors = [1] * pivots
    if leftover:
        row_ids = sorted(leftover)
        col_ids = sorted({c for row in leftover.values() for c in row})
        col_pos = {c: k for k, c in enumerate(col_ids)}
        dense = [[0] * len(col_ids) for _ in row_ids]
        for k, r in enumerate(row_ids):
            for c, v in leftover[r].items():
                dense[k][col_pos[c]] = v
        diagonal, _, _ = _dense_snf(dense, track=False)
        factors.extend(diagonal)
        logger.debug(
            "snf.dense_remainder",
            extra={"rows": len(row_ids), "cols": len(col_ids), "unit_pivots": pivots},
        )
    return SmithResult(normalize_divisibility(factors))


def to_fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def rational_rank(M: IntegerMatrix) -> int:
    if M.rows == 0 or M.cols == 0 or M.is_zero():
        return 0
    return M.to_domain_matrix().rank()
