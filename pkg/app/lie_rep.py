from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, List, Tuple

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from app.constants import DEFAULT_LIE_GUARD, DEFAULT_TREE_MODULE_GUARD
from app.errors import check_guard
from app.gsets import GSet
from app.linalg import to_fraction
from app.perm_groups import Perm, symmetric_group
from app.simplicial_homology import CharacterVector, character, reduced_homology
from app.trees import build_tree_space

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


def bracket(left: Dict[Word, int], right: Dict[Word, int]) -> Dict[Word, int]:
    """[a, b] = ab - ba in the free associative algebra."""
    out: Dict[Word, int] = {}
    for u, cu in left.items():
        for v, cv in right.items():
            out[u + v] = out.get(u + v, 0) + cu * cv
            out[v + u] = out.get(v + u, 0) - cu * cv
    return {w: c for w, c in out.items() if c}


@dataclass(frozen=True)
class LieBasisElement:
    """Left-normed bracket [x_n, x_{order[0]}, ..., x_{order[-1]}] on letters 0..n-1.

    The fixed letter x_n is ``n - 1``; ``order`` lists the other letters.
    """

    n: int
    order: Tuple[int, ...]

    @property
    def leading_word(self) -> Word:
        return (self.n - 1,) + self.order

    @cached_property
    def expansion(self) -> Dict[Word, int]:
        poly: Dict[Word, int] = {(self.n - 1,): 1}
        for letter in self.order:
            poly = bracket(poly, {(letter,): 1})
        return poly

    def format(self) -> str:
        return "[" + ", ".join(f"x{a + 1}" for a in self.leading_word) + "]"


def permute_word_polynomial(poly: Dict[Word, int], sigma: Perm) -> Dict[Word, int]:
    return {tuple(sigma(a) for a in word): c for word, c in poly.items()}


class LieModule:
    """Lie(n) inside the multilinear associative span, with exact coordinates.

    Columns of the expansion matrix are the n! words; a pivot set of (n-1)! words gives a
    square invertible block used to solve for coordinates.
    """

    def __init__(self, n: int, guard: int = DEFAULT_LIE_GUARD) -> None:
        if n < 2:
            raise ValueError(f"Lie(n) needs n >= 2, got {n}")
        check_guard("Lie degree", guard, n)
        self.n = n
        self.basis = [
            LieBasisElement(n, order) for order in itertools.permutations(range(n - 1))
        ]
        self.words: List[Word] = list(itertools.permutations(range(n)))
        self.word_index = {w: k for k, w in enumerate(self.words)}
        entries = {
            i: {self.word_index[w]: QQ(c) for w, c in element.expansion.items()}
            for i, element in enumerate(self.basis)
        }
        matrix = DomainMatrix.from_dok(
            {(i, j): c for i, row in entries.items() for j, c in row.items()},
            (len(self.basis), len(self.words)),
            QQ,
        )
        _, pivots = matrix.rref()
        self.rank = len(pivots)
        if self.rank != math.factorial(n - 1):
            raise ArithmeticError(f"Lie({n}) expansions have rank {self.rank}")
        self.pivots = list(pivots)
        self.solver = matrix.extract(list(range(len(self.basis))), self.pivots).inv()
        logger.debug("lie.basis.built", extra={"n": n, "dimension": self.rank})

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def coordinates(self, poly: Dict[Word, int]) -> List[Fraction]:
        """Coordinates of a Lie polynomial, solved on the pivot words."""
        row = DomainMatrix(
            [[QQ(poly.get(self.words[j], 0)) for j in self.pivots]], (1, self.rank), QQ
        )
        solved = row * self.solver
        return [to_fraction(solved[0, i].element) for i in range(self.rank)]

    def action_matrix(self, sigma: Perm) -> List[List[Fraction]]:
        """Column i holds the coordinates of sigma applied to basis element i."""
        columns = [
            self.coordinates(permute_word_polynomial(b.expansion, sigma)) for b in self.basis
        ]
        return [[columns[j][i] for j in range(self.rank)] for i in range(self.rank)]

    def trace(self, sigma: Perm) -> Fraction:
        matrix = self.action_matrix(sigma)
        return sum((matrix[i][i] for i in range(self.rank)), Fraction(0))

    def projection_trace(self, sigma: Perm) -> int:
        """Trace read off the coefficients of words starting with x_n.

        Each basis bracket has coefficient one on its own leading word and zero on every
        other word starting with x_n, so those coefficients are coordinates.
        """
        inverse = sigma.inverse()
        total = 0
        for element in self.basis:
            pulled = tuple(inverse(a) for a in element.leading_word)
            total += element.expansion.get(pulled, 0)
        return total


@lru_cache(maxsize=None)
def lie_module(n: int, guard: int = DEFAULT_LIE_GUARD) -> LieModule:
    return LieModule(n, guard=guard)


def lie_basis(n: int, guard: int = DEFAULT_LIE_GUARD) -> List[LieBasisElement]:
    return list(lie_module(n, guard).basis)


@lru_cache(maxsize=None)
def _trace_by_cycle_type(n: int, cycle_type: Tuple[int, ...], guard: int) -> Fraction:
    cycles = []
    start = 0
    for length in cycle_type:
        cycles.append(tuple(range(start, start + length)))
        start += length
    return lie_module(n, guard).trace(Perm.from_cycles(n, cycles))


def lie_trace(sigma: Perm, guard: int = DEFAULT_LIE_GUARD) -> Fraction:
    return _trace_by_cycle_type(sigma.degree, sigma.cycle_type(), guard)


def lie_character(n: int, guard: int = DEFAULT_LIE_GUARD) -> CharacterVector:
    """Character of Lie(n) over the symmetric group on n letters, tagged with degree n - 3."""
    G = symmetric_group(n)
    return CharacterVector(G, n - 3, tuple(lie_trace(g, guard) for g in G.elements))


def restricted_lie_character(A: GSet, guard: int = DEFAULT_LIE_GUARD) -> CharacterVector:
    """Lie(A): the Lie(n) character composed with the action homomorphism of A."""
    G = A.group
    return CharacterVector(
        G, A.size - 3, tuple(lie_trace(A.perm(g), guard) for g in range(G.order))
    )


def sign_character(A: GSet) -> CharacterVector:
    G = A.group
    return CharacterVector(
        G, A.size - 3, tuple(Fraction(A.perm(g).sign()) for g in range(G.order))
    )


@dataclass(frozen=True)
class ClassRow:
    representative: str
    size: int
    homology: Fraction
    sign: Fraction
    lie: Fraction

    @property
    def predicted(self) -> Fraction:
        return self.sign * self.lie

    @property
    def matches(self) -> bool:
        return self.homology == self.predicted


def _render(value: Fraction) -> object:
    return value.numerator if value.denominator == 1 else str(value)


@dataclass(frozen=True)
class TreeModuleReport:
    size: int
    degree: int
    betti: Dict[int, int]
    torsion: Dict[int, Tuple[int, ...]]
    rows: Tuple[ClassRow, ...]
    real: bool = True
    sign_multiplicative: bool = True

    @property
    def concentrated(self) -> bool:
        return set(self.betti) == {self.degree}

    @property
    def rank_ok(self) -> bool:
        return self.betti.get(self.degree, 0) == math.factorial(self.size - 1)

    @property
    def torsion_free(self) -> bool:
        return not any(self.torsion.values())

    @property
    def passed(self) -> bool:
        return (
            self.concentrated
            and self.rank_ok
            and self.torsion_free
            and self.real
            and self.sign_multiplicative
            and all(r.matches for r in self.rows)
        )

    def as_payload(self) -> Dict[str, object]:
        return {
            "leaves": self.size,
            "degree": self.degree,
            "reduced_betti": {str(d): b for d, b in sorted(self.betti.items())},
            "torsion_free": self.torsion_free,
            "character_is_real": self.real,
            "sign_multiplicative": self.sign_multiplicative,
            "classes": [
                {
                    "representative": r.representative,
                    "size": r.size,
                    "homology": _render(r.homology),
                    "sign": _render(r.sign),
                    "lie": _render(r.lie),
                    "sign_times_lie": _render(r.predicted),
                    "matches": r.matches,
                }
                for r in self.rows
            ],
        }


def verify_tree_homology_module(
    A: GSet,
    guard: int = DEFAULT_TREE_MODULE_GUARD,
    lie_guard: int = DEFAULT_LIE_GUARD,
) -> TreeModuleReport:
    """Compare the homology character of the tree space of A with sign times Lie(A)."""
    check_guard("tree homology points", guard, A.size)
    if A.size < 3:
        raise ValueError("The tree space needs at least three leaves")
    K = build_tree_space(A, guard=max(guard, A.size))
    homology = reduced_homology(K)
    degree = A.size - 3
    observed = character(K, degree)
    signs = sign_character(A)
    lie = restricted_lie_character(A, guard=lie_guard)
    G = A.group
    rows = tuple(
        ClassRow(
            representative=str(G.elements[members[0]]),
            size=len(members),
            homology=observed.values[members[0]],
            sign=signs.values[members[0]],
            lie=lie.values[members[0]],
        )
        for members in G.conjugacy_classes
    )
    report = TreeModuleReport(
        size=A.size,
        degree=degree,
        betti=homology.nonzero(),
        torsion={d: t for d, t in homology.torsion.items() if t},
        rows=rows,
        real=is_real_character(observed),
        sign_multiplicative=is_multiplicative(signs),
    )
    logger.info(
        "lie.tree_module.verified",
        extra={"leaves": A.size, "classes": len(rows), "passed": report.passed},
    )
    return report


def is_real_character(chi: CharacterVector) -> bool:
    G = chi.group
    inverses = G.inverse_indices
    return all(chi.values[g] == chi.values[inverses[g]] for g in range(G.order))


def is_multiplicative(chi: CharacterVector) -> bool:
    G = chi.group
    return all(
        chi.values[G.mul(g, h)] == chi.values[g] * chi.values[h]
        for g in range(G.order)
        for h in range(G.order)
    )


def vanishes_off_uniform_types(n: int, guard: int = DEFAULT_LIE_GUARD) -> bool:
    """Lie(n) is zero on every class whose cycles do not all share one length."""
    chi = lie_character(n, guard)
    G = chi.group
    return all(
        chi.values[members[0]] == 0
        for members in G.conjugacy_classes
        if len(set(G.elements[members[0]].cycle_type())) > 1
    )
