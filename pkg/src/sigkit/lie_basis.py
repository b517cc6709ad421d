"""Lyndon and standard Hall bases of the free Lie algebra.

Provides bracketed basis elements, their expansions into words, the
block-diagonal (per anagram class) mapping matrices between words and basis
elements, and exact Lie brackets expressed in a basis.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .words import (
    LetterFreq,
    Word,
    anagram_key,
    class_words,
    is_lyndon,
    lyndon_words,
    rank_word,
    witt_level_count,
    word_rank,
)

LYNDON = "lyndon"
STANDARD_HALL = "hall"
_KINDS = (LYNDON, STANDARD_HALL)

# Expansions of elements at levels above this are recomputed on demand rather
# than cached; caps memory when building high-level bases.
_EXPANSION_CACHE_MAX_LEVEL = 8


class BasisElt:
    """A letter, or a bracket [left,right] admitted to a Hall-type basis."""

    __slots__ = ("kind", "letter", "left", "right", "level", "foliage", "_skey", "_hash")

    def __init__(self, kind: str, letter: int | None = None,
                 left: "BasisElt | None" = None, right: "BasisElt | None" = None):
        self.kind = kind
        self.letter = letter
        self.left = left
        self.right = right
        if letter is not None:
            self.level = 1
            self.foliage: Word = (letter,)
            self._skey = letter
        else:
            assert left is not None and right is not None
            self.level = left.level + right.level
            self.foliage = left.foliage + right.foliage
            self._skey = (left._skey, right._skey)
        self._hash = hash((kind, self._skey))

    def is_letter(self) -> bool:
        return self.letter is not None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (isinstance(other, BasisElt) and self.kind == other.kind
                and self._skey == other._skey)

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        if self.letter is not None:
            return str(self.letter)
        return f"[{self.left},{self.right}]"

    def __repr__(self) -> str:
        return f"BasisElt({self})"


def compare_elements(e1: BasisElt, e2: BasisElt) -> int:
    """Total order used within a basis; returns -1, 0 or 1.

    Lower levels come first.  Letters compare naturally.  Equal-level
    brackets compare by foliage for the Lyndon kind and recursively (left
    operand, then right) for the standard Hall kind.
    """
    if e1.kind != e2.kind:
        raise ValueError("cannot compare elements of different basis kinds")
    if e1.level != e2.level:
        return -1 if e1.level < e2.level else 1
    if e1.is_letter():
        assert e2.is_letter()
        return (e1.letter > e2.letter) - (e1.letter < e2.letter)
    if e1.kind == LYNDON:
        return (e1.foliage > e2.foliage) - (e1.foliage < e2.foliage)
    c = compare_elements(e1.left, e2.left)
    if c:
        return c
    return compare_elements(e1.right, e2.right)


def standard_factorize(word: Sequence[int]) -> tuple[Word, Word]:
    """Split a Lyndon word w, |w| >= 2, as uv with v the longest proper Lyndon suffix."""
    w = tuple(word)
    if len(w) < 2:
        raise ValueError(f"need at least two letters, got {w!r}")
    if not is_lyndon(w):
        raise ValueError(f"{w!r} is not a Lyndon word")
    for i in range(1, len(w)):
        if is_lyndon(w[i:]):
            return w[:i], w[i:]
    raise AssertionError("unreachable: a single letter is always Lyndon")


def _build_lyndon(d: int, m: int) -> list[list[BasisElt]]:
    cache: dict[Word, BasisElt] = {}

    def elt(w: Word) -> BasisElt:
        e = cache.get(w)
        if e is None:
            if len(w) == 1:
                e = BasisElt(LYNDON, letter=w[0])
            else:
                u, v = standard_factorize(w)
                e = BasisElt(LYNDON, left=elt(u), right=elt(v))
            cache[w] = e
        return e

    return [[elt(w) for w in level] for level in lyndon_words(d, m)]


def _build_standard_hall(d: int, m: int) -> list[list[BasisElt]]:
    levels = [[BasisElt(STANDARD_HALL, letter=i) for i in range(1, d + 1)]]
    order = functools.cmp_to_key(compare_elements)
    for k in range(2, m + 1):
        new = []
        for ll in range(1, k):
            for a in levels[ll - 1]:
                for b in levels[k - ll - 1]:
                    # admission: [a,b] with a < b and (b a letter or b=[c,e] with c <= a)
                    if compare_elements(a, b) < 0 and (
                            b.is_letter() or compare_elements(b.left, a) <= 0):
                        new.append(BasisElt(STANDARD_HALL, left=a, right=b))
        new.sort(key=order)
        levels.append(new)
    return levels


class HallBasis:
    """Ordered, level-graded basis of the free Lie algebra on 1..d up to level m."""

    def __init__(self, kind: str, d: int, m: int, levels: list[list[BasisElt]]):
        self.kind = kind
        self.d = d
        self.m = m
        self.levels = levels
        self.elements: list[BasisElt] = [e for lev in levels for e in lev]
        self.level_sizes = [len(lev) for lev in levels]
        offsets = [0]
        for n in self.level_sizes:
            offsets.append(offsets[-1] + n)
        self.level_offsets = offsets  # length m+1; offset of level k is [k-1]
        self.index: dict[BasisElt, int] = {e: i for i, e in enumerate(self.elements)}
        self._expansions: dict[BasisElt, dict[int, int]] = {}
        self._blocks: dict[int, list[AnagramBlock]] = {}

    @property
    def size(self) -> int:
        return len(self.elements)

    def level_slice(self, level: int) -> slice:
        if not 1 <= level <= self.m:
            raise ValueError(f"level {level} outside 1..{self.m}")
        return slice(self.level_offsets[level - 1], self.level_offsets[level])

    def expand_ranks(self, elt: BasisElt) -> dict[int, int]:
        """Expansion of elt as {word rank within its level: integer coefficient}."""
        out = self._expansions.get(elt)
        if out is not None:
            return out
        if elt.is_letter():
            out = {elt.letter - 1: 1}
        else:
            p = self.expand_ranks(elt.left)
            q = self.expand_ranks(elt.right)
            shift_p = self.d ** elt.right.level
            shift_q = self.d ** elt.left.level
            out = {}
            for r1, c1 in p.items():
                for r2, c2 in q.items():
                    _bump(out, r1 * shift_p + r2, c1 * c2)
                    _bump(out, r2 * shift_q + r1, -c1 * c2)
        if elt.level <= _EXPANSION_CACHE_MAX_LEVEL:
            self._expansions[elt] = out
        return out

    def __repr__(self) -> str:
        return f"HallBasis({self.kind}, d={self.d}, m={self.m}, size={self.size})"


def build_basis(d: int, m: int, kind: str = LYNDON) -> HallBasis:
    """Construct the Lyndon or standard Hall basis for dimension d, level m."""
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    if d < 1 or m < 1:
        raise ValueError(f"need d >= 1 and m >= 1, got d={d}, m={m}")
    levels = _build_lyndon(d, m) if kind == LYNDON else _build_standard_hall(d, m)
    basis = HallBasis(kind, d, m, levels)
    for k in range(1, m + 1):
        assert basis.level_sizes[k - 1] == witt_level_count(d, k)
    return basis


def _bump(table: dict, key, value) -> None:
    new = table.get(key, 0) + value
    if new:
        table[key] = new
    elif key in table:
        del table[key]


def expand(elt: BasisElt) -> dict[Word, int]:
    """Multiply out the brackets of a basis element over words, exactly."""
    if elt.is_letter():
        return {(elt.letter,): 1}
    p = expand(elt.left)
    q = expand(elt.right)
    out: dict[Word, int] = {}
    for w1, c1 in p.items():
        for w2, c2 in q.items():
            _bump(out, w1 + w2, c1 * c2)
            _bump(out, w2 + w1, -c1 * c2)
    return out


class AnagramBlock:
    """One anagram class of a level: class words (rows) against basis elements (columns).

    matrix[i][j] is the coefficient of row_words[i] in the expansion of
    col_elements[j].  The full matrix and the square restriction to Lyndon
    rows are materialized lazily; solver construction for high levels only
    ever touches the restriction.
    """

    def __init__(self, basis: HallBasis, key: LetterFreq,
                 row_words: list[Word], col_elements: list[BasisElt],
                 col_positions: np.ndarray):
        self._basis = basis
        self.key = key
        self.row_words = row_words
        self.col_elements = col_elements
        self.col_positions = col_positions  # positions inside the level's basis list

    @functools.cached_property
    def lyndon_rows(self) -> np.ndarray:
        """Indices of the Lyndon words within row_words."""
        return np.array([i for i, w in enumerate(self.row_words) if is_lyndon(w)],
                        dtype=np.intp)

    @functools.cached_property
    def matrix(self) -> np.ndarray:
        d = self._basis.d
        row_of = {word_rank(w, d): i for i, w in enumerate(self.row_words)}
        out = np.zeros((len(self.row_words), len(self.col_elements)), dtype=np.int64)
        for j, elt in enumerate(self.col_elements):
            for r, c in self._basis.expand_ranks(elt).items():
                out[row_of[r], j] = c
        return out

    @functools.cached_property
    def restricted(self) -> np.ndarray:
        """Square restriction to Lyndon rows (Lyndon kind only); unit lower triangular."""
        if self._basis.kind != LYNDON:
            raise ValueError("restriction to Lyndon rows applies to the Lyndon kind only")
        d = self._basis.d
        row_of = {word_rank(self.row_words[i], d): j
                  for j, i in enumerate(self.lyndon_rows)}
        out = np.zeros((len(row_of), len(self.col_elements)), dtype=np.int64)
        for j, elt in enumerate(self.col_elements):
            for r, c in self._basis.expand_ranks(elt).items():
                i = row_of.get(r)
                if i is not None:
                    out[i, j] = c
        return out


def mapping_blocks(basis: HallBasis, level: int) -> list[AnagramBlock]:
    """Anagram-class blocks of the level's word/basis mapping matrix.

    One block per anagram key with at least one basis element, ordered by the
    alphabetically first word of the class.  Rows are the class words in
    alphabetical order; columns are the class's basis elements in basis order.
    """
    if not 1 <= level <= basis.m:
        raise ValueError(f"level {level} outside 1..{basis.m}")
    cached = basis._blocks.get(level)
    if cached is not None:
        return cached
    groups: dict[LetterFreq, list[int]] = {}
    level_elements = basis.levels[level - 1]
    for pos, elt in enumerate(level_elements):
        groups.setdefault(anagram_key(elt.foliage), []).append(pos)
    blocks = []
    for key in sorted(groups, key=lambda k: tuple(l for l, c in k for _ in range(c))):
        positions = groups[key]
        blocks.append(AnagramBlock(
            basis, key,
            row_words=class_words(key),
            col_elements=[level_elements[p] for p in positions],
            col_positions=np.array(positions, dtype=np.intp),
        ))
    basis._blocks[level] = blocks
    return blocks


@dataclass
class LieSeries:
    """Coefficients over a Hall-type basis, level-major in basis order.

    The coefficient array is float64 for numeric work and object-dtype
    (Fraction entries) for exact work.
    """
    basis: HallBasis
    coefficients: np.ndarray

    def __post_init__(self):
        if len(self.coefficients) != self.basis.size:
            raise ValueError(
                f"expected {self.basis.size} coefficients, got {len(self.coefficients)}")

    def level_block(self, level: int) -> np.ndarray:
        return self.coefficients[self.basis.level_slice(level)]

    def items(self) -> Iterator[tuple[BasisElt, object]]:
        return zip(self.basis.elements, self.coefficients)


def project_words_exact(basis: HallBasis, level: int,
                        coeffs: dict[int, Fraction | int]) -> dict[int, Fraction]:
    """Exactly express a homogeneous Lie element in the basis.

    coeffs maps word ranks at the given level to exact coefficients; returns
    {flat basis index: coefficient}.  Raises if the input is not in the span
    of the basis elements of that level.
    """
    if not coeffs:
        return {}
    d = basis.d
    by_key: dict[LetterFreq, dict[int, Fraction | int]] = {}
    for r, c in coeffs.items():
        if c == 0:
            continue
        word = rank_word(r, level, d)
        by_key.setdefault(anagram_key(word), {})[r] = c
    blocks = {b.key: b for b in mapping_blocks(basis, level)}
    offset = basis.level_offsets[level - 1]
    out: dict[int, Fraction] = {}
    for key, class_coeffs in by_key.items():
        block = blocks.get(key)
        if block is None:
            raise ValueError(f"coefficients in class {key} lie outside the Lie span")
        if basis.kind == LYNDON:
            solved = _solve_lyndon_exact(basis, block, class_coeffs)
        else:
            solved = _solve_block_exact(basis, block, class_coeffs)
        for pos, value in zip(block.col_positions, solved):
            if value:
                out[offset + int(pos)] = Fraction(value)
    return out


def _solve_lyndon_exact(basis, block, class_coeffs):
    """Forward substitution on the unit-lower-triangular Lyndon restriction."""
    lmat = block.restricted
    ranks = [word_rank(block.row_words[i], basis.d) for i in block.lyndon_rows]
    solution = []
    residual = dict(class_coeffs)
    for i, r in enumerate(ranks):
        ci = residual.get(r, 0)
        solution.append(ci)
        if ci:
            col = lmat[:, i]
            for ii in range(i + 1, len(ranks)):
                if col[ii]:
                    _bump(residual, ranks[ii], -int(col[ii]) * ci)
    # rows below the triangle must be consumed exactly
    solved_ranks = set(ranks)
    expansion_check: dict[int, object] = {}
    for j, elt in enumerate(block.col_elements):
        cj = solution[j]
        if cj:
            for r, c in basis.expand_ranks(elt).items():
                _bump(expansion_check, r, c * cj)
    if expansion_check != {r: c for r, c in class_coeffs.items() if c}:
        raise ValueError("coefficients are not a Lie element of this level")
    return solution


def _solve_block_exact(basis, block, class_coeffs):
    """Exact Gaussian elimination of the (overdetermined, consistent) block system."""
    d = basis.d
    ranks = [word_rank(w, d) for w in block.row_words]
    ncols = len(block.col_elements)
    rows = [[Fraction(int(v)) for v in row] for row in block.matrix]
    rhs = [Fraction(class_coeffs.get(r, 0)) for r in ranks]
    nrows = len(rows)
    pivot_rows: list[int] = []
    used = [False] * nrows
    for col in range(ncols):
        pivot = next((i for i in range(nrows) if not used[i] and rows[i][col]), None)
        if pivot is None:
            raise ValueError("mapping block lost column rank")
        used[pivot] = True
        pivot_rows.append(pivot)
        pval = rows[pivot][col]
        for i in range(nrows):
            if i != pivot and rows[i][col]:
                f = rows[i][col] / pval
                prow = rows[pivot]
                irow = rows[i]
                for jj in range(col, ncols):
                    irow[jj] -= f * prow[jj]
                rhs[i] -= f * rhs[pivot]
    for i in range(nrows):
        if not used[i] and rhs[i]:
            raise ValueError("coefficients are not a Lie element of this level")
    solution = [Fraction(0)] * ncols
    for col in reversed(range(ncols)):
        i = pivot_rows[col]
        acc = rhs[i]
        for jj in range(col + 1, ncols):
            if rows[i][jj]:
                acc -= rows[i][jj] * solution[jj]
        solution[col] = acc / rows[i][col]
    return solution


def lie_bracket_in_basis(e1: BasisElt, e2: BasisElt, basis: HallBasis) -> LieSeries:
    """[e1, e2] expressed exactly in the basis (object-dtype Fraction coefficients)."""
    level = e1.level + e2.level
    if level > basis.m:
        raise ValueError(f"bracket level {level} exceeds basis level {basis.m}")
    coefficients = np.full(basis.size, Fraction(0), dtype=object)
    if e1 != e2:
        p = basis.expand_ranks(e1)
        q = basis.expand_ranks(e2)
        shift_p = basis.d ** e2.level
        shift_q = basis.d ** e1.level
        commutator: dict[int, int] = {}
        for r1, c1 in p.items():
            for r2, c2 in q.items():
                _bump(commutator, r1 * shift_p + r2, c1 * c2)
                _bump(commutator, r2 * shift_q + r1, -c1 * c2)
        for flat, value in project_words_exact(basis, level, commutator).items():
            coefficients[flat] = value
    return LieSeries(basis, coefficients)
