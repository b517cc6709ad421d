"""Word combinatorics: Lyndon words, anagram classes and Witt counts.

Letters are integers 1..d and a word is a tuple of letters.  The empty tuple
is reserved for the level-0 slot of the tensor algebra and is rejected here.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Sequence

Word = tuple[int, ...]

# Letter-frequency key of an anagram class: ((letter, count), ...) sorted by
# letter, every count >= 1.  Hashable so it can key per-class tables.
LetterFreq = tuple[tuple[int, int], ...]


def _check_word(word: Sequence[int]) -> Word:
    w = tuple(word)
    if not w:
        raise ValueError("the empty word is not accepted")
    if any(not isinstance(l, int) or l < 1 for l in w):
        raise ValueError(f"letters must be integers >= 1, got {w!r}")
    return w


def is_lyndon(word: Sequence[int]) -> bool:
    """True iff the word is strictly smaller than every nontrivial rotation."""
    w = _check_word(word)
    return all(w < w[i:] + w[:i] for i in range(1, len(w)))


def lyndon_words(d: int, m: int) -> list[list[Word]]:
    """All Lyndon words over 1..d of length 1..m, grouped by length.

    Entry k-1 of the result holds the length-k words in ascending
    lexicographic order.  Duval's generation visits every Lyndon word of
    length <= m exactly once, in lexicographic order overall, so each level
    comes out sorted for free.
    """
    if d < 1 or m < 1:
        raise ValueError(f"need d >= 1 and m >= 1, got d={d}, m={m}")
    levels: list[list[Word]] = [[] for _ in range(m)]
    w = [1]
    while w:
        levels[len(w) - 1].append(tuple(w))
        w = [w[i % len(w)] for i in range(m)]
        while w and w[-1] == d:
            w.pop()
        if w:
            w[-1] += 1
    return levels


def anagram_key(word: Sequence[int]) -> LetterFreq:
    """Letter-frequency key of the word's anagram class."""
    w = _check_word(word)
    return tuple(sorted(Counter(w).items()))


def class_words(key: LetterFreq) -> list[Word]:
    """Every word of an anagram class, in ascending lexicographic order."""
    items = [(int(l), int(c)) for l, c in key]
    if not items or any(c < 1 or l < 1 for l, c in items):
        raise ValueError(f"invalid anagram key {key!r}")
    items.sort()
    out: list[Word] = []
    word: list[int] = []

    def rec(remaining: int) -> None:
        if remaining == 0:
            out.append(tuple(word))
            return
        for idx, (letter, cnt) in enumerate(items):
            if cnt:
                items[idx] = (letter, cnt - 1)
                word.append(letter)
                rec(remaining - 1)
                word.pop()
                items[idx] = (letter, cnt)

    rec(sum(c for _, c in items))
    return out


def _multiplicities(key: LetterFreq | Iterable[int]) -> list[int]:
    """Accepts a LetterFreq or a bare iterable of multiplicities."""
    items = list(key)
    if not items:
        raise ValueError("empty anagram key")
    if isinstance(items[0], tuple):
        counts = [int(c) for _, c in items]
    else:
        counts = [int(c) for c in items]
    if any(c < 1 for c in counts):
        raise ValueError(f"multiplicities must be >= 1, got {key!r}")
    return counts


def multinomial_count(key: LetterFreq | Iterable[int]) -> int:
    """Number of words in the anagram class (exact, arbitrary precision)."""
    counts = _multiplicities(key)
    return math.factorial(sum(counts)) // math.prod(map(math.factorial, counts))


def _mobius(n: int) -> int:
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def _divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def witt_class_count(key: LetterFreq | Iterable[int]) -> int:
    """Number of basis elements whose foliage lies in the anagram class.

    Moebius inversion over the common divisors of the letter multiplicities;
    exact integer arithmetic throughout.
    """
    counts = _multiplicities(key)
    m = sum(counts)
    total = 0
    for delta in _divisors(math.gcd(*counts)):
        term = math.factorial(m // delta)
        for c in counts:
            term //= math.factorial(c // delta)
        total += _mobius(delta) * term
    assert total % m == 0
    return total // m


def witt_level_count(d: int, m: int) -> int:
    """Dimension of level m of the free Lie algebra on d letters."""
    if d < 1 or m < 1:
        raise ValueError(f"need d >= 1 and m >= 1, got d={d}, m={m}")
    total = sum(_mobius(delta) * d ** (m // delta) for delta in _divisors(m))
    assert total % m == 0
    return total // m


def word_rank(word: Sequence[int], d: int) -> int:
    """Position of the word in the lexicographic list of words of its length."""
    r = 0
    for letter in word:
        if not 1 <= letter <= d:
            raise ValueError(f"letter {letter} outside 1..{d}")
        r = r * d + (letter - 1)
    return r


def rank_word(rank: int, length: int, d: int) -> Word:
    """Inverse of word_rank for a given word length."""
    if not 0 <= rank < d**length:
        raise ValueError(f"rank {rank} outside range for length {length}, d={d}")
    letters = []
    for _ in range(length):
        rank, rem = divmod(rank, d)
        letters.append(rem + 1)
    return tuple(reversed(letters))
