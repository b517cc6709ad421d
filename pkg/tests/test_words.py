"""Word combinatorics against brute-force enumeration and frozen counts."""

from __future__ import annotations

import math
from itertools import combinations_with_replacement, product

import pytest

from sigkit.words import (
    anagram_key,
    class_words,
    is_lyndon,
    lyndon_words,
    multinomial_count,
    rank_word,
    witt_class_count,
    witt_level_count,
    word_rank,
)


def brute_lyndon(d: int, k: int) -> list[tuple[int, ...]]:
    out = []
    for w in product(range(1, d + 1), repeat=k):
        if all(w < w[i:] + w[:i] for i in range(1, k)):
            out.append(w)
    return out


def level_keys(d: int, m: int):
    """Anagram keys of every class at one level, one per letter multiset."""
    return [anagram_key(c) for c in combinations_with_replacement(range(1, d + 1), m)]


@pytest.mark.parametrize("d,m", [(1, 6), (2, 8), (3, 6)])
def test_lyndon_generation_matches_bruteforce(d, m):
    levels = lyndon_words(d, m)
    assert len(levels) == m
    for k in range(1, m + 1):
        assert levels[k - 1] == brute_lyndon(d, k)


def test_lyndon_levels_sorted_and_sized():
    for k, level in enumerate(lyndon_words(3, 7), start=1):
        assert level == sorted(level)
        assert len(level) == witt_level_count(3, k)


def test_lyndon_level_ten_on_two_letters():
    # 99 binary Lyndon words of length 10
    assert witt_level_count(2, 10) == 99
    assert len(lyndon_words(2, 10)[9]) == 99


def test_is_lyndon_examples():
    assert is_lyndon((1,))
    assert is_lyndon((1, 2))
    assert is_lyndon((1, 1, 2, 3))
    assert not is_lyndon((2, 1))
    assert not is_lyndon((1, 2, 1, 2))
    assert not is_lyndon((2, 2))
    with pytest.raises(ValueError):
        is_lyndon(())
    with pytest.raises(ValueError):
        is_lyndon((0, 1))


def test_lyndon_words_rejects_bad_shape():
    with pytest.raises(ValueError):
        lyndon_words(0, 3)
    with pytest.raises(ValueError):
        lyndon_words(2, 0)


def test_anagram_key_and_class_words():
    assert anagram_key((2, 1, 2)) == ((1, 1), (2, 2))
    key = ((1, 2), (2, 1))
    words = class_words(key)
    assert words == [(1, 1, 2), (1, 2, 1), (2, 1, 1)]
    assert len(words) == multinomial_count(key)
    assert all(anagram_key(w) == key for w in words)
    with pytest.raises(ValueError):
        class_words(())


def test_class_words_cover_level():
    d, m = 3, 4
    seen = set()
    for key in level_keys(d, m):
        words = class_words(key)
        assert len(words) == len(set(words)) == multinomial_count(key)
        assert words == sorted(words)
        seen.update(words)
    assert len(seen) == d**m


def test_multinomial_against_factorials():
    assert multinomial_count([4, 3, 3]) == math.factorial(10) // (
        math.factorial(4) * math.factorial(3) ** 2)
    assert multinomial_count([1, 1, 1]) == 6
    assert multinomial_count([5]) == 1
    assert multinomial_count(((1, 2), (2, 1))) == 3


def test_witt_class_counts_frozen_table():
    # per-class counts for the five largest multiplicity patterns at level 10
    table = {
        (4, 3, 3): (4200, 420),
        (4, 4, 2): (3150, 312),
        (5, 3, 2): (2520, 252),
        (5, 4, 1): (1260, 126),
        (6, 2, 2): (1260, 124),
    }
    for counts, (n_words, n_elements) in table.items():
        assert multinomial_count(counts) == n_words
        assert witt_class_count(counts) == n_elements


def test_witt_single_letter_classes_vanish():
    assert witt_class_count([1]) == 1
    for power in range(2, 11):
        assert witt_class_count([power]) == 0


@pytest.mark.parametrize("d,m", [(2, 6), (3, 5), (3, 10)])
def test_class_sums_reproduce_level_totals(d, m):
    keys = level_keys(d, m)
    assert sum(witt_class_count(k) for k in keys) == witt_level_count(d, m)
    assert sum(multinomial_count(k) for k in keys) == d**m


def test_sixty_three_populated_classes_at_level_ten():
    populated = [k for k in level_keys(3, 10) if witt_class_count(k) > 0]
    assert len(populated) == 63


def test_witt_level_count_small_values():
    assert [witt_level_count(2, k) for k in range(1, 7)] == [2, 1, 2, 3, 6, 9]
    assert [witt_level_count(3, k) for k in range(1, 7)] == [3, 3, 8, 18, 48, 116]
    assert witt_level_count(3, 10) == 5880
    assert [witt_level_count(1, k) for k in range(1, 5)] == [1, 0, 0, 0]


def test_word_rank_roundtrip():
    for d in (1, 2, 3, 5):
        for length in (1, 2, 4):
            for r in range(d**length):
                assert word_rank(rank_word(r, length, d), d) == r
    assert word_rank((1, 2, 3), 3) == 5
    with pytest.raises(ValueError):
        word_rank((4,), 3)
    with pytest.raises(ValueError):
        rank_word(9, 2, 3)
