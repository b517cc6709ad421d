"""BCH series: exact derivation, caching, symbolic substitution, programs."""

from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from sigkit.bch_direct import (
    compile_program,
    default_cache_path,
    derive_bch,
    load_cache,
    load_or_derive,
    run_program,
    save_cache,
    symbolic_bch_step,
)
from sigkit.lie_basis import build_basis
from sigkit.words import rank_word


def oracle_log_words(max_level: int) -> dict[tuple[int, ...], Fraction]:
    """log(exp(a)exp(b)) coefficients over words by direct series composition.

    Letters 1=a, 2=b.  Plain polynomial arithmetic on word dicts; shares no
    code with the module under test.
    """
    def mul(p, q):
        out = {}
        for w1, c1 in p.items():
            for w2, c2 in q.items():
                w = w1 + w2
                if len(w) <= max_level:
                    v = out.get(w, Fraction(0)) + c1 * c2
                    if v:
                        out[w] = v
                    elif w in out:
                        del out[w]
        return out

    exp_a = {(1,) * k: Fraction(1, math.factorial(k)) for k in range(max_level + 1)}
    exp_b = {(2,) * k: Fraction(1, math.factorial(k)) for k in range(max_level + 1)}
    u = mul(exp_a, exp_b)
    del u[()]
    out: dict[tuple[int, ...], Fraction] = {}
    upow = dict(u)
    for k in range(1, max_level + 1):
        sign = Fraction((-1) ** (k + 1), k)
        for w, c in upow.items():
            out[w] = out.get(w, Fraction(0)) + sign * c
        upow = mul(upow, u)
    return {w: c for w, c in out.items() if c}


def series_to_words(series) -> dict[tuple[int, ...], Fraction]:
    words: dict[tuple[int, ...], Fraction] = {}
    for elt, coeff in series.items():
        if coeff:
            for r, c in series.basis.expand_ranks(elt).items():
                w = rank_word(r, elt.level, 2)
                v = words.get(w, Fraction(0)) + coeff * c
                if v:
                    words[w] = v
                elif w in words:
                    del words[w]
    return words


def coeff_by_foliage(series, foliage):
    for elt, coeff in series.items():
        if elt.foliage == foliage:
            return coeff
    raise AssertionError(f"no element with foliage {foliage}")


def test_golden_coefficients_exact():
    series = derive_bch(4)
    assert coeff_by_foliage(series, (1,)) == 1
    assert coeff_by_foliage(series, (2,)) == 1
    assert coeff_by_foliage(series, (1, 2)) == Fraction(1, 2)
    assert coeff_by_foliage(series, (1, 1, 2)) == Fraction(1, 12)
    assert coeff_by_foliage(series, (1, 2, 2)) == Fraction(1, 12)
    assert coeff_by_foliage(series, (1, 1, 2, 2)) == Fraction(1, 24)
    assert coeff_by_foliage(series, (1, 1, 1, 2)) == 0
    assert coeff_by_foliage(series, (1, 2, 2, 2)) == 0


def test_word_expansion_matches_independent_oracle():
    assert series_to_words(derive_bch(6)) == oracle_log_words(6)


def test_frozen_word_coefficients():
    words = series_to_words(derive_bch(4))
    assert words[(1, 1, 2)] == Fraction(1, 12)
    assert words[(1, 2, 1)] == Fraction(-1, 6)
    assert words[(1, 1, 2, 2)] == Fraction(1, 24)
    assert words[(1, 2, 1, 2)] == Fraction(-1, 12)
    assert words[(2, 1, 2, 1)] == Fraction(1, 12)
    assert words[(2, 2, 1, 1)] == Fraction(-1, 24)
    assert (1, 1, 1, 2) not in words


def test_word_coefficients_reverse_antisymmetry():
    # reversing a word flips the coefficient by (-1)**(length+1)
    words = series_to_words(derive_bch(6))
    for w, c in words.items():
        assert words.get(w[::-1], Fraction(0)) == (-1) ** (len(w) + 1) * c


def test_coefficients_stable_across_max_level():
    shallow = derive_bch(3)
    deep = derive_bch(6)
    assert deep.coefficients[:shallow.basis.size] == shallow.coefficients
    assert [str(e) for e in deep.basis.elements[:shallow.basis.size]] == \
        [str(e) for e in shallow.basis.elements]


def test_cache_roundtrip_bit_identical(tmp_path):
    series = derive_bch(5)
    first = tmp_path / "bch1.txt"
    second = tmp_path / "bch2.txt"
    save_cache(series, first)
    loaded = load_cache(first)
    save_cache(loaded, second)
    assert first.read_bytes() == second.read_bytes()
    assert loaded.coefficients == series.coefficients
    assert loaded.max_level == 5


def test_cache_rejects_tampering(tmp_path):
    series = derive_bch(4)
    path = tmp_path / "bch.txt"
    save_cache(series, path)
    good = path.read_text().splitlines()

    path.write_text("BOGUS HEADER\n" + "\n".join(good[1:]) + "\n")
    with pytest.raises(ValueError, match="header"):
        load_cache(path)

    path.write_text("\n".join(good[:-1]) + "\n")  # drop one element
    with pytest.raises(ValueError, match="elements"):
        load_cache(path)

    swapped = good[:]
    swapped[1], swapped[2] = swapped[2], swapped[1]
    path.write_text("\n".join(swapped) + "\n")
    with pytest.raises(ValueError, match="does not match"):
        load_cache(path)

    corrupt = [ln if " ab " not in ln else ln.rsplit(" ", 1)[0] + " 1/3"
               for ln in good]
    path.write_text("\n".join(corrupt) + "\n")
    with pytest.raises(ValueError, match="expected"):
        load_cache(path)

    path.write_text(good[0] + "\n" + "not a record\n" * (len(good) - 1))
    with pytest.raises(ValueError):
        load_cache(path)


def test_load_or_derive_uses_and_upgrades_cache(tmp_path):
    path = tmp_path / "bch.txt"
    s3 = load_or_derive(3, path)
    assert s3.max_level == 3
    assert path.exists()
    s5 = load_or_derive(5, path)
    assert s5.max_level == 5
    assert load_cache(path).max_level == 5
    # a deeper cache satisfies shallower requests without rewriting
    before = path.read_bytes()
    again = load_or_derive(3, path)
    assert again.max_level == 5
    assert path.read_bytes() == before


def test_load_or_derive_recovers_from_corrupt_cache(tmp_path):
    path = tmp_path / "bch.txt"
    path.write_text("garbage\n")
    series = load_or_derive(3, path)
    assert series.max_level == 3
    assert load_cache(path).max_level == 3


def test_default_cache_path_env(monkeypatch):
    monkeypatch.setenv("SIGKIT_BCH_CACHE", "/tmp/custom-bch.txt")
    assert default_cache_path() == Path("/tmp/custom-bch.txt")
    monkeypatch.delenv("SIGKIT_BCH_CACHE")
    monkeypatch.setenv("XDG_CACHE_HOME", "/tmp/xdg")
    assert default_cache_path() == Path("/tmp/xdg/sigkit/bch-lyndon.txt")


def test_symbolic_step_two_two_exact():
    basis = build_basis(2, 2)
    sym = symbolic_bch_step(basis, derive_bch(2))
    by_name = {str(e): poly for e, poly in sym.items()}
    # input ids: 0..2 log signature slots, 3..4 displacement slots
    assert by_name["1"] == {(0,): 1, (3,): 1}
    assert by_name["2"] == {(1,): 1, (4,): 1}
    assert by_name["[1,2]"] == {(2,): 1, (0, 4): Fraction(1, 2),
                                (1, 3): Fraction(-1, 2)}


def test_symbolic_step_two_three_monomials():
    basis = build_basis(2, 3)
    sym = symbolic_bch_step(basis, derive_bch(3))
    monomials = {m for poly in sym.values() for m in poly if len(m) >= 2}
    assert len(monomials) == 12


def test_symbolic_step_requires_deep_enough_series():
    with pytest.raises(ValueError, match="level"):
        symbolic_bch_step(build_basis(2, 3), derive_bch(2))


def test_compile_two_three_structure():
    basis = build_basis(2, 3)
    sym = symbolic_bch_step(basis, derive_bch(3))
    program = compile_program(basis, sym)
    assert program.d == 2 and program.m == 3 and program.n_slots == 5
    assert len(program.temp_defs) == 12
    assert program.temp_degrees == sorted(program.temp_degrees)
    again = compile_program(basis, sym)
    assert again.temp_defs == program.temp_defs
    assert again.accum_ops == program.accum_ops


def test_compile_no_dead_temporaries():
    basis = build_basis(2, 4)
    program = compile_program(basis, symbolic_bch_step(basis, derive_bch(4)))
    base = program.n_slots + program.d
    used = {u for u, _ in program.temp_defs if u >= base}
    used |= {v for _, v in program.temp_defs if v >= base}
    used |= {src for _, _, src in program.accum_ops}
    assert used == {base + t for t in range(len(program.temp_defs))}


def build_program(d, m):
    basis = build_basis(d, m)
    return compile_program(basis, symbolic_bch_step(basis, derive_bch(m)))


def test_run_program_zero_displacement_is_identity():
    program = build_program(2, 4)
    rng = np.random.default_rng(13)
    a = rng.standard_normal(program.n_slots)
    out = run_program(program, a.copy(), np.zeros(2))
    assert np.array_equal(out, a)


def test_run_program_from_zero_state_returns_displacement():
    program = build_program(3, 3)
    b = np.array([0.5, -2.0, 1.5])
    out = run_program(program, np.zeros(program.n_slots), b)
    assert np.array_equal(out[:3], b)
    assert not out[3:].any()


def test_run_program_frozen_single_step():
    # joining slot state (1, 0, 0) with displacement (0, 1) at level 2
    program = build_program(2, 2)
    out = run_program(program, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0]))
    assert out.tolist() == [1.0, 1.0, 0.5]


def test_run_program_collinear_segments_merge():
    program = build_program(2, 3)
    x = np.array([0.8, -0.4])
    split = run_program(program, run_program(
        program, np.zeros(5), x), 1.5 * x)
    merged = run_program(program, np.zeros(5), 2.5 * x)
    assert np.max(np.abs(split - merged)) < 1e-15
    assert np.max(np.abs(split[2:])) < 1e-15  # a straight line has no area terms


def test_run_program_noncollinear_segments_produce_area():
    program = build_program(2, 2)
    out = run_program(program, run_program(
        program, np.zeros(3), np.array([1.0, 0.0])), np.array([0.0, 1.0]))
    assert out.tolist() == [1.0, 1.0, 0.5]


def test_run_program_updates_float_arrays_in_place():
    program = build_program(2, 2)
    a = np.zeros(3)
    out = run_program(program, a, np.array([1.0, 2.0]))
    assert out is a


def test_run_program_shape_errors():
    program = build_program(2, 2)
    with pytest.raises(ValueError):
        run_program(program, np.zeros(4), np.zeros(2))
    with pytest.raises(ValueError):
        run_program(program, np.zeros(3), np.zeros(3))


def test_derive_bch_rejects_bad_level():
    with pytest.raises(ValueError):
        derive_bch(0)
