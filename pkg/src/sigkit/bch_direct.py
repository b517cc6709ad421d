"""Baker-Campbell-Hausdorff machinery and straight-line accumulator programs.

The coefficients of log(exp(a)exp(b)) on two letters are derived internally
with exact rational tensor arithmetic and projected onto the two-letter
Lyndon basis.  Substituting a generic log signature for a and a displacement
for b turns the series into polynomial coefficients over an output basis,
which compile into a branch-free program that folds one path segment into a
log signature.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .lie_basis import LYNDON, BasisElt, HallBasis, build_basis, project_words_exact

# ---------------------------------------------------------------------------
# exact derivation on two letters

_GOLDEN_COEFFS = {
    (1, "a"): Fraction(1),
    (1, "b"): Fraction(1),
    (2, "ab"): Fraction(1, 2),
    (3, "aab"): Fraction(1, 12),
    (3, "abb"): Fraction(1, 12),
    (4, "aabb"): Fraction(1, 24),
}

_LETTER_NAMES = {1: "a", 2: "b"}


def _foliage_name(elt: BasisElt) -> str:
    return "".join(_LETTER_NAMES[l] for l in elt.foliage)


def _exact_concat(a, b, top):
    """Concatenation product of two-letter series held as per-level rank dicts."""
    out = [dict() for _ in range(top + 1)]
    for k in range(top + 1):
        tgt = out[k]
        for j in range(k + 1):
            p, q = a[j], b[k - j]
            if not p or not q:
                continue
            shift = 1 << (k - j)
            for r1, c1 in p.items():
                for r2, c2 in q.items():
                    r = r1 * shift + r2
                    v = tgt.get(r, 0) + c1 * c2
                    if v:
                        tgt[r] = v
                    elif r in tgt:
                        del tgt[r]
    return out


def _exact_log(series, top):
    """log of a two-letter series with level-0 entry exactly 1 (Horner form)."""
    a = [dict(lvl) for lvl in series]
    a[0] = {}
    acc = [dict() for _ in range(top + 1)]
    t = acc
    for depth in range(top, 0, -1):
        t = _exact_concat(a, acc, 1 + top - depth)
        if depth > 1:
            inv = Fraction(1, depth)
            acc = [{r: c * inv for r, c in lvl.items()} for lvl in a]
            _sub_into(acc, t)
    out = [dict(lvl) for lvl in a]
    _sub_into(out, t)
    return out


def _sub_into(target, other):
    for lvl_tgt, lvl_other in zip(target, other):
        for r, c in lvl_other.items():
            v = lvl_tgt.get(r, 0) - c
            if v:
                lvl_tgt[r] = v
            elif r in lvl_tgt:
                del lvl_tgt[r]


@dataclass
class BchSeries:
    """Exact BCH coefficients over the two-letter Lyndon basis (letters 1=a, 2=b)."""

    max_level: int
    basis: HallBasis
    coefficients: list[Fraction]

    def coefficient(self, elt: BasisElt) -> Fraction:
        return self.coefficients[self.basis.index[elt]]

    def items(self):
        return zip(self.basis.elements, self.coefficients)


def derive_bch(max_level: int) -> BchSeries:
    """Derive log(exp(a)exp(b)) exactly up to the given level.

    Rational tensor arithmetic keeps every coefficient exact; practical up to
    roughly level 12, which is far beyond what path computations need.
    """
    if max_level < 1:
        raise ValueError(f"need max_level >= 1, got {max_level}")
    exp_a = [{0: Fraction(1, math.factorial(k))} for k in range(max_level + 1)]
    exp_b = [{(1 << k) - 1: Fraction(1, math.factorial(k))} for k in range(max_level + 1)]
    product = _exact_concat(exp_a, exp_b, max_level)
    logseries = _exact_log(product, max_level)
    basis = build_basis(2, max_level, LYNDON)
    coefficients = [Fraction(0)] * basis.size
    for level in range(1, max_level + 1):
        for flat, value in project_words_exact(basis, level, logseries[level]).items():
            coefficients[flat] = value
    series = BchSeries(max_level, basis, coefficients)
    _validate_bch(series)
    return series


def _validate_bch(series: BchSeries) -> None:
    for (level, name), expected in _GOLDEN_COEFFS.items():
        if level > series.max_level:
            continue
        for elt in series.basis.levels[level - 1]:
            if _foliage_name(elt) == name:
                got = series.coefficient(elt)
                if got != expected:
                    raise ValueError(
                        f"BCH coefficient of {elt} is {got}, expected {expected}")
                break
        else:
            raise ValueError(f"missing BCH basis element {name!r} at level {level}")


# ---------------------------------------------------------------------------
# disk cache

_CACHE_HEADER = re.compile(r"^BCH-LYNDON v1 maxlevel=(\d+)$")


def default_cache_path() -> Path:
    """Cache location: $SIGKIT_BCH_CACHE, else under the user cache directory."""
    env = os.environ.get("SIGKIT_BCH_CACHE")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME")
    root = Path(base) if base else Path.home() / ".cache"
    return root / "sigkit" / "bch-lyndon.txt"


def save_cache(series: BchSeries, path: Path | str) -> None:
    """Write the series to disk: a header line, then one line per basis element."""
    path = Path(path)
    lines = [f"BCH-LYNDON v1 maxlevel={series.max_level}"]
    for elt, coeff in series.items():
        lines.append(
            f"{elt.level} {_foliage_name(elt)} {coeff.numerator}/{coeff.denominator}")
    text = "\n".join(lines) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def load_cache(path: Path | str) -> BchSeries:
    """Parse and validate a cached series; raises ValueError if it is unusable."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty BCH cache file")
    header = _CACHE_HEADER.match(lines[0].strip())
    if not header:
        raise ValueError(f"bad BCH cache header: {lines[0]!r}")
    max_level = int(header.group(1))
    basis = build_basis(2, max_level, LYNDON)
    if len(lines) - 1 != basis.size:
        raise ValueError(
            f"BCH cache holds {len(lines) - 1} elements, expected {basis.size}")
    coefficients = []
    for elt, line in zip(basis.elements, lines[1:]):
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"bad BCH cache line: {line!r}")
        level, name, value = int(parts[0]), parts[1], parts[2]
        if level != elt.level or name != _foliage_name(elt):
            raise ValueError(
                f"BCH cache line {line!r} does not match element {elt} "
                f"at level {elt.level}")
        num, _, den = value.partition("/")
        coefficients.append(Fraction(int(num), int(den)))
    series = BchSeries(max_level, basis, coefficients)
    _validate_bch(series)
    return series


def load_or_derive(max_level: int, path: Path | str | None = None) -> BchSeries:
    """Return a cached series covering max_level, deriving and caching if needed."""
    path = Path(path) if path is not None else default_cache_path()
    if path.exists():
        try:
            cached = load_cache(path)
            if cached.max_level >= max_level:
                return cached
        except (ValueError, OSError):
            pass
    series = derive_bch(max_level)
    save_cache(series, path)
    return series


# ---------------------------------------------------------------------------
# symbolic substitution

# A monomial is a sorted tuple of input ids: ids 0..n-1 are log-signature
# coefficients (n = basis size), ids n..n+d-1 are displacement coordinates.
Monomial = tuple[int, ...]
SymbolicCoefficient = dict[Monomial, Fraction]


class _SymbolicEngine:
    """Evaluates bracketed two-letter expressions over a generic series A and
    displacement B, producing integer-coefficient polynomials per basis element."""

    def __init__(self, basis: HallBasis):
        self.basis = basis
        self.n = basis.size
        self.levels_of = [e.level for e in basis.elements]
        self._table: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}
        self._values: dict[BasisElt, dict[int, dict[Monomial, int]]] = {}

    def _bracket(self, i: int, j: int) -> tuple[tuple[int, int], ...]:
        lo, hi = (i, j) if i < j else (j, i)
        table = self._table.get((lo, hi))
        if table is None:
            basis = self.basis
            e1, e2 = basis.elements[lo], basis.elements[hi]
            p = basis.expand_ranks(e1)
            q = basis.expand_ranks(e2)
            shift_p = basis.d ** e2.level
            shift_q = basis.d ** e1.level
            commutator: dict[int, int] = {}
            for r1, c1 in p.items():
                for r2, c2 in q.items():
                    for r, cc in ((r1 * shift_p + r2, c1 * c2),
                                  (r2 * shift_q + r1, -c1 * c2)):
                        v = commutator.get(r, 0) + cc
                        if v:
                            commutator[r] = v
                        elif r in commutator:
                            del commutator[r]
            solved = project_words_exact(basis, e1.level + e2.level, commutator)
            entries = []
            for flat, value in sorted(solved.items()):
                assert value.denominator == 1
                entries.append((flat, int(value)))
            table = tuple(entries)
            self._table[(lo, hi)] = table
        if i > j:
            table = tuple((k, -c) for k, c in table)
        return table

    def value(self, elt2: BasisElt) -> dict[int, dict[Monomial, int]]:
        """Series for the two-letter element with A substituted for letter 1
        and B for letter 2."""
        out = self._values.get(elt2)
        if out is not None:
            return out
        if elt2.is_letter():
            if elt2.letter == 1:
                out = {k: {(k,): 1} for k in range(self.n)}
            else:
                out = {j: {(self.n + j,): 1} for j in range(self.basis.d)}
        else:
            s1 = self.value(elt2.left)
            s2 = self.value(elt2.right)
            m = self.basis.m
            out = {}
            for i, p in s1.items():
                li = self.levels_of[i]
                for j, q in s2.items():
                    if i == j or li + self.levels_of[j] > m:
                        continue
                    table = self._bracket(i, j)
                    if not table:
                        continue
                    prod = _poly_mul(p, q)
                    for k, c in table:
                        tgt = out.setdefault(k, {})
                        for mono, pc in prod.items():
                            v = tgt.get(mono, 0) + pc * c
                            if v:
                                tgt[mono] = v
                            elif mono in tgt:
                                del tgt[mono]
            out = {k: poly for k, poly in out.items() if poly}
        self._values[elt2] = out
        return out


def _poly_mul(p: dict[Monomial, int], q: dict[Monomial, int]) -> dict[Monomial, int]:
    out: dict[Monomial, int] = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            mono = tuple(sorted(m1 + m2))
            v = out.get(mono, 0) + c1 * c2
            if v:
                out[mono] = v
            elif mono in out:
                del out[mono]
    return out


def symbolic_bch_step(basis: HallBasis, bch: BchSeries
                      ) -> dict[BasisElt, SymbolicCoefficient]:
    """Coefficient polynomials of one BCH accumulation step over the basis.

    The step joins a generic log signature A (one indeterminate per basis
    element, input ids 0..n-1) with a straight segment B (one indeterminate
    per letter, input ids n..n+d-1).  Every returned polynomial maps a sorted
    monomial of input ids to its exact rational coefficient; zero terms are
    dropped.
    """
    if bch.max_level < basis.m:
        raise ValueError(
            f"BCH series reaches level {bch.max_level}, basis needs {basis.m}")
    engine = _SymbolicEngine(basis)
    total: dict[int, SymbolicCoefficient] = {}
    for elt2, q in bch.items():
        if elt2.level > basis.m or q == 0:
            continue
        for flat, poly in engine.value(elt2).items():
            tgt = total.setdefault(flat, {})
            for mono, c in poly.items():
                v = tgt.get(mono, 0) + q * c
                if v:
                    tgt[mono] = v
                elif mono in tgt:
                    del tgt[mono]
    return {basis.elements[flat]: poly
            for flat, poly in sorted(total.items()) if poly}


# ---------------------------------------------------------------------------
# program compilation and execution

@dataclass
class AccumulatorProgram:
    """Branch-free program folding one displacement into a log signature.

    Operand ids 0..n-1 read log-signature slots, n..n+d-1 read displacement
    slots, and n+d+t reads temporary t.  Execution evaluates the temporaries
    in order, applies the scaled accumulations, then adds the displacement to
    the first d slots.
    """

    d: int
    m: int
    kind: str
    n_slots: int
    temp_defs: list[tuple[int, int]]
    temp_degrees: list[int]
    accum_ops: list[tuple[int, float, int]]
    _arrays: dict = field(default_factory=dict, repr=False, compare=False)

    def _exec_arrays(self):
        arrays = self._arrays
        if not arrays:
            runs = []
            start = 0
            for t in range(1, len(self.temp_degrees) + 1):
                if t == len(self.temp_degrees) or self.temp_degrees[t] != self.temp_degrees[start]:
                    runs.append((start, t))
                    start = t
            arrays["u"] = np.array([u for u, _ in self.temp_defs], dtype=np.intp)
            arrays["v"] = np.array([v for _, v in self.temp_defs], dtype=np.intp)
            arrays["runs"] = runs
            arrays["targets"] = np.array([t for t, _, _ in self.accum_ops], dtype=np.intp)
            arrays["scales"] = np.array([s for _, s, _ in self.accum_ops])
            arrays["sources"] = np.array([s for _, _, s in self.accum_ops], dtype=np.intp)
        return arrays


def compile_program(basis: HallBasis, symbolic: dict[BasisElt, SymbolicCoefficient]
                    ) -> AccumulatorProgram:
    """Compile the symbolic step into an AccumulatorProgram.

    Each distinct monomial of degree >= 2 becomes one temporary, defined as
    the product of a stored lower-degree monomial and one input; among the
    possible factorizations the one whose stored factor has the smallest
    monomial key wins, preferring factors that are already stored.
    """
    n, d = basis.size, basis.d
    needed: set[Monomial] = set()
    terms: list[tuple[int, Monomial, Fraction]] = []
    for elt, poly in symbolic.items():
        flat = basis.index[elt]
        for mono, q in poly.items():
            if len(mono) == 1:
                if mono[0] == flat and q == 1:
                    continue  # the existing coefficient stays in place
                if flat < d and mono[0] == n + flat and q == 1:
                    continue  # folded into the trailing displacement add
                raise ValueError(f"unexpected linear term {mono} at {elt}")
            needed.add(mono)
            terms.append((flat, mono, q))

    closure = set(needed)
    by_degree: dict[int, set[Monomial]] = {}
    for mono in closure:
        by_degree.setdefault(len(mono), set()).add(mono)
    factor: dict[Monomial, tuple[Monomial, int]] = {}
    for degree in range(max(by_degree, default=0), 2, -1):
        for mono in sorted(by_degree.get(degree, ())):
            best_stored = best_any = None
            for v in sorted(set(mono)):
                u = list(mono)
                u.remove(v)
                u = tuple(u)
                if best_any is None or u < best_any[0]:
                    best_any = (u, v)
                if u in closure and (best_stored is None or u < best_stored[0]):
                    best_stored = (u, v)
            chosen = best_stored or best_any
            factor[mono] = chosen
            if chosen[0] not in closure:
                closure.add(chosen[0])
                by_degree.setdefault(degree - 1, set()).add(chosen[0])

    order = sorted(closure, key=lambda mono: (len(mono), mono))
    temp_index = {mono: t for t, mono in enumerate(order)}
    temp_defs = []
    for mono in order:
        if len(mono) == 2:
            temp_defs.append((mono[0], mono[1]))
        else:
            u, v = factor[mono]
            temp_defs.append((n + d + temp_index[u], v))

    accum_ops = sorted(
        ((flat, float(q), n + d + temp_index[mono]) for flat, mono, q in terms),
        key=lambda op: (op[0], op[2]))

    referenced = {u for u, _ in temp_defs if u >= n + d}
    referenced.update(src for _, _, src in accum_ops)
    assert all(n + d + t in referenced for t in range(len(order)))

    return AccumulatorProgram(
        d=d, m=basis.m, kind=basis.kind, n_slots=n,
        temp_defs=temp_defs,
        temp_degrees=[len(mono) for mono in order],
        accum_ops=accum_ops,
    )


def run_program(program: AccumulatorProgram, a, b) -> np.ndarray:
    """Fold displacement b into log-signature coefficients a.

    When a is already a float64 array it is updated in place; either way the
    updated array is returned.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    n, d = program.n_slots, program.d
    if a.shape != (n,):
        raise ValueError(f"expected {n} log-signature slots, got shape {a.shape}")
    if b.shape != (d,):
        raise ValueError(f"expected {d} displacement slots, got shape {b.shape}")
    arrays = program._exec_arrays()
    n_temps = len(program.temp_defs)
    buf = np.empty(n + d + n_temps)
    buf[:n] = a
    buf[n:n + d] = b
    u, v = arrays["u"], arrays["v"]
    base = n + d
    for start, end in arrays["runs"]:
        buf[base + start:base + end] = buf[u[start:end]] * buf[v[start:end]]
    if len(arrays["targets"]):
        np.add.at(a, arrays["targets"], arrays["scales"] * buf[arrays["sources"]])
    a[:d] += b
    return a
