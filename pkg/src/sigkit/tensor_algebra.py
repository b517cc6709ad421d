"""Dense truncated tensor algebra with 64-bit float numerics.

Level k of a series is a contiguous vector of length d**k whose entries are
ordered lexicographically by word.  A path signature is built by folding
per-segment signatures together with the Chen concatenation rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TensorSeries:
    """Element of the tensor algebra on 1..d truncated at level m."""

    d: int
    m: int
    levels: list[np.ndarray]

    @classmethod
    def zero(cls, d: int, m: int) -> "TensorSeries":
        if d < 1 or m < 0:
            raise ValueError(f"need d >= 1 and m >= 0, got d={d}, m={m}")
        return cls(d, m, [np.zeros(d**k) for k in range(m + 1)])

    @classmethod
    def identity(cls, d: int, m: int) -> "TensorSeries":
        out = cls.zero(d, m)
        out.levels[0][0] = 1.0
        return out

    def copy(self) -> "TensorSeries":
        return TensorSeries(self.d, self.m, [lvl.copy() for lvl in self.levels])

    def flatten(self) -> np.ndarray:
        """Levels 1..m concatenated; the level-0 slot is never part of output."""
        if self.m < 1:
            return np.zeros(0)
        return np.concatenate(self.levels[1:])


def _check_same_shape(s: TensorSeries, t: TensorSeries) -> None:
    if s.d != t.d or s.m != t.m:
        raise ValueError(
            f"shape mismatch: (d={s.d}, m={s.m}) vs (d={t.d}, m={t.m})")


def concat_product(s: TensorSeries, t: TensorSeries,
                   max_level: int | None = None) -> TensorSeries:
    """Concatenation product truncated at level m (or max_level if lower)."""
    _check_same_shape(s, t)
    top = s.m if max_level is None else min(max_level, s.m)
    out = TensorSeries.zero(s.d, s.m)
    for k in range(top + 1):
        acc = out.levels[k]
        for j in range(k + 1):
            acc += np.multiply.outer(s.levels[j], t.levels[k - j]).reshape(-1)
    return out


def segment_signature(x, m: int) -> TensorSeries:
    """Signature of a single straight segment with displacement x.

    Level k is the k-fold outer power of x divided by k!.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size < 1:
        raise ValueError("displacement must have at least one coordinate")
    if not np.all(np.isfinite(x)):
        raise ValueError("displacement coordinates must be finite")
    out = TensorSeries.identity(x.size, m)
    for k in range(1, m + 1):
        out.levels[k] = np.multiply.outer(out.levels[k - 1], x).reshape(-1) / k
    return out


def chen_concat(acc: TensorSeries, seg: TensorSeries) -> TensorSeries:
    """Concatenate two group-like series, updating acc in place.

    Levels are rewritten from the highest down so each source level is still
    untouched when read.  Returns acc.
    """
    _check_same_shape(acc, seg)
    if acc.levels[0][0] != 1.0 or seg.levels[0][0] != 1.0:
        raise ValueError("operands must be group-like (level 0 equal to 1)")
    for k in range(acc.m, 0, -1):
        lvl = acc.levels[k]
        for j in range(k):
            lvl += np.multiply.outer(acc.levels[j], seg.levels[k - j]).reshape(-1)
    return acc


def path_signature(path, m: int) -> TensorSeries:
    """Signature of the piecewise-linear path through the given points.

    path is an (n, d) array of points, n >= 1; 32-bit input is widened to
    float64.  A single point yields the identity series.
    """
    pts = np.asarray(path, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ValueError(f"path must be a nonempty (n, d) array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("path coordinates must be finite")
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    acc = TensorSeries.identity(pts.shape[1], m)
    for x in np.diff(pts, axis=0):
        chen_concat(acc, segment_signature(x, m))
    return acc


def _combine(a: TensorSeries, ca: float, b: TensorSeries, cb: float) -> TensorSeries:
    return TensorSeries(a.d, a.m,
                        [ca * la + cb * lb for la, lb in zip(a.levels, b.levels)])


def tensor_log(s: TensorSeries) -> TensorSeries:
    """Logarithm of a series whose level-0 entry is exactly 1.

    Evaluates log(1+a) in nested (Horner) form; the factor built at nesting
    depth only needs levels up to 1 + m - depth, which caps the work of each
    intermediate product.
    """
    if s.levels[0][0] != 1.0:
        raise ValueError("tensor_log needs level 0 equal to 1")
    a = s.copy()
    a.levels[0] = np.zeros(1)
    acc = TensorSeries.zero(s.d, s.m)
    t = TensorSeries.zero(s.d, s.m)
    for depth in range(s.m, 0, -1):
        t = concat_product(a, acc, max_level=1 + s.m - depth)
        if depth > 1:
            acc = _combine(a, 1.0 / depth, t, -1.0)
    return _combine(a, 1.0, t, -1.0)


def tensor_exp(s: TensorSeries) -> TensorSeries:
    """Exponential of a series whose level-0 entry is exactly 0 (inverse of tensor_log)."""
    if s.levels[0][0] != 0.0:
        raise ValueError("tensor_exp needs level 0 equal to 0")
    acc = TensorSeries.zero(s.d, s.m)
    for depth in range(s.m, 0, -1):
        scaled = TensorSeries(s.d, s.m, [lvl / (depth + 1.0) for lvl in s.levels])
        t = concat_product(scaled, acc, max_level=1 + s.m - depth)
        acc = _combine(s, 1.0, t, 1.0)
    acc.levels[0] = np.ones(1)
    return acc
