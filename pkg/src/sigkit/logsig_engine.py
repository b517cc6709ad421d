"""Prepared contexts and log-signature computation.

prepare() builds everything that depends only on (d, m, basis kind, methods):
the basis, per-anagram-class solver blocks and, for the direct accumulation
method, the compiled BCH step program.  The compute functions then accept one
path after another against the immutable context.

Methods: X expands the log in tensor space, S projects X onto the basis via
the block solvers, O folds segments directly with the compiled program.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .bch_direct import AccumulatorProgram, compile_program, load_or_derive, \
    run_program, symbolic_bch_step
from .lie_basis import LYNDON, HallBasis, LieSeries, build_basis, mapping_blocks
from .tensor_algebra import TensorSeries, path_signature, tensor_log
from .words import word_rank

METHODS = frozenset("XSO")

# Upper bound on the flattened signature length; beyond this the dense
# algorithms would not fit in memory.
_MAX_SIG_FLOATS = 1 << 26


class CapacityError(RuntimeError):
    """The requested (d, m) needs more memory than the dense algorithms support."""


def check_capacity(d: int, m: int) -> None:
    total = 0
    for k in range(1, m + 1):
        total += d**k
        if total > _MAX_SIG_FLOATS:
            raise CapacityError(
                f"signature length for d={d}, m={m} exceeds {_MAX_SIG_FLOATS} entries")


class _BlockSolver:
    """Solver for one anagram class at one level.

    Modes: 'copy' reads a single entry off the expanded log signature,
    'tri' forward-substitutes the unit-lower-triangular Lyndon restriction,
    'pinv' applies a Moore-Penrose pseudoinverse of the full class block.
    """

    __slots__ = ("mode", "row_ranks", "col_positions", "matrix", "scale")

    def __init__(self, mode, row_ranks, col_positions, matrix=None, scale=1.0):
        self.mode = mode
        self.row_ranks = row_ranks
        self.col_positions = col_positions
        self.matrix = matrix
        self.scale = scale

    def solve(self, level_values: np.ndarray) -> np.ndarray:
        x = level_values[self.row_ranks]
        if self.mode == "copy":
            return x * self.scale
        if self.mode == "tri":
            return solve_triangular(self.matrix, x, lower=True, unit_diagonal=True)
        return self.matrix @ x


def _build_solvers(basis: HallBasis) -> list[list[_BlockSolver]]:
    d = basis.d
    per_level = []
    for level in range(1, basis.m + 1):
        solvers = []
        for block in mapping_blocks(basis, level):
            if len(block.col_elements) == 1:
                expansion = basis.expand_ranks(block.col_elements[0])
                rank = min(expansion)
                solvers.append(_BlockSolver(
                    "copy", np.array([rank], dtype=np.intp), block.col_positions,
                    scale=1.0 / expansion[rank]))
            elif basis.kind == LYNDON:
                ranks = np.array(
                    [word_rank(block.row_words[i], d) for i in block.lyndon_rows],
                    dtype=np.intp)
                solvers.append(_BlockSolver(
                    "tri", ranks, block.col_positions,
                    matrix=block.restricted.astype(np.float64)))
            else:
                ranks = np.array([word_rank(w, d) for w in block.row_words],
                                 dtype=np.intp)
                pinv = np.linalg.pinv(block.matrix.astype(np.float64), rcond=1e-12)
                solvers.append(_BlockSolver("pinv", ranks, block.col_positions,
                                            matrix=pinv))
        per_level.append(solvers)
    return per_level


@dataclass(frozen=True)
class PreparedContext:
    """Immutable per-(d, m, kind, methods) state shared by all compute calls."""

    d: int
    m: int
    kind: str
    methods: frozenset[str]
    basis: HallBasis
    solvers: list[list[_BlockSolver]] | None
    program: AccumulatorProgram | None

    @property
    def logsig_length(self) -> int:
        return self.basis.size

    @property
    def sig_length(self) -> int:
        return sum(self.d**k for k in range(1, self.m + 1))


def _normalize_methods(methods) -> frozenset[str]:
    if isinstance(methods, str):
        methods = tuple(methods)
    normalized = frozenset(str(m).upper() for m in methods)
    if not normalized or not normalized <= METHODS:
        raise ValueError(f"methods must be a nonempty subset of X, S, O; got {methods!r}")
    return normalized


def prepare(d: int, m: int, kind: str = LYNDON, methods="S") -> PreparedContext:
    """Build the reusable context for the requested compute methods."""
    methods = _normalize_methods(methods)
    check_capacity(d, m)
    basis = build_basis(d, m, kind)
    solvers = _build_solvers(basis) if "S" in methods else None
    program = None
    if "O" in methods:
        bch = load_or_derive(m)
        program = compile_program(basis, symbolic_bch_step(basis, bch))
    return PreparedContext(d=d, m=m, kind=basis.kind, methods=methods,
                           basis=basis, solvers=solvers, program=program)


def _check_path(path, ctx: PreparedContext) -> np.ndarray:
    pts = np.asarray(path, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError(f"path must be a nonempty (n, d) array, got shape {pts.shape}")
    if pts.shape[1] != ctx.d:
        raise ValueError(f"path dimension {pts.shape[1]} does not match context d={ctx.d}")
    return pts


def logsig_x(path, ctx: PreparedContext) -> TensorSeries:
    """Log signature in tensor space (the expanded form; first stage of S)."""
    if not ctx.methods & {"X", "S"}:
        raise ValueError("context was not prepared for the X or S method")
    pts = _check_path(path, ctx)
    return tensor_log(path_signature(pts, ctx.m))


def project(x: TensorSeries, ctx: PreparedContext) -> LieSeries:
    """Project an expanded log signature onto the context's basis, blockwise."""
    if ctx.solvers is None:
        raise ValueError("context was not prepared for the S method")
    if x.d != ctx.d or x.m != ctx.m:
        raise ValueError(
            f"series shape (d={x.d}, m={x.m}) does not match context "
            f"(d={ctx.d}, m={ctx.m})")
    out = np.zeros(ctx.basis.size)
    for level in range(1, ctx.m + 1):
        offset = ctx.basis.level_offsets[level - 1]
        values = x.levels[level]
        for solver in ctx.solvers[level - 1]:
            out[offset + solver.col_positions] = solver.solve(values)
    return LieSeries(ctx.basis, out)


def logsig_s(path, ctx: PreparedContext) -> LieSeries:
    """Log signature by tensor-space expansion followed by basis projection."""
    return project(logsig_x(path, ctx), ctx)


def logsig_o(path, ctx: PreparedContext) -> LieSeries:
    """Log signature by folding segments directly with the compiled BCH step."""
    if ctx.program is None:
        raise ValueError("context was not prepared for the O method")
    pts = _check_path(path, ctx)
    coeffs = np.zeros(ctx.basis.size)
    for displacement in np.diff(pts, axis=0):
        run_program(ctx.program, coeffs, displacement)
    return LieSeries(ctx.basis, coeffs)


def basis_labels(ctx: PreparedContext) -> list[str]:
    """Bracketed names of the basis elements, in output order."""
    return [str(e) for e in ctx.basis.elements]


def expand_lie_series(series: LieSeries) -> TensorSeries:
    """Numeric word expansion of a LieSeries (inverse direction of project)."""
    basis = series.basis
    out = TensorSeries.zero(basis.d, basis.m)
    for elt, coeff in series.items():
        c = float(coeff)
        if c:
            lvl = out.levels[elt.level]
            for r, k in basis.expand_ranks(elt).items():
                lvl[r] += k * c
    return out
