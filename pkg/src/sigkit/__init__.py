"""Iterated-integral signatures and log signatures of piecewise-linear paths.

The signature of a d-dimensional path truncated at level m concatenates the
levels 1..m of the iterated-integral tensor series; the log signature is its
tensor logarithm, reported either expanded over words or as coefficients over
a Lyndon or standard Hall basis of the free Lie algebra.
"""

from __future__ import annotations

from .bch_direct import (
    AccumulatorProgram,
    BchSeries,
    compile_program,
    derive_bch,
    load_or_derive,
    run_program,
    symbolic_bch_step,
)
from .lie_basis import (
    LYNDON,
    STANDARD_HALL,
    AnagramBlock,
    BasisElt,
    HallBasis,
    LieSeries,
    build_basis,
    compare_elements,
    expand,
    lie_bracket_in_basis,
    mapping_blocks,
    standard_factorize,
)
from .logsig_engine import (
    CapacityError,
    PreparedContext,
    basis_labels,
    expand_lie_series,
    logsig_o,
    logsig_s,
    logsig_x,
    prepare,
    project,
)
from .tensor_algebra import (
    TensorSeries,
    chen_concat,
    concat_product,
    path_signature,
    segment_signature,
    tensor_exp,
    tensor_log,
)
from .words import (
    anagram_key,
    is_lyndon,
    lyndon_words,
    multinomial_count,
    witt_class_count,
    witt_level_count,
)


def sig(path, m: int):
    """Flattened signature (levels 1..m concatenated) of a point array."""
    return path_signature(path, m).flatten()


def logsig(path, ctx: PreparedContext, method: str = "s"):
    """Log signature of a point array against a prepared context.

    Methods 's' and 'o' return basis coefficients; 'x' returns the expanded
    log signature in the flattened signature layout.
    """
    method = method.lower()
    if method == "x":
        return logsig_x(path, ctx).flatten()
    if method == "s":
        return logsig_s(path, ctx).coefficients
    if method == "o":
        return logsig_o(path, ctx).coefficients
    raise ValueError(f"unknown method {method!r}; expected 'x', 's' or 'o'")
