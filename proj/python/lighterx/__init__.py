"""Python bindings for the lighterx C++ core."""

from ._lighterx import (
    DataError,
    Error,
    Interactions,
    NumericError,
    ShapeError,
    SparseMatrix,
    bench_epoch,
    bpr_loss,
    compute_h,
    coupled_lightgcn_forward,
    evaluate,
    gen_feat,
    infonce_loss,
    jacobi_propagate,
    load_interactions,
    normalized_adjacency,
    propagate,
    split_per_user,
    synthetic,
    train,
    truncated_svd,
)

__all__ = [
    "DataError",
    "Error",
    "Interactions",
    "NumericError",
    "ShapeError",
    "SparseMatrix",
    "bench_epoch",
    "bpr_loss",
    "compute_h",
    "coupled_lightgcn_forward",
    "evaluate",
    "gen_feat",
    "infonce_loss",
    "jacobi_propagate",
    "load_interactions",
    "normalized_adjacency",
    "propagate",
    "split_per_user",
    "synthetic",
    "train",
    "truncated_svd",
]
