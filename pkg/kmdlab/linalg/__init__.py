"""Dense complex linear algebra primitives."""

from kmdlab.linalg.kernel import (
    DEFAULT_SVD_THRESHOLD,
    SvdThreshold,
    best_rank_approximation,
    companion_from,
    min_norm_lstsq,
    nullspace_projection,
    numerical_rank,
    pseudo_inverse,
    row_space_projection,
    truncated_svd,
    vandermonde,
)

__all__ = [
    "DEFAULT_SVD_THRESHOLD",
    "SvdThreshold",
    "best_rank_approximation",
    "companion_from",
    "min_norm_lstsq",
    "nullspace_projection",
    "numerical_rank",
    "pseudo_inverse",
    "row_space_projection",
    "truncated_svd",
    "vandermonde",
]
