"""Explainable threshold-tree clustering over reference centers."""

from ._xclust import (
    InputError,
    InternalError,
    ThresholdTree,
    algebraic_lemma_check,
    build_2means_tree,
    build_kmeans_tree,
    build_kmedians_tree,
    f_cdf,
    f_quantile,
    gen_blobs,
    gen_imm_adversarial,
    gen_kmeans_lb,
    gen_kmedians_lb,
    nearest_center_cost,
    random_2means_split,
    solve_reference,
    tree_cost,
)

__all__ = [
    "InputError",
    "InternalError",
    "ThresholdTree",
    "algebraic_lemma_check",
    "build_2means_tree",
    "build_kmeans_tree",
    "build_kmedians_tree",
    "f_cdf",
    "f_quantile",
    "gen_blobs",
    "gen_imm_adversarial",
    "gen_kmeans_lb",
    "gen_kmedians_lb",
    "nearest_center_cost",
    "random_2means_split",
    "solve_reference",
    "tree_cost",
]
