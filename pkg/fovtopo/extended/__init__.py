from .indexing import CompactLayout, ReplicaIndexing
from .kron import (
    ExtendedGraph,
    PsdPropagation,
    SelectorMatrices,
    build_extended_graph,
    build_selectors,
    canonical_coupling,
    coupling_matrix,
    extended_structural_matrix,
    extended_structural_matrix_canonical,
    extended_weight,
    factorization_residual,
    flipped_weight,
    lemma_residual,
    psd_propagation,
)

__all__ = [
    "CompactLayout",
    "ExtendedGraph",
    "PsdPropagation",
    "ReplicaIndexing",
    "SelectorMatrices",
    "build_extended_graph",
    "build_selectors",
    "canonical_coupling",
    "coupling_matrix",
    "extended_structural_matrix",
    "extended_structural_matrix_canonical",
    "extended_weight",
    "factorization_residual",
    "flipped_weight",
    "lemma_residual",
    "psd_propagation",
]
