from .certificate import (
    StabilityCertificate,
    certify_stability,
    default_tolerance,
    edge_laplacian_invertible,
    find_undirected_cycle,
    is_forest,
    min_symmetric_eigenvalue,
)
from .digraph import DirectedGraph
from .matrices import (
    edge_laplacians,
    incidence_matrix,
    laplacians,
    outgoing_incidence_matrix,
    structural_lyapunov_matrix,
    symmetric_part,
)

__all__ = [
    "DirectedGraph",
    "StabilityCertificate",
    "certify_stability",
    "default_tolerance",
    "edge_laplacian_invertible",
    "edge_laplacians",
    "find_undirected_cycle",
    "incidence_matrix",
    "is_forest",
    "laplacians",
    "min_symmetric_eigenvalue",
    "outgoing_incidence_matrix",
    "structural_lyapunov_matrix",
    "symmetric_part",
]
