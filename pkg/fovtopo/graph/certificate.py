from __future__ import annotations

import logging

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.linalg import LinAlgError, eigvalsh

from ..errors import CertificationError
from .digraph import DirectedGraph
from .matrices import incidence_matrix, structural_lyapunov_matrix, symmetric_part

logger = logging.getLogger(__name__)

# B^T B counts as singular above this condition number
EDGE_LAPLACIAN_COND_LIMIT = 1e12


class StabilityCertificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    psd: bool
    min_eig_sym: float
    edge_laplacian_invertible: bool
    tolerance_used: float

    @model_validator(mode="after")
    def _consistent(self) -> "StabilityCertificate":
        if self.psd != (self.min_eig_sym >= -self.tolerance_used):
            raise ValueError("psd flag disagrees with min_eig_sym and tolerance_used")
        return self


def default_tolerance(s: np.ndarray) -> float:
    norm_inf = float(np.abs(s).sum(axis=1).max()) if s.size else 0.0
    return 1e-9 * max(1.0, norm_inf)


def min_symmetric_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of ``(M + M^T) / 2``."""
    if m.size == 0:
        return 0.0
    try:
        eigs = eigvalsh(symmetric_part(np.asarray(m, dtype=float)))
    except LinAlgError as exc:
        raise CertificationError(f"eigenvalue solver failed: {exc}") from exc
    return float(eigs[0])


def find_undirected_cycle(g: DirectedGraph) -> list[int] | None:
    """Return a cycle of the underlying undirected multigraph, closed on its first vertex.

    Edges are added in order; the first edge whose endpoints are already
    connected closes the reported cycle. A two-cycle ``i->j, j->i`` counts.
    """
    forest = nx.Graph()
    forest.add_nodes_from(range(g.n))
    for tail, head in g.edges:
        if nx.has_path(forest, tail, head):
            path = nx.shortest_path(forest, tail, head)
            return [*path, tail]
        forest.add_edge(tail, head)
    return None


def is_forest(g: DirectedGraph) -> bool:
    return find_undirected_cycle(g) is None


def edge_laplacian_invertible(g: DirectedGraph) -> bool:
    if g.num_edges == 0:
        return True
    b = incidence_matrix(g).astype(float)
    return bool(np.linalg.cond(b.T @ b) < EDGE_LAPLACIAN_COND_LIMIT)


def certify_stability(g: DirectedGraph, tol: float | None = None) -> StabilityCertificate:
    """Check that the symmetric part of the structural Lyapunov matrix is PSD.

    Args:
        g: interaction graph
        tol: absolute tolerance on the smallest eigenvalue; ``None`` selects
            ``1e-9 * max(1, ||S||_inf)``

    Returns:
        StabilityCertificate with the measured spectrum and whether ``B^T B``
        is invertible (the forest condition the extended-system lemma needs).
    """
    s = structural_lyapunov_matrix(g)
    if tol is None:
        tol = default_tolerance(s)
    if tol < 0:
        raise ValueError(f"tolerance must be non-negative, got {tol}")
    min_eig = min_symmetric_eigenvalue(s)
    cert = StabilityCertificate(
        psd=min_eig >= -tol,
        min_eig_sym=min_eig,
        edge_laplacian_invertible=edge_laplacian_invertible(g),
        tolerance_used=float(tol),
    )
    logger.debug("certificate for n=%d |E|=%d: %s", g.n, g.num_edges, cert)
    return cert
