"""Incidence and Laplacian algebra of a :class:`DirectedGraph`.

Everything here is computed in exact ``int64`` arithmetic; floating point only
enters when a caller asks for eigenvalues.
"""

from __future__ import annotations

import numpy as np

from ..errors import EmptyGraphError
from .digraph import DirectedGraph


def incidence_matrix(g: DirectedGraph) -> np.ndarray:
    """n x |E| matrix with +1 at each edge's tail and -1 at its head."""
    b = np.zeros((g.n, g.num_edges), dtype=np.int64)
    for k, (tail, head) in enumerate(g.edges):
        b[tail, k] = 1
        b[head, k] = -1
    return b


def outgoing_incidence_matrix(g: DirectedGraph) -> np.ndarray:
    """Incidence matrix with the incoming (-1) entries zeroed."""
    b_plus = np.zeros((g.n, g.num_edges), dtype=np.int64)
    for k, (tail, _head) in enumerate(g.edges):
        b_plus[tail, k] = 1
    return b_plus


def laplacians(g: DirectedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(L, L_d)`` with ``L = B B^T`` and ``L_d = B B_+^T``."""
    b = incidence_matrix(g)
    b_plus = outgoing_incidence_matrix(g)
    return b @ b.T, b @ b_plus.T


def edge_laplacians(g: DirectedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(L_E, L_E^d)`` with ``L_E = B^T B`` and ``L_E^d = B^T B_+``."""
    if g.num_edges == 0:
        raise EmptyGraphError("edge Laplacians need at least one edge")
    b = incidence_matrix(g)
    b_plus = outgoing_incidence_matrix(g)
    return b.T @ b, b.T @ b_plus


def structural_lyapunov_matrix(g: DirectedGraph) -> np.ndarray:
    """``S = B B^T B_+ B^T``.

    For every x, ``x^T S x = y^T (B^T B_+) y`` with ``y = B^T x``, which is the
    quadratic form the energy derivative of the barrier-controlled system takes.
    """
    b = incidence_matrix(g)
    b_plus = outgoing_incidence_matrix(g)
    return (b @ b.T) @ (b_plus @ b.T)


def symmetric_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


__all__ = [
    "incidence_matrix",
    "outgoing_incidence_matrix",
    "laplacians",
    "edge_laplacians",
    "structural_lyapunov_matrix",
    "symmetric_part",
]
