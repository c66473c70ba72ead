"""Kronecker-structured matrices of the extended (replicated) system."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EmptyGraphError, IndexingError, LemmaPreconditionError
from ..graph import (
    DirectedGraph,
    certify_stability,
    find_undirected_cycle,
    incidence_matrix,
    min_symmetric_eigenvalue,
    outgoing_incidence_matrix,
    structural_lyapunov_matrix,
)
from .indexing import CompactLayout, ReplicaIndexing

logger = logging.getLogger(__name__)

LEMMA_TOLERANCE = 1e-10
FACTORIZATION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ExtendedGraph:
    base: DirectedGraph
    B_bar: np.ndarray
    B_bar_plus: np.ndarray
    indexing: ReplicaIndexing

    @property
    def P(self) -> int:
        return self.indexing.P

    def adjacency(self) -> np.ndarray:
        """Adjacency of the replicated graph, ``I_{P|E|} (x) A(G)`` in canonical order."""
        return np.kron(np.eye(self.indexing.blocks, dtype=np.int64), self.base.adjacency_matrix())


@dataclass(frozen=True)
class SelectorMatrices:
    H: np.ndarray
    T_x: np.ndarray


def _require_edges(g: DirectedGraph) -> None:
    if g.num_edges == 0:
        raise EmptyGraphError("the extended system needs at least one edge")


def _replicate(b: np.ndarray, idx: ReplicaIndexing) -> np.ndarray:
    # One copy of b per (edge slot, point) block, placed by the canonical index maps.
    out = np.zeros((idx.size, idx.blocks * idx.E), dtype=np.int64)
    for e in range(idx.E):
        for alpha in range(1, idx.P + 1):
            rows = [idx.flat(i, e, alpha) for i in range(idx.n)]
            cols = [idx.edge_column(e, alpha, q) for q in range(idx.E)]
            out[np.ix_(rows, cols)] = b
    return out


def build_extended_graph(g: DirectedGraph, P: int = 4) -> ExtendedGraph:
    _require_edges(g)
    if P < 1:
        raise ValueError(f"P must be >= 1, got {P}")
    idx = ReplicaIndexing(n=g.n, P=P, E=g.num_edges)
    b = incidence_matrix(g)
    b_plus = outgoing_incidence_matrix(g)
    b_bar = _replicate(b, idx)
    b_bar_plus = _replicate(b_plus, idx)
    eye = np.eye(idx.blocks, dtype=np.int64)
    if not (
        np.array_equal(b_bar, np.kron(eye, b)) and np.array_equal(b_bar_plus, np.kron(eye, b_plus))
    ):
        raise IndexingError("replicated incidence does not match I (x) B")
    return ExtendedGraph(base=g, B_bar=b_bar, B_bar_plus=b_bar_plus, indexing=idx)


def coupling_matrix(n: int, P: int, E: int) -> np.ndarray:
    """``C = I_n (x) J_{P E}``, agent-major: all replicas of one agent share a velocity."""
    if min(n, P, E) < 1:
        raise ValueError(f"n, P and E must be >= 1, got {n}, {P}, {E}")
    return np.kron(np.eye(n, dtype=np.int64), np.ones((P * E, P * E), dtype=np.int64))


def canonical_coupling(idx: ReplicaIndexing) -> np.ndarray:
    c = coupling_matrix(idx.n, idx.P, idx.E)
    return c[np.ix_(idx.perm, idx.perm)]


def extended_structural_matrix_canonical(ext: ExtendedGraph) -> np.ndarray:
    """``Bbar Bbar^T C Bbar_+ Bbar^T`` with rows and columns in canonical order."""
    b_bar, b_bar_plus = ext.B_bar, ext.B_bar_plus
    c = canonical_coupling(ext.indexing)
    return (b_bar @ b_bar.T) @ c @ (b_bar_plus @ b_bar.T)


def _structural_pair(g: DirectedGraph, P: int) -> tuple[np.ndarray, np.ndarray]:
    ext = build_extended_graph(g, P)
    s_bar = ext.indexing.to_agent_major(extended_structural_matrix_canonical(ext))
    blocks = ext.indexing.blocks
    ones = np.ones((blocks, blocks), dtype=np.int64)
    return s_bar, np.kron(structural_lyapunov_matrix(g), ones)


def extended_structural_matrix(g: DirectedGraph, P: int = 4) -> np.ndarray:
    """Extended structural Lyapunov matrix, agent-major, checked against ``S (x) J_{P|E|}``.

    Raises:
        IndexingError: if the computed product and the Kronecker factorization differ.
    """
    s_bar, expected = _structural_pair(g, P)
    residual = float(np.max(np.abs(s_bar - expected)))
    if residual > FACTORIZATION_TOLERANCE:
        raise IndexingError(f"extended structural matrix differs from S (x) J by {residual:.3e}")
    return s_bar


def build_selectors(g: DirectedGraph, P: int = 4) -> SelectorMatrices:
    """Build ``H`` (keeps replica slot ``k`` only for its own edge ``q = k``) and ``T_x``."""
    _require_edges(g)
    idx = ReplicaIndexing(n=g.n, P=P, E=g.num_edges)
    width = idx.blocks * idx.E
    diag = np.zeros(width, dtype=np.int64)
    for k in range(idx.E):
        for alpha in range(1, P + 1):
            diag[idx.edge_column(k, alpha, k)] = 1
    layout = CompactLayout(g, P)
    t_x = np.zeros((idx.size, layout.width), dtype=np.int64)
    for e in range(idx.E):
        for alpha in range(1, P + 1):
            for i in range(g.n):
                col = layout.column(i, e, alpha)
                if col is not None:
                    t_x[idx.flat(i, e, alpha), col] = 1
    return SelectorMatrices(H=np.diag(diag), T_x=t_x)


def extended_weight(g: DirectedGraph, P: int, edge_weights: Sequence[float]) -> np.ndarray:
    """``Wbar``: weight ``a_q`` on every column that refers to base edge ``q``."""
    a = np.asarray(edge_weights, dtype=float)
    if a.shape != (g.num_edges,):
        raise ValueError(f"expected {g.num_edges} edge weights, got shape {a.shape}")
    if np.any(a <= 0.0):
        raise ValueError("edge weights must be positive")
    return np.kron(np.eye(P * g.num_edges), np.diag(a))


def _lemma_terms(
    g: DirectedGraph, P: int, edge_weights: Sequence[float] | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    _require_edges(g)
    cycle = find_undirected_cycle(g)
    if cycle is not None:
        raise LemmaPreconditionError(cycle)
    if edge_weights is None:
        edge_weights = np.ones(g.num_edges)
    ext = build_extended_graph(g, P)
    sel = build_selectors(g, P)
    b_bar = ext.B_bar.astype(float)
    lhs = sel.H @ extended_weight(g, P, edge_weights) @ b_bar.T @ sel.T_x
    w_hat = b_bar @ np.linalg.solve(b_bar.T @ b_bar, lhs)
    return b_bar, lhs, w_hat


def flipped_weight(
    g: DirectedGraph, P: int = 4, edge_weights: Sequence[float] | None = None
) -> np.ndarray:
    """``What = Bbar (Bbar^T Bbar)^-1 H Wbar Bbar^T T_x``.

    It moves the weighting from edge space to vertex space:
    ``H Wbar Bbar^T T_x = Bbar^T What``. Requires a forest so that
    ``Bbar^T Bbar`` is invertible.

    Raises:
        LemmaPreconditionError: if the undirected graph has a cycle.
    """
    b_bar, lhs, w_hat = _lemma_terms(g, P, edge_weights)
    residual = float(np.max(np.abs(lhs - b_bar.T @ w_hat)))
    logger.debug("weight-flip residual for |E|=%d, P=%d: %.3e", g.num_edges, P, residual)
    if residual > LEMMA_TOLERANCE:
        raise IndexingError(f"weight-flip identity residual {residual:.3e}")
    return w_hat


def lemma_residual(
    g: DirectedGraph, P: int = 4, edge_weights: Sequence[float] | None = None
) -> float:
    b_bar, lhs, w_hat = _lemma_terms(g, P, edge_weights)
    return float(np.max(np.abs(lhs - b_bar.T @ w_hat)))


@dataclass(frozen=True)
class PsdPropagation:
    base_psd: bool
    base_min_eig: float
    extended_min_eig: float
    tolerance: float

    @property
    def holds(self) -> bool:
        """PSD of the base certificate carries over to the extended matrix."""
        return (not self.base_psd) or self.extended_min_eig >= -self.tolerance


def psd_propagation(g: DirectedGraph, P: int = 4) -> PsdPropagation:
    cert = certify_stability(g)
    s_bar = extended_structural_matrix(g, P)
    blocks = P * g.num_edges
    return PsdPropagation(
        base_psd=cert.psd,
        base_min_eig=cert.min_eig_sym,
        extended_min_eig=min_symmetric_eigenvalue(s_bar),
        tolerance=cert.tolerance_used * blocks,
    )


def factorization_residual(g: DirectedGraph, P: int = 4) -> float:
    """Largest entry of ``|Sbar - S (x) J|`` in agent-major order, without raising."""
    s_bar, expected = _structural_pair(g, P)
    return float(np.max(np.abs(s_bar - expected)))
