from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..graph import DirectedGraph


@dataclass(frozen=True)
class ReplicaIndexing:
    """Flat ordering of the extended state.

    Each agent ``i`` is replicated once per edge slot ``e`` and point ``alpha``
    (``alpha = 1`` is the agent itself, ``2..P`` its virtual points). The
    canonical order is block-major::

        flat = (e * P + (alpha - 1)) * n + i

    The agent-major order groups every replica of one agent together::

        agent_major = i * P * E + e * P + (alpha - 1)
    """

    n: int
    P: int
    E: int

    def __post_init__(self) -> None:
        if min(self.n, self.P, self.E) < 1:
            raise ValueError(f"n, P and E must be >= 1, got {self.n}, {self.P}, {self.E}")

    @property
    def blocks(self) -> int:
        return self.P * self.E

    @property
    def size(self) -> int:
        return self.n * self.P * self.E

    def block(self, e: int, alpha: int) -> int:
        if not (0 <= e < self.E and 1 <= alpha <= self.P):
            raise IndexError(f"slot (e={e}, alpha={alpha}) out of range")
        return e * self.P + (alpha - 1)

    def flat(self, i: int, e: int, alpha: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"agent {i} out of range")
        return self.block(e, alpha) * self.n + i

    def unflat(self, index: int) -> tuple[int, int, int]:
        b, i = divmod(index, self.n)
        e, a = divmod(b, self.P)
        return i, e, a + 1

    def agent_major(self, i: int, e: int, alpha: int) -> int:
        return i * self.blocks + self.block(e, alpha)

    @cached_property
    def perm(self) -> np.ndarray:
        """``perm[canonical] = agent_major`` for every flat index."""
        out = np.empty(self.size, dtype=np.int64)
        for index in range(self.size):
            out[index] = self.agent_major(*self.unflat(index))
        return out

    def to_agent_major(self, m: np.ndarray) -> np.ndarray:
        """Reorder a square matrix from canonical to agent-major rows and columns."""
        inv = np.argsort(self.perm)
        return m[np.ix_(inv, inv)]

    def edge_column(self, k: int, alpha: int, q: int) -> int:
        """Column of the extended incidence for replica slot ``(k, alpha)`` and base edge ``q``."""
        return self.block(k, alpha) * self.E + q


@dataclass(frozen=True)
class CompactLayout:
    """Per-agent compact state: agent ``i`` repeated over the edges it touches, ``P`` points each.

    Columns are agent-major; inside one agent the touched edges keep graph order.
    The total width is ``2 * P * |E|``.
    """

    graph: DirectedGraph
    P: int

    @cached_property
    def incident_edges(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(k for k, (t, h) in enumerate(self.graph.edges) if i in (t, h))
            for i in range(self.graph.n)
        )

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for edges in self.incident_edges:
            out.append(acc)
            acc += len(edges) * self.P
        return tuple(out)

    @property
    def width(self) -> int:
        return 2 * self.P * self.graph.num_edges

    def column(self, i: int, e: int, alpha: int) -> int | None:
        """Compact column holding agent ``i`` for edge ``e``, or ``None`` when ``i`` is not on ``e``."""
        edges = self.incident_edges[i]
        if e not in edges:
            return None
        return self.offsets[i] + edges.index(e) * self.P + (alpha - 1)
