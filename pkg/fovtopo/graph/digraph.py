from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class DirectedGraph(BaseModel):
    """Simple directed graph on vertices ``0..n-1``.

    Edge order is fixed at construction; it is the column order of every
    incidence-derived matrix and the edge-slot order of the extended system.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    edges: tuple[tuple[int, int], ...] = ()

    @model_validator(mode="after")
    def _check_edges(self) -> "DirectedGraph":
        seen: set[tuple[int, int]] = set()
        for tail, head in self.edges:
            if not (0 <= tail < self.n and 0 <= head < self.n):
                raise ValueError(f"edge ({tail}, {head}) out of range for n={self.n}")
            if tail == head:
                raise ValueError(f"self-loop on vertex {tail}")
            if (tail, head) in seen:
                raise ValueError(f"duplicate edge ({tail}, {head})")
            seen.add((tail, head))
        return self

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def out_neighbors(self, i: int) -> list[int]:
        return [h for t, h in self.edges if t == i]

    def in_neighbors(self, i: int) -> list[int]:
        return [t for t, h in self.edges if h == i]

    def edge_index(self, tail: int, head: int) -> int:
        return self.edges.index((tail, head))

    def adjacency_matrix(self) -> np.ndarray:
        # A[i, j] = 1 when i senses j
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for t, h in self.edges:
            a[t, h] = 1
        return a

    def relabel(self, perm: list[int] | np.ndarray) -> "DirectedGraph":
        """Return the graph with vertex ``v`` renamed to ``perm[v]``, edge order kept."""
        perm = [int(p) for p in perm]
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        return DirectedGraph(n=self.n, edges=tuple((perm[t], perm[h]) for t, h in self.edges))

    def disjoint_union(self, other: "DirectedGraph") -> "DirectedGraph":
        shifted = tuple((t + self.n, h + self.n) for t, h in other.edges)
        return DirectedGraph(n=self.n + other.n, edges=self.edges + shifted)

    def contains(self, other: "DirectedGraph") -> bool:
        return set(other.edges).issubset(self.edges)
