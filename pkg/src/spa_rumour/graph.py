"""Compact undirected graphs (CSR adjacency) and breadth-first search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(eq=False)
class UndirectedGraph:
    """Simple undirected graph; neighbours of ``v`` are
    ``indices[indptr[v]:indptr[v+1]]`` in increasing order."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges) -> "UndirectedGraph":
        """Build from an ``(E, 2)`` edge array. Orientation, duplicates and
        self-loops are discarded."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([e, e[:, ::-1]])
        if len(both):
            key = both[:, 0] * n + both[:, 1]
            key = np.unique(key)
            src, dst = key // n, key % n
        else:
            src = dst = np.zeros(0, np.int64)
        indptr = np.zeros(n + 1, np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        idx_dtype = np.int32 if n < 2**31 else np.int64
        return cls(n, indptr, dst.astype(idx_dtype))

    @classmethod
    def complete(cls, n: int) -> "UndirectedGraph":
        idx_dtype = np.int32 if n < 2**31 else np.int64
        full = np.tile(np.arange(n, dtype=idx_dtype), n).reshape(n, n)
        mask = ~np.eye(n, dtype=bool)
        indices = full[mask]
        indptr = np.arange(n + 1, dtype=np.int64) * (n - 1)
        return cls(n, indptr, indices)

    @classmethod
    def cycle(cls, n: int) -> "UndirectedGraph":
        v = np.arange(n)
        return cls.from_edges(n, np.column_stack([v, (v + 1) % n]))

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def edge_array(self) -> np.ndarray:
        """Each edge once as ``(u, v)`` with ``u < v``, sorted."""
        src = np.repeat(np.arange(self.n), self.degree)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep].astype(np.int64)])

    def subgraph(self, vertices) -> tuple["UndirectedGraph", np.ndarray]:
        """Induced subgraph; returns it with the sorted original ids."""
        keep = np.unique(np.asarray(vertices, dtype=np.int64))
        remap = np.full(self.n, -1, np.int64)
        remap[keep] = np.arange(len(keep))
        e = self.edge_array()
        e = remap[e]
        e = e[(e >= 0).all(axis=1)]
        return UndirectedGraph.from_edges(len(keep), e), keep


@njit(cache=True)
def bfs_distances(indptr, indices, source):
    """Hop distance from ``source`` to every vertex (-1 when unreachable)."""
    n = len(indptr) - 1
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    dist[source] = 0
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = du
                queue[tail] = w
                tail += 1
    return dist


@njit(cache=True)
def all_pairs_distance_histogram(indptr, indices):
    """Counts of ordered connected pairs ``(u, v)``, ``u != v``, per distance."""
    n = len(indptr) - 1
    hist = np.zeros(n + 1, np.int64)
    for s in range(n):
        dist = bfs_distances(indptr, indices, s)
        for v in range(n):
            if dist[v] > 0:
                hist[dist[v]] += 1
    return hist
