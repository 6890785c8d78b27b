"""Components, slab crossings and distance stretch on 2-D proximity graphs."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _scipy_components

from .graph import UndirectedGraph, bfs_distances
from .rgg import MetricMode, RggSnapshot, UnsupportedDimensionError


class DegenerateGeometryError(ValueError):
    """The radius is too large for the subsquare construction."""


@dataclass(eq=False)
class ComponentLabeling:
    labels: np.ndarray
    sizes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def num_components(self) -> int:
        return len(self.sizes)

    @property
    def giant_label(self) -> int:
        return int(np.argmax(self.sizes))

    @property
    def giant_fraction(self) -> float:
        return float(self.sizes.max() / self.n) if self.n else 0.0

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


def _as_graph(g) -> UndirectedGraph:
    if isinstance(g, UndirectedGraph):
        return g
    if isinstance(g, RggSnapshot):
        return g.graph()
    if hasattr(g, "undirected"):
        return g.undirected()
    raise TypeError(f"cannot view {type(g).__name__} as an undirected graph")


def connected_components(g) -> ComponentLabeling:
    """Exact component labels. Labels are numbered in order of each
    component's smallest vertex id."""
    ug = _as_graph(g)
    if ug.n == 0:
        return ComponentLabeling(np.zeros(0, np.int64), np.zeros(0, np.int64))
    adj = csr_matrix((np.ones(len(ug.indices), np.int8), ug.indices, ug.indptr), shape=(ug.n, ug.n))
    _, raw = _scipy_components(adj, directed=False)
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty(len(first), np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    labels = rank[inverse]
    return ComponentLabeling(labels, np.bincount(labels))


@dataclass(eq=False)
class OccupancyGrid:
    """``first_vertex[i, j]`` is the lowest vertex index in the subsquare with
    x-index ``i`` and y-index ``j``, or -1 when it is empty."""

    cells_per_axis: int
    first_vertex: np.ndarray

    @property
    def occupied(self) -> np.ndarray:
        return self.first_vertex >= 0

    @property
    def cell_size(self) -> float:
        return 1.0 / self.cells_per_axis


def _require_2d(snapshot: RggSnapshot):
    if snapshot.positions.ndim != 2 or snapshot.positions.shape[1] != 2:
        raise UnsupportedDimensionError("crossing analysis needs two-dimensional positions")


def subsquare_occupancy(snapshot: RggSnapshot, cells_per_axis: int | None = None) -> OccupancyGrid:
    """Tile the unit square with ``ceil(5/r)`` subsquares per axis (side at
    most r/5) and record which hold a vertex."""
    _require_2d(snapshot)
    g = cells_per_axis or int(math.ceil(5.0 / snapshot.r))
    pos = snapshot.positions
    empty = len(pos)
    first = np.full(g * g, empty, np.int64)
    if len(pos):
        ij = np.minimum((pos * g).astype(np.int64), g - 1)
        np.minimum.at(first, ij[:, 0] * g + ij[:, 1], np.arange(len(pos)))
    first[first == empty] = -1
    return OccupancyGrid(g, first.reshape(g, g))


@dataclass
class CrossingReport:
    W: float
    num_slabs: int
    cells_per_axis: int
    horizontal_crossings: list = field(default_factory=list)
    vertical_crossings: list = field(default_factory=list)
    spanning_component_label: int | None = None

    @property
    def complete(self) -> bool:
        return all(c is not None for c in self.horizontal_crossings + self.vertical_crossings)

    def crossing_vertices(self) -> np.ndarray:
        paths = [c for c in self.horizontal_crossings + self.vertical_crossings if c is not None]
        return np.unique(np.concatenate(paths)) if paths else np.zeros(0, np.int64)

    def to_dict(self) -> dict:
        def pack(paths):
            return {
                "found": [p is not None for p in paths],
                "paths": [None if p is None else [int(v) for v in p] for p in paths],
            }

        return {
            "W": self.W,
            "num_slabs": self.num_slabs,
            "cells_per_axis": self.cells_per_axis,
            "horizontal": pack(self.horizontal_crossings),
            "vertical": pack(self.vertical_crossings),
            "spanning_component_label": self.spanning_component_label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def slab_layout(N: int, r: float) -> tuple[float, int]:
    """Slab width W = M*r*log N with M = pi*N*r^2, and the slab count
    ``max(1, floor(1/W))`` used after widening slabs to tile the square."""
    M = math.pi * N * r * r
    W = M * r * math.log(N)
    return W, max(1, int(math.floor(1.0 / W)))


def _flood(occupied: np.ndarray, lo: int, hi: int) -> list[tuple[int, int]] | None:
    """Breadth-first search over occupied cells with y-index in ``[lo, hi)``,
    from the x=0 column to the x=G-1 column. Returns the cell path."""
    g = occupied.shape[0]
    parent: dict[tuple[int, int], tuple[int, int] | None] = {}
    queue = deque()
    for j in range(lo, hi):
        if occupied[0, j]:
            parent[(0, j)] = None
            queue.append((0, j))
    while queue:
        cell = queue.popleft()
        i, j = cell
        if i == g - 1:
            path = []
            while cell is not None:
                path.append(cell)
                cell = parent[cell]
            return path[::-1]
        for ni, nj in ((i + 1, j), (i, j + 1), (i, j - 1), (i - 1, j)):
            if 0 <= ni < g and lo <= nj < hi and occupied[ni, nj] and (ni, nj) not in parent:
                parent[(ni, nj)] = cell
                queue.append((ni, nj))
    return None


def find_crossings(snapshot: RggSnapshot, labeling: ComponentLabeling | None = None) -> CrossingReport:
    """Search every horizontal slab for a left-to-right crossing and every
    vertical slab for a top-to-bottom one.

    Crossings are found as 4-connected paths of occupied subsquares and turned
    into vertex paths by taking the lowest vertex index in each subsquare. The
    subsquare count is rounded up to a multiple of the slab count so that
    slabs are tiled exactly. Geometry is that of the square, without
    wraparound, whatever the snapshot metric.
    """
    _require_2d(snapshot)
    N, r = snapshot.t, snapshot.r
    if N < 3:
        raise ValueError("crossing analysis needs at least 3 vertices")
    W, ns = slab_layout(N, r)
    per_slab = int(math.ceil(math.ceil(5.0 / r) / ns))
    if per_slab < 5:
        raise DegenerateGeometryError(
            f"radius {r} leaves fewer than 5 subsquares across each slab")
    g = per_slab * ns
    grid = subsquare_occupancy(snapshot, g)
    occ = grid.occupied
    report = CrossingReport(W, ns, g)
    for k in range(ns):
        lo, hi = k * per_slab, (k + 1) * per_slab
        h = _flood(occ, lo, hi)
        report.horizontal_crossings.append(
            None if h is None else np.array([grid.first_vertex[i, j] for i, j in h], np.int64))
        v = _flood(occ.T, lo, hi)
        report.vertical_crossings.append(
            None if v is None else np.array([grid.first_vertex[j, i] for i, j in v], np.int64))
    if report.complete:
        labeling = labeling or connected_components(snapshot)
        report.spanning_component_label = int(labeling.labels[report.horizontal_crossings[0][0]])
    return report


def check_crossing(snapshot: RggSnapshot, report: CrossingReport, path, slab: int,
                   horizontal: bool) -> list[str]:
    """Problems with one reported crossing; empty when it is a valid crossing."""
    problems = []
    pos = snapshot.positions[np.asarray(path)]
    along, across = (0, 1) if horizontal else (1, 0)
    width = 1.0 / report.num_slabs
    lo, hi = slab * width, (slab + 1) * width
    r = snapshot.r
    if np.any(pos[:, across] < lo - 1e-12) or np.any(pos[:, across] > hi + 1e-12):
        problems.append("vertex outside slab")
    if pos[0, along] > r / 5:
        problems.append("first vertex too far from the start side")
    if 1.0 - pos[-1, along] > r / 5:
        problems.append("last vertex too far from the end side")
    if len(pos) > 1:
        hops = np.sqrt(((pos[1:] - pos[:-1]) ** 2).sum(axis=1))
        if np.any(hops > r / 2):
            problems.append(f"hop longer than r/2 ({hops.max():.6g} > {r / 2:.6g})")
    return problems


def _sample_connected_pairs(labeling: ComponentLabeling, num_pairs: int, rng) -> np.ndarray:
    """Uniform unordered pairs of distinct vertices sharing a component."""
    weights = (labeling.sizes[labeling.labels] - 1).astype(np.float64)
    total = weights.sum()
    if total <= 0:
        return np.zeros((0, 2), np.int64)
    sources = rng.choice(labeling.n, size=num_pairs, p=weights / total)
    order = np.argsort(labeling.labels, kind="stable")
    starts = np.concatenate([[0], np.cumsum(labeling.sizes)])
    pairs = np.empty((num_pairs, 2), np.int64)
    for k, s in enumerate(sources):
        lab = labeling.labels[s]
        members = order[starts[lab] : starts[lab + 1]]
        idx = rng.integers(len(members) - 1)
        t = members[idx]
        if t == s:
            t = members[len(members) - 1]
        pairs[k] = (s, t)
    return pairs


def distance_stretch(snapshot: RggSnapshot, labeling: ComponentLabeling, num_pairs: int,
                     seed: int = 0) -> list[tuple[float, int]]:
    """``(d_E, d_graph)`` for uniformly sampled connected pairs, where d_E uses
    the snapshot metric and d_graph is the hop distance."""
    if num_pairs < 1:
        raise ValueError("num_pairs must be at least 1")
    rng = np.random.default_rng(seed)
    pairs = _sample_connected_pairs(labeling, num_pairs, rng)
    ug = snapshot.graph()
    out = []
    cache: dict[int, np.ndarray] = {}
    for s, t in pairs:
        if s not in cache:
            cache[s] = bfs_distances(ug.indptr, ug.indices, s)
        out.append((snapshot.distance(s, t), int(cache[s][t])))
    return out


def stretch_constant(samples, r: float, N: int, gamma_hat: float = 1.0) -> float | None:
    """Empirical stretch: the largest d_graph*r/d_E over samples with
    d_E >= gamma_hat*log(N)/(r*N). None when no sample qualifies."""
    cutoff = gamma_hat * math.log(N) / (r * N)
    ratios = [dg * r / de for de, dg in samples if de >= cutoff and de > 0]
    return max(ratios) if ratios else None
