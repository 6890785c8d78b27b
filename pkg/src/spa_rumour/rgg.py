"""Random geometric graphs and the proximity snapshots R_t of an SPA graph."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import ball_volume_constant, pairs_within, radius_kernel
from .graph import UndirectedGraph


class MetricMode(str, Enum):
    TORUS = "torus"
    EUCLIDEAN = "euclidean-square"

    @classmethod
    def parse(cls, value) -> "MetricMode":
        if isinstance(value, cls):
            return value
        for mode in cls:
            if mode.value == str(value).lower():
                return mode
        raise ValueError(f"unknown metric mode {value!r}")


class UnsupportedDimensionError(ValueError):
    pass


@dataclass(eq=False)
class RggSnapshot:
    """Proximity graph: ``edges`` holds every pair at distance ``<= r``.

    ``vertex_ids`` maps local indices to ids of the originating graph (the
    first ``t`` SPA vertices for a snapshot, ``0..N-1`` for a standalone RGG).
    """

    t: int
    r: float
    metric_mode: MetricMode
    vertex_ids: np.ndarray
    positions: np.ndarray
    edges: np.ndarray
    seed: int | None = None

    @property
    def N(self) -> int:
        return self.t

    @property
    def M(self) -> float:
        """Expected degree scale, pi*N*r^2 in two dimensions."""
        m = self.positions.shape[1] if self.positions.ndim == 2 else 2
        return ball_volume_constant(m) * self.t * self.r**m

    def graph(self) -> UndirectedGraph:
        return UndirectedGraph.from_edges(self.t, self.edges)

    def distance(self, i: int, j: int) -> float:
        d = np.abs(self.positions[i] - self.positions[j])
        if self.metric_mode is MetricMode.TORUS:
            d = np.minimum(d, 1.0 - d)
        return float(math.sqrt(float(np.dot(d, d))))


def rgg_from_positions(positions, r: float, metric_mode="torus", seed=None) -> RggSnapshot:
    """Proximity graph on the given points."""
    pos = np.ascontiguousarray(positions, dtype=np.float64)
    if pos.ndim != 2:
        raise ValueError("positions must be an (N, m) array")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    mode = MetricMode.parse(metric_mode)
    edges = pairs_within(pos, r, torus=mode is MetricMode.TORUS)
    return RggSnapshot(len(pos), float(r), mode, np.arange(len(pos)), pos, edges, seed)


def generate_rgg(N: int, r: float, metric_mode="torus", seed: int = 0, m: int = 2) -> RggSnapshot:
    """``N`` uniform points in the unit square joined when within distance ``r``."""
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    pos = np.random.default_rng(seed).random((N, m))
    return rgg_from_positions(pos, r, metric_mode, seed)


def radius_for_density(N: int, density: float) -> float:
    """The ``r`` with pi*N*r^2 equal to ``density``."""
    return math.sqrt(density / (math.pi * N))


def snapshot_radius(A2: float, t: int) -> float:
    """r_t = sqrt(A2 / (t*pi)), evaluated exactly as the generator does."""
    return float(radius_kernel(A2 / t, ball_volume_constant(2), 2))


def snapshot(g, t: int) -> RggSnapshot:
    """R_t: the first ``t`` vertices of ``g`` joined within torus distance r_t."""
    if g.params.m != 2:
        raise UnsupportedDimensionError("snapshots are defined for m = 2 only")
    if not 1 <= t <= g.n:
        raise ValueError(f"t must lie in [1, {g.n}], got {t}")
    r = snapshot_radius(g.params.A2, t)
    pos = g.positions[:t]
    edges = pairs_within(pos, r, torus=True)
    return RggSnapshot(t, r, MetricMode.TORUS, np.arange(t), pos, edges, g.params.seed)


def hierarchy_levels(n: int) -> list[int]:
    """n, n//2, n//4, ... down to the first value ``<= log n`` (or 1)."""
    levels = [n]
    bound = math.log(n) if n > 1 else 0.0
    t = n
    while t > bound and t > 1:
        t //= 2
        levels.append(t)
    return levels


def snapshot_hierarchy(g) -> list[RggSnapshot]:
    if g.params.m != 2:
        raise UnsupportedDimensionError("snapshots are defined for m = 2 only")
    return [snapshot(g, t) for t in hierarchy_levels(g.n)]
