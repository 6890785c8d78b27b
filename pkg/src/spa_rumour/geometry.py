"""Torus metric on the unit hypercube, ball volume/radius conversion and a
uniform-grid spatial index for radius queries."""

from __future__ import annotations

import itertools
import math

import numpy as np
from numba import njit


def _as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"a point must be one-dimensional, got shape {arr.shape}")
    return arr


def torus_distance(p, q) -> float:
    """Distance between two points of the unit torus ``[0,1)^m``.

    Per axis the shorter way round is taken, ``min(|d|, 1 - |d|)``, and the
    result is combined with the Euclidean norm.
    """
    a, b = _as_point(p), _as_point(q)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    d = np.abs(a - b)
    d = np.minimum(d, 1.0 - d)
    return float(math.sqrt(float(np.dot(d, d))))


def torus_distances(points: np.ndarray, center) -> np.ndarray:
    """Vectorised torus distance from ``center`` to each row of ``points``."""
    c = _as_point(center)
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != c.shape[0]:
        raise ValueError("dimension mismatch between points and center")
    d = np.abs(pts - c)
    d = np.minimum(d, 1.0 - d)
    return np.sqrt(np.einsum("ij,ij->i", d, d))


def ball_volume_constant(m: int) -> float:
    """Volume of the unit ball in ``m`` dimensions, pi^(m/2) / Gamma(m/2 + 1)."""
    if m < 1:
        raise ValueError(f"dimension must be positive, got {m}")
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


@njit(cache=True)
def radius_kernel(vol, cm, m):
    # Shared by the SPA generator and the snapshot builder so that both sides
    # of the subgraph-containment property round identically.
    return (vol / cm) ** (1.0 / m)


def ball_radius_from_volume(vol: float, m: int) -> float:
    """Radius of the ``m``-ball whose volume is ``vol``."""
    if vol < 0:
        raise ValueError(f"volume must be non-negative, got {vol}")
    return float(radius_kernel(float(vol), ball_volume_constant(m), float(m)))


@njit(cache=True, inline="always")
def torus_d2(pos, i, q):
    """Squared torus distance between row ``i`` of ``pos`` and point ``q``."""
    s = 0.0
    for k in range(pos.shape[1]):
        d = abs(pos[i, k] - q[k])
        if d > 0.5:
            d = 1.0 - d
        s += d * d
    return s


@njit(cache=True, inline="always")
def euclid_d2(pos, i, q):
    s = 0.0
    for k in range(pos.shape[1]):
        d = pos[i, k] - q[k]
        s += d * d
    return s


class SpatialIndex:
    """Uniform grid over the unit torus with cells stored in CSR layout.

    ``cell_size`` is the requested width; the grid uses ``floor(1/cell_size)``
    cells per axis, so the realised width ``1/cells_per_axis`` is never
    smaller than requested.
    """

    def __init__(self, points: np.ndarray, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell_size must be positive")
        self.points = np.ascontiguousarray(points, dtype=np.float64)
        if self.points.ndim != 2:
            raise ValueError("points must be an (n, m) array")
        self.m = self.points.shape[1]
        self.cells_per_axis = max(1, int(math.floor(1.0 / cell_size)))
        self.cell_size = 1.0 / self.cells_per_axis
        g = self.cells_per_axis
        coords = np.minimum((self.points * g).astype(np.int64), g - 1)
        self.cell_coords = coords
        weights = g ** np.arange(self.m, dtype=np.int64)
        cell_ids = coords @ weights if len(coords) else np.zeros(0, np.int64)
        self.order = np.argsort(cell_ids, kind="stable")
        self.starts = np.searchsorted(cell_ids[self.order], np.arange(g**self.m + 1))
        self._weights = weights

    @property
    def brute_force(self) -> bool:
        return self.cells_per_axis < 3

    def cell_members(self, cell_id: int) -> np.ndarray:
        return self.order[self.starts[cell_id] : self.starts[cell_id + 1]]

    def candidates(self, center: np.ndarray, radius: float) -> np.ndarray:
        g = self.cells_per_axis
        reach = int(math.ceil(radius * g))
        if self.brute_force or 2 * reach + 1 >= g:
            return np.arange(len(self.points))
        base = np.minimum((center * g).astype(np.int64), g - 1)
        ids = []
        for off in itertools.product(range(-reach, reach + 1), repeat=self.m):
            cell = (base + np.asarray(off)) % g
            ids.append(self.cell_members(int(cell @ self._weights)))
        return np.concatenate(ids) if ids else np.zeros(0, np.int64)


def query_ball(index: SpatialIndex, center, radius: float) -> set[int]:
    """Ids of all indexed points within torus distance ``radius`` of ``center``."""
    c = _as_point(center)
    if c.shape[0] != index.m:
        raise ValueError("dimension mismatch between index and center")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    cand = index.candidates(c, radius)
    if len(cand) == 0:
        return set()
    d = torus_distances(index.points[cand], c)
    return set(int(i) for i in cand[d <= radius])


@njit(cache=True)
def _pairs_brute(pos, r2, torus):
    n = pos.shape[0]
    cap = 1024
    out = np.empty((cap, 2), np.int64)
    k = 0
    for i in range(n):
        q = pos[i]
        for j in range(i + 1, n):
            d2 = torus_d2(pos, j, q) if torus else euclid_d2(pos, j, q)
            if d2 <= r2:
                if k == cap:
                    cap *= 2
                    grown = np.empty((cap, 2), np.int64)
                    grown[:k] = out[:k]
                    out = grown
                out[k, 0] = i
                out[k, 1] = j
                k += 1
    return out[:k]


@njit(cache=True)
def _pairs_grid(pos, r2, g, torus):
    n, m = pos.shape
    cell = np.empty(n, np.int64)
    stride = np.empty(m, np.int64)
    s = 1
    for k in range(m):
        stride[k] = s
        s *= g
    ncell = s
    coords = np.empty((n, m), np.int64)
    for i in range(n):
        c = 0
        for k in range(m):
            x = int(pos[i, k] * g)
            if x >= g:
                x = g - 1
            coords[i, k] = x
            c += x * stride[k]
        cell[i] = c
    counts = np.zeros(ncell + 1, np.int64)
    for i in range(n):
        counts[cell[i] + 1] += 1
    for c in range(ncell):
        counts[c + 1] += counts[c]
    fill = counts[:-1].copy()
    members = np.empty(n, np.int64)
    for i in range(n):
        members[fill[cell[i]]] = i
        fill[cell[i]] += 1

    n_off = 3**m
    cap = 1024
    out = np.empty((cap, 2), np.int64)
    k = 0
    for i in range(n):
        q = pos[i]
        for o in range(n_off):
            rem = o
            c = 0
            valid = True
            for a in range(m):
                x = coords[i, a] + (rem % 3) - 1
                rem //= 3
                if x < 0 or x >= g:
                    if not torus:
                        valid = False
                        break
                    x %= g
                c += x * stride[a]
            if not valid:
                continue
            for idx in range(counts[c], counts[c + 1]):
                j = members[idx]
                if j <= i:
                    continue
                d2 = torus_d2(pos, j, q) if torus else euclid_d2(pos, j, q)
                if d2 <= r2:
                    if k == cap:
                        cap *= 2
                        grown = np.empty((cap, 2), np.int64)
                        grown[:k] = out[:k]
                        out = grown
                    out[k, 0] = i
                    out[k, 1] = j
                    k += 1
    return out[:k]


def pairs_within(points: np.ndarray, radius: float, torus: bool = True) -> np.ndarray:
    """All index pairs ``(i, j)``, ``i < j``, at distance ``<= radius``.

    Rows are sorted lexicographically. ``torus=False`` uses the plain
    Euclidean distance inside the unit cube.
    """
    pos = np.ascontiguousarray(points, dtype=np.float64)
    if len(pos) < 2:
        return np.zeros((0, 2), np.int64)
    r2 = float(radius) * float(radius)
    g = int(math.floor(1.0 / radius)) if radius > 0 else 1 << 20
    # Keep the cell table from outgrowing the point set.
    while g >= 3 and g ** pos.shape[1] > 8 * len(pos) + 64:
        g //= 2
    if g < 3:
        pairs = _pairs_brute(pos, r2, torus)
    else:
        pairs = _pairs_grid(pos, r2, g, torus)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]
