"""Spatial Preferred Attachment graph generation.

Vertex ids are 0-based and equal to birth order: vertex ``v`` is born at step
``t = v + 1``. Every edge is stored as ``(child, parent, step)`` where the
child is the vertex born at ``step`` and the parent is strictly older.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numba import njit

from ._rng import keyed_uniform, seed_u64, stream_key
from .geometry import ball_volume_constant, radius_kernel, torus_d2


@dataclass(frozen=True)
class SpaParams:
    m: int = 2
    A1: float = 0.5
    A2: float = 20.0
    p: float = 1.0
    n: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if not 0 <= self.A1 < 1:
            raise ValueError(f"A1 must lie in [0, 1), got {self.A1}")
        if not self.A2 > 0:
            raise ValueError(f"A2 must be positive, got {self.A2}")
        if not 0 < self.p <= 1:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")

    @property
    def a(self) -> float:
        """The product p*A1 that drives degree growth."""
        return self.p * self.A1


def influence_volume(indeg: int, t: int, params: SpaParams) -> float:
    """Volume of the sphere of influence, ``min(1, (A1*indeg + A2)/t)``."""
    if t < 1:
        raise ValueError(f"t must be at least 1, got {t}")
    return min(1.0, (params.A1 * indeg + params.A2) / t)


@dataclass(eq=False)
class SpaGraph:
    params: SpaParams
    positions: np.ndarray  # (n, m)
    child: np.ndarray
    parent: np.ndarray
    step: np.ndarray
    _in_ptr: np.ndarray = field(init=False, repr=False)
    _in_steps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n
        order = np.lexsort((self.step, self.parent))
        self._in_steps = self.step[order]
        self._in_ptr = np.zeros(n + 1, np.int64)
        np.cumsum(np.bincount(self.parent, minlength=n), out=self._in_ptr[1:])

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def num_edges(self) -> int:
        return len(self.child)

    @property
    def edges(self) -> np.ndarray:
        """``(E, 3)`` array of ``(child, parent, step)`` rows."""
        return np.column_stack([self.child, self.parent, self.step])

    def birth(self, v: int) -> int:
        return v + 1

    def in_degree_log(self, v: int) -> np.ndarray:
        """Sorted steps at which ``v`` gained an in-edge."""
        return self._in_steps[self._in_ptr[v] : self._in_ptr[v + 1]]

    def in_degree(self, v: int, t: int) -> int:
        """In-degree of ``v`` in G_t, i.e. counting edges born at steps ``<= t``."""
        return int(np.searchsorted(self.in_degree_log(v), t, side="right"))

    def in_degrees_at(self, t: int) -> np.ndarray:
        """In-degree of every vertex in G_t (zero for vertices not yet born)."""
        return np.bincount(self.parent[self.step <= t], minlength=self.n)

    @cached_property
    def out_degree(self) -> np.ndarray:
        return np.bincount(self.child, minlength=self.n)

    def total_degrees_at(self, t: int) -> np.ndarray:
        """Total degree in G_t; out-edges of a vertex all appear at its birth."""
        born = np.arange(self.n) < t
        return self.in_degrees_at(t) + np.where(born, self.out_degree, 0)

    def undirected(self):
        from .graph import UndirectedGraph

        return UndirectedGraph.from_edges(self.n, np.column_stack([self.child, self.parent]))

    def prefix(self, t: int) -> "SpaGraph":
        """The graph G_t on the first ``t`` vertices."""
        keep = self.step <= t
        return SpaGraph(
            self.params,
            self.positions[:t],
            self.child[keep],
            self.parent[keep],
            self.step[keep],
        )


def _level_bounds(params: SpaParams) -> int:
    """Finest grid level worth maintaining for this run."""
    m, n = params.m, params.n
    r_min = (params.A2 / n / ball_volume_constant(m)) ** (1.0 / m)
    level = int(math.floor(-math.log2(r_min))) if r_min < 1 else 0
    while level > 0 and 2 ** (level * m) > 4 * n + 16:
        level -= 1
    return max(level, 0)


@njit(cache=True, inline="always")
def _level_for(vol, cm, m, max_level):
    if vol > 1.0:
        return 0
    r = radius_kernel(vol, cm, m)
    if r <= 0.0:
        return max_level
    lev = int(np.floor(-np.log2(r)))
    if lev > max_level:
        lev = max_level
    while lev > 0 and 2.0 ** (-lev) < r:
        lev -= 1
    if lev < 0:
        lev = 0
    return lev


@njit(cache=True, inline="always")
def _cell_of(pos, v, lev, m, offs):
    cpa = 1 << lev
    c = 0
    s = 1
    for k in range(m):
        x = int(pos[v, k] * cpa)
        if x >= cpa:
            x = cpa - 1
        c += x * s
        s *= cpa
    return offs[lev] + c


@njit(cache=True, inline="always")
def _unlink(v, head, nxt, prv, cell):
    if prv[v] >= 0:
        nxt[prv[v]] = nxt[v]
    else:
        head[cell[v]] = nxt[v]
    if nxt[v] >= 0:
        prv[nxt[v]] = prv[v]


@njit(cache=True, inline="always")
def _link(v, c, head, nxt, prv, cell):
    cell[v] = c
    prv[v] = -1
    nxt[v] = head[c]
    if head[c] >= 0:
        prv[head[c]] = v
    head[c] = v


@njit(cache=True)
def _generate_kernel(n, m, A1, A2, p, seed, cm, max_level):
    pos = np.empty((n, m))
    indeg = np.zeros(n, np.int64)

    offs = np.empty(max_level + 2, np.int64)
    offs[0] = 0
    for lev in range(max_level + 1):
        offs[lev + 1] = offs[lev] + (1 << (lev * m))
    head = np.full(offs[max_level + 1], -1, np.int64)
    nxt = np.full(n, -1, np.int64)
    prv = np.full(n, -1, np.int64)
    level = np.full(n, -1, np.int64)
    cell = np.full(n, -1, np.int64)

    cap = 1024
    e_child = np.empty(cap, np.int64)
    e_parent = np.empty(cap, np.int64)
    ne = 0

    touched = np.empty(n, np.int64)
    q = np.empty(m)
    base = np.empty(m, np.int64)
    n_off = 3**m
    last_rebuild = 1

    for t in range(1, n + 1):
        v = t - 1
        key = stream_key(seed, t)
        for k in range(m):
            q[k] = keyed_uniform(key, k)
            pos[v, k] = q[k]

        nt = 0
        for lev in range(max_level + 1):
            cpa = 1 << lev
            full_scan = cpa < 3
            if not full_scan:
                for k in range(m):
                    x = int(q[k] * cpa)
                    if x >= cpa:
                        x = cpa - 1
                    base[k] = x
            n_cells = (1 << (lev * m)) if full_scan else n_off
            for o in range(n_cells):
                if full_scan:
                    c = offs[lev] + o
                else:
                    rem = o
                    c = 0
                    s = 1
                    for k in range(m):
                        x = (base[k] + (rem % 3) - 1) % cpa
                        rem //= 3
                        c += x * s
                        s *= cpa
                    c += offs[lev]
                u = head[c]
                while u >= 0:
                    vol = (A1 * indeg[u] + A2) / t
                    if vol > 1.0:
                        inside = True
                    else:
                        r = radius_kernel(vol, cm, m)
                        inside = torus_d2(pos, u, q) <= r * r
                    if inside and (p >= 1.0 or keyed_uniform(key, m + u) < p):
                        if ne == cap:
                            cap *= 2
                            g1 = np.empty(cap, np.int64)
                            g2 = np.empty(cap, np.int64)
                            g1[:ne] = e_child[:ne]
                            g2[:ne] = e_parent[:ne]
                            e_child = g1
                            e_parent = g2
                        e_child[ne] = v
                        e_parent[ne] = u
                        ne += 1
                        touched[nt] = u
                        nt += 1
                    u = nxt[u]

        # Degrees change only after the whole step has been scanned.
        for i in range(nt):
            u = touched[i]
            indeg[u] += 1
            lev = _level_for((A1 * indeg[u] + A2) / (t + 1), cm, m, max_level)
            if lev < level[u]:
                _unlink(u, head, nxt, prv, cell)
                level[u] = lev
                _link(u, _cell_of(pos, u, lev, m, offs), head, nxt, prv, cell)

        lev = _level_for(A2 / (t + 1), cm, m, max_level)
        level[v] = lev
        _link(v, _cell_of(pos, v, lev, m, offs), head, nxt, prv, cell)

        # Radii shrink with time; re-level everyone once t has doubled.
        if t + 1 >= 2 * last_rebuild:
            last_rebuild = t + 1
            head[:] = -1
            for u in range(t):
                lev = _level_for((A1 * indeg[u] + A2) / (t + 1), cm, m, max_level)
                level[u] = lev
                _link(u, _cell_of(pos, u, lev, m, offs), head, nxt, prv, cell)

    return pos, e_child[:ne].copy(), e_parent[:ne].copy()


def generate(params: SpaParams) -> SpaGraph:
    """Run the SPA process for ``params.n`` steps.

    At step ``t`` the new vertex is placed uniformly on the torus and every
    existing vertex ``u`` whose sphere of influence (evaluated with the
    in-degree of ``u`` before this step) contains it receives a link with
    probability ``p``. Draws are keyed by ``(seed, step, counter)``: counters
    ``0..m-1`` give the position, counter ``m + u`` the coin for parent ``u``.
    """
    cm = ball_volume_constant(params.m)
    max_level = _level_bounds(params)
    pos, child, parent = _generate_kernel(
        params.n,
        params.m,
        float(params.A1),
        float(params.A2),
        float(params.p),
        seed_u64(params.seed),
        cm,
        max_level,
    )
    order = np.lexsort((parent, child))
    child, parent = child[order], parent[order]
    return SpaGraph(params, pos, child, parent, child + 1)
