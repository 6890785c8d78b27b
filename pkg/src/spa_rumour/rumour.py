"""Synchronous push and push&pull rumour spreading with per-round tracing."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numba import njit

from ._rng import keyed_uniform, seed_u64, stream_key
from .graph import UndirectedGraph, bfs_distances

PUSH, PULL = 0, 1


class Protocol(str, Enum):
    PUSH = "push"
    PUSH_PULL = "push-and-pull"

    @classmethod
    def parse(cls, value) -> "Protocol":
        if isinstance(value, cls):
            return value
        aliases = {"push": cls.PUSH, "push-and-pull": cls.PUSH_PULL, "push-pull": cls.PUSH_PULL,
                   "pushpull": cls.PUSH_PULL, "push&pull": cls.PUSH_PULL}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown protocol {value!r}") from None


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: Protocol = Protocol.PUSH_PULL
    source: int = 0
    max_rounds: int = 10**6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "protocol", Protocol.parse(self.protocol))
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be positive")


@dataclass
class RoundRecord:
    """Everything that happened in one round. Transmissions are the contacts
    that reached a vertex uninformed at the start of the round; a vertex hit
    several times in one round appears once in ``new``."""

    new: np.ndarray
    sender: np.ndarray
    receiver: np.ndarray
    via: np.ndarray  # PUSH or PULL
    long_count: int | None = None


@dataclass
class RumourTrace:
    source: int
    component_size: int
    rounds: list[RoundRecord] = field(default_factory=list)
    spread_time: int | None = None
    informed_count_per_round: list[int] = field(default_factory=list)
    informed_round: np.ndarray | None = None

    @property
    def long_edge_transmissions(self) -> int | None:
        """Total transmissions over edges longer than L, or None when edge
        lengths were not measured."""
        if any(r.long_count is None for r in self.rounds):
            return None
        return sum(r.long_count for r in self.rounds)

    def cumulative_long(self) -> np.ndarray | None:
        if any(r.long_count is None for r in self.rounds):
            return None
        return np.concatenate([[0], np.cumsum([r.long_count for r in self.rounds])]).astype(np.int64)

    def informed(self, after_round: int | None = None) -> np.ndarray:
        """Ids informed at the end of ``after_round`` (default: the last round)."""
        k = len(self.rounds) if after_round is None else after_round
        return np.flatnonzero((self.informed_round >= 0) & (self.informed_round <= k))

    def rounds_to_reach(self, count: int) -> int | None:
        for k, c in enumerate(self.informed_count_per_round):
            if c >= count:
                return k
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "informed_count", "new_count", "long_edge_transmissions"])
        for k, rec in enumerate(self.rounds, start=1):
            long = "" if rec.long_count is None else rec.long_count
            w.writerow([k, self.informed_count_per_round[k], len(rec.new), long])
        return buf.getvalue()

    def event_log(self, positions: np.ndarray | None = None) -> str:
        from .geometry import torus_distances

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "from", "to", "via", "edge_length"])
        for k, rec in enumerate(self.rounds, start=1):
            if positions is not None and len(rec.sender):
                d = np.abs(positions[rec.sender] - positions[rec.receiver])
                d = np.minimum(d, 1.0 - d)
                lengths = np.sqrt((d * d).sum(axis=1))
            else:
                lengths = [None] * len(rec.sender)
            for s, r, v, ell in zip(rec.sender, rec.receiver, rec.via, lengths):
                w.writerow([k, int(s), int(r), "push" if v == PUSH else "pull",
                            "" if ell is None else format(float(ell), ".17g")])
        return buf.getvalue()


@njit(cache=True)
def _play_round(indptr, indices, informed_round, k, seed, pull, snd, rcv, via):
    """One synchronous round. Writes transmissions into the buffers and
    returns their number; marks receivers with ``k`` afterwards."""
    n = len(indptr) - 1
    key = stream_key(seed, k)
    ne = 0
    for v in range(n):
        deg = indptr[v + 1] - indptr[v]
        if deg == 0:
            continue
        s = informed_round[v]
        if s >= 0:
            w = indices[indptr[v] + int(keyed_uniform(key, v) * deg)]
            if informed_round[w] < 0:
                snd[ne] = v
                rcv[ne] = w
                via[ne] = 0
                ne += 1
        elif pull:
            w = indices[indptr[v] + int(keyed_uniform(key, v) * deg)]
            if informed_round[w] >= 0:
                snd[ne] = w
                rcv[ne] = v
                via[ne] = 1
                ne += 1
    for i in range(ne):
        informed_round[rcv[i]] = k
    return ne


def run(
    g: UndirectedGraph,
    cfg: ProtocolConfig,
    positions: np.ndarray | None = None,
    L: float | None = None,
    stop_at: int | None = None,
) -> RumourTrace:
    """Spread a rumour from ``cfg.source`` until its component is informed.

    Vertices informed in round ``k`` act from round ``k + 1``; pull checks use
    the informed set as it was at the start of the round. Neighbour choices
    are keyed by ``(seed, round, vertex)``. When ``stop_at`` is given the run
    also ends as soon as that many vertices know the rumour.
    """
    if not 0 <= cfg.source < g.n:
        raise ValueError(f"unknown source vertex {cfg.source}")
    measure = positions is not None and L is not None
    comp = int((bfs_distances(g.indptr, g.indices, cfg.source) >= 0).sum())
    informed_round = np.full(g.n, -1, np.int64)
    informed_round[cfg.source] = 0
    trace = RumourTrace(cfg.source, comp, informed_count_per_round=[1])
    seed = seed_u64(cfg.seed)
    pull = cfg.protocol is Protocol.PUSH_PULL
    snd = np.empty(g.n, np.int64)
    rcv = np.empty(g.n, np.int64)
    via = np.empty(g.n, np.int8)
    count = 1
    if comp == 1:
        trace.spread_time = 0
    k = 0
    while count < comp and k < cfg.max_rounds:
        if stop_at is not None and count >= stop_at:
            break
        k += 1
        ne = _play_round(g.indptr, g.indices, informed_round, k, seed, pull, snd, rcv, via)
        rec = RoundRecord(
            new=np.flatnonzero(informed_round == k) if ne else np.zeros(0, np.int64),
            sender=snd[:ne].copy(),
            receiver=rcv[:ne].copy(),
            via=via[:ne].copy(),
        )
        if measure:
            d = np.abs(positions[rec.sender] - positions[rec.receiver])
            d = np.minimum(d, 1.0 - d)
            rec.long_count = int(((d * d).sum(axis=1) > L * L).sum())
        count += len(rec.new)
        trace.rounds.append(rec)
        trace.informed_count_per_round.append(count)
        if count == comp:
            trace.spread_time = k
    trace.informed_round = informed_round
    return trace


def containment_profile(trace: RumourTrace, positions: np.ndarray, source: int) -> np.ndarray:
    """Largest torus distance from the source among informed vertices, after
    each round (entry 0 is the initial state)."""
    pos = np.asarray(positions, dtype=np.float64)
    radius = np.zeros(len(trace.rounds) + 1)
    cur = 0.0
    for k, rec in enumerate(trace.rounds, start=1):
        if len(rec.new):
            d = np.abs(pos[rec.new] - pos[source])
            d = np.minimum(d, 1.0 - d)
            cur = max(cur, float(np.sqrt((d * d).sum(axis=1)).max()))
        radius[k] = cur
    return radius


def containment_radius(trace: RumourTrace, positions: np.ndarray, source: int) -> float:
    """Largest torus distance between the source and any informed vertex."""
    return float(containment_profile(trace, positions, source)[-1])
