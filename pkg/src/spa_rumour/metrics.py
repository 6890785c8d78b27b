"""Effective diameter, old/new and long/short edge classification, degree-law
checks and the exponent bookkeeping behind the slow-spread bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import UndirectedGraph, all_pairs_distance_histogram, bfs_distances
from .percolation import ComponentLabeling, _as_graph, _sample_connected_pairs, connected_components

EXACT_LIMIT = 2000


def _quantile_from_histogram(hist: np.ndarray, fraction: float) -> int:
    total = int(hist.sum())
    if total == 0:
        return 0
    need = math.ceil(fraction * total - 1e-9 * total)
    return int(np.searchsorted(np.cumsum(hist), max(need, 1)))


def distance_histogram(g, mode: str = "exact", num_pairs: int = 10_000, seed: int = 0,
                       num_sources: int | None = None,
                       labeling: ComponentLabeling | None = None) -> np.ndarray:
    """Counts of connected pairs per hop distance.

    ``exact`` enumerates every ordered pair. ``sampled`` draws ``num_pairs``
    uniform connected pairs; with ``num_sources`` set, that many sources are
    drawn (weighted by component size) and the pairs are shared out evenly
    among them, which bounds the number of searches on large graphs.
    """
    ug = _as_graph(g)
    if mode == "exact":
        if ug.n > EXACT_LIMIT:
            raise ValueError(f"exact mode is limited to n <= {EXACT_LIMIT}, got {ug.n}")
        return all_pairs_distance_histogram(ug.indptr, ug.indices)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    labeling = labeling or connected_components(ug)
    rng = np.random.default_rng(seed)
    if num_sources is None or num_sources >= num_pairs:
        pairs = _sample_connected_pairs(labeling, num_pairs, rng)
    else:
        heads = _sample_connected_pairs(labeling, num_sources, rng)[:, 0]
        counts = np.full(num_sources, num_pairs // num_sources)
        counts[: num_pairs % num_sources] += 1
        pairs = []
        for s, c in zip(heads, counts):
            lab = labeling.labels[s]
            members = np.flatnonzero(labeling.labels == lab)
            members = members[members != s]
            pairs.append(np.column_stack([np.full(c, s), rng.choice(members, size=c)]))
        pairs = np.concatenate(pairs) if pairs else np.zeros((0, 2), np.int64)
    hist = np.zeros(ug.n + 1, np.int64)
    if len(pairs) == 0:
        return hist
    order = np.argsort(pairs[:, 0], kind="stable")
    pairs = pairs[order]
    breaks = np.flatnonzero(np.diff(pairs[:, 0])) + 1
    for chunk in np.split(pairs, breaks):
        dist = bfs_distances(ug.indptr, ug.indices, chunk[0, 0])
        np.add.at(hist, dist[chunk[:, 1]], 1)
    return hist


def effective_diameter(g, fraction: float = 0.9, mode: str = "exact", num_pairs: int = 10_000,
                       seed: int = 0, num_sources: int | None = None) -> int:
    """Smallest d such that at least ``fraction`` of connected pairs lie within
    hop distance d. Pairs in different components do not count."""
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    ug = _as_graph(g)
    if ug.n < 2:
        return 0
    hist = distance_histogram(ug, mode, num_pairs, seed, num_sources)
    return _quantile_from_histogram(hist, fraction)


def giant_component(g) -> tuple[UndirectedGraph, np.ndarray, float]:
    """Induced subgraph on the largest component, its original ids and the
    fraction of vertices it holds."""
    ug = _as_graph(g)
    lab = connected_components(ug)
    sub, ids = ug.subgraph(lab.members(lab.giant_label))
    return sub, ids, lab.giant_fraction


def _edge_lengths(g) -> np.ndarray:
    d = np.abs(g.positions[g.child] - g.positions[g.parent])
    d = np.minimum(d, 1.0 - d)
    return np.sqrt((d * d).sum(axis=1))


@dataclass
class EdgeClassification:
    tau: float
    L: float
    counts: dict = field(default_factory=dict)  # (old|new, long|short) -> count
    old_vertices: np.ndarray = None
    degree_ratio: np.ndarray = None  # deg(v, tau) / deg(v, n) per old vertex
    long_fraction: np.ndarray = None  # share of incident edges that are long

    @property
    def new_long(self) -> int:
        return self.counts[("new", "long")]

    def rows(self) -> list[dict]:
        return [{"age": a, "length": b, "count": c} for (a, b), c in sorted(self.counts.items())]


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros(len(num))
    nz = den > 0
    out[nz] = num[nz] / den[nz]
    return out


def classify_edges(g, beta: float, eta: float) -> EdgeClassification:
    """Split edges by birth (old iff born at a step ``<= n**beta``) and length
    (long iff the endpoints are more than ``n**-eta`` apart)."""
    if not 0 < beta < 1 or not 0 < eta < 1:
        raise ValueError("beta and eta must lie in (0, 1)")
    n = g.n
    tau, L = n**beta, n ** (-eta)
    old = g.step <= tau
    long = _edge_lengths(g) > L
    counts = {
        ("old", "long"): int((old & long).sum()),
        ("old", "short"): int((old & ~long).sum()),
        ("new", "long"): int((~old & long).sum()),
        ("new", "short"): int((~old & ~long).sum()),
    }
    old_vertices = np.arange(min(n, int(math.floor(tau))))
    deg_tau = g.total_degrees_at(int(math.floor(tau)))[old_vertices]
    deg_n = g.total_degrees_at(n)[old_vertices]
    incident_long = np.bincount(g.child[long], minlength=n) + np.bincount(g.parent[long], minlength=n)
    return EdgeClassification(
        tau, L, counts, old_vertices,
        _safe_ratio(deg_tau, deg_n),
        _safe_ratio(incident_long[old_vertices], deg_n),
    )


@dataclass(frozen=True)
class RatioViolation:
    vertex: int
    ratio: float
    bound: float


def old_vertex_ratio_check(g, beta: float, gamma: float, epsilon: float) -> list[RatioViolation]:
    """Old vertices whose degree ratio deg(v, tau)/deg(v, n) is not below
    ``n**epsilon * (y*log(n)/n)**a`` with ``y = n**gamma`` and ``a = p*A1``."""
    a = g.params.a
    failed = []
    if not beta < gamma:
        failed.append("gamma > beta")
    if not gamma < 1 - epsilon / a:
        failed.append("gamma < 1 - epsilon/(p*A1)")
    if not beta < (gamma - beta) * a / 2:
        failed.append("beta < (gamma - beta)*p*A1/2")
    if failed:
        raise ValueError("parameter constraints violated: " + "; ".join(failed))
    n = g.n
    y = n**gamma
    bound = n**epsilon * (y * math.log(n) / n) ** a
    tau = int(math.floor(n**beta))
    old = np.arange(min(n, tau))
    ratio = _safe_ratio(g.total_degrees_at(tau)[old], g.total_degrees_at(n)[old])
    return [RatioViolation(int(v), float(q), bound) for v, q in zip(old, ratio) if q >= bound]


@dataclass
class DoublingStats:
    R: int
    ratios: np.ndarray
    vertices: np.ndarray
    target: float

    @property
    def mean(self) -> float | None:
        return float(self.ratios.mean()) if len(self.ratios) else None

    @property
    def relative_error(self) -> float | None:
        return None if self.mean is None else abs(self.mean - self.target) / self.target


def degree_doubling_stats(g, R: int, min_deg: int) -> DoublingStats:
    """In-degree growth ratios deg-(v, 2R)/deg-(v, R) over vertices with
    deg-(v, R) >= min_deg, next to the target 2**(p*A1)."""
    if not 1 <= R <= g.n // 2:
        raise ValueError(f"R must lie in [1, n/2], got {R}")
    at_r = g.in_degrees_at(R)
    at_2r = g.in_degrees_at(2 * R)
    sel = np.flatnonzero(at_r >= max(min_deg, 1))
    return DoublingStats(R, at_2r[sel] / at_r[sel], sel, 2.0 ** g.params.a)


@dataclass(frozen=True)
class TrajectoryCheck:
    statistic: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.statistic <= self.bound


def trajectory_statistic(g) -> float:
    """max over vertices i and times t of deg-(v_i, t) / ((t/i)**a * log n).

    For each vertex the maximum over t is attained right after an in-edge
    arrives, so only edge birth steps need checking.
    """
    n, a = g.n, g.params.a
    if g.num_edges == 0 or n < 2:
        return 0.0
    order = np.lexsort((g.step, g.parent))
    parent, step = g.parent[order], g.step[order]
    starts = np.searchsorted(parent, parent, side="left")
    k = np.arange(len(parent)) - starts + 1
    birth = parent + 1
    values = k / ((step / birth) ** a * math.log(n))
    return float(values.max())


def trajectory_bound_check(g, C: float = 1.0, f_exponent: float = 0.1) -> TrajectoryCheck:
    return TrajectoryCheck(trajectory_statistic(g), C * g.n**f_exponent)


def max_outdegree(g) -> int:
    return int(g.out_degree.max()) if g.n else 0


@dataclass(frozen=True)
class TheoremParams:
    a: float
    m: int
    K: float
    alpha_max: float
    delta: float
    tau_exp: float
    y_exp: float
    L_exp: float
    T_exp: float
    epsilon: float
    epsilon_rule: str = "corrected"

    def tau(self, n):
        return n**self.tau_exp

    def y(self, n):
        return n**self.y_exp

    def L(self, n):
        return n**self.L_exp

    def T(self, n):
        return n**self.T_exp

    @property
    def conditions(self) -> dict[str, bool]:
        """Each parameter inequality, with beta = tau_exp, eta = -L_exp,
        gamma = y_exp and alpha = T_exp."""
        a, m = self.a, self.m
        beta, eta, gamma, alpha, eps = self.tau_exp, -self.L_exp, self.y_exp, self.T_exp, self.epsilon
        return {
            "eta*m < beta*(1-a)": eta * m < beta * (1 - a),
            "beta < gamma < 1-eps/a": beta < gamma < 1 - eps / a,
            "beta < (gamma-beta)*a/2": beta < (gamma - beta) * a / 2,
            "alpha+beta+eps-a+gamma*a < 0": alpha + beta + eps - a + gamma * a < 0,
            "T*L -> 0": self.T_exp + self.L_exp < 0,
        }

    @property
    def valid(self) -> bool:
        return all(self.conditions.values())

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["conditions"] = self.conditions
        out["valid"] = self.valid
        return out


def theorem_params(a: float, m: int, delta: float | None = None,
                   epsilon_rule: str = "corrected") -> TheoremParams:
    """Exponents of n used by the slow-spread bound for ``a = p*A1``.

    ``K = (3+a)m + 1 - a`` and ``alpha_max = a(1-a)/K``; ``delta`` defaults to
    ``alpha_max/2``. With ``epsilon_rule="as-published"`` epsilon is
    ``min(am/K, delta(1+a))/2``, which breaks the last inequality once
    ``a >= 1/3``; the default uses ``min(am/K, delta(1-a))/2``, which keeps
    every inequality satisfied for any admissible ``a`` and ``delta``.
    """
    if not 0 < a < 1:
        raise ValueError(f"a must lie in (0, 1), got {a}")
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    K = (3 + a) * m + 1 - a
    alpha_max = a * (1 - a) / K
    if delta is None:
        delta = alpha_max / 2
    if not 0 < delta < alpha_max:
        raise ValueError(f"delta must lie in (0, {alpha_max}), got {delta}")
    if epsilon_rule == "corrected":
        epsilon = min(a * m / K, delta * (1 - a)) / 2
    elif epsilon_rule == "as-published":
        epsilon = min(a * m / K, delta * (1 + a)) / 2
    else:
        raise ValueError(f"unknown epsilon rule {epsilon_rule!r}")
    return TheoremParams(
        a=a, m=m, K=K, alpha_max=alpha_max, delta=delta,
        tau_exp=m * a / K,
        y_exp=m * (2 + a) / K + delta,
        L_exp=-a * (1 - a) / K + delta / 2,
        T_exp=a * (1 - a) / K - delta,
        epsilon=epsilon,
        epsilon_rule=epsilon_rule,
    )
