"""Preset experiment sweeps with per-run output directories and quota assertions.

Each preset maps an :class:`ExperimentConfig` to one run per (size, seed).
A run writes ``<preset>_<n>_<seed>/metrics.csv`` and ``summary.json``; the
sweep writes ``<preset>_runs.csv`` and ``<preset>_summary.json`` next to them.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .formats import write_graph
from .graph import UndirectedGraph
from .metrics import (
    classify_edges,
    degree_doubling_stats,
    effective_diameter,
    giant_component,
    max_outdegree,
    old_vertex_ratio_check,
    theorem_params,
    trajectory_statistic,
)
from .percolation import DegenerateGeometryError, check_crossing, connected_components, find_crossings
from .rgg import generate_rgg, radius_for_density
from .rumour import ProtocolConfig, containment_profile, run
from .spa import SpaParams, generate

log = logging.getLogger(__name__)

PRESETS = ("diameter", "rumour", "percolation", "degree-laws")
FIXTURES = ("none", "path", "star", "cycle", "complete")


@dataclass
class ExperimentConfig:
    preset: str = "diameter"
    sizes: list = field(default_factory=lambda: [2**12, 2**13, 2**14])
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    m: int = 2
    A1: float = 0.5
    A2: float = 20.0
    p: float = 1.0
    output_dir: str = "runs"
    write_graphs: bool = False
    # diameter
    fraction: float = 0.9
    num_pairs: int = 10_000
    num_sources: int = 100
    max_diameter_factor: float = 5.0
    max_ratio_growth: float = 0.5
    # rumour
    protocol: str = "push-and-pull"
    target_fraction: float = 0.5
    min_slope: float = 0.1
    fixture: str = "none"
    fixture_size: int = 5
    fixture_max_rounds: int | None = None
    max_rounds: int = 10**6
    # percolation
    densities: list = field(default_factory=lambda: [2.0, 8.0])
    metric_mode: str = "torus"
    critical_density: float = 4.51
    density_margin: float = 1.5
    crossings: bool = True
    # degree laws
    beta: float = 0.5
    eta: float = 0.1
    R_fraction: float = 0.25
    min_deg: int = 50
    doubling_tolerance: float = 0.15
    new_long_quota: float = 0.95
    doubling_quota: float = 0.9
    ratio_check: bool = False
    trajectory: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        if not self.seeds:
            raise ValueError("seed list must not be empty")
        if self.fixture not in FIXTURES:
            raise ValueError(f"unknown fixture {self.fixture!r}")
        if self.fixture == "none" and (not self.sizes or min(self.sizes) < 1):
            raise ValueError("sizes must be a nonempty list of positive integers")
        ProtocolConfig(self.protocol)
        if self.preset in ("diameter", "rumour", "degree-laws") and self.fixture == "none":
            SpaParams(self.m, self.A1, self.A2, self.p, max(self.sizes), 0)
        if not 0 < self.target_fraction <= 1 or not 0 < self.fraction <= 1:
            raise ValueError("fractions must lie in (0, 1]")

    def spa_params(self, n: int, seed: int) -> SpaParams:
        return SpaParams(self.m, self.A1, self.A2, self.p, n, seed)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class Assertion:
    name: str
    passed: bool
    detail: str


@dataclass
class ExperimentResult:
    preset: str
    rows: list
    summary: dict
    assertions: list

    @property
    def ok(self) -> bool:
        return all(a.passed for a in self.assertions)

    def report(self) -> str:
        return "\n".join(f"{'PASS' if a.passed else 'FAIL'} {a.name}: {a.detail}" for a in self.assertions)


def _csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _quantiles(values) -> dict:
    v = np.asarray([x for x in values if x is not None], dtype=float)
    if len(v) == 0:
        return {"count": 0}
    q = np.quantile(v, [0.1, 0.5, 0.9])
    return {"count": int(len(v)), "min": float(v.min()), "q10": float(q[0]), "median": float(q[1]),
            "q90": float(q[2]), "max": float(v.max())}


def fit_power(xs, ys) -> float:
    """Slope of log y against log x by least squares."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def uniform_source(n: int, seed: int) -> int:
    return int(np.random.default_rng([seed, 0x5EED]).integers(n))


def fixture_graph(name: str, size: int) -> UndirectedGraph:
    if name == "path":
        return UndirectedGraph.from_edges(size, [(i, i + 1) for i in range(size - 1)])
    if name == "star":
        return UndirectedGraph.from_edges(size, [(0, k) for k in range(1, size)])
    if name == "cycle":
        return UndirectedGraph.cycle(size)
    if name == "complete":
        return UndirectedGraph.complete(size)
    raise ValueError(f"unknown fixture {name!r}")


# per-run bodies --------------------------------------------------------------

def _diameter_run(cfg, n, seed, run_dir):
    g = generate(cfg.spa_params(n, seed))
    if cfg.write_graphs:
        write_graph(g, run_dir / "graph.txt")
    sub, _, frac = giant_component(g)
    mode = "exact" if sub.n <= 2000 else "sampled"
    d = effective_diameter(sub, cfg.fraction, mode, cfg.num_pairs, seed, cfg.num_sources)
    log2 = math.log(n) ** 2
    return {"n": n, "seed": seed, "edges": g.num_edges, "giant_fraction": frac,
            "effective_diameter": d, "mode": mode, "log2n": log2, "ratio": d / log2}, None


def _rumour_run(cfg, n, seed, run_dir):
    if cfg.fixture != "none":
        ug, pos, L = fixture_graph(cfg.fixture, cfg.fixture_size), None, None
        source, giant_n = 0, cfg.fixture_size
        stop = None
    else:
        params = cfg.spa_params(n, seed)
        g = generate(params)
        if cfg.write_graphs:
            write_graph(g, run_dir / "graph.txt")
        sub, ids, _ = giant_component(g)
        ug, pos = sub, g.positions[ids]
        tp = theorem_params(params.a, params.m)
        L = tp.L(n)
        source = uniform_source(sub.n, seed)
        giant_n = sub.n
        stop = math.ceil(cfg.target_fraction * sub.n)
    tr = run(ug, ProtocolConfig(cfg.protocol, source, cfg.max_rounds, seed), pos, L, stop_at=stop)
    violations = 0
    if pos is not None:
        radius = containment_profile(tr, pos, source)
        cum = tr.cumulative_long()
        violations = sum(1 for T in range(len(radius)) if cum[T] == 0 and radius[T] > T * L)
    target = math.ceil(cfg.target_fraction * giant_n)
    row = {"n": n, "seed": seed, "component_size": giant_n, "source": source,
           "rounds_to_target": tr.rounds_to_reach(target), "spread_time": tr.spread_time,
           "L": L, "long_edge_transmissions": tr.long_edge_transmissions,
           "containment_violations": violations}
    return row, tr


def _percolation_run(cfg, n, seed, run_dir):
    rows = []
    for k, density in enumerate(cfg.densities):
        r = radius_for_density(n, density)
        s = generate_rgg(n, r, cfg.metric_mode, seed=seed * 1000 + k)
        if cfg.write_graphs:
            write_graph(s, run_dir / f"graph_{k}.txt")
        lab = connected_components(s)
        row = {"n": n, "seed": seed, "density": density, "r": r, "giant_fraction": lab.giant_fraction,
               "components": lab.num_components, "crossings_complete": None,
               "crossing_violations": 0}
        if cfg.crossings:
            try:
                rep = find_crossings(s, lab)
            except DegenerateGeometryError:
                rep = None
            if rep is not None:
                bad = 0
                for horiz, paths in ((True, rep.horizontal_crossings), (False, rep.vertical_crossings)):
                    for slab, path in enumerate(paths):
                        if path is not None:
                            bad += bool(check_crossing(s, rep, path, slab, horiz))
                verts = rep.crossing_vertices()
                if len(verts) and len(np.unique(lab.labels[verts])) > 1:
                    bad += 1
                row["crossings_complete"] = rep.complete
                row["crossing_violations"] = bad
        rows.append(row)
    return rows, None


def _degree_laws_run(cfg, n, seed, run_dir):
    params = cfg.spa_params(n, seed)
    g = generate(params)
    if cfg.write_graphs:
        write_graph(g, run_dir / "graph.txt")
    c = classify_edges(g, cfg.beta, cfg.eta)
    R = max(1, int(cfg.R_fraction * n))
    ds = degree_doubling_stats(g, R, cfg.min_deg)
    row = {"n": n, "seed": seed, "edges": g.num_edges, "new_long": c.new_long,
           "old_long": c.counts[("old", "long")], "doubling_vertices": len(ds.ratios),
           "doubling_mean": ds.mean, "doubling_target": ds.target,
           "doubling_rel_error": ds.relative_error, "max_outdegree": max_outdegree(g),
           "log2n": math.log(n) ** 2 if n > 1 else 0.0}
    if cfg.ratio_check:
        tp = theorem_params(params.a, params.m)
        row["ratio_violations"] = len(old_vertex_ratio_check(g, tp.tau_exp, tp.y_exp, tp.epsilon))
    if cfg.trajectory:
        row["trajectory_statistic"] = trajectory_statistic(g)
    return row, None


_RUNNERS = {"diameter": _diameter_run, "rumour": _rumour_run,
            "percolation": _percolation_run, "degree-laws": _degree_laws_run}


# assertions -----------------------------------------------------------------

def _by_size(rows, key):
    out = {}
    for r in rows:
        out.setdefault(r["n"], []).append(r[key])
    return dict(sorted(out.items()))


def _assert_diameter(cfg, rows, summary):
    res = []
    worst = max(rows, key=lambda r: r["ratio"])
    res.append(Assertion(
        "effective diameter within polylog bound",
        all(r["effective_diameter"] <= cfg.max_diameter_factor * r["log2n"] for r in rows),
        f"max effdiam/log^2 n = {worst['ratio']:.4f} (limit {cfg.max_diameter_factor})"))
    med = {n: float(np.median(v)) for n, v in _by_size(rows, "ratio").items()}
    summary["median_ratio"] = med
    if len(med) > 1:
        first = next(iter(med.values()))
        growth = max(med.values()) / first - 1 if first > 0 else 0.0
        summary["ratio_growth"] = growth
        res.append(Assertion("effdiam/log^2 n growth across sweep", growth <= cfg.max_ratio_growth,
                             f"growth {growth:.3f} (limit {cfg.max_ratio_growth})"))
    return res


def _assert_rumour(cfg, rows, summary):
    res = []
    if cfg.fixture != "none":
        bound = cfg.fixture_max_rounds
        if bound is None:
            bound = 3 * math.log2(max(cfg.fixture_size, 2)) if cfg.fixture == "complete" else cfg.fixture_size
        times = [r["spread_time"] if r["spread_time"] is not None else math.inf for r in rows]
        med = float(np.median(times))
        summary["fixture_bound"] = bound
        # the bound is typical, not sure: random choices can always stall a round
        res.append(Assertion(f"{cfg.fixture} fixture median spread time", med <= bound,
                             f"median {med:g}, max {max(times):g} (limit {bound})"))
        return res
    med = {n: float(np.median([x if x is not None else np.inf for x in v]))
           for n, v in _by_size(rows, "rounds_to_target").items()}
    summary["median_rounds_to_target"] = med
    finite = all(math.isfinite(v) for v in med.values())
    if len(med) > 1 and finite and min(med.values()) > 0:
        s = fit_power(list(med), list(med.values()))
        summary["slope"] = s
        res.append(Assertion("slow spread slope", s >= cfg.min_slope, f"slope {s:.4f} (min {cfg.min_slope})"))
    elif len(med) > 1:
        res.append(Assertion("slow spread slope", False, "a median target was never reached"))
    bad = sum(r["containment_violations"] for r in rows)
    res.append(Assertion("containment within T*L", bad == 0, f"{bad} violations"))
    return res


def _assert_percolation(cfg, rows, summary):
    res = []
    med = {}
    for r in rows:
        med.setdefault(r["density"], []).append(r["giant_fraction"])
    med = {d: float(np.median(v)) for d, v in sorted(med.items())}
    summary["median_giant_fraction"] = med
    for d, v in med.items():
        if d <= cfg.critical_density / cfg.density_margin:
            res.append(Assertion(f"subcritical density {d}", v < 0.5, f"median giant {v:.4f}"))
        elif d >= cfg.critical_density * cfg.density_margin:
            res.append(Assertion(f"supercritical density {d}", v > 0.5, f"median giant {v:.4f}"))
    bad = sum(r["crossing_violations"] for r in rows)
    res.append(Assertion("crossing soundness", bad == 0, f"{bad} violations"))
    return res


def _assert_degree_laws(cfg, rows, summary):
    res = []
    k = len(rows)
    clean = sum(r["new_long"] == 0 for r in rows)
    res.append(Assertion("no new long edges", clean >= cfg.new_long_quota * k,
                         f"{clean}/{k} runs (quota {cfg.new_long_quota:.0%})"))
    near = sum(r["doubling_rel_error"] is not None and r["doubling_rel_error"] <= cfg.doubling_tolerance
               for r in rows)
    res.append(Assertion("degree doubling near 2^(pA1)", near >= cfg.doubling_quota * k,
                         f"{near}/{k} runs within {cfg.doubling_tolerance:.0%} (quota {cfg.doubling_quota:.0%})"))
    over = sum(r["max_outdegree"] > 20 * r["log2n"] for r in rows if r["n"] > 1)
    res.append(Assertion("max outdegree below 20 log^2 n", over == 0, f"{over} runs over"))
    if cfg.ratio_check:
        ok = sum(r["ratio_violations"] == 0 for r in rows)
        res.append(Assertion("old vertex degree ratios", ok >= 0.9 * k, f"{ok}/{k} runs clean"))
    return res


_ASSERTS = {"diameter": _assert_diameter, "rumour": _assert_rumour,
            "percolation": _assert_percolation, "degree-laws": _assert_degree_laws}

_SUMMARY_KEYS = {"diameter": ["giant_fraction", "effective_diameter", "ratio"],
                 "rumour": ["rounds_to_target", "spread_time", "long_edge_transmissions"],
                 "percolation": ["giant_fraction"],
                 "degree-laws": ["new_long", "doubling_mean", "max_outdegree"]}


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run every (size, seed) of the preset, write outputs and evaluate assertions."""
    cfg.validate()
    out = Path(cfg.output_dir)
    sizes = [cfg.fixture_size] if cfg.preset == "rumour" and cfg.fixture != "none" else cfg.sizes
    rows = []
    runner = _RUNNERS[cfg.preset]
    for n in sizes:
        for seed in cfg.seeds:
            run_dir = out / f"{cfg.preset}_{n}_{seed}"
            if write:
                run_dir.mkdir(parents=True, exist_ok=True)
            log.info("%s n=%d seed=%d", cfg.preset, n, seed)
            got, trace = runner(cfg, n, seed, run_dir)
            got = got if isinstance(got, list) else [got]
            rows.extend(got)
            if write:
                (run_dir / "metrics.csv").write_text(_csv(got))
                if trace is not None:
                    (run_dir / "trace.csv").write_text(trace.to_csv())
                record = {"config": asdict(cfg), "n": n, "seed": seed, "metrics": got}
                (run_dir / "summary.json").write_text(_dump_json(record))
    summary = {"preset": cfg.preset, "config": asdict(cfg), "runs": len(rows)}
    for key in _SUMMARY_KEYS[cfg.preset]:
        summary[key] = {str(n): _quantiles(v) for n, v in _by_size(rows, key).items()}
    assertions = _ASSERTS[cfg.preset](cfg, rows, summary)
    summary["assertions"] = [asdict(a) for a in assertions]
    summary["ok"] = all(a.passed for a in assertions)
    if write:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{cfg.preset}_runs.csv").write_text(_csv(rows))
        (out / f"{cfg.preset}_summary.json").write_text(_dump_json(summary))
    return ExperimentResult(cfg.preset, rows, summary, assertions)
