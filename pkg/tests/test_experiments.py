import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from spa_rumour.experiments import ExperimentConfig, fit_power, run_experiment


def test_fit_power_recovers_exponent():
    xs = [2**k for k in range(10, 16)]
    assert fit_power(xs, [3 * x**0.25 for x in xs]) == pytest.approx(0.25)


def _cycle_cdf(n, pull, rounds):
    """Exact P(spread time <= T) on an n-cycle from vertex 0, by enumerating
    every joint neighbour choice from every informed set."""
    nb = {v: ((v - 1) % n, (v + 1) % n) for v in range(n)}
    full = frozenset(range(n))
    dist, done, cdf = {frozenset([0]): Fraction(1)}, Fraction(0), []
    for _ in range(rounds):
        nxt = {}
        for S, prob in dist.items():
            movers = [v for v in range(n) if pull or v in S]
            for picks in itertools.product((0, 1), repeat=len(movers)):
                new = set(S)
                for v, b in zip(movers, picks):
                    w = nb[v][b]
                    if v in S and w not in S:
                        new.add(w)
                    elif v not in S and w in S:
                        new.add(v)
                key = frozenset(new)
                nxt[key] = nxt.get(key, 0) + prob / 2 ** len(movers)
        done += nxt.pop(full, 0)
        dist = nxt
        cdf.append(done)
    return cdf


@pytest.mark.parametrize("protocol", ["push", "push-and-pull"])
def test_five_cycle_fixture(tmp_path, protocol):
    cfg = ExperimentConfig("rumour", fixture="cycle", fixture_size=5, seeds=list(range(2000)),
                           protocol=protocol, output_dir=str(tmp_path))
    res = run_experiment(cfg, write=False)
    assert res.ok, res.report()
    times = np.array([r["spread_time"] for r in res.rows])
    assert times.min() >= 2  # two vertices sit two hops away
    exact = float(_cycle_cdf(5, protocol != "push", 5)[4])
    assert exact == pytest.approx(0.85546875 if protocol == "push" else 0.99886322, abs=1e-8)
    se = math.sqrt(exact * (1 - exact) / len(times))
    assert abs((times <= 5).mean() - exact) <= 4 * se + 1e-3


def test_percolation_bracketing(tmp_path):
    cfg = ExperimentConfig("percolation", sizes=[5000], seeds=list(range(5)), densities=[2.0, 8.0],
                           output_dir=str(tmp_path))
    res = run_experiment(cfg)
    assert res.ok, res.report()
    med = res.summary["median_giant_fraction"]
    assert med[2.0] < 0.5 < med[8.0]
    rows = (tmp_path / "percolation_5000_0" / "metrics.csv").read_text().splitlines()
    assert len(rows) == 3


def test_diameter_table(tmp_path):
    cfg = ExperimentConfig("diameter", sizes=[1024, 2048], seeds=[0, 1], output_dir=str(tmp_path))
    res = run_experiment(cfg)
    assert res.ok, res.report()
    header = (tmp_path / "diameter_runs.csv").read_text().splitlines()[0].split(",")
    for col in ("n", "giant_fraction", "effective_diameter", "log2n"):
        assert col in header
    for r in res.rows:
        assert r["log2n"] == pytest.approx(math.log(r["n"]) ** 2)
    summary = json.loads((tmp_path / "diameter_summary.json").read_text())
    assert summary["effective_diameter"]["1024"]["count"] == 2


def test_degree_laws_preset(tmp_path):
    cfg = ExperimentConfig("degree-laws", sizes=[20_000], seeds=[0, 1], A2=1.0, min_deg=20,
                           ratio_check=True, trajectory=True, output_dir=str(tmp_path))
    res = run_experiment(cfg)
    assert {"new_long", "doubling_mean", "ratio_violations", "trajectory_statistic"} <= set(res.rows[0])
    assert res.rows[0]["doubling_target"] == pytest.approx(2**0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("nope")
    with pytest.raises(ValueError):
        ExperimentConfig("diameter", seeds=[])
    with pytest.raises(ValueError):
        ExperimentConfig("rumour", protocol="flood")
    with pytest.raises(ValueError):
        ExperimentConfig("diameter", A1=1.0)


def test_dry_run_writes_nothing(tmp_path):
    cfg = ExperimentConfig("rumour", fixture="star", fixture_size=5, seeds=[0],
                           output_dir=str(tmp_path / "out"))
    run_experiment(cfg, write=False)
    assert not (tmp_path / "out").exists()
