import math

import numpy as np
import pytest

from spa_rumour._rng import seed_u64, uniform
from spa_rumour.formats import dump_spa
from spa_rumour.geometry import ball_radius_from_volume, torus_distance
from spa_rumour.spa import SpaGraph, SpaParams, generate, influence_volume


def replay(params: SpaParams, positions: np.ndarray):
    """Plain re-simulation of the SPA rule on fixed positions."""
    seed = seed_u64(params.seed)
    indeg = [0] * params.n
    edges = []
    for t in range(1, params.n + 1):
        v = t - 1
        new = []
        for u in range(v):
            raw = (params.A1 * indeg[u] + params.A2) / t
            if raw > 1:
                inside = True
            else:
                r = ball_radius_from_volume(raw, params.m)
                inside = torus_distance(positions[u], positions[v]) <= r
            if inside and (params.p >= 1 or uniform(seed, t, params.m + u) < params.p):
                new.append(u)
        for u in new:
            indeg[u] += 1
            edges.append((v, u, t))
    return edges


def test_influence_volume_examples():
    assert influence_volume(0, 1, SpaParams(A1=0.5, A2=2)) == 1
    assert influence_volume(4, 30, SpaParams(A1=0.5, A2=1)) == pytest.approx(0.1)
    assert influence_volume(0, 1000, SpaParams(A1=0.9, A2=1)) == pytest.approx(0.001)
    with pytest.raises(ValueError):
        influence_volume(0, 0, SpaParams())


@pytest.mark.parametrize("kwargs", [dict(A1=1.0), dict(A1=-0.1), dict(A2=0), dict(p=0), dict(p=1.5), dict(n=0), dict(m=0)])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        SpaParams(**kwargs)


def test_single_vertex():
    g = generate(SpaParams(n=1, seed=9))
    assert g.n == 1 and g.num_edges == 0
    assert g.positions.shape == (1, 2)


@pytest.mark.parametrize(
    "params",
    [
        SpaParams(m=2, A1=0.5, A2=20, p=1, n=400, seed=1),
        SpaParams(m=2, A1=0.9, A2=1, p=1, n=400, seed=2),
        SpaParams(m=2, A1=0.3, A2=5, p=0.4, n=400, seed=3),
        SpaParams(m=1, A1=0.6, A2=3, p=0.7, n=400, seed=4),
        SpaParams(m=3, A1=0.5, A2=8, p=1, n=300, seed=5),
        SpaParams(m=2, A1=0.0, A2=2, p=1, n=300, seed=-17),
    ],
)
def test_generation_matches_plain_replay(params):
    g = generate(params)
    expect = replay(params, g.positions)
    assert [tuple(e) for e in g.edges.tolist()] == expect


def test_positions_come_from_step_streams():
    p = SpaParams(n=50, seed=123)
    g = generate(p)
    for v in (0, 17, 49):
        assert g.positions[v].tolist() == [uniform(seed_u64(123), v + 1, k) for k in range(2)]
    assert np.all((g.positions >= 0) & (g.positions < 1))


def test_edge_count_with_constant_spheres():
    # With A1 = 0 and A2 = 1 every earlier vertex is hit with probability
    # exactly 1/t at step t, so E[edges] = p * sum_{t=2..n} (t-1)/t.
    n, p = 10_000, 0.5
    expected = p * sum((t - 1) / t for t in range(2, n + 1))
    assert abs(expected - 4999.5) / 4999.5 < 0.01
    hits = 0
    for seed in range(100):
        g = generate(SpaParams(m=2, A1=0.0, A2=1.0, p=p, n=n, seed=seed))
        hits += abs(g.num_edges - 4999.5) <= 0.1 * 4999.5
    assert hits >= 95


def test_determinism():
    p = SpaParams(n=3000, A1=0.5, A2=10, p=0.8, seed=77)
    assert dump_spa(generate(p)) == dump_spa(generate(p))
    other = generate(SpaParams(n=3000, A1=0.5, A2=10, p=0.8, seed=78))
    assert dump_spa(other) != dump_spa(generate(p))


@pytest.fixture(scope="module")
def medium():
    return generate(SpaParams(m=2, A1=0.6, A2=6, p=1, n=4000, seed=11))


def test_edges_respect_spheres_of_influence(medium):
    g = medium
    for c, u, t in g.edges[::7]:
        assert c == t - 1 and u < c
        raw = (g.params.A1 * g.in_degree(u, t - 1) + g.params.A2) / t
        if raw <= 1:
            r = ball_radius_from_volume(raw, 2)
            assert torus_distance(g.positions[c], g.positions[u]) <= r


def test_no_self_loops_or_multi_edges(medium):
    e = medium.edges
    assert np.all(e[:, 0] != e[:, 1])
    assert len({(c, u) for c, u, _ in e.tolist()}) == len(e)


def test_degree_bookkeeping(medium):
    g = medium
    assert g.in_degrees_at(g.n).sum() == g.num_edges == g.out_degree.sum()
    for v in (0, 3, 100, 2500):
        log = g.in_degree_log(v)
        assert np.all(np.diff(log) >= 0)
        assert g.in_degree(v, v + 1) == 0
        traj = [g.in_degree(v, t) for t in range(v + 1, g.n + 1, 97)]
        assert traj == sorted(traj)


def test_close_pairs_are_linked_when_p_is_one(medium):
    g = medium
    edges = {(c, u) for c, u, _ in g.edges.tolist()}
    pos = g.positions
    rng = np.random.default_rng(0)
    for j in rng.integers(1, g.n, 300):
        d = np.abs(pos[:j] - pos[j])
        d = np.minimum(d, 1 - d)
        dist = np.sqrt((d * d).sum(axis=1))
        for i in np.flatnonzero(dist <= math.sqrt(g.params.A2 / ((j + 1) * math.pi))):
            assert (j, i) in edges


def test_prefix_graph(medium):
    h = medium.prefix(1000)
    assert h.n == 1000
    assert np.all(h.step <= 1000)
    assert h.num_edges == int((medium.step <= 1000).sum())


def test_in_degree_log_reconstruction(medium):
    g = medium
    for t in (10, 500, 4000):
        direct = np.bincount(g.parent[g.step <= t], minlength=g.n)
        assert all(direct[v] == g.in_degree(v, t) for v in range(0, g.n, 37))
