import math

import networkx as nx
import numpy as np
import pytest

from spa_rumour.graph import UndirectedGraph
from spa_rumour.percolation import (
    DegenerateGeometryError,
    check_crossing,
    connected_components,
    distance_stretch,
    find_crossings,
    slab_layout,
    stretch_constant,
    subsquare_occupancy,
)
from spa_rumour.rgg import generate_rgg, radius_for_density, rgg_from_positions
from spa_rumour.spa import SpaParams, generate


def test_components_of_empty_graph():
    lab = connected_components(UndirectedGraph.from_edges(5, []))
    assert lab.num_components == 5
    assert lab.giant_fraction == pytest.approx(0.2)


def test_components_of_cycle():
    lab = connected_components(UndirectedGraph.cycle(5))
    assert lab.num_components == 1 and lab.giant_fraction == 1


@pytest.mark.parametrize("seed", range(5))
def test_components_match_networkx(seed):
    rng = np.random.default_rng(seed)
    n = 300
    edges = rng.integers(0, n, size=(200, 2))
    lab = connected_components(UndirectedGraph.from_edges(n, edges))
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges.tolist())
    comps = sorted(sorted(c) for c in nx.connected_components(G))
    ours = sorted(sorted(lab.members(k).tolist()) for k in range(lab.num_components))
    assert comps == ours
    # labels follow the smallest member
    firsts = [lab.members(k).min() for k in range(lab.num_components)]
    assert firsts == sorted(firsts)


def test_components_accept_spa_graphs():
    g = generate(SpaParams(n=500, A2=3, seed=2))
    assert connected_components(g).n == 500


def test_subcritical_rgg_has_no_giant():
    N = 20_000
    r = radius_for_density(N, 2.0)
    small = sum(connected_components(generate_rgg(N, r, seed=s)).giant_fraction < 0.5 for s in range(20))
    assert small >= 18


def test_occupancy_examples():
    empty = rgg_from_positions(np.zeros((0, 2)), 0.5)
    assert not subsquare_occupancy(empty).occupied.any()
    one = rgg_from_positions([[0.5, 0.5]], 0.5)
    grid = subsquare_occupancy(one)
    assert grid.cells_per_axis == 10
    assert np.argwhere(grid.occupied).tolist() == [[5, 5]]
    pts = np.random.default_rng(1).random((300, 2))
    grid = subsquare_occupancy(rgg_from_positions(pts, 0.05))
    assert grid.occupied.sum() <= min(300, grid.cells_per_axis**2)
    assert grid.first_vertex[grid.occupied].min() == 0


def test_occupancy_keeps_lowest_index():
    grid = subsquare_occupancy(rgg_from_positions([[0.51, 0.51], [0.52, 0.52], [0.55, 0.53]], 0.5))
    assert grid.first_vertex[5, 5] == 0


def test_row_fixture_crosses():
    r = 0.25
    W, ns = slab_layout(20, r)
    assert ns == 1
    pts = [[k * r / 5 + r / 10, 0.5] for k in range(math.ceil(5 / r))]
    s = rgg_from_positions(pts, r)
    rep = find_crossings(s)
    assert rep.horizontal_crossings[0] is not None
    assert rep.horizontal_crossings[0].tolist() == list(range(20))
    assert rep.vertical_crossings[0] is None
    assert rep.spanning_component_label is None


def test_no_crossing_when_right_side_is_empty():
    pts = np.random.default_rng(2).random((2000, 2)) * [0.4, 1.0]
    rep = find_crossings(rgg_from_positions(pts, 0.05))
    assert all(c is None for c in rep.horizontal_crossings)


def test_degenerate_radius():
    pts = np.random.default_rng(3).random((10, 2))
    with pytest.raises(DegenerateGeometryError):
        find_crossings(rgg_from_positions(pts, 1.5))


def _brute_crossing_exists(occ, lo, hi):
    g = occ.shape[0]
    G = nx.Graph()
    cells = [(i, j) for i in range(g) for j in range(lo, hi) if occ[i, j]]
    G.add_nodes_from(cells)
    for i, j in cells:
        for ni, nj in ((i + 1, j), (i, j + 1)):
            if (ni, nj) in G:
                G.add_edge((i, j), (ni, nj))
    starts = [c for c in cells if c[0] == 0]
    ends = {c for c in cells if c[0] == g - 1}
    for comp in nx.connected_components(G):
        if any(c in comp for c in starts) and ends & comp:
            return True
    return False


@pytest.mark.parametrize("seed", range(40))
def test_crossing_search_matches_exhaustive_search(seed):
    rng = np.random.default_rng(seed)
    r = rng.uniform(1 / 6, 0.5)
    N = int(rng.integers(5, 400))
    s = rgg_from_positions(rng.random((N, 2)), r)
    rep = find_crossings(s)
    assert rep.cells_per_axis <= 30
    occ = subsquare_occupancy(s, rep.cells_per_axis).occupied
    per = rep.cells_per_axis // rep.num_slabs
    for k in range(rep.num_slabs):
        lo, hi = k * per, (k + 1) * per
        assert (rep.horizontal_crossings[k] is not None) == _brute_crossing_exists(occ, lo, hi)
        assert (rep.vertical_crossings[k] is not None) == _brute_crossing_exists(occ.T, lo, hi)


def test_several_slabs_are_laid_out():
    W, ns = slab_layout(10, 1 / 6)
    assert ns == math.floor(1 / W) >= 2


@pytest.mark.parametrize("seed", range(15))
def test_reported_crossings_are_sound(seed):
    rng = np.random.default_rng(100 + seed)
    N = int(rng.integers(500, 5000))
    s = generate_rgg(N, radius_for_density(N, 10), seed=seed)
    lab = connected_components(s)
    rep = find_crossings(s, lab)
    for horizontal, paths in ((True, rep.horizontal_crossings), (False, rep.vertical_crossings)):
        for k, path in enumerate(paths):
            if path is not None:
                assert check_crossing(s, rep, path, k, horizontal) == []
                assert np.all(np.sqrt(((s.positions[path[1:]] - s.positions[path[:-1]]) ** 2).sum(1)) < s.r / 2)
    if rep.complete:
        assert len(set(lab.labels[rep.crossing_vertices()].tolist())) == 1
        assert rep.spanning_component_label == lab.labels[rep.crossing_vertices()[0]]
    d = rep.to_dict()
    assert d["num_slabs"] == rep.num_slabs and len(d["horizontal"]["found"]) == rep.num_slabs


def test_stretch_on_single_edge():
    r = 0.2
    s = rgg_from_positions([[0.3, 0.3], [0.4, 0.3]], r)
    samples = distance_stretch(s, connected_components(s), 5, seed=1)
    assert len(samples) == 5
    for de, dg in samples:
        assert de == pytest.approx(r / 2) and dg == 1
        assert r * dg / de >= 1


def test_stretch_skips_other_components():
    s = rgg_from_positions([[0.1, 0.1], [0.15, 0.1], [0.6, 0.6], [0.62, 0.6]], 0.1)
    lab = connected_components(s)
    for _ in range(3):
        for de, dg in distance_stretch(s, lab, 20, seed=_):
            assert dg == 1
    isolated = rgg_from_positions([[0.1, 0.1], [0.6, 0.6]], 0.1)
    assert distance_stretch(isolated, connected_components(isolated), 10) == []


def test_hop_distance_lower_bound():
    N = 2000
    s = generate_rgg(N, radius_for_density(N, 10), seed=5)
    samples = distance_stretch(s, connected_components(s), 300, seed=2)
    assert samples
    for de, dg in samples:
        assert dg >= math.ceil(de / s.r - 1e-12)
    eta = stretch_constant(samples, s.r, N, gamma_hat=1.0)
    assert eta is not None and eta >= 1
