import json

import pytest

from spa_rumour.cli import main, parse_int, parse_int_list
from spa_rumour.formats import read_graph


def test_int_parsing():
    assert parse_int("2**12") == 4096
    assert parse_int("1e5") == 100_000
    assert parse_int_list("0..3, 7") == [0, 1, 2, 3, 7]
    assert parse_int_list("2**12,2**13") == [4096, 8192]


def test_generate_single_vertex(tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert main(["generate", "--n", "1", "--out", str(out)]) == 0
    g = read_graph(out)
    assert g.n == 1 and g.num_edges == 0
    assert "edges=0" in capsys.readouterr().out


def test_generate_edge_count_summary(tmp_path, capsys):
    out = tmp_path / "g.txt"
    args = ["generate", "--n", "10000", "--A1", "0", "--A2", "1", "--p", "0.5", "--seed", "4",
            "--out", str(out)]
    assert main(args) == 0
    edges = int(capsys.readouterr().out.split("edges=")[1].split()[0])
    assert abs(edges - 5000) <= 500


def _run_twice(tmp_path, argv_for):
    # same directory both times: run records include the output location
    d = tmp_path / "run"
    d.mkdir()
    texts = []
    for _ in range(2):
        assert main(argv_for(d)) == 0
        texts.append({p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()})
        for p in d.rglob("*"):
            if p.is_file():
                p.unlink()
    return texts


@pytest.mark.parametrize("argv_for", [
    lambda d: ["generate", "--n", "3000", "--A2", "6", "--seed", "9", "--out", str(d / "g.txt")],
    lambda d: ["rgg", "--N", "2000", "--density", "10", "--seed", "9", "--out", str(d / "r.txt")],
    lambda d: ["experiment", "rumour", "--sizes", "2000", "--seeds", "0,1", "--A2", "8",
               "--output_dir", str(d)],
    lambda d: ["experiment", "percolation", "--sizes", "2000", "--seeds", "0", "--output_dir", str(d),
               "--write_graphs", "yes"],
])
def test_reruns_are_byte_identical(tmp_path, argv_for):
    a, b = _run_twice(tmp_path, argv_for)
    assert a and a == b


def test_rumour_traces_are_byte_identical(tmp_path):
    g = tmp_path / "g.txt"
    assert main(["generate", "--n", "2000", "--A2", "6", "--seed", "2", "--out", str(g)]) == 0
    outs = []
    for k in range(2):
        tr, ev = tmp_path / f"t{k}.csv", tmp_path / f"e{k}.csv"
        assert main(["rumour", "--graph", str(g), "--seed", "5", "--source", "17",
                     "--out", str(tr), "--events", str(ev)]) == 0
        outs.append((tr.read_bytes(), ev.read_bytes()))
    assert outs[0] == outs[1]
    assert outs[0][0].startswith(b"round,informed_count,new_count,long_edge_transmissions\n")


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[common]\nseed = 3\n\n[generate]\nn = 50\nA2 = 2\nout = %s\n" % (tmp_path / "a.txt"))
    assert main(["generate", "--config", str(cfg)]) == 0
    g = read_graph(tmp_path / "a.txt")
    assert (g.n, g.params.A2, g.params.seed) == (50, 2.0, 3)
    assert main(["generate", "--config", str(cfg), "--n", "20"]) == 0
    assert read_graph(tmp_path / "a.txt").n == 20


def test_analysis_commands(tmp_path, capsys):
    g = tmp_path / "g.txt"
    assert main(["generate", "--n", "1500", "--A2", "6", "--out", str(g)]) == 0
    assert main(["components", "--graph", str(g), "--out", str(tmp_path / "c.csv")]) == 0
    assert (tmp_path / "c.csv").read_text().startswith("label,size\n")
    assert main(["effdiam", "--graph", str(g), "--mode", "exact"]) == 0
    assert main(["classify", "--graph", str(g), "--out", str(tmp_path / "k.csv")]) == 0
    assert main(["crossings", "--graph", str(g), "--t", "700", "--out", str(tmp_path / "x.json")]) == 0
    rep = json.loads((tmp_path / "x.json").read_text())
    assert rep["num_slabs"] >= 1
    assert main(["params", "--a", "0.5", "--m", "2", "--out", str(tmp_path / "p.json")]) == 0
    assert json.loads((tmp_path / "p.json").read_text())["K"] == 7.5


def test_experiment_fixture_and_outputs(tmp_path):
    assert main(["experiment", "rumour", "--fixture", "cycle", "--fixture_size", "5",
                 "--seeds", "0..19", "--output_dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "rumour_summary.json").read_text())
    assert summary["ok"] and summary["runs"] == 20
    assert (tmp_path / "rumour_5_0" / "metrics.csv").exists()
    assert (tmp_path / "rumour_5_0" / "summary.json").exists()
    assert (tmp_path / "rumour_runs.csv").read_text().count("\n") == 21


def test_assertion_failure_exit_code(tmp_path, capsys):
    rc = main(["experiment", "rumour", "--fixture", "path", "--fixture_size", "6",
               "--fixture_max_rounds", "1", "--seeds", "0", "--output_dir", str(tmp_path)])
    assert rc == 1
    assert "FAIL" in capsys.readouterr().out
    assert main(["params", "--a", "0.5", "--epsilon_rule", "as-published"]) == 1


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["experiment", "nope"],
    ["generate", "--A1", "1.5"],
    ["generate", "--n", "abc"],
    ["rgg", "--N", "10"],
    ["effdiam"],
    ["classify", "--graph", "__never__", "--beta", "x"],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[generate]\nvertices = 10\n")
    assert main(["generate", "--config", str(cfg)]) == 2
    cfg.write_text("not an ini file")
    assert main(["generate", "--config", str(cfg)]) == 2


def test_io_errors(tmp_path):
    assert main(["generate", "--n", "3", "--out", str(tmp_path / "missing" / "g.txt")]) == 3
    assert main(["components", "--graph", str(tmp_path / "none.txt")]) == 3
    bad = tmp_path / "bad.txt"
    bad.write_text("spa 1 2\n")
    assert main(["components", "--graph", str(bad)]) == 3
    assert main(["generate", "--config", str(tmp_path / "nope.ini")]) == 3
