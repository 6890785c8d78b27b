"""Command-line harness.

Every option can come from an INI file (``--config FILE``) or from a flag of
the same name; flags win. Values are read from the ``[common]`` section and
then from the section named after the subcommand.

Exit codes: 0 success, 1 assertion failure, 2 usage or config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

from .experiments import PRESETS, ExperimentConfig, run_experiment
from .formats import GraphFormatError, read_graph, write_graph
from .metrics import classify_edges, effective_diameter, giant_component, theorem_params
from .percolation import connected_components, find_crossings
from .rgg import RggSnapshot, generate_rgg, radius_for_density, snapshot
from .rumour import ProtocolConfig, run
from .spa import SpaGraph, SpaParams, generate

log = logging.getLogger("spa_rumour")

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_bool(text: str) -> bool:
    v = str(text).strip().lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_int(text) -> int:
    """Integers, also written as powers like ``2**12``."""
    s = str(text).strip()
    if "**" in s:
        base, exp = s.split("**")
        return int(base) ** int(exp)
    return int(float(s)) if "e" in s.lower() else int(s)


def parse_int_list(text) -> list[int]:
    """Comma separated integers; ``a..b`` expands to an inclusive range."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(parse_int(lo), parse_int(hi) + 1))
        else:
            out.append(parse_int(part))
    return out


def parse_float_list(text) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def optional(kind):
    def conv(text):
        return None if str(text).strip().lower() in ("", "none") else kind(text)
    return conv


# name -> (converter, default, help)
MODEL = {
    "m": (int, 2, "dimension"),
    "A1": (float, 0.5, "in-degree weight of the influence volume"),
    "A2": (float, 20.0, "base influence volume"),
    "p": (float, 1.0, "link probability"),
    "n": (parse_int, 1000, "number of vertices"),
    "seed": (int, 0, "random seed"),
}
GRAPH_IN = {
    "graph": (str, None, "input graph file"),
    "t": (optional(parse_int), None, "use the proximity snapshot on the first t vertices (SPA input)"),
}

COMMANDS = {
    "generate": ("generate an SPA graph", {**MODEL, "out": (str, "spa.txt", "output graph file")}),
    "rgg": ("generate a random geometric graph", {
        "N": (parse_int, 1000, "number of points"),
        "r": (optional(float), None, "connection radius"),
        "density": (optional(float), None, "pi*N*r^2, used when r is not given"),
        "metric_mode": (str, "torus", "torus or euclidean-square"),
        "seed": (int, 0, "random seed"),
        "out": (str, "rgg.txt", "output graph file"),
    }),
    "crossings": ("find slab crossings of a proximity graph", {
        **GRAPH_IN, "out": (optional(str), None, "JSON report file")}),
    "components": ("connected components", {
        **GRAPH_IN, "out": (optional(str), None, "CSV of component sizes")}),
    "rumour": ("spread a rumour", {
        **GRAPH_IN,
        "protocol": (str, "push-and-pull", "push or push-and-pull"),
        "source": (int, 0, "source vertex"),
        "seed": (int, 0, "random seed"),
        "max_rounds": (parse_int, 10**6, "round limit"),
        "L": (optional(float), None, "long-edge threshold (defaults to the theorem value for SPA input)"),
        "giant": (parse_bool, False, "restrict to the giant component (source is then a local index)"),
        "out": (optional(str), None, "per-round CSV"),
        "events": (optional(str), None, "per-transmission CSV"),
    }),
    "effdiam": ("effective diameter", {
        **GRAPH_IN,
        "fraction": (float, 0.9, "pair fraction"),
        "mode": (str, "auto", "exact, sampled or auto"),
        "num_pairs": (parse_int, 10_000, "sampled pairs"),
        "num_sources": (optional(parse_int), None, "BFS sources shared by sampled pairs"),
        "seed": (int, 0, "sampling seed"),
        "giant": (parse_bool, True, "measure on the giant component"),
    }),
    "classify": ("old/new and long/short edge counts", {
        **GRAPH_IN, "beta": (float, 0.5, "old cutoff exponent"),
        "eta": (float, 0.1, "long cutoff exponent"),
        "out": (optional(str), None, "CSV of counts")}),
    "params": ("exponents for the slow-spread bound", {
        "a": (optional(float), None, "p*A1 (defaults to p*A1 from the model keys)"),
        "A1": (float, 0.5, "in-degree weight"),
        "p": (float, 1.0, "link probability"),
        "m": (int, 2, "dimension"),
        "delta": (optional(float), None, "slack, default half the admissible maximum"),
        "epsilon_rule": (str, "corrected", "corrected or as-published"),
        "n": (optional(parse_int), None, "also evaluate tau, y, L, T at this n"),
        "out": (optional(str), None, "JSON file"),
    }),
}

_EXP_TYPES = {"sizes": parse_int_list, "seeds": parse_int_list, "densities": parse_float_list,
              "write_graphs": parse_bool, "crossings": parse_bool, "ratio_check": parse_bool,
              "trajectory": parse_bool, "fixture_max_rounds": optional(parse_int),
              "max_rounds": parse_int, "num_pairs": parse_int, "fixture_size": parse_int}


def _experiment_options():
    opts = {}
    defaults = asdict(ExperimentConfig())
    for name in ExperimentConfig.field_names():
        if name == "preset":
            continue
        d = defaults[name]
        conv = _EXP_TYPES.get(name) or (type(d) if d is not None else str)
        opts[name] = (conv, d, "experiment setting")
    return opts


COMMANDS["experiment"] = ("run a preset sweep", _experiment_options())


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spa-rumour", description="SPA graphs, proximity snapshots and rumour spreading")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (help_text, opts) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="INI file")
        if name == "experiment":
            p.add_argument("preset", choices=PRESETS)
        for key, (_, default, h) in opts.items():
            p.add_argument(f"--{key}", dest=key, default=None, metavar="VALUE",
                           help=f"{h} (default: {default})")
    return parser


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Defaults, then the config file, then flags."""
    opts = COMMANDS[command][1]
    values = {k: d for k, (_, d, _) in opts.items()}
    raw = {}
    if ns.config:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(ns.config) as fh:
                cp.read_file(fh)
        except configparser.Error as exc:
            raise UsageError(f"bad config file: {exc}") from exc
        for section in ("common", command):
            if cp.has_section(section):
                for k, v in cp.items(section):
                    if section == command and k not in opts:
                        raise UsageError(f"unknown key {k!r} in section [{section}]")
                    if k in opts:
                        raw[k] = v
    for k in opts:
        v = getattr(ns, k, None)
        if v is not None:
            raw[k] = v
    for k, v in raw.items():
        try:
            values[k] = opts[k][0](v)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {k}: {v!r} ({exc})") from exc
    return values


def _load(values) -> SpaGraph | RggSnapshot:
    if not values.get("graph"):
        raise UsageError("--graph is required")
    g = read_graph(values["graph"])
    t = values.get("t")
    if t is not None:
        if not isinstance(g, SpaGraph):
            raise UsageError("--t applies to SPA graph files only")
        g = snapshot(g, t)
    return g


def _write(path, text):
    Path(path).write_text(text)
    log.info("wrote %s", path)


def cmd_generate(v):
    g = generate(SpaParams(v["m"], v["A1"], v["A2"], v["p"], v["n"], v["seed"]))
    write_graph(g, v["out"])
    deg = g.undirected().degree
    print(f"n={g.n} edges={g.num_edges} max_degree={int(deg.max()) if g.n else 0}")
    return EXIT_OK


def cmd_rgg(v):
    r = v["r"]
    if r is None:
        if v["density"] is None:
            raise UsageError("give r or density")
        r = radius_for_density(v["N"], v["density"])
    s = generate_rgg(v["N"], r, v["metric_mode"], v["seed"])
    write_graph(s, v["out"])
    print(f"N={s.N} r={s.r:.6g} edges={len(s.edges)} M={s.M:.6g}")
    return EXIT_OK


def _as_snapshot(g):
    if isinstance(g, SpaGraph):
        return snapshot(g, g.n)
    return g


def cmd_crossings(v):
    s = _as_snapshot(_load(v))
    rep = find_crossings(s)
    if v["out"]:
        _write(v["out"], rep.to_json() + "\n")
    h = sum(c is not None for c in rep.horizontal_crossings)
    vv = sum(c is not None for c in rep.vertical_crossings)
    print(f"slabs={rep.num_slabs} W={rep.W:.6g} horizontal={h} vertical={vv} "
          f"complete={rep.complete} spanning_label={rep.spanning_component_label}")
    return EXIT_OK


def cmd_components(v):
    lab = connected_components(_load(v))
    if v["out"]:
        rows = "".join(f"{k},{int(s)}\n" for k, s in enumerate(lab.sizes))
        _write(v["out"], "label,size\n" + rows)
    print(f"components={lab.num_components} giant_fraction={lab.giant_fraction:.6g}")
    return EXIT_OK


def cmd_rumour(v):
    g = _load(v)
    ug = g.undirected() if isinstance(g, SpaGraph) else g.graph()
    pos = g.positions
    L = v["L"]
    if L is None and isinstance(g, SpaGraph) and 0 < g.params.a < 1:
        L = theorem_params(g.params.a, g.params.m).L(g.n)
    if v["giant"]:
        ug, ids, _ = giant_component(ug)
        pos = pos[ids]
    cfg = ProtocolConfig(v["protocol"], v["source"], v["max_rounds"], v["seed"])
    tr = run(ug, cfg, pos if L is not None else None, L)
    if v["out"]:
        _write(v["out"], tr.to_csv())
    if v["events"]:
        _write(v["events"], tr.event_log(pos))
    print(f"component_size={tr.component_size} spread_time={tr.spread_time} "
          f"long_edge_transmissions={tr.long_edge_transmissions}")
    return EXIT_OK


def cmd_effdiam(v):
    g = _load(v)
    ug = g.undirected() if isinstance(g, SpaGraph) else g.graph()
    if v["giant"]:
        ug = giant_component(ug)[0]
    mode = v["mode"]
    if mode == "auto":
        mode = "exact" if ug.n <= 2000 else "sampled"
    d = effective_diameter(ug, v["fraction"], mode, v["num_pairs"], v["seed"], v["num_sources"])
    log2 = math.log(ug.n) ** 2 if ug.n > 1 else 0.0
    print(f"n={ug.n} mode={mode} effective_diameter={d} log2n={log2:.6g}")
    return EXIT_OK


def cmd_classify(v):
    g = _load(v)
    if not isinstance(g, SpaGraph):
        raise UsageError("classify needs an SPA graph file")
    c = classify_edges(g, v["beta"], v["eta"])
    if v["out"]:
        _write(v["out"], "age,length,count\n" + "".join(
            f"{r['age']},{r['length']},{r['count']}\n" for r in c.rows()))
    print(f"tau={c.tau:.6g} L={c.L:.6g} " + " ".join(f"{a}_{b}={n}" for (a, b), n in sorted(c.counts.items())))
    return EXIT_OK


def cmd_params(v):
    a = v["a"] if v["a"] is not None else v["p"] * v["A1"]
    tp = theorem_params(a, v["m"], v["delta"], v["epsilon_rule"])
    out = tp.to_dict()
    if v["n"]:
        n = v["n"]
        out["at_n"] = {"n": n, "tau": tp.tau(n), "y": tp.y(n), "L": tp.L(n), "T": tp.T(n)}
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if v["out"]:
        _write(v["out"], text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if tp.valid else EXIT_ASSERT


def cmd_experiment(v, preset):
    cfg = ExperimentConfig(preset=preset, **v)
    result = run_experiment(cfg)
    print(result.report())
    return EXIT_OK if result.ok else EXIT_ASSERT


HANDLERS = {"generate": cmd_generate, "rgg": cmd_rgg, "crossings": cmd_crossings,
            "components": cmd_components, "rumour": cmd_rumour, "effdiam": cmd_effdiam,
            "classify": cmd_classify, "params": cmd_params}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        values = resolve(ns.command, ns)
        if ns.command == "experiment":
            return cmd_experiment(values, ns.preset)
        return HANDLERS[ns.command](values)
    except (OSError, GraphFormatError) as exc:
        where = getattr(exc, "filename", None)
        print(f"I/O error{f' ({where})' if where else ''}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
