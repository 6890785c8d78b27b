"""Line-based graph files.

SPA::

    spa 1 <m> <A1> <A2> <p> <n> <seed>
    v <id> <coord_1> ... <coord_m>
    e <child> <parent> <birth_step>

RGG::

    rgg 1 <N> <r> <metric_mode> <seed>
    v <id> <x> <y>
    e <u> <v>

Reals are written with 17 significant digits so a round trip is exact.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .rgg import MetricMode, RggSnapshot
from .spa import SpaGraph, SpaParams

VERSION = 1


class GraphFormatError(ValueError):
    pass


def _real(x) -> str:
    return format(float(x), ".17g")


def _vertex_lines(positions: np.ndarray):
    for i, row in enumerate(positions):
        yield "v " + str(i) + " " + " ".join(_real(c) for c in row) + "\n"


def dump_spa(g: SpaGraph) -> str:
    p = g.params
    out = io.StringIO()
    out.write(f"spa {VERSION} {p.m} {_real(p.A1)} {_real(p.A2)} {_real(p.p)} {p.n} {p.seed}\n")
    out.writelines(_vertex_lines(g.positions))
    for c, u, t in zip(g.child.tolist(), g.parent.tolist(), g.step.tolist()):
        out.write(f"e {c} {u} {t}\n")
    return out.getvalue()


def dump_rgg(s: RggSnapshot) -> str:
    out = io.StringIO()
    seed = "-" if s.seed is None else s.seed
    out.write(f"rgg {VERSION} {s.t} {_real(s.r)} {s.metric_mode.value} {seed}\n")
    out.writelines(_vertex_lines(s.positions))
    for u, v in s.edges.tolist():
        out.write(f"e {u} {v}\n")
    return out.getvalue()


def write_graph(obj, path) -> None:
    text = dump_spa(obj) if isinstance(obj, SpaGraph) else dump_rgg(obj)
    Path(path).write_text(text)


def _parse(text: str):
    lines = text.splitlines()
    if not lines:
        raise GraphFormatError("empty graph file")
    header = lines[0].split()
    verts, edges = [], []
    for no, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append((int(parts[1]), [float(x) for x in parts[2:]]))
        elif parts[0] == "e":
            edges.append([int(x) for x in parts[1:]])
        else:
            raise GraphFormatError(f"line {no}: unknown record {parts[0]!r}")
    verts.sort()
    if [v for v, _ in verts] != list(range(len(verts))):
        raise GraphFormatError("vertex ids must be 0..n-1")
    return header, np.array([c for _, c in verts], dtype=np.float64), edges


def load_graph(text: str):
    """Parse either file kind into a :class:`SpaGraph` or :class:`RggSnapshot`."""
    header, pos, edges = _parse(text)
    kind = header[0]
    try:
        if int(header[1]) != VERSION:
            raise GraphFormatError(f"unsupported version {header[1]}")
        if kind == "spa":
            m, A1, A2, p, n, seed = header[2:8]
            params = SpaParams(int(m), float(A1), float(A2), float(p), int(n), int(seed))
            pos = pos.reshape(len(pos), params.m)
            if len(pos) != params.n:
                raise GraphFormatError(f"header says n={params.n}, found {len(pos)} vertices")
            e = np.array(edges, dtype=np.int64).reshape(-1, 3)
            return SpaGraph(params, pos, e[:, 0].copy(), e[:, 1].copy(), e[:, 2].copy())
        if kind == "rgg":
            N, r, mode, seed = header[2:6]
            pos = pos.reshape(len(pos), -1) if len(pos) else np.zeros((0, 2))
            if len(pos) != int(N):
                raise GraphFormatError(f"header says N={N}, found {len(pos)} vertices")
            e = np.array(edges, dtype=np.int64).reshape(-1, 2)
            return RggSnapshot(int(N), float(r), MetricMode.parse(mode), np.arange(int(N)), pos, e,
                               None if seed == "-" else int(seed))
    except (IndexError, ValueError) as exc:
        if isinstance(exc, GraphFormatError):
            raise
        raise GraphFormatError(f"malformed header: {' '.join(header)}") from exc
    raise GraphFormatError(f"unknown graph kind {kind!r}")


def read_graph(path):
    return load_graph(Path(path).read_text())
