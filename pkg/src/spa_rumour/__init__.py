"""Spatial preferential attachment graphs, proximity snapshots and rumour spreading."""

from .formats import load_graph, read_graph, write_graph
from .graph import UndirectedGraph
from .metrics import effective_diameter, theorem_params
from .percolation import connected_components, find_crossings
from .rgg import generate_rgg, snapshot, snapshot_hierarchy
from .rumour import Protocol, ProtocolConfig, run
from .spa import SpaGraph, SpaParams, generate

__version__ = "0.1.0"

__all__ = [
    "Protocol",
    "ProtocolConfig",
    "SpaGraph",
    "SpaParams",
    "UndirectedGraph",
    "connected_components",
    "effective_diameter",
    "find_crossings",
    "generate",
    "generate_rgg",
    "load_graph",
    "read_graph",
    "run",
    "snapshot",
    "snapshot_hierarchy",
    "theorem_params",
    "write_graph",
]
