"""
Typed graph construction, ensembling and connectivity module
"""

from .typed_graph import (
    EdgeType,
    NUM_EDGE_TYPES,
    TypedGraph,
    build_tree_graph,
    graph_merge,
    graph_intersect,
    graph_for_mode,
    parse_graph_mode,
)
from .connectivity import (
    UNREACHABLE,
    shortest_hops,
    example_hops,
    hop_histogram,
    diameter,
    pairwise_distances,
    gold_edge_recall,
    corpus_edge_recall,
    graph_stats,
    summarize_stats,
)
from .dot_export import export_dot, write_dot

__all__ = [
    'EdgeType',
    'NUM_EDGE_TYPES',
    'TypedGraph',
    'build_tree_graph',
    'graph_merge',
    'graph_intersect',
    'graph_for_mode',
    'parse_graph_mode',
    'UNREACHABLE',
    'shortest_hops',
    'example_hops',
    'hop_histogram',
    'diameter',
    'pairwise_distances',
    'gold_edge_recall',
    'corpus_edge_recall',
    'graph_stats',
    'summarize_stats',
    'export_dot',
    'write_dot',
]
