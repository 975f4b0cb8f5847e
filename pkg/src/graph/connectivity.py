# src/graph/connectivity.py
"""
Hop distances, diameters and gold-edge recall over typed graphs
"""
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union
import logging

import networkx as nx

from src.graph.typed_graph import EdgeType, TypedGraph
from src.ingest.conllu_reader import DepParse
from src.ingest.dataset_loader import LabeledExample
from src.errors import DataError

logger = logging.getLogger(__name__)

UNREACHABLE = 'unreachable'

HopKey = Union[int, str]


def undirected_view(g: TypedGraph) -> nx.Graph:
    """Undirected simple graph without self loops"""
    view = nx.Graph()
    view.add_nodes_from(range(g.n))
    view.add_edges_from(
        (src, dst) for src, dst, etype in g.edges
        if etype != EdgeType.SELF_LOOP
    )
    return view


def shortest_hops(g: TypedGraph, src_set: Iterable[int], dst_set: Iterable[int]) -> Optional[int]:
    """Minimum undirected BFS distance between two node sets; None if unreachable"""
    sources, targets = set(src_set), set(dst_set)
    if not sources or not targets:
        raise ValueError("shortest_hops needs non-empty node sets")
    for node in sources | targets:
        if not 0 <= node < g.n:
            raise ValueError(f"node {node} outside [0, {g.n})")

    if sources & targets:
        return 0

    lengths = nx.multi_source_dijkstra_path_length(undirected_view(g), sources)
    reachable = [lengths[t] for t in targets if t in lengths]
    return int(min(reachable)) if reachable else None


def hop_key(hops: Optional[int]) -> HopKey:
    return UNREACHABLE if hops is None else hops


def example_hops(example: LabeledExample, g: TypedGraph) -> Optional[int]:
    """Aspect-to-opinion distance of one annotated example"""
    if not example.opinion_spans or not example.opinion_indices:
        raise DataError("example has no opinion annotations")
    return shortest_hops(g, example.aspect_indices, example.opinion_indices)


def hop_histogram(examples: Sequence[Tuple[LabeledExample, TypedGraph]]) -> Dict[HopKey, int]:
    """Frequency of aspect-to-opinion distances; unreachable pairs bucketed separately"""
    histogram: Dict[HopKey, int] = {}
    for k, (example, g) in enumerate(examples):
        try:
            key = hop_key(example_hops(example, g))
        except DataError:
            raise DataError(f"example {k + 1} has no opinion annotations") from None
        histogram[key] = histogram.get(key, 0) + 1
    return sort_hop_keys(histogram)


def sort_hop_keys(mapping: Dict[HopKey, object]) -> dict:
    """Numeric buckets ascending, unreachable last"""
    numeric = sorted(k for k in mapping if k != UNREACHABLE)
    ordered = {k: mapping[k] for k in numeric}
    if UNREACHABLE in mapping:
        ordered[UNREACHABLE] = mapping[UNREACHABLE]
    return ordered


def diameter(g: TypedGraph) -> Optional[int]:
    """Largest pairwise undirected distance; None if disconnected"""
    if g.n < 1:
        raise ValueError("diameter needs at least one node")
    view = undirected_view(g)
    if not nx.is_connected(view):
        return None
    return int(nx.diameter(view))


def pairwise_distances(g: TypedGraph) -> Dict[int, Dict[int, int]]:
    return {src: dict(lengths) for src, lengths in nx.all_pairs_shortest_path_length(undirected_view(g))}


def gold_edge_recall(g: TypedGraph, gold: DepParse) -> float:
    """Fraction of gold head->dependent pairs present as parent-to-child edges"""
    gold_pairs = {(head - 1, dep - 1) for head, dep in gold.head_edges()}
    if not gold_pairs:
        return 1.0
    present = g.edges_of_type(EdgeType.PARENT_TO_CHILD)
    return len(gold_pairs & present) / len(gold_pairs)


def corpus_edge_recall(graphs: Sequence[TypedGraph], golds: Sequence[DepParse]) -> float:
    """Micro-averaged gold edge recall over a corpus"""
    total = hit = 0
    for g, gold in zip(graphs, golds):
        gold_pairs = {(head - 1, dep - 1) for head, dep in gold.head_edges()}
        total += len(gold_pairs)
        hit += len(gold_pairs & g.edges_of_type(EdgeType.PARENT_TO_CHILD))
    return hit / total if total else 1.0


def graph_stats(g: TypedGraph) -> Dict[str, object]:
    """Documented statistics keys: n, edge_count, by_type, diameter"""
    d = diameter(g)
    return {
        'n': g.n,
        'edge_count': g.edge_count,
        'by_type': g.count_by_type(),
        'diameter': UNREACHABLE if d is None else d,
    }


def summarize_stats(stats: List[Dict[str, object]]) -> Dict[str, object]:
    """Corpus-level means over per-sentence statistics"""
    if not stats:
        return {'sentences': 0}

    finite = [s['diameter'] for s in stats if s['diameter'] != UNREACHABLE]
    return {
        'sentences': len(stats),
        'mean_edge_count': sum(s['edge_count'] for s in stats) / len(stats),
        'mean_diameter': sum(finite) / len(finite) if finite else None,
        'disconnected': len(stats) - len(finite),
    }
