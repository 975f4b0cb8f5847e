# tests/test_graph.py
"""
Tests for typed graph construction, union/intersection ensembles and
connectivity statistics
"""
import itertools

import numpy as np
import pytest

from src.errors import GraphMismatchError
from src.graph import (
    EdgeType,
    TypedGraph,
    build_tree_graph,
    diameter,
    export_dot,
    graph_for_mode,
    graph_intersect,
    graph_merge,
    graph_stats,
    hop_histogram,
    shortest_hops,
)
from src.graph.connectivity import UNREACHABLE, corpus_edge_recall, gold_edge_recall, pairwise_distances
from src.ingest.conllu_reader import DepParse
from src.ingest.dataset_loader import LabeledExample

P2C, C2P, SELF = EdgeType.PARENT_TO_CHILD, EdgeType.CHILD_TO_PARENT, EdgeType.SELF_LOOP


def _parse(heads, parser_id="p"):
    return DepParse(parser_id, tuple(f"t{i}" for i in range(len(heads))), tuple(heads))


def _brute_union(parses):
    edges = set()
    for p in parses:
        for dep, head in enumerate(p.heads):
            if head:
                edges.add((head - 1, dep, P2C))
                edges.add((dep, head - 1, C2P))
        edges |= {(i, i, SELF) for i in range(p.n)}
    return edges


def test_tree_graph_star(parse_a):
    g = build_tree_graph(parse_a)

    assert g.edges_of_type(P2C) == {(1, 0), (1, 2)}
    assert g.edges_of_type(C2P) == {(0, 1), (2, 1)}
    assert g.edges_of_type(SELF) == {(0, 0), (1, 1), (2, 2)}
    assert g.edge_count == 7


def test_tree_graph_single_node():
    g = build_tree_graph(_parse([0]))
    assert g.edges == frozenset({(0, 0, SELF)})


def test_tree_graph_chain_edge_count():
    g = build_tree_graph(_parse([0, 1, 2]))
    assert g.edge_count == 2 * (3 - 1) + 3


def test_typed_graph_rejects_missing_reciprocal():
    with pytest.raises(ValueError, match="reciprocal"):
        TypedGraph(2, frozenset({(0, 0, SELF), (1, 1, SELF), (0, 1, P2C)}))


def test_typed_graph_rejects_missing_self_loop():
    with pytest.raises(ValueError, match="self loop"):
        TypedGraph(2, frozenset({(0, 0, SELF)}))


def test_merge_of_toy_parses(parse_a, parse_b):
    merged = graph_merge([build_tree_graph(parse_a), build_tree_graph(parse_b)])

    assert merged.edges_of_type(P2C) == {(1, 0), (1, 2), (2, 1)}
    assert merged.edges_of_type(C2P) == {(0, 1), (2, 1), (1, 2)}
    assert merged.edge_count == 9
    assert (1, 2, P2C) in merged.edges and (1, 2, C2P) in merged.edges, "pair (1,2) carries both types"


def test_merge_identity_and_idempotence(parse_a):
    g = build_tree_graph(parse_a)
    assert graph_merge([g]) == g
    assert graph_merge([g, g, g]) == g


def test_merge_rejects_mismatched_sizes(parse_a):
    with pytest.raises(GraphMismatchError):
        graph_merge([build_tree_graph(parse_a), build_tree_graph(_parse([0, 1]))])


def test_intersect_of_toy_parses(parse_a, parse_b):
    g = graph_intersect([parse_a, parse_b])

    assert g.edges_of_type(P2C) == {(1, 0)}
    assert g.edges_of_type(C2P) == {(0, 1)}
    assert g.edge_count == 5


def test_intersect_identical_and_disjoint():
    p = _parse([2, 0, 2])
    assert graph_intersect([p, p]) == build_tree_graph(p)

    q = _parse([0, 3, 1])
    assert graph_intersect([p, q]).edge_count == 3, "only self loops remain"


def test_intersect_rejects_mismatched_tokens():
    with pytest.raises(GraphMismatchError):
        graph_intersect([_parse([0]), _parse([0, 1])])


def test_union_oracle_and_subset_chain(tree_factory):
    rng = np.random.default_rng(0)
    for _ in range(500):
        n = int(rng.integers(1, 13))
        parses = [_parse(tree_factory(rng, n), f"p{m}") for m in range(3)]
        trees = [build_tree_graph(p) for p in parses]
        merged = graph_merge(trees)
        shared = graph_intersect(parses)

        assert set(merged.edges) == _brute_union(parses)
        for tree in trees:
            assert shared.edges <= tree.edges <= merged.edges
        assert max(t.edge_count for t in trees) <= merged.edge_count <= sum(t.edge_count for t in trees)


def test_merge_is_order_independent(tree_factory):
    rng = np.random.default_rng(1)
    parses = [_parse(tree_factory(rng, 8), f"p{m}") for m in range(3)]
    graphs = [build_tree_graph(p) for p in parses]
    results = {graph_merge(list(order)) for order in itertools.permutations(graphs)}
    assert len(results) == 1
    assert len({graph_intersect(list(order)) for order in itertools.permutations(parses)}) == 1


def test_distance_dominance(tree_factory):
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = int(rng.integers(2, 11))
        parses = [_parse(tree_factory(rng, n), f"p{m}") for m in range(3)]
        trees = [build_tree_graph(p) for p in parses]
        merged = pairwise_distances(graph_merge(trees))
        per_tree = [pairwise_distances(t) for t in trees]

        for u in range(n):
            for v in range(n):
                assert merged[u][v] <= min(d[u][v] for d in per_tree)

        assert diameter(graph_merge(trees)) <= min(diameter(t) for t in trees)


def test_relabel_commutes_with_build_merge_intersect(tree_factory):
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 10))
        perm = [int(i) for i in rng.permutation(n)]
        parses = [_parse(tree_factory(rng, n), f"p{m}") for m in range(2)]
        moved = [p.relabel(perm) for p in parses]

        assert build_tree_graph(moved[0]) == build_tree_graph(parses[0]).relabel(perm)
        assert graph_merge([build_tree_graph(p) for p in moved]) == \
            graph_merge([build_tree_graph(p) for p in parses]).relabel(perm)
        assert graph_intersect(moved) == graph_intersect(parses).relabel(perm)


def test_shortest_hops(parse_a, parse_b):
    merged = graph_merge([build_tree_graph(parse_a), build_tree_graph(parse_b)])

    assert shortest_hops(merged, {0}, {2}) == 2
    assert shortest_hops(merged, {1, 2}, {1, 2}) == 0
    only_loops = TypedGraph.from_head_pairs(2, [])
    assert shortest_hops(only_loops, {0}, {1}) is None


def test_shortest_hops_rejects_empty_set(parse_a):
    with pytest.raises(ValueError):
        shortest_hops(build_tree_graph(parse_a), set(), {0})


def test_hop_histogram(parse_a):
    g = build_tree_graph(parse_a)
    near = LabeledExample(("a", "b", "c"), 1, 1, 0, ((2,),))
    far = LabeledExample(("a", "b", "c"), 1, 1, 0, ((3,),))
    lonely = TypedGraph.from_head_pairs(3, [])

    assert hop_histogram([(far, g)]) == {2: 1}
    assert hop_histogram([(near, g), (near, g)]) == {1: 2}
    assert hop_histogram([(near, lonely)]) == {UNREACHABLE: 1}


def test_hop_histogram_needs_opinions(parse_a):
    bare = LabeledExample(("a", "b", "c"), 1, 1, 0)
    with pytest.raises(ValueError, match="opinion"):
        hop_histogram([(bare, build_tree_graph(parse_a))])


def test_diameter():
    assert diameter(build_tree_graph(_parse([0]))) == 0
    assert diameter(build_tree_graph(_parse([0, 1, 2]))) == 2
    assert diameter(TypedGraph.from_head_pairs(2, [])) is None


def test_export_dot(parse_a, parse_b):
    single = export_dot(build_tree_graph(_parse([0])), ["x"])
    assert single.startswith("digraph")
    assert '0 [label="0:x"];' in single
    assert "->" not in single

    pair = export_dot(build_tree_graph(DepParse("p", ("good", "food"), (2, 0))), ["good", "food"])
    assert "1 -> 0 [style=solid];" in pair
    assert pair.count("->") == 1

    merged = graph_merge([build_tree_graph(parse_a), build_tree_graph(parse_b)])
    text = export_dot(merged, parse_a.tokens)
    assert text.count("->") == 3
    assert text == export_dot(merged, parse_a.tokens), "output is deterministic"


def test_graph_stats_keys(parse_a, parse_b):
    stats = graph_stats(graph_intersect([parse_a, _parse([0, 3, 1])]))
    assert set(stats) == {'n', 'edge_count', 'by_type', 'diameter'}
    assert stats['diameter'] == UNREACHABLE
    assert stats['by_type'] == {'parent_to_child': 0, 'child_to_parent': 0, 'self_loop': 3}


def test_graph_for_mode(parse_a, parse_b):
    parses = [parse_a, parse_b]
    assert graph_for_mode(parses, 'union').edge_count == 9
    assert graph_for_mode(parses, 'intersect').edge_count == 5
    assert graph_for_mode(parses, 'single:B') == build_tree_graph(parse_b)
    with pytest.raises(GraphMismatchError):
        graph_for_mode(parses, 'single:C')


def test_gold_edge_recall(parse_a, parse_b):
    merged = graph_merge([build_tree_graph(parse_a), build_tree_graph(parse_b)])
    assert gold_edge_recall(merged, parse_a) == 1.0
    assert gold_edge_recall(build_tree_graph(parse_b), parse_a) == 0.5
    assert corpus_edge_recall([build_tree_graph(parse_b)], [parse_a]) == 0.5
