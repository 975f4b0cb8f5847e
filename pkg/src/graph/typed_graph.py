# src/graph/typed_graph.py
"""
Edge-typed sentence graphs built from dependency trees, and their
union (GraphMerge) and intersection ensembles
"""
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import FrozenSet, Iterable, Sequence, Set, Tuple
import logging

import numpy as np

from src.errors import GraphMismatchError
from src.ingest.conllu_reader import DepParse

logger = logging.getLogger(__name__)


class EdgeType(IntEnum):
    PARENT_TO_CHILD = 0
    CHILD_TO_PARENT = 1
    SELF_LOOP = 2


NUM_EDGE_TYPES = len(EdgeType)

Edge = Tuple[int, int, EdgeType]


@dataclass(frozen=True)
class TypedGraph:
    """Directed graph over n nodes with typed edge triples (src, dst, etype)"""

    n: int
    edges: FrozenSet[Edge]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("node count must be non-negative")
        for src, dst, etype in self.edges:
            if not (0 <= src < self.n and 0 <= dst < self.n):
                raise ValueError(f"edge ({src}, {dst}, {etype.name}) outside [0, {self.n})")
            if (etype == EdgeType.SELF_LOOP) != (src == dst):
                raise ValueError(f"self loops must be exactly the (i, i) edges, got ({src}, {dst}, {etype.name})")
            if etype == EdgeType.PARENT_TO_CHILD and (dst, src, EdgeType.CHILD_TO_PARENT) not in self.edges:
                raise ValueError(f"edge ({src}, {dst}) has no child-to-parent reciprocal")
            if etype == EdgeType.CHILD_TO_PARENT and (dst, src, EdgeType.PARENT_TO_CHILD) not in self.edges:
                raise ValueError(f"edge ({src}, {dst}) has no parent-to-child reciprocal")
        for i in range(self.n):
            if (i, i, EdgeType.SELF_LOOP) not in self.edges:
                raise ValueError(f"node {i} has no self loop")

    @classmethod
    def from_head_pairs(cls, n: int, head_pairs: Iterable[Tuple[int, int]]) -> 'TypedGraph':
        """Build from 0-based (head, dependent) pairs plus reciprocals and self loops"""
        edges: Set[Edge] = {(i, i, EdgeType.SELF_LOOP) for i in range(n)}
        for head, dep in head_pairs:
            edges.add((head, dep, EdgeType.PARENT_TO_CHILD))
            edges.add((dep, head, EdgeType.CHILD_TO_PARENT))
        return cls(n, frozenset(edges))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edges_of_type(self, etype: EdgeType) -> Set[Tuple[int, int]]:
        return {(src, dst) for src, dst, t in self.edges if t == etype}

    def count_by_type(self) -> dict:
        counts = {etype.name.lower(): 0 for etype in EdgeType}
        for _, _, etype in self.edges:
            counts[etype.name.lower()] += 1
        return counts

    @cached_property
    def edge_index(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(src, dst, etype) int arrays sorted by (src, dst, etype); src is the segment id"""
        ordered = sorted(self.edges)
        src = np.array([e[0] for e in ordered], dtype=np.int64)
        dst = np.array([e[1] for e in ordered], dtype=np.int64)
        etype = np.array([int(e[2]) for e in ordered], dtype=np.int64)
        return src, dst, etype

    def relabel(self, perm: Sequence[int]) -> 'TypedGraph':
        """Node i becomes perm[i]"""
        return TypedGraph(
            self.n,
            frozenset((perm[src], perm[dst], etype) for src, dst, etype in self.edges),
        )


def build_tree_graph(parse: DepParse) -> TypedGraph:
    """Typed graph of one tree: reciprocal head edges plus one self loop per node"""
    return TypedGraph.from_head_pairs(
        parse.n,
        ((head - 1, dep - 1) for head, dep in parse.head_edges()),
    )


def graph_merge(graphs: Sequence[TypedGraph]) -> TypedGraph:
    """GraphMerge: exact union of typed edge triples"""
    if not graphs:
        raise ValueError("graph_merge needs at least one graph")

    n = graphs[0].n
    for g in graphs[1:]:
        if g.n != n:
            raise GraphMismatchError(f"cannot merge graphs over {n} and {g.n} nodes")

    edges: Set[Edge] = set()
    for g in graphs:
        edges |= g.edges
    return TypedGraph(n, frozenset(edges))


def graph_intersect(parses: Sequence[DepParse]) -> TypedGraph:
    """Keep head->dependent pairs shared by every parse, then add reciprocals and self loops"""
    if not parses:
        raise ValueError("graph_intersect needs at least one parse")

    n = parses[0].n
    for parse in parses[1:]:
        if parse.n != n:
            raise GraphMismatchError(
                f"parse '{parse.parser_id}' has {parse.n} tokens, expected {n}"
            )

    shared = set(parses[0].head_edges())
    for parse in parses[1:]:
        shared &= parse.head_edges()

    return TypedGraph.from_head_pairs(n, ((head - 1, dep - 1) for head, dep in shared))


def parse_graph_mode(mode: str) -> Tuple[str, str | None]:
    """'merge'/'union' -> ('merge', None); 'intersect'; 'single:<id>' -> ('single', id)"""
    if mode in ('merge', 'union'):
        return 'merge', None
    if mode == 'intersect':
        return 'intersect', None
    if mode.startswith('single:') and len(mode) > len('single:'):
        return 'single', mode[len('single:'):]
    raise ValueError(f"unknown graph mode '{mode}'")


def graph_for_mode(parses: Sequence[DepParse], mode: str) -> TypedGraph:
    """The ensemble or single-tree graph a configuration asks for"""
    kind, parser_id = parse_graph_mode(mode)

    if kind == 'merge':
        return graph_merge([build_tree_graph(p) for p in parses])
    if kind == 'intersect':
        return graph_intersect(parses)

    for parse in parses:
        if parse.parser_id == parser_id:
            return build_tree_graph(parse)
    raise GraphMismatchError(
        f"no parser '{parser_id}' among {[p.parser_id for p in parses]}"
    )
