# src/graph/dot_export.py
"""
Graphviz DOT text for inspecting ensemble graphs
"""
from pathlib import Path
from typing import Sequence

from src.graph.typed_graph import EdgeType, TypedGraph


def _quote(text: str) -> str:
    return '"' + text.replace('\\', '\\\\').replace('"', '\\"') + '"'


def export_dot(g: TypedGraph, tokens: Sequence[str], name: str = "G") -> str:
    """Parent-to-child edges only; reciprocals and self loops are implied"""
    lines = [f"digraph {_quote(name)} {{"]

    for i in range(g.n):
        label = f"{i}:{tokens[i]}" if i < len(tokens) else str(i)
        lines.append(f"  {i} [label={_quote(label)}];")

    for src, dst in sorted(g.edges_of_type(EdgeType.PARENT_TO_CHILD)):
        lines.append(f"  {src} -> {dst} [style=solid];")

    lines.append("}")
    return '\n'.join(lines) + '\n'


def write_dot(path: str, g: TypedGraph, tokens: Sequence[str], name: str = "G"):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(export_dot(g, tokens, name))
