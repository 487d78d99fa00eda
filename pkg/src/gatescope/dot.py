"""Graphviz DOT export of recovered dataflow graphs.

One node per register group labeled ``name (width)``, one edge per group
connection; edges named in the highlight set come out ``color=red``.
"""

from __future__ import annotations


def export_dataflow_dot(graph, highlight=(), name="dataflow") -> str:
    """Deterministic DOT text for a DataflowGraph.

    ``highlight`` is an iterable of (src group id, dst group id) pairs.
    """
    highlight = set(highlight)
    lines = [f"digraph {name} {{"]
    lines.append("  rankdir=LR;")
    lines.append("  node [shape=box];")
    for gid in sorted(graph.groups):
        group = graph.groups[gid]
        lines.append(f'  g{gid} [label="{group.name} ({group.width})"];')
    for src, dst in sorted(graph.edges):
        attrs = ' [color=red]' if (src, dst) in highlight else ""
        lines.append(f"  g{src} -> g{dst}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"
