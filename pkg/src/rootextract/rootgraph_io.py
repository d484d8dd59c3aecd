"""RGRAPH1 text format for root graphs.

::

    RGRAPH1 <node_count>
    <id> <parent_id> <x> <y> <z> <radius> <branch_id>
    ...

One record per line, whitespace separated, ``parent_id = -1`` for the
single root.  Ids are nonnegative integers, unique but otherwise arbitrary;
the writer numbers nodes 0..n-1 in pre-order.  Coordinates and radii are
decimal floats written with the shortest repr that round-trips.  Children
keep the order in which their records appear.  Blank lines and lines
starting with ``#`` are ignored.
"""

from __future__ import annotations

from pathlib import Path

from .graph import RootGraph, RootNode

MAGIC = "RGRAPH1"


class GraphFormatError(ValueError):
    pass


def format_graph(g: RootGraph) -> str:
    records = g.records()
    lines = [f"{MAGIC} {len(records)}"]
    for nid, parent, pos, radius, branch in records:
        x, y, z = (repr(float(c)) for c in pos)
        lines.append(f"{nid} {parent} {x} {y} {z} {radius!r} {branch}")
    return "\n".join(lines) + "\n"


def write_graph(g: RootGraph, path) -> None:
    Path(path).write_text(format_graph(g), encoding="ascii")


def parse_graph(text: str, source: str = "<string>") -> RootGraph:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise GraphFormatError(f"{source}: empty file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != MAGIC:
        raise GraphFormatError(f"{source}: expected '{MAGIC} <count>' header, got {lines[0]!r}")
    try:
        count = int(head[1])
    except ValueError as exc:
        raise GraphFormatError(f"{source}: bad node count {head[1]!r}") from exc
    body = lines[1:]
    if len(body) != count:
        raise GraphFormatError(f"{source}: header announces {count} nodes, found {len(body)}")

    nodes: dict[int, RootNode] = {}
    parents: list[tuple[int, int]] = []
    for lineno, line in enumerate(body, start=2):
        parts = line.split()
        if len(parts) != 7:
            raise GraphFormatError(f"{source}:{lineno}: expected 7 fields, got {len(parts)}")
        try:
            nid, parent = int(parts[0]), int(parts[1])
            x, y, z, radius = (float(v) for v in parts[2:6])
            branch = int(parts[6])
        except ValueError as exc:
            raise GraphFormatError(f"{source}:{lineno}: {exc}") from exc
        if nid < 0:
            raise GraphFormatError(f"{source}:{lineno}: negative node id {nid}")
        if nid in nodes:
            raise GraphFormatError(f"{source}:{lineno}: duplicate node id {nid}")
        nodes[nid] = RootNode((x, y, z), radius, branch)
        parents.append((nid, parent))

    roots = [nid for nid, parent in parents if parent == -1]
    if len(roots) != 1:
        raise GraphFormatError(f"{source}: expected exactly one root, found {len(roots)}")
    for nid, parent in parents:
        if parent == -1:
            continue
        if parent not in nodes:
            raise GraphFormatError(f"{source}: node {nid} references missing parent {parent}")
        if parent == nid:
            raise GraphFormatError(f"{source}: cycle detected at node {nid}")
        nodes[parent].add_child(nodes[nid])

    graph = RootGraph(nodes[roots[0]])
    if graph.node_count != count:
        # every node has one parent, so unreachable nodes can only sit on a cycle
        raise GraphFormatError(f"{source}: cycle detected, {count - graph.node_count} node(s) unreachable from root")
    return graph


def read_graph(path) -> RootGraph:
    return parse_graph(Path(path).read_text(encoding="ascii"), str(path))
