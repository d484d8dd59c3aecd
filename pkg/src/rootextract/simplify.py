"""Douglas-Peucker reduction of root graphs between topology-bearing nodes."""

from __future__ import annotations

import numpy as np

from .graph import RootGraph, RootNode


def point_segment_distance(p, a, b) -> float:
    p, a, b = (np.asarray(v, dtype=np.float64) for v in (p, a, b))
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(p - (a + t * ab)))


def _segment_distances(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(pts - a, axis=1)
    t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    return np.linalg.norm(pts - (a + t[:, None] * ab), axis=1)


def douglas_peucker(points, delta: float) -> list[int]:
    """Indices of the points kept by Douglas-Peucker with tolerance ``delta``.

    Uses point-to-segment distance; among equally distant candidates the
    lowest index is split on.  Endpoints are always kept.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if n <= 2:
        return list(range(n))
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        d = _segment_distances(pts[lo + 1:hi], pts[lo], pts[hi])
        k = int(np.argmax(d))
        if d[k] > delta:
            mid = lo + 1 + k
            keep[mid] = True
            stack.append((mid, hi))
            stack.append((lo, mid))
    return [int(i) for i in np.flatnonzero(keep)]


def _is_fixed(node: RootNode) -> bool:
    return node.parent is None or len(node.children) != 1


def chains(graph: RootGraph) -> list[list[RootNode]]:
    """Maximal runs ``[fixed, interior..., fixed]`` between fixed nodes."""
    out = []
    for start in graph.nodes():
        if not _is_fixed(start):
            continue
        for child in start.children:
            chain = [start, child]
            while not _is_fixed(chain[-1]):
                chain.append(chain[-1].children[0])
            out.append(chain)
    return out


def simplify_graph(g: RootGraph, delta: float) -> RootGraph:
    """Copy of ``g`` with each chain between fixed nodes reduced by Douglas-Peucker.

    Fixed nodes are the root, the leaves and every node with two or more
    children.  ``delta = 0`` only drops exactly collinear interior nodes.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    g = g.copy()
    for chain in chains(g):
        kept = douglas_peucker([n.pos for n in chain], delta)
        if len(kept) == len(chain):
            continue
        for a, b in zip(kept, kept[1:]):
            if b == a + 1:
                continue
            upper, lower = chain[a], chain[b]
            slot = upper.children.index(chain[a + 1])
            chain[a + 1].parent = None
            upper.children[slot] = lower
            lower.parent = upper
    return g


def max_deviation(original_chain, simplified_chain) -> float:
    """Largest distance from an original point to the simplified polyline."""
    orig = np.asarray(original_chain, dtype=np.float64)
    simp = np.asarray(simplified_chain, dtype=np.float64)
    if len(orig) == 0 or len(simp) == 0:
        raise ValueError("chains must be non-empty")
    if not (np.array_equal(orig[0], simp[0]) and np.array_equal(orig[-1], simp[-1])):
        raise ValueError("chains do not share endpoints")
    if len(simp) == 1:
        return float(np.max(np.linalg.norm(orig - simp[0], axis=1)))
    dist = np.full(len(orig), np.inf)
    for a, b in zip(simp[:-1], simp[1:]):
        dist = np.minimum(dist, _segment_distances(orig, a, b))
    return float(dist.max())
