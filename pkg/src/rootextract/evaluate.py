"""Distance-tolerant F1 score between two root graphs.

Both graphs are densified: every node contributes a sample carrying the
direction of its incoming edge (the root takes its first outgoing edge's
direction), and edges longer than the spacing ``s`` get
extra samples every ``s`` from the parent end.  Target samples are then
visited in order (branch id, then depth) and each grabs the closest still
unclaimed extracted sample that points the same way (positive dot product)
and lies within ``d`` of it, either directly or via the short segment back to
that sample's predecessor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .graph import RootGraph

DEFAULT_SPACING = 1.0
DEFAULT_TOLERANCE = 15.0
# dot products this close to zero count as perpendicular, so rounding cannot flip the angle test
DOT_EPS = 1e-12


@dataclass(frozen=True)
class DirectedSample:
    pos: tuple[float, float, float]
    dir: Optional[tuple[float, float, float]]  # None: undefined direction
    prev: Optional[tuple[float, float, float]]


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "EvalReport":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp, fp, fn, precision, recall, f1)

    def as_line(self) -> str:
        return (f"tp={self.tp} fp={self.fp} fn={self.fn} "
                f"precision={self.precision:.6f} recall={self.recall:.6f} f1={self.f1:.6f}")


def _ordered_nodes(g: RootGraph):
    depth = g.depth_of()
    nodes = list(g.nodes())
    return sorted(nodes, key=lambda n: (n.branch_id, depth[id(n)]))


def _root_direction(root) -> Optional[tuple[float, float, float]]:
    """Direction of the first non-degenerate outgoing edge; None for a bare root."""
    p = root.position
    for child in root.children:
        vec = child.position - p
        length = float(np.linalg.norm(vec))
        if length > 0.0:
            return tuple((vec / length).tolist())
    return None


def resample(g: RootGraph, spacing: float = DEFAULT_SPACING) -> list[DirectedSample]:
    """Densified, direction-tagged samples of ``g`` in matching order."""
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    out: list[DirectedSample] = []
    for node in _ordered_nodes(g):
        p = node.position
        if node.parent is None:
            out.append(DirectedSample(tuple(p.tolist()), _root_direction(node), None))
            continue
        parent = node.parent.position
        vec = p - parent
        length = float(np.linalg.norm(vec))
        if length == 0.0:
            out.append(DirectedSample(tuple(p.tolist()), None, tuple(parent.tolist())))
            continue
        unit = vec / length
        direction = tuple(unit.tolist())
        prev = parent
        i = 1
        # stop short of the child so no sample duplicates it through rounding
        while i * spacing < length - 1e-9 * spacing:
            pt = parent + unit * (i * spacing)
            out.append(DirectedSample(tuple(pt.tolist()), direction, tuple(prev.tolist())))
            prev = pt
            i += 1
        out.append(DirectedSample(tuple(p.tolist()), direction, tuple(prev.tolist())))
    return out


def _arrays(samples: Sequence[DirectedSample]):
    n = len(samples)
    pos = np.array([s.pos for s in samples], dtype=np.float64).reshape(n, 3)
    dirs = np.array([s.dir if s.dir is not None else (np.nan,) * 3 for s in samples],
                    dtype=np.float64).reshape(n, 3)
    prev = np.array([s.prev if s.prev is not None else s.pos for s in samples],
                    dtype=np.float64).reshape(n, 3)
    return pos, dirs, prev


def compatible(t: DirectedSample, g: DirectedSample, d: float) -> bool:
    """Whether target sample ``t`` may correspond to extracted sample ``g``."""
    if t.dir is not None and g.dir is not None:
        if float(np.dot(t.dir, g.dir)) <= DOT_EPS:
            return False
    pt, pg = np.asarray(t.pos), np.asarray(g.pos)
    if float(np.linalg.norm(pt - pg)) <= d:
        return True
    if g.prev is None:
        return False
    return _seg_dist(pt[None, :], np.asarray(g.prev)[None, :], pg[None, :])[0] <= d


def _seg_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    num = np.einsum("ij,ij->i", p - a, ab)
    t = np.divide(num, denom, out=np.zeros_like(num), where=denom > 0)
    t = np.clip(t, 0.0, 1.0)
    return np.linalg.norm(p - (a + t[:, None] * ab), axis=1)


def match_samples(l_g: Sequence[DirectedSample], l_t: Sequence[DirectedSample],
                  d: float) -> list[tuple[int, int]]:
    """Greedy one-to-one correspondences ``(target_index, extracted_index)``.

    Among compatible unclaimed extracted samples the one with the smallest
    point distance wins, ties going to the lower index.
    """
    if d < 0:
        raise ValueError("tolerance must be nonnegative")
    if not l_g or not l_t:
        return []
    g_pos, g_dir, g_prev = _arrays(l_g)
    t_pos, t_dir, _ = _arrays(l_t)
    reach = d + float(np.max(np.linalg.norm(g_pos - g_prev, axis=1))) + 1e-9
    tree = cKDTree(g_pos)
    claimed = np.zeros(len(l_g), dtype=bool)
    pairs = []
    for ti, cands in enumerate(tree.query_ball_point(t_pos, reach)):
        if not cands:
            continue
        c = np.array(sorted(cands), dtype=np.int64)
        c = c[~claimed[c]]
        if c.size == 0:
            continue
        if not np.isnan(t_dir[ti, 0]):
            dots = g_dir[c] @ t_dir[ti]
            c = c[np.isnan(dots) | (dots > DOT_EPS)]
            if c.size == 0:
                continue
        pt = np.broadcast_to(t_pos[ti], (c.size, 3))
        point_d = np.linalg.norm(g_pos[c] - t_pos[ti], axis=1)
        seg_d = _seg_dist(pt, g_prev[c], g_pos[c])
        ok = np.minimum(point_d, seg_d) <= d
        if not ok.any():
            continue
        c, point_d = c[ok], point_d[ok]
        best = int(c[int(np.argmin(point_d))])
        claimed[best] = True
        pairs.append((ti, best))
    return pairs


def score_samples(l_g: Sequence[DirectedSample], l_t: Sequence[DirectedSample],
                  d: float = DEFAULT_TOLERANCE) -> EvalReport:
    tp = len(match_samples(l_g, l_t, d))
    return EvalReport.from_counts(tp, len(l_g) - tp, len(l_t) - tp)


def score(extracted: RootGraph, target: RootGraph, s: float = DEFAULT_SPACING,
          d: float = DEFAULT_TOLERANCE) -> EvalReport:
    """Precision/recall/F1 of ``extracted`` against ``target``."""
    return score_samples(resample(extracted, s), resample(target, s), d)
