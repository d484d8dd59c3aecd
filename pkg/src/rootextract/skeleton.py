"""Curve skeletonization of the LCC.

Quench points (voxels whose radius strictly beats more than
``quench_threshold`` of their 26 neighbours) are visited from the one
furthest from the start point inward.  Each unvisited quench point grows a
branch along its shortest path until the path enters the node-handle region
of an existing branch, where the new branch is attached.  Around every new
node an occupancy sphere of radius ``floor(R * beta)`` suppresses later quench
points, and a node-handle sphere of half that radius marks where later
branches attach.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .costmap import ExtractionConfig, dominance_count
from .graph import RootGraph, RootNode
from .pathfind import PathField, shortest_paths
from .volume import Position, Volume, sphere_points

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuenchList:
    points: list[Position]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def find_quench_points(r_lcc: Volume, p0, cfg: ExtractionConfig) -> QuenchList:
    """Quench points sorted by decreasing distance to ``p0``, ties by position."""
    count = dominance_count(r_lcc)
    keep = count > cfg.quench_threshold
    if cfg.cut_z is not None:
        z = np.arange(keep.shape[0])[:, None, None]
        keep &= (z >= cfg.cut_z) if cfg.shoot_at_low_z else (z <= cfg.cut_z)
    zz, yy, xx = np.nonzero(keep)
    if xx.size == 0:
        return QuenchList([])
    x0, y0, z0 = p0
    d2 = (xx - x0) ** 2 + (yy - y0) ** 2 + (zz - z0) ** 2
    # integer squared distances keep the ordering exact
    order = np.lexsort((zz, yy, xx, -d2.astype(np.int64)))
    return QuenchList([(int(xx[i]), int(yy[i]), int(zz[i])) for i in order])


def dilated_radii(r_lcc_val: float, beta: float) -> tuple[int, int]:
    """Integer occupancy and node-handle sphere radii for a node of radius ``r_lcc_val``."""
    r_dil = int(math.floor(r_lcc_val * beta + 1e-9))
    return r_dil, r_dil // 2


def node_fill(v_occ: Volume, v_node: Volume | None, p, r_lcc_val: float, handle: int,
              cfg: ExtractionConfig) -> None:
    """Mark occupancy within ``r_dil`` and write ``handle`` within ``r_dil // 2``.

    Writes in place into the volumes' arrays; ``v_node=None`` skips the
    handle fill.  Later handles overwrite earlier ones.
    """
    r_dil, r_core = dilated_radii(r_lcc_val, cfg.beta)
    pts = sphere_points(v_occ, p, r_dil)
    v_occ.data[pts[:, 2], pts[:, 1], pts[:, 0]] = 1
    if v_node is not None:
        pts = sphere_points(v_node, p, r_core)
        v_node.data[pts[:, 2], pts[:, 1], pts[:, 0]] = handle


@dataclass
class SkeletonState:
    """Control volumes left behind by :func:`extract_graph` (for debugging)."""

    v_occ: Volume
    v_node: Volume
    field: PathField
    quench: QuenchList
    skipped: int = 0


def extract_graph(lcc: Volume, r_lcc: Volume, cost: Volume, p0, cfg: ExtractionConfig,
                  *, return_state: bool = False):
    """Build the full-resolution root graph.

    ``cost`` is the centerline cost map (infinite outside the LCC).  Returns
    the graph, or ``(graph, SkeletonState)`` with ``return_state``.
    """
    p0 = lcc.check(p0)
    field = shortest_paths(cost, p0, cfg, omega=np.inf, gap_len=0)
    quench = find_quench_points(r_lcc, p0, cfg)
    nx, ny, nz = lcc.dims
    v_occ = Volume.zeros(lcc.dims, np.uint8)
    v_node = Volume.zeros(lcc.dims, np.int64)
    r_data = r_lcc.data

    root = RootNode(p0, float(r_data[p0[2], p0[1], p0[0]]), 0)
    nodes = [root]  # handle h refers to nodes[h - 1]
    v_occ.data[p0[2], p0[1], p0[0]] = 1
    v_node.data[p0[2], p0[1], p0[0]] = 1
    occ = v_occ.data.reshape(-1)
    handles = v_node.data.reshape(-1)
    id_run = 1
    skipped = 0

    for q in quench:
        qi = q[0] + nx * (q[1] + ny * q[2])
        if occ[qi] >= 1:
            continue
        if not np.isfinite(field.cost[qi]):
            skipped += 1
            log.debug("quench point %s is not connected to the start point", q)
            continue
        created: list[RootNode] = []
        i = qi
        while handles[i] == 0:
            x, y, z = i % nx, (i // nx) % ny, i // (nx * ny)
            node = RootNode((int(x), int(y), int(z)), float(r_data[z, y, x]), id_run)
            if created:
                node.add_child(created[-1])
            created.append(node)
            i = int(field.pred[i])
        if not created:
            # the quench point already sits on an attached node region
            continue
        nodes[handles[i] - 1].add_child(created[-1])
        for node in created:
            nodes.append(node)
            node_fill(v_occ, v_node, node.pos, node.radius, len(nodes), cfg)
        id_run += 1

    if skipped:
        log.warning("skipped %d quench point(s) with no path to the start point", skipped)
    graph = RootGraph(root, branch_count=id_run)
    if return_state:
        return graph, SkeletonState(v_occ, v_node, field, quench, skipped)
    return graph
