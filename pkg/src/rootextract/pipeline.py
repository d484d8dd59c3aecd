"""End-to-end extraction: segmentation -> LCC -> skeleton graph."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .costmap import (
    ExtractionConfig,
    cost_map_gap,
    cost_map_radius,
    cost_map_relative,
    cost_map_seg,
    radius_map,
    radius_map_lcc,
)
from .graph import RootGraph
from .lcc import extract_lcc
from .pathfind import shortest_paths
from .simplify import simplify_graph
from .skeleton import extract_graph
from .volume import Position, Volume

log = logging.getLogger(__name__)

COST_MAPS = ("rad", "rel")


class AutoStartError(ValueError):
    pass


def auto_start(seg: Volume, cfg: ExtractionConfig, slices: int = 10,
               radius: Volume | None = None) -> Position:
    """Voxel of largest fitted radius within the ``slices`` slices nearest the shoot.

    Ties go to the lexicographically smallest ``(x, y, z)``.
    """
    r = radius if radius is not None else radius_map(seg, cfg.gamma, cfg.fill_ratio_seg)
    nz = r.data.shape[0]
    k = min(slices, nz)
    zs = np.arange(k) if cfg.shoot_at_low_z else np.arange(nz - k, nz)
    top = r.data[zs]
    candidates = seg.data[zs] >= cfg.gamma
    if not candidates.any():
        raise AutoStartError(
            f"no voxel at or above gamma={cfg.gamma} in the {k} shoot-side slices; pass --start x,y,z"
        )
    best = top[candidates].max()
    zi, yy, xx = np.nonzero(candidates & (top == best))
    pts = sorted(zip(xx.tolist(), yy.tolist(), zs[zi].tolist()))
    return tuple(int(c) for c in pts[0])


@dataclass
class PipelineResult:
    graph: RootGraph
    full_graph: RootGraph
    start: Position
    volumes: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def run_pipeline(seg: Volume, cfg: ExtractionConfig, start=None, *, cost: str = "rad",
                 skip_lcc: bool = False, keep_volumes: bool = False) -> PipelineResult:
    """Run every stage and return the simplified and full-resolution graphs.

    ``start=None`` picks the start point with :func:`auto_start`.  With
    ``keep_volumes`` the intermediate volumes are returned under the keys
    ``c_seg``, ``c_gap``, ``c_tau``, ``lcc``, ``r_lcc``, ``c_skel`` and
    ``v_occ``.
    """
    if cost not in COST_MAPS:
        raise ValueError(f"cost must be one of {COST_MAPS}, got {cost!r}")
    timings: dict[str, float] = {}
    volumes: dict[str, Volume] = {}
    t0 = time.perf_counter()

    def lap(name):
        nonlocal t0
        now = time.perf_counter()
        timings[name] = now - t0
        t0 = now

    r_seg = None
    if start is None:
        r_seg = radius_map(seg, cfg.gamma, cfg.fill_ratio_seg)
        start = auto_start(seg, cfg, radius=r_seg)
        log.info("auto start point %s", start)
    start = seg.check(start)

    if skip_lcc:
        lcc = Volume((seg.data >= cfg.gamma).astype(np.uint8))
        if not lcc.data[start[2], start[1], start[0]]:
            raise ValueError(f"start point {start} lies outside the thresholded input")
        lap("threshold")
    else:
        c_seg = cost_map_seg(seg, cfg, radius=r_seg)
        c_gap = cost_map_gap(seg, c_seg, cfg)
        lap("cost_maps")
        field_ = shortest_paths(c_gap, start, cfg)
        lap("shortest_paths")
        lcc = extract_lcc(seg, field_, cfg)
        lap("lcc")
        if keep_volumes:
            volumes.update(c_seg=c_seg, c_gap=c_gap, c_tau=field_.cost_volume)
        del c_seg, c_gap, field_

    r_lcc = radius_map_lcc(lcc, cfg)
    c_skel = (cost_map_radius if cost == "rad" else cost_map_relative)(r_lcc, mask=lcc)
    lap("skeleton_costs")
    full, state = extract_graph(lcc, r_lcc, c_skel, start, cfg, return_state=True)
    lap("extract_graph")
    graph = simplify_graph(full, cfg.delta) if cfg.delta > 0 else full
    lap("simplify")
    if keep_volumes:
        volumes.update(lcc=lcc, r_lcc=r_lcc, c_skel=c_skel, v_occ=state.v_occ)
    log.info("graph: %d nodes (%d before simplification), %d branches",
             graph.node_count, full.node_count, full.branch_count - 1)
    return PipelineResult(graph, full, start, volumes, timings)
