"""Binary largest-connected-component volume from a path field."""

from __future__ import annotations

import numpy as np

from ._kernels import mark_chains_kernel
from .costmap import EmptyLCCError, ExtractionConfig
from .pathfind import PathField
from .volume import Volume


def extract_lcc(seg: Volume, field: PathField, cfg: ExtractionConfig) -> Volume:
    """Reached above-threshold voxels plus every voxel on their shortest paths.

    A voxel is *extracted* when its path cost is finite and ``seg >= gamma``;
    the LCC is the union of the predecessor chains of all extracted voxels.
    Each chain is walked until it meets an already marked voxel.
    """
    if seg.dims != field.dims:
        raise ValueError(f"segmentation dims {seg.dims} differ from path field dims {field.dims}")
    ext = np.isfinite(field.cost) & (seg.data.reshape(-1) >= cfg.gamma)
    if not ext.any():
        raise EmptyLCCError("empty LCC: no reachable voxel at or above gamma")
    out = np.zeros(field.cost.size, dtype=np.uint8)
    mark_chains_kernel(ext, field.pred, out)
    return Volume.from_flat(seg.dims, out)
