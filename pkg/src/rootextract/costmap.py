"""Growing-sphere radius estimation and the voxel cost maps built on it."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from ._kernels import radius_map_kernel
from .volume import NEIGHBOR_OFFSETS, Volume, sphere_mask


class EmptySegmentationError(ValueError):
    pass


class EmptyLCCError(ValueError):
    pass


@dataclass(frozen=True)
class ExtractionConfig:
    """Every tunable of the extraction pipeline.

    Distances are in voxels.  ``gap_len = 0`` disables gap closing and
    ``delta = 0`` disables simplification.
    """

    gamma: float = 0.5
    omega: float = 10.0
    gap_len: int = 8
    w_rad: float = 0.5
    epsilon: float = 1e-6
    beta: float = 1.2
    delta: float = 1.0
    cut_z: Optional[int] = None
    fill_ratio_seg: float = 0.75
    fill_ratio_lcc: float = 0.9
    quench_threshold: int = 20
    gap_penalty: float = 10.0
    # the shoot sits at low z; flips cut_z and auto-start when False
    shoot_at_low_z: bool = True

    def __post_init__(self) -> None:
        checks = [
            (0.0 <= self.gamma <= 1.0, "gamma must lie in [0, 1]"),
            (self.omega > 0, "omega must be positive"),
            (self.gap_len >= 0 and float(self.gap_len).is_integer(), "gap_len must be a nonnegative integer"),
            (0.0 <= self.w_rad <= 1.0, "w_rad must lie in [0, 1]"),
            (self.epsilon > 0, "epsilon must be positive"),
            (1.1 <= self.beta <= 2.0, "beta must lie in [1.1, 2.0]"),
            (self.delta >= 0, "delta must be nonnegative"),
            (self.cut_z is None or self.cut_z >= 0, "cut_z must be nonnegative"),
            (0.0 < self.fill_ratio_seg <= 1.0, "fill_ratio_seg must lie in (0, 1]"),
            (0.0 < self.fill_ratio_lcc <= 1.0, "fill_ratio_lcc must lie in (0, 1]"),
            (0 <= self.quench_threshold <= 26, "quench_threshold must lie in [0, 26]"),
            (self.gap_penalty >= 1.0, "gap_penalty must be at least 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def with_(self, **changes) -> "ExtractionConfig":
        return replace(self, **changes)


# -- radius estimation ------------------------------------------------------

def _sphere_size(r: int) -> int:
    """|phi_r| by counting columns, without materialising the offsets."""
    d = np.arange(-r, r + 1)
    rem = r * r - (d[:, None] ** 2 + d[None, :] ** 2)
    rem = rem[rem >= 0]
    return int(np.sum(2 * np.floor(np.sqrt(rem) + 1e-9).astype(np.int64) + 1))


def _radius_cap(n_filled: int, fill_ratio: float) -> int:
    # smallest r at which even a fully filled volume fails the test
    r = 1
    while n_filled / _sphere_size(r) >= fill_ratio:
        r += 1
    return r


def _shell_ordered(r_cap: int) -> tuple[np.ndarray, np.ndarray]:
    offsets = sphere_mask(r_cap).offsets
    norm2 = np.sum(offsets * offsets, axis=1)
    order = np.lexsort((offsets[:, 0], offsets[:, 1], offsets[:, 2], norm2))
    offsets = np.ascontiguousarray(offsets[order], dtype=np.int64)
    norm2 = norm2[order]
    shell_end = np.searchsorted(norm2, np.arange(r_cap + 1) ** 2, side="right").astype(np.int64)
    return offsets, shell_end


def radius_map(vol: Volume, threshold: float, fill_ratio: float) -> Volume:
    """Largest radius whose every smaller sphere is at least ``fill_ratio`` filled.

    A voxel counts as filled when ``vol >= threshold``.  The denominator is
    the full sphere size even where the sphere leaves the volume.  Voxels
    below threshold get radius 0.
    """
    if not 0.0 < fill_ratio <= 1.0:
        raise ValueError("fill_ratio must lie in (0, 1]")
    filled = np.ascontiguousarray(vol.data >= threshold)
    out = np.zeros(filled.shape, dtype=np.int32)
    n_filled = int(filled.sum())
    if n_filled == 0:
        return Volume(out)
    r_cap = _radius_cap(n_filled, fill_ratio)
    offsets, shell_end = _shell_ordered(r_cap)
    sizes = shell_end.astype(np.float64)
    radius_map_kernel(filled, offsets, shell_end, sizes, float(fill_ratio), out)
    return Volume(out)


def radius_map_lcc(lcc: Volume, cfg: ExtractionConfig) -> Volume:
    return radius_map(lcc, 1.0, cfg.fill_ratio_lcc)


# -- LCC-stage cost maps ----------------------------------------------------

def cost_map_seg(seg: Volume, cfg: ExtractionConfig, radius: Volume | None = None) -> Volume:
    """Inverted intensity-plus-radius cost, floored at ``epsilon``."""
    r = radius if radius is not None else radius_map(seg, cfg.gamma, cfg.fill_ratio_seg)
    data = seg.data.astype(np.float64)
    r_max = float(r.data.max())
    c_inv = data.copy()
    if r_max > 0:
        c_inv += cfg.w_rad * (r.data / r_max)
    c_max = float(c_inv.max())
    if not c_max > 0:
        raise EmptySegmentationError("empty segmentation: every voxel has zero intensity and radius")
    return Volume(1.0 - c_inv / c_max + cfg.epsilon)


def cost_map_gap(seg: Volume, c_seg: Volume, cfg: ExtractionConfig) -> Volume:
    """Penalise sub-threshold voxels by ``gap_penalty``."""
    below = seg.data < cfg.gamma
    return Volume(np.where(below, c_seg.data * cfg.gap_penalty, c_seg.data))


# -- skeleton-stage cost maps ----------------------------------------------

def dominance_count(r: Volume) -> np.ndarray:
    """For each voxel, how many of its 26 neighbours have strictly smaller radius.

    Out-of-bounds neighbours count as radius 0.
    """
    data = r.data
    padded = np.pad(data, 1, mode="constant", constant_values=0)
    nz, ny, nx = data.shape
    count = np.zeros(data.shape, dtype=np.uint8)
    for dx, dy, dz in NEIGHBOR_OFFSETS:
        shifted = padded[1 + dz:1 + dz + nz, 1 + dy:1 + dy + ny, 1 + dx:1 + dx + nx]
        count += data > shifted
    return count


def _skeleton_mask(r_lcc: Volume, mask: Volume | None) -> np.ndarray:
    if mask is None:
        return r_lcc.data > 0
    return mask.data > 0


def cost_map_radius(r_lcc: Volume, mask: Volume | None = None) -> Volume:
    """``1 - R/max(R)`` inside the skeleton domain, infinity outside.

    The domain is ``R > 0`` unless an explicit ``mask`` (normally the LCC
    itself) is passed, in which case thin LCC voxels with ``R = 0`` stay
    traversable at cost 1.
    """
    r_max = float(r_lcc.data.max())
    inside = _skeleton_mask(r_lcc, mask)
    if not inside.any():
        raise EmptyLCCError("empty LCC: no voxel with positive radius")
    c = 1.0 - r_lcc.data / r_max if r_max > 0 else np.ones(r_lcc.data.shape)
    return Volume(np.where(inside, c, np.inf))


def cost_map_relative(r_lcc: Volume, mask: Volume | None = None) -> Volume:
    """One minus the fraction of the 26 neighbours with strictly smaller radius."""
    inside = _skeleton_mask(r_lcc, mask)
    if not inside.any():
        raise EmptyLCCError("empty LCC: no voxel with positive radius")
    c = 1.0 - dominance_count(r_lcc) / 26.0
    return Volume(np.where(inside, c, np.inf))
