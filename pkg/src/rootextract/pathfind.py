"""Dijkstra over the 26-connected voxel grid with early stopping and gap bridging.

Each step into a voxel costs that voxel's value; the start voxel costs 0.
A voxel is a *gap* voxel when its cost exceeds half the largest finite cost.
With ``gap_len > 0`` a path may run through at most ``gap_len`` consecutive
gap voxels, ignoring the ``omega`` cutoff while it does; on re-entering
no-gap space the entry voxel is charged ``anchor + k * c(entry)``, where
``anchor`` is the path cost at the last no-gap voxel and ``k`` the number of
steps from it to the entry (gap voxels crossed plus one), as if the whole
stretch had cost what the entry costs.  ``gap_len = 0`` is ordinary
Dijkstra with a cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import dijkstra_kernel
from .costmap import ExtractionConfig
from .volume import Position, Volume, unflatten


class UnreachableError(ValueError):
    pass


@dataclass(frozen=True)
class PathField:
    """Per-voxel shortest-path state, all arrays flat in x-fastest order."""

    dims: Position
    start: Position
    cost: np.ndarray  # float64, inf where unreached
    pred: np.ndarray  # int64 flat index, -1 for none
    path_len: np.ndarray  # int32
    anchor_idx: np.ndarray  # int32
    anchor_cost: np.ndarray  # float64
    gap_threshold: float
    pop_order: np.ndarray | None = None
    pop_cost: np.ndarray | None = None

    @property
    def cost_volume(self) -> Volume:
        return Volume.from_flat(self.dims, self.cost)

    def _index(self, p) -> int:
        nx, ny, nz = self.dims
        x, y, z = p
        if not (0 <= x < nx and 0 <= y < ny and 0 <= z < nz):
            raise IndexError(f"position {tuple(p)} outside volume of dims {self.dims}")
        return int(x + nx * (y + ny * z))

    def cost_at(self, p) -> float:
        return float(self.cost[self._index(p)])

    def reachable(self, p) -> bool:
        return bool(np.isfinite(self.cost[self._index(p)]))

    def is_gap(self, p) -> bool:
        i = self._index(p)
        return bool(self.anchor_idx[i] < self.path_len[i])


def gap_threshold(c_gap: np.ndarray) -> float:
    finite = c_gap[np.isfinite(c_gap)]
    return float(finite.max()) / 2.0 if finite.size else np.inf


def shortest_paths(c_gap: Volume, p0, cfg: ExtractionConfig | None = None, *,
                   omega: float | None = None, gap_len: int | None = None,
                   record: bool = False) -> PathField:
    """Single-source shortest paths from ``p0`` over ``c_gap``.

    ``omega`` and ``gap_len`` default to the values in ``cfg``.  Voxels with
    infinite cost are never entered.  With ``record`` the expansion order is
    kept on the result (``pop_order``/``pop_cost``).
    """
    cfg = cfg or ExtractionConfig()
    omega = cfg.omega if omega is None else omega
    gap_len = cfg.gap_len if gap_len is None else gap_len
    p0 = c_gap.check(p0)
    flat = np.ascontiguousarray(c_gap.data, dtype=np.float64).reshape(-1)
    start = c_gap.flat_index(p0)
    if not np.isfinite(flat[start]):
        raise ValueError(f"start point {p0} has infinite cost")
    n = flat.size
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    plen = np.zeros(n, dtype=np.int32)
    aidx = np.zeros(n, dtype=np.int32)
    acost = np.full(n, np.inf)
    locked = np.zeros(n, dtype=np.uint8)
    thresh = gap_threshold(flat)
    nx, ny, nz = c_gap.dims
    order, order_cost = dijkstra_kernel(
        flat, nx, ny, nz, start, float(omega), int(gap_len), thresh,
        dist, pred, plen, aidx, acost, locked, record,
    )
    return PathField(
        dims=c_gap.dims, start=p0, cost=dist, pred=pred, path_len=plen,
        anchor_idx=aidx, anchor_cost=acost, gap_threshold=thresh,
        pop_order=order if record else None, pop_cost=order_cost if record else None,
    )


def trace_indices(field: PathField, index: int) -> list[int]:
    if not np.isfinite(field.cost[index]):
        raise UnreachableError(f"{unflatten(index, field.dims)} is unreachable from {field.start}")
    chain = []
    q = index
    while q >= 0:
        chain.append(q)
        if len(chain) > field.cost.size:
            raise RuntimeError("predecessor cycle")
        q = int(field.pred[q])
    chain.reverse()
    return chain


def trace_path(field: PathField, p) -> list[Position]:
    """Voxels from the start point to ``p``, both included."""
    return [unflatten(i, field.dims) for i in trace_indices(field, field._index(p))]
