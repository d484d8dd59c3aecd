"""Compiled inner loops.  Everything here works on flat x-fastest buffers."""

import heapq

import numpy as np
from numba import njit, prange

from .volume import NEIGHBOR_OFFSETS

# face neighbours first, then edges, then corners: among equal-cost
# candidates the earlier push wins, so straight moves beat diagonal ones
_NB = NEIGHBOR_OFFSETS[np.argsort((NEIGHBOR_OFFSETS ** 2).sum(axis=1), kind="stable")].copy()


@njit(parallel=True, cache=True)
def radius_map_kernel(filled, offsets, shell_end, sizes, fill_ratio, out):
    """Growing-sphere radius per voxel.

    ``offsets`` are sphere offsets sorted by squared norm; ``shell_end[r]`` is
    the number of offsets with norm <= r and ``sizes[r] == shell_end[r]``
    as float.  Out-of-bounds positions count as unfilled.
    """
    nz, ny, nx = filled.shape
    r_cap = shell_end.shape[0] - 1
    for z in prange(nz):
        for y in range(ny):
            for x in range(nx):
                if not filled[z, y, x]:
                    out[z, y, x] = 0
                    continue
                count = 1
                best = 0
                for r in range(1, r_cap + 1):
                    for k in range(shell_end[r - 1], shell_end[r]):
                        qx = x + offsets[k, 0]
                        qy = y + offsets[k, 1]
                        qz = z + offsets[k, 2]
                        if 0 <= qx < nx and 0 <= qy < ny and 0 <= qz < nz:
                            if filled[qz, qy, qx]:
                                count += 1
                    if count / sizes[r] >= fill_ratio:
                        best = r
                    else:
                        break
                out[z, y, x] = best


@njit(cache=True)
def dijkstra_kernel(cost, nx, ny, nz, start, omega, gap_len, gap_thresh,
                    dist, pred, plen, aidx, acost, locked, record):
    """Shortest paths from ``start`` with early stopping and gap bridging.

    ``gap_len == 0`` disables gap handling entirely (plain Dijkstra with the
    ``omega`` cutoff).  Gap voxels of an accepted bridge are locked: the
    cheap entry voxel would otherwise re-relax them and close a predecessor
    cycle.  Returns the flat indices and costs of every pop that
    led to an expansion, in order, when ``record`` is set.
    """
    order_idx = [np.int64(0) for _ in range(0)]
    order_cost = [np.float64(0.0) for _ in range(0)]
    dist[start] = 0.0
    pred[start] = -1
    plen[start] = 0
    aidx[start] = 0
    acost[start] = 0.0
    heap = [(0.0, np.int64(0), np.int64(start))]
    seq = np.int64(1)
    nxy = nx * ny
    while len(heap) > 0:
        c, _, p = heapq.heappop(heap)
        if c > dist[p]:
            continue
        if record:
            order_idx.append(p)
            order_cost.append(c)
        pz = p // nxy
        py = (p // nx) % ny
        px = p % nx
        n = plen[p] + 1
        p_anchor = aidx[p]
        p_is_gap = p_anchor < plen[p]
        for k in range(26):
            qx = px + _NB[k, 0]
            qy = py + _NB[k, 1]
            qz = pz + _NB[k, 2]
            if qx < 0 or qx >= nx or qy < 0 or qy >= ny or qz < 0 or qz >= nz:
                continue
            q = qx + nx * (qy + ny * qz)
            if locked[q]:
                continue
            cq = cost[q]
            if not np.isfinite(cq):
                continue
            bridged = False
            if gap_len > 0 and cq > gap_thresh:
                # gap voxel: omega ignored, run length capped
                if n - p_anchor > gap_len:
                    continue
                cand = c + cq
                new_anchor = p_anchor
                new_acost = acost[p]
            else:
                if gap_len > 0 and p_is_gap:
                    cand = acost[p] + (n - p_anchor) * cq
                    bridged = True
                else:
                    cand = c + cq
                if cand >= omega:
                    continue
                new_anchor = n
                new_acost = cand
            if cand < dist[q]:
                dist[q] = cand
                pred[q] = p
                plen[q] = n
                aidx[q] = new_anchor
                acost[q] = new_acost
                heapq.heappush(heap, (cand, seq, q))
                seq += 1
                if bridged:
                    g = p
                    while g >= 0 and aidx[g] < plen[g]:
                        locked[g] = 1
                        g = pred[g]
    return np.array(order_idx, dtype=np.int64), np.array(order_cost, dtype=np.float64)


@njit(cache=True)
def mark_chains_kernel(ext, pred, out):
    """Set ``out`` on every voxel of every predecessor chain from an ``ext`` voxel."""
    for p in range(ext.shape[0]):
        if not ext[p]:
            continue
        q = p
        steps = 0
        while q >= 0 and not out[q]:
            out[q] = 1
            q = pred[q]
            steps += 1
            if steps > ext.shape[0]:
                break
