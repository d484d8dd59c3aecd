"""Deterministic tube phantoms with exact ground-truth centerline graphs.

A phantom spec is JSON::

    {
      "dims": [64, 64, 64],
      "tubes": [
        {"points": [[32, 32, 2], [32, 32, 62]], "radius": 3,
         "gaps": [[28, 32]]}
      ],
      "blobs": [{"center": [10, 10, 40], "radius": 3, "intensity": 1.0}],
      "noise": 0.0
    }

``radius`` is a number or one value per segment.  ``gaps`` are half-open
arc-length intervals ``[start, end)`` measured from the tube's first point;
tube voxels whose projection falls inside one are left empty.  The first
tube's first point is the graph root; every later tube hangs off the nearest
existing graph vertex.  ``noise`` adds seeded uniform noise of that
amplitude, clipped to [0, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import RootGraph, RootNode
from .volume import Volume


class PhantomError(ValueError):
    pass


@dataclass
class Tube:
    points: list
    radius: float | list = 3.0
    gaps: list = field(default_factory=list)

    def radii(self) -> list[float]:
        n_seg = len(self.points) - 1
        if isinstance(self.radius, (int, float)):
            return [float(self.radius)] * n_seg
        if len(self.radius) != n_seg:
            raise PhantomError(f"tube has {n_seg} segments but {len(self.radius)} radii")
        return [float(r) for r in self.radius]


@dataclass
class Blob:
    center: list
    radius: float
    intensity: float = 1.0


@dataclass
class PhantomSpec:
    dims: tuple
    tubes: list = field(default_factory=list)
    blobs: list = field(default_factory=list)
    noise: float = 0.0

    @classmethod
    def from_dict(cls, raw: dict) -> "PhantomSpec":
        try:
            return cls(
                dims=tuple(int(v) for v in raw["dims"]),
                tubes=[Tube(t["points"], t.get("radius", 3.0), [tuple(g) for g in t.get("gaps", [])])
                       for t in raw.get("tubes", [])],
                blobs=[Blob(b["center"], float(b["radius"]), float(b.get("intensity", 1.0)))
                       for b in raw.get("blobs", [])],
                noise=float(raw.get("noise", 0.0)),
            )
        except (KeyError, TypeError) as exc:
            raise PhantomError(f"malformed phantom spec: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "tubes": [{"points": [list(p) for p in t.points], "radius": t.radius,
                       "gaps": [list(g) for g in t.gaps]} for t in self.tubes],
            "blobs": [{"center": list(b.center), "radius": b.radius, "intensity": b.intensity}
                      for b in self.blobs],
            "noise": self.noise,
        }


def load_spec(path) -> PhantomSpec:
    return PhantomSpec.from_dict(json.loads(Path(path).read_text()))


def _stamp_tube(data: np.ndarray, tube: Tube, dims) -> None:
    pts = np.asarray(tube.points, dtype=np.float64)
    radii = tube.radii()
    nx, ny, nz = dims
    arc0 = 0.0
    for a, b, r in zip(pts[:-1], pts[1:], radii):
        ab = b - a
        seg_len = float(np.linalg.norm(ab))
        lo = np.maximum(np.floor(np.minimum(a, b) - r), 0).astype(int)
        hi = np.minimum(np.ceil(np.maximum(a, b) + r), [nx - 1, ny - 1, nz - 1]).astype(int)
        if np.any(hi < lo):
            arc0 += seg_len
            continue
        z, y, x = np.meshgrid(np.arange(lo[2], hi[2] + 1), np.arange(lo[1], hi[1] + 1),
                              np.arange(lo[0], hi[0] + 1), indexing="ij")
        v = np.stack([x, y, z], axis=-1).astype(np.float64)
        if seg_len > 0:
            t = np.clip(((v - a) @ ab) / (seg_len * seg_len), 0.0, 1.0)
        else:
            t = np.zeros(v.shape[:3])
        closest = a + t[..., None] * ab
        inside = np.linalg.norm(v - closest, axis=-1) <= r
        arc = arc0 + t * seg_len
        for g0, g1 in tube.gaps:
            inside &= ~((arc >= g0) & (arc < g1))
        sub = data[lo[2]:hi[2] + 1, lo[1]:hi[1] + 1, lo[0]:hi[0] + 1]
        sub[inside] = 1.0
        arc0 += seg_len


def _stamp_blob(data: np.ndarray, blob: Blob, dims) -> None:
    c = np.asarray(blob.center, dtype=np.float64)
    lo = np.maximum(np.floor(c - blob.radius), 0).astype(int)
    hi = np.minimum(np.ceil(c + blob.radius), np.asarray(dims) - 1).astype(int)
    if np.any(hi < lo):
        return
    z, y, x = np.meshgrid(np.arange(lo[2], hi[2] + 1), np.arange(lo[1], hi[1] + 1),
                          np.arange(lo[0], hi[0] + 1), indexing="ij")
    v = np.stack([x, y, z], axis=-1).astype(np.float64)
    inside = np.linalg.norm(v - c, axis=-1) <= blob.radius
    sub = data[lo[2]:hi[2] + 1, lo[1]:hi[1] + 1, lo[0]:hi[0] + 1]
    sub[inside] = np.maximum(sub[inside], blob.intensity)


def _check_bounds(spec: PhantomSpec) -> None:
    nx, ny, nz = spec.dims
    if min(spec.dims) < 1:
        raise PhantomError(f"dimensions must be positive, got {spec.dims}")
    for i, tube in enumerate(spec.tubes):
        if len(tube.points) < 2:
            raise PhantomError(f"tube {i} needs at least two points")
        for p in tube.points:
            x, y, z = p
            if not (0 <= x <= nx - 1 and 0 <= y <= ny - 1 and 0 <= z <= nz - 1):
                raise PhantomError(f"tube {i} centerline point {list(p)} lies outside volume {spec.dims}")


def ground_truth(spec: PhantomSpec) -> RootGraph:
    if not spec.tubes:
        raise PhantomError("phantom has no tubes")
    first = spec.tubes[0]
    root = RootNode(tuple(float(c) for c in first.points[0]), first.radii()[0], 0)
    nodes = [root]
    for bid, tube in enumerate(spec.tubes, start=1):
        pts = [tuple(float(c) for c in p) for p in tube.points]
        radii = tube.radii()
        if bid == 1:
            parent, start = root, 1
        else:
            d = [np.linalg.norm(np.subtract(n.pos, pts[0])) for n in nodes]
            parent = nodes[int(np.argmin(d))]
            start = 1 if np.allclose(parent.pos, pts[0]) else 0
        for k in range(start, len(pts)):
            node = RootNode(pts[k], radii[max(k - 1, 0)], bid)
            parent.add_child(node)
            nodes.append(node)
            parent = node
    return RootGraph(root, branch_count=len(spec.tubes) + 1)


def generate(spec: PhantomSpec, seed: int = 0) -> tuple[Volume, RootGraph]:
    """Volume (float32 intensities) and ground-truth graph for ``spec``."""
    _check_bounds(spec)
    nx, ny, nz = spec.dims
    data = np.zeros((nz, ny, nx), dtype=np.float64)
    for tube in spec.tubes:
        _stamp_tube(data, tube, spec.dims)
    for blob in spec.blobs:
        _stamp_blob(data, blob, spec.dims)
    if spec.noise > 0:
        rng = np.random.default_rng(seed)
        data = np.clip(data + rng.uniform(-spec.noise, spec.noise, data.shape), 0.0, 1.0)
    return Volume(data.astype(np.float32)), ground_truth(spec)


# -- stock phantoms ---------------------------------------------------------

def straight_tube_spec(n: int = 64, radius: float = 3.0, length: float = 60.0,
                       gap: float = 0.0, gap_start: float | None = None) -> PhantomSpec:
    """Vertical tube entering at low z, centred in an ``n``-cube."""
    c = (n - 1) // 2
    z0 = (n - length) / 2.0
    z0 = float(int(z0))
    tube = Tube([[c, c, z0], [c, c, z0 + length]], radius)
    if gap > 0:
        g0 = gap_start if gap_start is not None else length / 2.0 - gap / 2.0
        tube.gaps = [(g0, g0 + gap)]
    return PhantomSpec((n, n, n), [tube])


def y_junction_spec(n: int = 64, radius: float = 3.0, branch_radius: float | None = None) -> PhantomSpec:
    """Trunk from the top splitting into two diverging branches."""
    c = (n - 1) // 2
    br = radius if branch_radius is None else branch_radius
    top, split, bottom = 2, n // 2 - 2, n - 4
    spread = n // 4
    return PhantomSpec((n, n, n), [
        Tube([[c, c, top], [c, c, split]], radius),
        Tube([[c, c, split], [c - spread, c, bottom]], br),
        Tube([[c, c, split], [c + spread, c, bottom]], br),
    ])
