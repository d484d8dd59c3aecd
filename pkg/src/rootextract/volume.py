"""Dense 3D voxel grids, neighbourhoods, sphere masks and RVOL file I/O.

Layout convention used everywhere in the package: positions are ``(x, y, z)``
tuples and the backing numpy array has shape ``(nz, ny, nx)`` in C order, so
the flat element index of ``(x, y, z)`` is ``x + nx * (y + ny * z)``.  That is
also the byte order of the RVOL file body.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

Position = tuple[int, int, int]

RVOL_MAGIC = "RVOL1"
_DTYPES = {"f32le": np.dtype("<f4"), "u8": np.dtype("u1")}


class VolumeError(Exception):
    """Malformed or inconsistent volume data."""


class VolumeFormatError(VolumeError):
    """An RVOL file could not be parsed."""


# 26-neighbourhood offsets in (dx, dy, dz), dz slowest; this order is the
# expansion order of every shortest-path run and therefore part of the
# deterministic tie-breaking.
NEIGHBOR_OFFSETS: np.ndarray = np.array(
    [(dx, dy, dz) for dz, dy, dx in product((-1, 0, 1), repeat=3) if (dx, dy, dz) != (0, 0, 0)],
    dtype=np.int64,
)


@dataclass(frozen=True)
class Volume:
    """A dense scalar grid.

    ``data`` is indexed ``data[z, y, x]``; use :meth:`from_flat` to build one
    from a flat x-fastest buffer.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.ndim != 3 or min(self.data.shape) < 1:
            raise VolumeError(f"volume data must be a non-empty 3D array, got shape {self.data.shape}")

    @classmethod
    def from_flat(cls, dims: Sequence[int], flat) -> "Volume":
        nx, ny, nz = (int(d) for d in dims)
        if nx < 1 or ny < 1 or nz < 1:
            raise VolumeError(f"dimensions must be positive, got {dims}")
        flat = np.asarray(flat)
        if flat.size != nx * ny * nz:
            raise VolumeError(f"data length {flat.size} does not match dims {nx}x{ny}x{nz}")
        return cls(flat.reshape(nz, ny, nx))

    @classmethod
    def zeros(cls, dims: Sequence[int], dtype=np.float32) -> "Volume":
        nx, ny, nz = dims
        return cls(np.zeros((nz, ny, nx), dtype=dtype))

    @property
    def dims(self) -> Position:
        nz, ny, nx = self.data.shape
        return (nx, ny, nz)

    @property
    def size(self) -> int:
        return self.data.size

    def contains(self, p: Sequence[int]) -> bool:
        nx, ny, nz = self.dims
        x, y, z = p
        return 0 <= x < nx and 0 <= y < ny and 0 <= z < nz

    def check(self, p: Sequence[int]) -> Position:
        if len(p) != 3 or not self.contains(p):
            raise IndexError(f"position {tuple(p)} outside volume of dims {self.dims}")
        return (int(p[0]), int(p[1]), int(p[2]))

    def flat_index(self, p: Sequence[int]) -> int:
        x, y, z = self.check(p)
        nx, ny, _ = self.dims
        return x + nx * (y + ny * z)

    def position(self, index: int) -> Position:
        nx, ny, nz = self.dims
        if not 0 <= index < nx * ny * nz:
            raise IndexError(f"flat index {index} outside volume of dims {self.dims}")
        return (index % nx, (index // nx) % ny, index // (nx * ny))

    def __getitem__(self, p: Sequence[int]):
        x, y, z = self.check(p)
        return self.data[z, y, x]

    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)


def unflatten(index: int, dims: Sequence[int]) -> Position:
    nx, ny, _ = dims
    return (int(index % nx), int((index // nx) % ny), int(index // (nx * ny)))


# -- sphere masks -----------------------------------------------------------

@dataclass(frozen=True)
class SphereMask:
    radius: int
    offsets: np.ndarray  # (n, 3) int64 array of (dx, dy, dz)

    def __len__(self) -> int:
        return len(self.offsets)


_mask_lock = threading.Lock()


@lru_cache(maxsize=None)
def _sphere_offsets(r: int) -> np.ndarray:
    rng = np.arange(-r, r + 1)
    dz, dy, dx = np.meshgrid(rng, rng, rng, indexing="ij")
    keep = dx * dx + dy * dy + dz * dz <= r * r
    offsets = np.stack([dx[keep], dy[keep], dz[keep]], axis=1).astype(np.int64)
    offsets.setflags(write=False)
    return offsets


def sphere_mask(r: int) -> SphereMask:
    """Offsets ``o`` with ``|o| <= r`` (Euclidean), origin included."""
    if r < 0:
        raise ValueError(f"sphere radius must be nonnegative, got {r}")
    with _mask_lock:
        offsets = _sphere_offsets(int(r))
    return SphereMask(int(r), offsets)


def _clip(vol: Volume, p: Sequence[int], offsets: np.ndarray) -> np.ndarray:
    pts = np.asarray(vol.check(p), dtype=np.int64) + offsets
    nx, ny, nz = vol.dims
    ok = (
        (pts[:, 0] >= 0) & (pts[:, 0] < nx)
        & (pts[:, 1] >= 0) & (pts[:, 1] < ny)
        & (pts[:, 2] >= 0) & (pts[:, 2] < nz)
    )
    return pts[ok]


def sphere_voxels(vol: Volume, p: Sequence[int], r: int) -> set[Position]:
    """In-bounds positions of the radius-``r`` sphere centred on ``p``."""
    return {tuple(int(c) for c in q) for q in _clip(vol, p, sphere_mask(r).offsets)}


def sphere_points(vol: Volume, p: Sequence[int], r: int) -> np.ndarray:
    """Same as :func:`sphere_voxels` but as an ``(n, 3)`` array, for bulk fills."""
    return _clip(vol, p, sphere_mask(r).offsets)


def neighbors26(vol: Volume, p: Sequence[int]) -> list[Position]:
    return [tuple(int(c) for c in q) for q in _clip(vol, p, NEIGHBOR_OFFSETS)]


def iter_positions(vol: Volume) -> Iterator[Position]:
    nx, ny, nz = vol.dims
    for z in range(nz):
        for y in range(ny):
            for x in range(nx):
                yield (x, y, z)


# -- RVOL I/O ---------------------------------------------------------------

def _dtype_tag(data: np.ndarray) -> str:
    if data.dtype == np.bool_ or data.dtype == np.uint8:
        return "u8"
    if data.dtype.kind in "fiu":
        return "f32le"
    raise VolumeError(f"unsupported element type {data.dtype}")


def write_volume(vol: Volume, path, dtype: str | None = None) -> None:
    """Write ``vol`` as RVOL.

    ``dtype`` defaults to ``u8`` for bool/uint8 data and ``f32le`` for any
    other real type (float64 is narrowed; infinities survive).
    """
    tag = dtype or _dtype_tag(vol.data)
    if tag not in _DTYPES:
        raise VolumeError(f"unsupported element type {tag!r}")
    body = np.ascontiguousarray(vol.data, dtype=_DTYPES[tag])
    nx, ny, nz = vol.dims
    with open(path, "wb") as fh:
        fh.write(f"{RVOL_MAGIC} {nx} {ny} {nz} {tag}\n".encode("ascii"))
        fh.write(body.tobytes(order="C"))


def read_volume(path) -> Volume:
    raw = Path(path).read_bytes()
    end = raw.find(b"\n")
    if end < 0:
        raise VolumeFormatError(f"{path}: missing RVOL header line")
    try:
        fields = raw[:end].decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise VolumeFormatError(f"{path}: header is not ASCII") from exc
    if len(fields) != 5 or fields[0] != RVOL_MAGIC:
        raise VolumeFormatError(f"{path}: malformed header {raw[:end]!r}")
    try:
        nx, ny, nz = (int(v) for v in fields[1:4])
    except ValueError as exc:
        raise VolumeFormatError(f"{path}: non-integer dims in header") from exc
    tag = fields[4]
    if tag not in _DTYPES:
        raise VolumeFormatError(f"{path}: unsupported element type {tag!r}")
    dt = _DTYPES[tag]
    body = raw[end + 1:]
    if min(nx, ny, nz) < 1:
        raise VolumeFormatError(f"{path}: dimensions must be positive")
    expected = nx * ny * nz * dt.itemsize
    if len(body) != expected:
        raise VolumeFormatError(
            f"{path}: header promises {nx}x{ny}x{nz} {tag} ({expected} bytes), body has {len(body)}"
        )
    data = np.frombuffer(body, dtype=dt).astype(dt.newbyteorder("="))
    return Volume.from_flat((nx, ny, nz), data)
