"""Synthetic test object and the 2x2x2 pooling used for roundtrip tests.

The default layout lives in a 256^3 reference frame: a solid cube, a thin
stick, two planes joined along an edge, a solid sphere and a sphere whose
value falls linearly from 1 at the centre to 0 at the surface. Voxels are
set by whether their centre lies inside a shape; other dims rescale the
layout per axis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .volume import DimensionError, Volume, _check_dims

REFERENCE_SIZE = 256
MIN_DIMS = 64

Box = Tuple[Tuple[int, int], Tuple[int, int], Tuple[int, int]]


@dataclass(frozen=True)
class PhantomSpec:
    # inclusive voxel ranges (x, y, z) in the 256^3 frame
    cube: Box = ((24, 87), (24, 87), (24, 87))
    stick: Box = ((120, 123), (32, 35), (32, 151))
    plane_a: Box = ((24, 151), (24, 151), (200, 201))
    plane_b: Box = ((24, 151), (24, 25), (152, 201))
    solid_sphere: Tuple[Tuple[float, float, float], float] = ((180.0, 64.0, 64.0), 36.0)
    gradient_sphere: Tuple[Tuple[float, float, float], float] = ((180.0, 180.0, 180.0), 36.0)

    def shape_masks(self, dims) -> dict:
        """Boolean membership per shape (planes merged), keyed by name."""
        u = _frame_coords(dims)
        masks = {
            "cube": _box(u, self.cube),
            "stick": _box(u, self.stick),
            "planes": _box(u, self.plane_a) | _box(u, self.plane_b),
        }
        c, rad = self.solid_sphere
        masks["solid_sphere"] = _radius(u, c) <= rad
        c, rad = self.gradient_sphere
        masks["gradient_sphere"] = _radius(u, c) < rad
        return masks


def _frame_coords(dims):
    # voxel centre i maps to (i + 1/2) * 256 / n - 1/2, the identity for n == 256
    return [
        ((np.arange(n) + 0.5) * (REFERENCE_SIZE / n) - 0.5).reshape(
            tuple(n if a == ax else 1 for a in range(3))
        )
        for ax, n in enumerate(dims)
    ]


def _box(u, box: Box) -> np.ndarray:
    m = True
    for coord, (lo, hi) in zip(u, box):
        m = m & (coord >= lo) & (coord <= hi)
    return np.broadcast_to(m, tuple(c.size for c in u))


def _radius(u, centre) -> np.ndarray:
    return np.sqrt(sum((coord - c) ** 2 for coord, c in zip(u, centre)))


def generate_phantom(dims: Sequence[int] = (256, 256, 256), spec: PhantomSpec = PhantomSpec(),
                     dtype=np.float32) -> Volume:
    if isinstance(dims, (int, np.integer)):
        dims = (dims, dims, dims)
    dims = _check_dims(dims)
    if min(dims) < MIN_DIMS:
        raise DimensionError(f"phantom needs at least {MIN_DIMS} voxels per axis, got {dims}")
    u = _frame_coords(dims)
    out = np.zeros(dims, dtype=np.float64)
    masks = spec.shape_masks(dims)
    for name in ("cube", "stick", "planes", "solid_sphere"):
        out[np.broadcast_to(masks[name], dims)] = 1.0
    c, rad = spec.gradient_sphere
    r = np.broadcast_to(_radius(u, c), dims)
    grad = np.broadcast_to(masks["gradient_sphere"], dims)
    out[grad] = np.maximum(0.0, 1.0 - r[grad] / rad)
    return Volume(out.astype(dtype))


def downsample2(v: Volume) -> Volume:
    """Mean of every 2x2x2 block; all dims must be even."""
    if any(n % 2 for n in v.dims):
        raise DimensionError(f"downsampling needs even dims, got {v.dims}")
    nx, ny, nz = v.dims
    # Fortran reshape splits each axis as (pair member, block index)
    blocks = v.data.astype(np.float64).reshape(2, nx // 2, 2, ny // 2, 2, nz // 2, order="F")
    mean = blocks.sum(axis=(0, 2, 4)) / 8.0
    voxel = None if v.voxel_size is None else v.voxel_size * 2
    return Volume(mean.astype(v.dtype), voxel)
