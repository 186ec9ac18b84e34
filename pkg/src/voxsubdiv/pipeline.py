"""Subsample-then-upsample evaluation.

``downsample2`` pools fine voxels ``2j, 2j+1`` into coarse cell ``j``;
refining that cell's neighbourhood places output ``2j`` on the half
interval starting at the coarse centre, i.e. on fine voxel ``2j + 1``.
The upsampled volume therefore lines up with the original shifted by one
voxel per axis, and metrics are taken on that overlap.
"""
from __future__ import annotations

from typing import Tuple

from .metrics import MetricsReport, metrics_report
from .phantom import downsample2
from .subdiv3d import subdivide3d_tiled
from .volume import Volume

ALIGN_SHIFT = 1


def aligned_pair(original: Volume, upsampled: Volume) -> Tuple[Volume, Volume]:
    """Crop both volumes to the region where ``upsampled[k]`` covers ``original[k + 1]``."""
    if original.dims != upsampled.dims:
        raise ValueError(f"dims mismatch: {original.dims} vs {upsampled.dims}")
    s = ALIGN_SHIFT
    ref = original.data[s:, s:, s:]
    test = upsampled.data[:-s, :-s, :-s]
    return Volume(ref), Volume(test)


def roundtrip(original: Volume, config) -> Tuple[Volume, MetricsReport]:
    """Pool 2x2x2, refine once, and score against the original."""
    up = subdivide3d_tiled(downsample2(original), config)
    ref, test = aligned_pair(original, up)
    return up, metrics_report(ref, test)
