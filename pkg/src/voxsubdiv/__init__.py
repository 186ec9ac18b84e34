"""One-step 2x refinement of voxel volumes with a 6-point cell-average scheme.

The linear scheme is the tensor product of a 6-tap cell-average mask; the
nonlinear variant clamps its second-difference corrections so that jumps
between materials stay free of over- and undershoots.
"""
from ._backend import DEFAULT as BACKEND
from .config import Mode, SubdivisionConfig, linear, nonlinear
from .kernels import KernelSet, kernel_identity_residual, kernel_set
from .subdiv1d import subdivide1d
from .subdiv3d import subdivide, subdivide3d, subdivide3d_tiled
from .volume import (
    BoundaryPolicy,
    Volume,
    create_volume,
    extract_roi,
    read_volume,
    write_volume,
)

__all__ = [
    "BACKEND",
    "BoundaryPolicy",
    "KernelSet",
    "Mode",
    "SubdivisionConfig",
    "Volume",
    "create_volume",
    "extract_roi",
    "kernel_identity_residual",
    "kernel_set",
    "linear",
    "nonlinear",
    "read_volume",
    "subdivide",
    "subdivide1d",
    "subdivide3d",
    "subdivide3d_tiled",
    "write_volume",
]

__version__ = "0.1.0"
