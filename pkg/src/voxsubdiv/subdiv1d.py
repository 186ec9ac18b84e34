"""One refinement step on 1D cell-average sequences.

This is a plain, pointwise implementation kept independent of the 3D
driver so it can serve as a reference for it. Output ``2i`` is the
average over the left half and ``2i + 1`` over the right half of the
interval ``[c_i, c_i + h]`` between the centres of cells ``i`` and
``i + 1``; see :func:`child_cell_averages`.
"""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .config import Mode, SubdivisionConfig
from .kernels import kernel_set
from .volume import BoundaryPolicy, extend_indices

_PAD = 6


def _as_sequence(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64).ravel()
    if f.size == 0:
        raise ValueError("sequence must not be empty")
    return f


def _padded(f: np.ndarray, policy, pad: int = _PAD) -> np.ndarray:
    policy = BoundaryPolicy.parse(policy)
    idx = extend_indices(np.arange(-pad, f.size + pad), f.size, policy)
    return f[idx]


def forward_diff(f, policy=BoundaryPolicy.MIRROR) -> np.ndarray:
    """``f[j+1] - f[j]`` for every ``j``, reading past the end via ``policy``."""
    f = _as_sequence(f)
    fp = _padded(f, policy, 1)
    return fp[2:] - fp[1:-1]


def second_diff(f, policy=BoundaryPolicy.MIRROR) -> np.ndarray:
    """``f[j+2] - 2 f[j+1] + f[j]`` for every ``j``, boundary-extended."""
    f = _as_sequence(f)
    fp = _padded(f, policy, 2)
    return (fp[4:] - 2.0 * fp[3:-1]) + fp[2:-2]


def threshold_k(f, i: int, tau: float, policy=BoundaryPolicy.MIRROR) -> float:
    """Clamp bound for the second difference at ``i``.

    ``tau * min(|df[i+j]| + |df[i+j+1]|)`` over ``j = -2..2``.
    """
    if not tau > 1:
        raise ValueError(f"tau must be > 1, got {tau!r}")
    f = _as_sequence(f)
    fp = _padded(f, policy)
    u = i + _PAD
    df = np.abs(fp[u - 1 : u + 5] - fp[u - 2 : u + 4])  # |df| at i-2 .. i+3
    return float(tau * min(df[j] + df[j + 1] for j in range(5)))


def clamp_phi(d2: float, k: float) -> float:
    """Sign-preserving clamp of ``d2`` to magnitude ``k``; zero when ``k == 0``."""
    if k < 0:
        raise ValueError(f"clamp bound must be non-negative, got {k!r}")
    if k == 0:
        return 0.0
    return d2 if abs(d2) <= k else math.copysign(k, d2)


def _corrections(fp: np.ndarray, tau: Optional[float]) -> np.ndarray:
    """Second differences on the padded sequence, clamped when ``tau`` is set."""
    d2 = np.full(fp.size, np.nan)
    d2[:-2] = (fp[2:] - 2.0 * fp[1:-1]) + fp[:-2]
    if tau is None:
        return d2
    adf = np.abs(np.diff(fp))
    pair = adf[:-1] + adf[1:]  # pair[u] = |df[u]| + |df[u+1]|
    out = np.full(fp.size, np.nan)
    for u in range(2, fp.size - 4):
        k = tau * pair[u - 2 : u + 3].min()
        out[u] = clamp_phi(d2[u], k)
    return out


def subdivide1d(f, config: Optional[SubdivisionConfig] = None) -> np.ndarray:
    """Refine ``f`` (length n) to length 2n.

    ``out[2i + k] = sum_r b^k[r] f[i+r] + sum_r c^k[r] D[i+r]`` with ``D``
    the raw second differences (linear) or their clamped values (nonlinear).
    """
    config = config or SubdivisionConfig()
    f = _as_sequence(f)
    fp = _padded(f, config.boundary)
    tau = config.tau if config.mode is Mode.NONLINEAR else None
    dd = _corrections(fp, tau)
    ks = kernel_set()
    n = f.size
    out = np.empty(2 * n)
    for i in range(n):
        u = i + _PAD
        for k in (0, 1):
            b, c = ks.b(k), ks.c(k)
            acc = 0.0
            for r, w in zip(b.offsets, b.values):
                acc += w * fp[u + r]
            for r, w in zip(c.offsets, c.values):
                acc += w * dd[u + r]
            out[2 * i + k] = acc
    return out


def subdivide1d_masks(f, policy=BoundaryPolicy.MIRROR) -> np.ndarray:
    """Linear step through the combined ``a`` masks (no difference split)."""
    f = _as_sequence(f)
    fp = _padded(f, policy)
    ks = kernel_set()
    out = np.empty(2 * f.size)
    for k in (0, 1):
        a = ks.a(k)
        acc = np.zeros(f.size)
        for r, w in zip(a.offsets, a.values):
            acc += w * fp[_PAD + r : _PAD + r + f.size]
        out[k::2] = acc
    return out


def _gauss_average(F, lo, hi, order=24) -> float:
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return float(np.dot(w, F(mid + half * x)) / 2.0)


def sample_cell_averages(F: Callable, center0: float, h: float, n: int,
                         antiderivative: Optional[Callable] = None) -> np.ndarray:
    """Averages of ``F`` over cells of width ``h`` centred at ``center0 + i h``.

    With ``antiderivative`` the averages are exact differences of it;
    otherwise a 24-point Gauss-Legendre rule is used per cell.
    """
    if not h > 0:
        raise ValueError(f"cell width must be positive, got {h!r}")
    centers = center0 + h * np.arange(n)
    return _interval_averages(F, centers - h / 2, centers + h / 2, antiderivative)


def child_cell_averages(F: Callable, center0: float, h: float, n: int,
                        antiderivative: Optional[Callable] = None) -> np.ndarray:
    """Exact targets for ``subdivide1d`` of ``sample_cell_averages(F, center0, h, n)``.

    Entry ``2i`` averages ``[c_i, c_i + h/2]``, entry ``2i + 1`` averages
    ``[c_i + h/2, c_i + h]``, where ``c_i = center0 + i h``.
    """
    if not h > 0:
        raise ValueError(f"cell width must be positive, got {h!r}")
    lo = center0 + h * np.arange(2 * n) / 2
    return _interval_averages(F, lo, lo + h / 2, antiderivative)


def _interval_averages(F, lo, hi, antiderivative):
    if antiderivative is not None:
        return (antiderivative(hi) - antiderivative(lo)) / (hi - lo)
    F = np.vectorize(F, otypes=[float]) if not isinstance(F, np.ufunc) else F
    return np.array([_gauss_average(F, a, b) for a, b in zip(lo, hi)])
