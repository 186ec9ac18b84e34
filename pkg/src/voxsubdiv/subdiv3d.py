"""Tensor-product refinement of volumes, linear and non-oscillatory.

Each input voxel ``p`` produces the eight outputs ``2p + (k, l, m)``. The
linear step applies the combined ``a`` masks axis by axis. The nonlinear
step first forms the seven composed second-difference fields of the
input, clamps each one voxelwise against a threshold built from
neighbouring first differences, and then runs the ``b``/``c`` split of the
masks with the clamped fields in place of the raw differences.

All work happens on tiles: a tile of base cells is gathered together with
a halo of input voxels (boundary policy applied at the true volume border
only), refined, and written into its disjoint block of the output.
Per-voxel arithmetic does not depend on tile extents, so any tiling and
any number of workers give bit-identical results.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, FrozenSet, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from ._backend import get_backend
from .config import ConfigError, Mode, SubdivisionConfig
from .kernels import kernel_set
from .volume import BoundaryPolicy, Volume, extend_indices

AxesLike = Union[str, Iterable[Union[str, int]]]

# Volume.data is indexed [x, y, z] in Fortran order; the kernels see the
# C-contiguous transpose, indexed [z, y, x].
_C_AXIS = {"x": 2, "y": 1, "z": 0}


def parse_axes(axes: AxesLike) -> Tuple[str, ...]:
    """Normalise an axis set such as ``"yz"``, ``("x", "z")`` or ``{0, 2}``."""
    if isinstance(axes, str):
        axes = list(axes.replace(",", "").replace(" ", ""))
    names = []
    for a in axes:
        if isinstance(a, (int, np.integer)):
            if a not in (0, 1, 2):
                raise ValueError(f"axis index must be 0, 1 or 2, got {a!r}")
            a = "xyz"[a]
        a = str(a).lower()
        if a not in _C_AXIS:
            raise ValueError(f"unknown axis {a!r}")
        names.append(a)
    if not names:
        raise ValueError("axis set must not be empty")
    return tuple(sorted(set(names)))


def _as_volume(g) -> Volume:
    return g if isinstance(g, Volume) else Volume(np.asarray(g))


# --------------------------------------------------------------------------
# pointwise definitions


def axis_second_diff(g, axes: AxesLike, policy=BoundaryPolicy.MIRROR) -> Volume:
    """Composed forward second differences of ``g`` along every axis in ``axes``."""
    g = _as_volume(g)
    policy = BoundaryPolicy.parse(policy)
    names = parse_axes(axes)
    cur = g.data.astype(np.float64)
    for name in names:
        ax = "xyz".index(name)
        n = g.dims[ax]
        idx = extend_indices(np.arange(n + 2), n, policy)
        ext = np.take(cur, idx, axis=ax)
        lo = np.take(ext, np.arange(0, n), axis=ax)
        mid = np.take(ext, np.arange(1, n + 1), axis=ax)
        hi = np.take(ext, np.arange(2, n + 2), axis=ax)
        cur = (hi - 2.0 * mid) + lo
    return Volume(cur, g.voxel_size)


def difference_fields(g, policy=BoundaryPolicy.MIRROR) -> Dict[FrozenSet[str], Volume]:
    """All seven fields ``d2_S g`` keyed by the non-empty axis subset ``S``."""
    out = {}
    for r in (1, 2, 3):
        for S in itertools.combinations("xyz", r):
            out[frozenset(S)] = axis_second_diff(g, S, policy)
    return out


def _extended_value(data, q, policy) -> float:
    idx = tuple(int(extend_indices(i, n, policy)) for i, n in zip(q, data.shape))
    return float(data[idx])


def _composed_diff_at(data, q, axes, policy) -> float:
    """``d2`` composed over ``axes`` at ``q``, from boundary-extended samples."""
    weights = (1.0, -2.0, 1.0)
    total = 0.0
    for offs in itertools.product(range(3), repeat=len(axes)):
        w = 1.0
        p = list(q)
        for a, t in zip(axes, offs):
            w *= weights[t]
            p["xyz".index(a)] += t
        total += w * _extended_value(data, p, policy)
    return total


def mixed_threshold(g, p: Sequence[int], axes: AxesLike, tau: float,
                    policy=BoundaryPolicy.MIRROR) -> float:
    """Clamp bound for the field ``d2_S g`` at voxel ``p``.

    For every ``w`` in ``S`` the 1D bound is evaluated along ``w`` on
    ``h_w = d2_{S - w} g``:
    ``min_j (|dh_w(p + j e_w)| + |dh_w(p + (j+1) e_w)|)`` over ``j = -2..2``.
    The result is ``tau`` times the smallest of these minima. For a single
    axis this is exactly the 1D threshold.
    """
    if not tau > 1:
        raise ValueError(f"tau must be > 1, got {tau!r}")
    g = _as_volume(g)
    policy = BoundaryPolicy.parse(policy)
    S = parse_axes(axes)
    data = g.data
    best = np.inf
    for w in S:
        others = tuple(a for a in S if a != w)
        ax = "xyz".index(w)

        def h(j):
            q = list(p)
            q[ax] += j
            return _composed_diff_at(data, q, others, policy)

        hv = [h(j) for j in range(-2, 5)]
        dh = [abs(hv[t + 1] - hv[t]) for t in range(6)]  # |dh| at p-2 .. p+3
        best = min(best, min(dh[t] + dh[t + 1] for t in range(5)))
    return float(tau * best)


# --------------------------------------------------------------------------
# tile engine


def _mid(a: np.ndarray, axis: int) -> np.ndarray:
    s = a.shape
    outer = int(np.prod(s[:axis], dtype=np.int64))
    inner = int(np.prod(s[axis + 1 :], dtype=np.int64))
    return a.reshape(outer, s[axis], inner)


class _Engine:
    def __init__(self, kern, tau: Optional[float], order: Sequence[int]):
        self.kern = kern
        self.tau = tau
        self.order = tuple(order)
        t = kernel_set().as_arrays()
        self.wa = np.ascontiguousarray(t["a"])
        self.wb = np.ascontiguousarray(t["b"])
        self.wc = np.ascontiguousarray(t["c"])

    def diff2(self, src, axis):
        shape = list(src.shape)
        shape[axis] -= 2
        out = np.empty(shape)
        self.kern.diff2_axis(_mid(src, axis), _mid(out, axis))
        return out

    def pair_min(self, h, axis):
        shape = list(h.shape)
        shape[axis] -= 6
        out = np.empty(shape)
        self.kern.pair_min_axis(_mid(h, axis), _mid(out, axis))
        return out

    def upsample(self, src_b, wb, src_c, wc, axis, n):
        shape = list(src_b.shape)
        shape[axis] = 2 * n
        out = np.empty(shape)
        self.kern.upsample_axis(
            _mid(src_b, axis), wb, None if src_c is None else _mid(src_c, axis), wc, n, _mid(out, axis)
        )
        return out

    def refine(self, G: np.ndarray, N: Tuple[int, int, int], H: int) -> np.ndarray:
        """Refine the base cells ``[H, H + N)`` of the halo-padded block ``G``."""
        if self.tau is None:
            return self._linear(G, N, H)
        return self._nonlinear(G, N, H)

    def _linear(self, G, N, H):
        cur = np.ascontiguousarray(G[tuple(slice(H - 2, H + n + 4) for n in N)])
        for ax in self.order:
            cur = self.upsample(cur, self.wa, None, None, ax, N[ax])
        return cur

    def difference_fields(self, G):
        """Raw and clamped ``d2_S`` fields of the block ``G``, keyed by ``S``.

        Raw fields keep the block origin. Clamped fields only exist where
        the threshold window fits, so along the axes of ``S`` their index 0
        is block index 2.
        """
        L = G.shape
        raw = {(): G}
        for r in (1, 2, 3):
            for S in itertools.combinations(range(3), r):
                raw[S] = self.diff2(raw[S[:-1]], S[-1])
        clamped = {}
        for S, d in raw.items():
            if not S:
                continue
            inner = [slice(None)] * 3
            for v in S:
                inner[v] = slice(2, L[v] - 4)
            bound = None
            for w in S:
                e = self.pair_min(raw[tuple(a for a in S if a != w)], w)
                sl = list(inner)
                sl[w] = slice(None)
                e = e[tuple(sl)]
                bound = e if bound is None else np.minimum(bound, e)
            c = d[tuple(inner)].copy()  # clamped in place; must not alias raw
            self.kern.clamp_inplace(c, np.ascontiguousarray(bound), self.tau)
            clamped[S] = c
        return raw, clamped

    def _nonlinear(self, G, N, H):
        raw, clamped = self.difference_fields(G)
        del raw
        fields = {frozenset(): np.ascontiguousarray(G[tuple(slice(H - 2, H + n + 4) for n in N)])}
        for S, c in clamped.items():
            crop = tuple(
                slice(H - 4, H + N[a]) if a in S else slice(H - 2, H + N[a] + 4) for a in range(3)
            )
            fields[frozenset(S)] = np.ascontiguousarray(c[crop])
        del clamped

        remaining = list(self.order)
        for ax in self.order:
            remaining.remove(ax)
            nxt = {}
            for r in range(len(remaining) + 1):
                for T in itertools.combinations(remaining, r):
                    T = frozenset(T)
                    nxt[T] = self.upsample(fields[T], self.wb, fields[T | {ax}], self.wc, ax, N[ax])
            fields = nxt
        return fields[frozenset()]


def clamped_difference_fields(g, tau: float, policy=BoundaryPolicy.MIRROR, *,
                              backend: Optional[str] = None):
    """Raw and clamped ``d2_S g`` for all seven axis subsets, as full-size volumes.

    Returns ``(raw, clamped)``, two dicts keyed by ``frozenset`` of axis
    names. These are exactly the fields the nonlinear step consumes.
    """
    if not tau > 1:
        raise ConfigError(f"tau must be > 1, got {tau!r}")
    g = _as_volume(g)
    policy = BoundaryPolicy.parse(policy)
    engine = _Engine(get_backend(backend), float(tau), (2, 1, 0))
    H = 6
    src = g.data.T
    idx = [extend_indices(np.arange(-H, n + H), n, policy) for n in src.shape]
    G = np.ascontiguousarray(src[np.ix_(*idx)], dtype=np.float64)
    raw, clamped = engine.difference_fields(G)
    raw_out, clamped_out = {}, {}
    for S in clamped:
        key = frozenset("zyx"[a] for a in S)
        raw_crop = tuple(slice(H, H + n) for n in src.shape)
        c_crop = tuple(slice(H - 2, H - 2 + n) if a in S else slice(H, H + n)
                       for a, n in enumerate(src.shape))
        raw_out[key] = Volume(raw[S][raw_crop].T)
        clamped_out[key] = Volume(clamped[S][c_crop].T)
    return raw_out, clamped_out


def _axis_order(axis_order: str) -> Tuple[int, int, int]:
    names = [a for a in axis_order.lower() if a in _C_AXIS]
    if sorted(names) != ["x", "y", "z"]:
        raise ValueError(f"axis_order must be a permutation of 'xyz', got {axis_order!r}")
    return tuple(_C_AXIS[a] for a in names)


def _tiles(shape, tile):
    ranges = [range(0, n, t) for n, t in zip(shape, tile)]
    for start in itertools.product(*ranges):
        yield tuple(start), tuple(min(t, n - s) for s, t, n in zip(start, tile, shape))


def _run(g: Volume, config: SubdivisionConfig, tile_c, axis_order, backend) -> Volume:
    kern = get_backend(backend)
    tau = config.tau if config.mode is Mode.NONLINEAR else None
    engine = _Engine(kern, tau, _axis_order(axis_order))
    H = int(config.halo)
    src = g.data.T  # C-contiguous, [z, y, x]
    shape = src.shape
    out = np.empty(tuple(2 * n for n in g.dims), dtype=g.dtype, order="F")
    out_c = out.T

    def work(item):
        start, N = item
        idx = [extend_indices(np.arange(s - H, s + n + H), dim, config.boundary)
               for s, n, dim in zip(start, N, shape)]
        G = np.ascontiguousarray(src[np.ix_(*idx)], dtype=np.float64)
        block = engine.refine(G, N, H)
        out_c[tuple(slice(2 * s, 2 * (s + n)) for s, n in zip(start, N))] = block

    items = list(_tiles(shape, tile_c))
    if config.workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            for _ in pool.map(work, items):
                pass
    else:
        for item in items:
            work(item)
    voxel = None if g.voxel_size is None else g.voxel_size / 2
    return Volume(out, voxel)


def subdivide3d(g, config: Optional[SubdivisionConfig] = None, *,
                axis_order: str = "xyz", backend: Optional[str] = None) -> Volume:
    """One refinement step of the whole volume as a single block.

    Output dims are doubled per axis and stored at the input's precision.
    """
    g = _as_volume(g)
    config = config or SubdivisionConfig()
    return _run(g, config, g.data.T.shape, axis_order, backend)


def subdivide3d_tiled(g, config: Optional[SubdivisionConfig] = None, *,
                      axis_order: str = "xyz", backend: Optional[str] = None) -> Volume:
    """Tile-parallel version of :func:`subdivide3d`; bit-identical output."""
    g = _as_volume(g)
    config = config or SubdivisionConfig()
    tile_c = tuple(reversed(config.tile_dims))
    return _run(g, config, tile_c, axis_order, backend)


def subdivide(g, mode: Union[str, Mode] = Mode.LINEAR, tau: Optional[float] = None, **kw) -> Volume:
    """Convenience wrapper: build a config and run the tiled driver."""
    mode = Mode.parse(mode)
    if mode is Mode.NONLINEAR and tau is None:
        tau = SubdivisionConfig(mode=mode).tau
    try:
        config = SubdivisionConfig(mode=mode, tau=tau, **kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return subdivide3d_tiled(g, config)
