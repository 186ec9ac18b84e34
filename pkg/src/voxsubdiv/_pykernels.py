"""Pure numpy versions of the hot kernels.

Every function works on C-contiguous float64 arrays viewed as
``(outer, n, inner)`` with the stencil running along the middle axis. The
operation order matches ``_ckernels.pyx`` term by term so both backends
produce bit-identical results.
"""
import numpy as np


def upsample_axis(src_b, wb, src_c, wc, n, out):
    """Two-phase refinement along the middle axis.

    ``out[:, 2i+k] = sum_r wb[k, r] src_b[:, i+r] + sum_r wc[k, r] src_c[:, i+r]``
    where ``r`` runs over the stencil taps; the caller aligns the sources so
    tap 0 of base cell ``i`` sits at index ``i``.
    """
    for k in (0, 1):
        acc = wb[k, 0] * src_b[:, 0:n]
        for r in range(1, wb.shape[1]):
            acc += wb[k, r] * src_b[:, r : r + n]
        if src_c is not None:
            for r in range(wc.shape[1]):
                acc += wc[k, r] * src_c[:, r : r + n]
        out[:, k::2] = acc


def diff2_axis(src, out):
    out[...] = src[:, 2:] - 2.0 * src[:, 1:-1]
    out += src[:, :-2]


def pair_min_axis(h, out):
    """``out[:, q] = min_t (|dh[q+t]| + |dh[q+t+1]|)`` for ``t = 0..4``."""
    m = out.shape[1]
    adh = np.abs(h[:, 1:] - h[:, :-1])
    pair = adh[:, :-1] + adh[:, 1:]
    np.minimum(pair[:, 0:m], pair[:, 1 : m + 1], out=out)
    for t in range(2, 5):
        np.minimum(out, pair[:, t : t + m], out=out)


def clamp_inplace(d, e, tau):
    """``d <- phi(d, tau * e)``; zero wherever the bound vanishes."""
    k = tau * e
    big = np.abs(d) > k
    d[big] = np.copysign(k[big], d[big])
    d[k == 0.0] = 0.0
