# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see _pykernels for the contracts."""
from libc.math cimport fabs, copysign


def upsample_axis(const double[:, :, ::1] src_b, const double[:, ::1] wb,
                  src_c, const double[:, ::1] wc, Py_ssize_t n,
                  double[:, :, ::1] out):
    cdef const double[:, :, ::1] cv
    cdef bint has_c = src_c is not None
    cdef Py_ssize_t nb = wb.shape[1], nc = 0
    if has_c:
        cv = src_c
        nc = wc.shape[1]
    else:
        cv = src_b
    with nogil:
        _upsample(src_b, wb, cv, wc, has_c, nb, nc, n, out)


cdef void _upsample(const double[:, :, ::1] sb, const double[:, ::1] wb,
                    const double[:, :, ::1] sc, const double[:, ::1] wc,
                    bint has_c, Py_ssize_t nb, Py_ssize_t nc, Py_ssize_t n,
                    double[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t a, i, j, k, r
    cdef Py_ssize_t na = sb.shape[0], inner = sb.shape[2]
    cdef double acc, w
    for a in range(na):
        for i in range(n):
            for k in range(2):
                for j in range(inner):
                    acc = wb[k, 0] * sb[a, i, j]
                    for r in range(1, nb):
                        acc = acc + wb[k, r] * sb[a, i + r, j]
                    if has_c:
                        for r in range(nc):
                            acc = acc + wc[k, r] * sc[a, i + r, j]
                    out[a, 2 * i + k, j] = acc


def diff2_axis(const double[:, :, ::1] src, double[:, :, ::1] out):
    cdef Py_ssize_t a, i, j
    cdef Py_ssize_t na = out.shape[0], n = out.shape[1], inner = out.shape[2]
    with nogil:
        for a in range(na):
            for i in range(n):
                for j in range(inner):
                    out[a, i, j] = (src[a, i + 2, j] - 2.0 * src[a, i + 1, j]) + src[a, i, j]


def pair_min_axis(const double[:, :, ::1] h, double[:, :, ::1] out):
    cdef Py_ssize_t a, q, j, t
    cdef Py_ssize_t na = out.shape[0], m = out.shape[1], inner = out.shape[2]
    cdef double best, p
    with nogil:
        for a in range(na):
            for q in range(m):
                for j in range(inner):
                    best = (fabs(h[a, q + 1, j] - h[a, q, j])
                            + fabs(h[a, q + 2, j] - h[a, q + 1, j]))
                    for t in range(1, 5):
                        p = (fabs(h[a, q + t + 1, j] - h[a, q + t, j])
                             + fabs(h[a, q + t + 2, j] - h[a, q + t + 1, j]))
                        if p < best:
                            best = p
                    out[a, q, j] = best


def clamp_inplace(double[:, :, ::1] d, const double[:, :, ::1] e, double tau):
    cdef Py_ssize_t a, i, j
    cdef double k, x
    with nogil:
        for a in range(d.shape[0]):
            for i in range(d.shape[1]):
                for j in range(d.shape[2]):
                    k = tau * e[a, i, j]
                    x = d[a, i, j]
                    if k == 0.0:
                        d[a, i, j] = 0.0
                    elif fabs(x) > k:
                        d[a, i, j] = copysign(k, x)
