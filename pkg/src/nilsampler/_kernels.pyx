# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Gaussian spreading and interpolation on a periodic grid (NUFFT inner loops)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, floor

cnp.import_array()


cdef void _axis_taps(double g, int w, Py_ssize_t G, double inv2s,
                     double *wt, Py_ssize_t *idx, Py_ssize_t stride) noexcept nogil:
    cdef long m0 = <long>floor(g) - w + 1
    cdef long mm
    cdef int j
    cdef double d
    for j in range(2 * w):
        d = (m0 + j) - g
        wt[j] = exp(-d * d * inv2s)
        mm = (m0 + j) % G
        if mm < 0:
            mm += G
        idx[j] = mm * stride


def spread(const double[:, ::1] x, const double complex[:, ::1] c, Py_ssize_t G, int w,
           double sig2, double complex[:, ::1] grid):
    """grid[l, :] += sum_n c[l, n] * phi(. - G x_n), grid flattened over G**p."""
    cdef Py_ssize_t N = x.shape[0], p = x.shape[1], L = c.shape[0]
    cdef int q = 2 * w
    cdef Py_ssize_t nouter = 1, a, j, n, l, o, r
    for a in range(p - 1):
        nouter *= q
    cdef double[:, ::1] wt = np.empty((p, q))
    cdef Py_ssize_t[:, ::1] idx = np.empty((p, q), dtype=np.intp)
    cdef double[::1] ow = np.empty(nouter)
    cdef Py_ssize_t[::1] oo = np.empty(nouter, dtype=np.intp)
    cdef Py_ssize_t[::1] stride = np.empty(p, dtype=np.intp)
    cdef double inv2s = 1.0 / (2.0 * sig2)
    cdef double ww
    cdef Py_ssize_t off, digit
    cdef double complex cv
    cdef double complex *gp
    cdef double *wl
    cdef Py_ssize_t *il
    s = 1
    for a in range(p - 1, -1, -1):
        stride[a] = s
        s *= G
    with nogil:
        for n in range(N):
            for a in range(p):
                _axis_taps(x[n, a] * G, w, G, inv2s, &wt[a, 0], &idx[a, 0], stride[a])
            for o in range(nouter):
                r = o
                ww = 1.0
                off = 0
                for a in range(p - 2, -1, -1):
                    digit = r % q
                    r = r // q
                    ww = ww * wt[a, digit]
                    off = off + idx[a, digit]
                ow[o] = ww
                oo[o] = off
            wl = &wt[p - 1, 0]
            il = &idx[p - 1, 0]
            for l in range(L):
                cv = c[l, n]
                if cv == 0:
                    continue
                gp = &grid[l, 0]
                for o in range(nouter):
                    ww = ow[o]
                    off = oo[o]
                    for j in range(q):
                        gp[off + il[j]] = gp[off + il[j]] + (ww * wl[j]) * cv


def interp(const double[:, ::1] x, const double complex[:, ::1] grid, Py_ssize_t G, int w,
           double sig2, double complex[:, ::1] out):
    """out[l, n] = sum_m phi(m - G x_n) grid[l, m]."""
    cdef Py_ssize_t N = x.shape[0], p = x.shape[1], L = grid.shape[0]
    cdef int q = 2 * w
    cdef Py_ssize_t nouter = 1, a, j, n, l, o, r
    for a in range(p - 1):
        nouter *= q
    cdef double[:, ::1] wt = np.empty((p, q))
    cdef Py_ssize_t[:, ::1] idx = np.empty((p, q), dtype=np.intp)
    cdef double[::1] ow = np.empty(nouter)
    cdef Py_ssize_t[::1] oo = np.empty(nouter, dtype=np.intp)
    cdef Py_ssize_t[::1] stride = np.empty(p, dtype=np.intp)
    cdef double inv2s = 1.0 / (2.0 * sig2)
    cdef double ww
    cdef Py_ssize_t off, digit
    cdef double complex acc, inner
    cdef const double complex *gp
    cdef double *wl
    cdef Py_ssize_t *il
    s = 1
    for a in range(p - 1, -1, -1):
        stride[a] = s
        s *= G
    with nogil:
        for n in range(N):
            for a in range(p):
                _axis_taps(x[n, a] * G, w, G, inv2s, &wt[a, 0], &idx[a, 0], stride[a])
            for o in range(nouter):
                r = o
                ww = 1.0
                off = 0
                for a in range(p - 2, -1, -1):
                    digit = r % q
                    r = r // q
                    ww = ww * wt[a, digit]
                    off = off + idx[a, digit]
                ow[o] = ww
                oo[o] = off
            wl = &wt[p - 1, 0]
            il = &idx[p - 1, 0]
            for l in range(L):
                gp = &grid[l, 0]
                acc = 0
                for o in range(nouter):
                    off = oo[o]
                    inner = 0
                    for j in range(q):
                        inner = inner + wl[j] * gp[off + il[j]]
                    acc = acc + ow[o] * inner
                out[l, n] = acc
