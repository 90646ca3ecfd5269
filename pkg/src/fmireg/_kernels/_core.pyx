# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled joint-histogram kernel.

Must stay numerically interchangeable with ``reference.accumulate``:
same bilinear expression shape, same clamping, same row-major
accumulation order.  Built with fp-contraction disabled so results are
bit-identical to the numpy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def accumulate(const double[:, ::1] ref, const double[:, ::1] test,
               double a11, double a12, double a21, double a22,
               double tx, double ty, Py_ssize_t nbins, focus=None):
    cdef Py_ssize_t hr = ref.shape[0], wr = ref.shape[1]
    cdef Py_ssize_t ht = test.shape[0], wt = test.shape[1]
    cdef cnp.ndarray mass_arr = np.zeros((nbins, nbins), dtype=np.float64)
    cdef double[:, ::1] mass = mass_arr
    cdef const double[:, ::1] foc
    cdef bint has_focus = focus is not None
    if has_focus:
        foc = focus
    cdef double xmax = wr - 1.0, ymax = hr - 1.0
    cdef Py_ssize_t m, n, x0, y0, x1, y1, k, l
    cdef double X, Y, fx, fy, top, bot, val, w
    cdef long overlap = 0

    for n in range(ht):
        for m in range(wt):
            X = (a11 * m + a12 * n) + tx
            Y = (a21 * m + a22 * n) + ty
            if X < 0.0 or X > xmax or Y < 0.0 or Y > ymax:
                continue
            x0 = <Py_ssize_t>floor(X)
            if x0 > wr - 2:
                x0 = wr - 2
            if x0 < 0:
                x0 = 0
            y0 = <Py_ssize_t>floor(Y)
            if y0 > hr - 2:
                y0 = hr - 2
            if y0 < 0:
                y0 = 0
            x1 = x0 + 1
            if x1 > wr - 1:
                x1 = wr - 1
            y1 = y0 + 1
            if y1 > hr - 1:
                y1 = hr - 1
            fx = X - x0
            fy = Y - y0
            top = ref[y0, x0] * (1.0 - fx) + ref[y0, x1] * fx
            bot = ref[y1, x0] * (1.0 - fx) + ref[y1, x1] * fx
            val = top * (1.0 - fy) + bot * fy
            k = <Py_ssize_t>floor(val * nbins)
            if k > nbins - 1:
                k = nbins - 1
            if k < 0:
                k = 0
            val = test[n, m]
            l = <Py_ssize_t>floor(val * nbins)
            if l > nbins - 1:
                l = nbins - 1
            if l < 0:
                l = 0
            if has_focus:
                top = foc[y0, x0] * (1.0 - fx) + foc[y0, x1] * fx
                bot = foc[y1, x0] * (1.0 - fx) + foc[y1, x1] * fx
                w = top * (1.0 - fy) + bot * fy
            else:
                w = 1.0
            mass[k, l] += w
            overlap += 1

    return mass_arr, int(overlap)
