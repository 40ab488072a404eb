# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot evaluation kernel.

Scalar closed form of the normalized hat-gradient profile; see _purekern
for the derivation.  The table fill releases the GIL so callers may chunk
rows across threads.
"""

import numpy as np

cimport cython
from libc.math cimport fabs, pow


cdef double _unit_hat_gradient(double u, double s) nogil:
    cdef double w = fabs(u)
    cdef double as1 = 1.0 / (1.0 - s)
    cdef double val, px, p1, p2
    if w == 0.0:
        return 0.0
    if w < 1.0:
        px = 1.0 - w
        val = -as1 * (pow(w, 1.0 - s) + pow(1.0 - w, 1.0 - s))
        val += -(2.0 * w / s) * (pow(w, -s) - pow(w + 1.0, -s)) - as1 * (
            pow(w, 1.0 - s) - pow(w + 1.0, 1.0 - s)
        )
        val += (px / s) * pow(w + 1.0, -s)
        val += -(px / s) * pow(1.0 - w, -s)
    elif w == 1.0:
        val = -(2.0 / s) * (1.0 - pow(2.0, -s)) - as1 * (1.0 - pow(2.0, 1.0 - s)) - as1
    else:
        p1 = -((1.0 + w) / s) * (pow(w, -s) - pow(w + 1.0, -s)) - as1 * (
            pow(w, 1.0 - s) - pow(w + 1.0, 1.0 - s)
        )
        p2 = -((1.0 - w) / s) * (pow(w - 1.0, -s) - pow(w, -s)) + as1 * (
            pow(w - 1.0, 1.0 - s) - pow(w, 1.0 - s)
        )
        val = p1 + p2
    if u < 0.0:
        return -val
    return val


def unit_hat_gradient(u, double s):
    """Vectorized normalized profile (matches _purekern.unit_hat_gradient)."""
    arr = np.ascontiguousarray(np.atleast_1d(np.asarray(u, dtype=float)))
    out = np.empty_like(arr.ravel())
    cdef double[::1] ui = arr.ravel()
    cdef double[::1] oi = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(ui.shape[0]):
            oi[i] = _unit_hat_gradient(ui[i], s)
    return out.reshape(arr.shape)


def hat_gradient_table(x, centers, double h, double s, double cw, chunk=None):
    """Weighted gradients of all hats at all points: out[i, j] = g_hat_j(x_i)."""
    xa = np.ascontiguousarray(x, dtype=float)
    ca = np.ascontiguousarray(centers, dtype=float)
    out = np.empty((xa.size, ca.size))
    cdef double[::1] xv = xa
    cdef double[::1] cv = ca
    cdef double[:, ::1] ov = out
    cdef double scale = cw * pow(h, -s)
    cdef Py_ssize_t i, j, m = xa.size, n = ca.size
    with nogil:
        for i in range(m):
            for j in range(n):
                ov[i, j] = scale * _unit_hat_gradient((xv[i] - cv[j]) / h, s)
    return out
