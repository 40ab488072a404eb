"""Pure NumPy implementation of the hot evaluation kernel.

The weighted gradient of a P1 hat function has an elementwise closed form:
on each linear piece the integrand (phi(y) - phi(x)) sign(y-x) |y-x|^(-1-s)
has power-law antiderivatives, and the infinite tails contribute
-phi(x) |distance|^(-s) / s terms.  Everything reduces to the normalized
profile g(u) for a unit hat (center 0, half-width 1):

    hat_gradient(x; c, h) = cw * h^(-s) * g((x - c) / h).

g is odd; for 0 < u < 1 (inside the support) and u > 1 (outside) the
branches below collect the piece contributions.  At u in {0, 1} the limits
are taken structurally so no 0 * inf forms appear.
"""

import numpy as np


def unit_hat_gradient(u, s):
    """Normalized hat-gradient profile g(u) for weight |t|^(-1-s), cw = h = 1."""
    u = np.asarray(u, dtype=float)
    w = np.abs(u)
    out = np.zeros_like(w)
    as1 = 1.0 / (1.0 - s)

    inside = (w > 0.0) & (w < 1.0)
    if np.any(inside):
        ww = w[inside]
        px = 1.0 - ww
        t1 = -as1 * (ww ** (1.0 - s) + (1.0 - ww) ** (1.0 - s))
        t2 = -(2.0 * ww / s) * (ww ** (-s) - (ww + 1.0) ** (-s)) - as1 * (
            ww ** (1.0 - s) - (ww + 1.0) ** (1.0 - s)
        )
        t3 = (px / s) * (ww + 1.0) ** (-s)
        t4 = -(px / s) * (1.0 - ww) ** (-s)
        out[inside] = t1 + t2 + t3 + t4

    edge = w == 1.0
    if np.any(edge):
        p1 = -(2.0 / s) * (1.0 - 2.0 ** (-s)) - as1 * (1.0 - 2.0 ** (1.0 - s))
        out[edge] = p1 - as1

    outside = w > 1.0
    if np.any(outside):
        ww = w[outside]
        p1 = -((1.0 + ww) / s) * (ww ** (-s) - (ww + 1.0) ** (-s)) - as1 * (
            ww ** (1.0 - s) - (ww + 1.0) ** (1.0 - s)
        )
        p2 = -((1.0 - ww) / s) * ((ww - 1.0) ** (-s) - ww ** (-s)) + as1 * (
            (ww - 1.0) ** (1.0 - s) - ww ** (1.0 - s)
        )
        out[outside] = p1 + p2

    return np.sign(u) * out


def hat_gradient_table(x, centers, h, s, cw, chunk=2048):
    """Weighted gradients of all hats at all points: out[i, j] = g_hat_j(x_i)."""
    x = np.ascontiguousarray(x, dtype=float)
    centers = np.ascontiguousarray(centers, dtype=float)
    out = np.empty((x.size, centers.size))
    scale = cw * h ** (-s)
    for lo in range(0, x.size, chunk):
        hi = min(lo + chunk, x.size)
        U = (x[lo:hi, None] - centers[None, :]) / h
        out[lo:hi] = scale * unit_hat_gradient(U, s)
    return out
