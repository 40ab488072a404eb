"""Scalar and two-point fields used by the pointwise operators and tests.

Shipped fields (all compactly supported, with analytic derivatives where
the singularity-subtraction quadrature needs them):

* ``smooth_bump(R)``      exp(1 - 1/(1 - (x/R)^2)) on |x| < R,
* ``sqrt_profile(s, R)``  (1 - |x/R|^2)_+^s, the profile with constant
                          fractional Laplacian on the ball,
* ``truncated_gaussian``  exp(-(x-c)^2 / (2 w^2)) cut off at a stated radius.
"""

import math
from dataclasses import dataclass

import numpy as np


def _vectorized(core):
    def fn(x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        out = core(np.atleast_1d(arr))
        return float(out[0]) if scalar else out

    return fn


@dataclass
class ScalarField:
    """Callable scalar field with compact support and optional derivatives.

    ``d1``/``d2`` feed second-order singularity subtraction; when absent
    they are approximated by central differences.
    """

    fn: callable
    support_radius: float
    d1: callable = None
    d2: callable = None
    name: str = "field"

    def __call__(self, x):
        return self.fn(x)

    def deriv1(self, x):
        if self.d1 is not None:
            return float(self.d1(float(x)))
        h = 1e-5 * max(1.0, abs(x))
        return (self(x + h) - self(x - h)) / (2.0 * h)

    def deriv2(self, x):
        if self.d2 is not None:
            return float(self.d2(float(x)))
        h = 1e-4 * max(1.0, abs(x))
        return (self(x + h) - 2.0 * self(x) + self(x - h)) / (h * h)

    def scaled(self, factor):
        d1 = None if self.d1 is None else (lambda x: factor * self.d1(x))
        d2 = None if self.d2 is None else (lambda x: factor * self.d2(x))
        return ScalarField(
            lambda x: factor * self.fn(x), self.support_radius, d1, d2, f"{factor}*{self.name}"
        )


@dataclass
class TwoPointVectorField:
    """Callable (x, y) -> vector, finite away from the diagonal."""

    fn: callable
    name: str = "two-point field"

    def __call__(self, x, y):
        return self.fn(x, y)


def smooth_bump(radius=1.0):
    """C^infinity bump exp(1 - 1/(1 - (x/R)^2)) supported on |x| < R."""
    R = float(radius)

    def core(x):
        xi2 = np.square(x / R)
        out = np.zeros_like(x)
        m = xi2 < 1.0
        out[m] = np.exp(1.0 - 1.0 / (1.0 - xi2[m]))
        return out

    def d1(x):
        xi = x / R
        if abs(xi) >= 1.0:
            return 0.0
        g = 1.0 - xi * xi
        return math.exp(1.0 - 1.0 / g) * (-2.0 * xi / (g * g)) / R

    def d2(x):
        xi = x / R
        if abs(xi) >= 1.0:
            return 0.0
        g = 1.0 - xi * xi
        u = math.exp(1.0 - 1.0 / g)
        p = -2.0 * xi / (g * g)
        dp = (-2.0 * g - 8.0 * xi * xi) / g**3
        return u * (p * p + dp) / (R * R)

    return ScalarField(_vectorized(core), R, d1, d2, "bump")


def sqrt_profile(s=0.5, radius=1.0):
    """(1 - (x/R)^2)_+^s; its order-s fractional Laplacian is constant inside."""
    R = float(radius)
    s = float(s)

    def core(x):
        g = 1.0 - np.square(x / R)
        out = np.zeros_like(x)
        m = g > 0.0
        out[m] = g[m] ** s
        return out

    def d1(x):
        g = 1.0 - (x / R) ** 2
        if g <= 0.0:
            return 0.0
        return s * g ** (s - 1.0) * (-2.0 * x / R**2)

    def d2(x):
        g = 1.0 - (x / R) ** 2
        if g <= 0.0:
            return 0.0
        return s * (s - 1.0) * g ** (s - 2.0) * (2.0 * x / R**2) ** 2 + s * g ** (s - 1.0) * (
            -2.0 / R**2
        )

    return ScalarField(_vectorized(core), R, d1, d2, f"sqrt-profile(s={s})")


def truncated_gaussian(center=0.0, width=0.25, radius=1.0):
    """Gaussian bump cut off at |x - center| = radius."""
    c, w, R = float(center), float(width), float(radius)

    def core(x):
        out = np.zeros_like(x)
        m = np.abs(x - c) < R
        out[m] = np.exp(-0.5 * ((x[m] - c) / w) ** 2)
        return out

    def d1(x):
        if abs(x - c) >= R:
            return 0.0
        return math.exp(-0.5 * ((x - c) / w) ** 2) * (-(x - c) / w**2)

    def d2(x):
        if abs(x - c) >= R:
            return 0.0
        t = (x - c) / w
        return math.exp(-0.5 * t * t) * (t * t - 1.0) / w**2

    return ScalarField(_vectorized(core), abs(c) + R, d1, d2, "truncated-gaussian")


def constant_field(value, support_radius=math.inf):
    """Spatially constant field; support radius infinite unless stated."""
    v = float(value)

    def core(x):
        return np.full_like(x, v)

    return ScalarField(_vectorized(core), support_radius, lambda x: 0.0, lambda x: 0.0, f"const({v})")


SHIPPED_FIELDS = {
    "bump": smooth_bump,
    "sqrt-profile": sqrt_profile,
    "truncated-gaussian": truncated_gaussian,
}
