"""Kernels, weights, and constants for nonlocal fractional-type operators.

The operators in this package are built from the radial two-point weight

    omega(x, y) = c * |x - y|^(-(n+s)),        s in (0, 1), n in {1, 2}

paired with the antisymmetric unit direction alpha(x, y) = (y-x)/|y-x|.
Two normalizations of c appear:

* ``weight_constant`` evaluates the closed form

      C_omega = (2 s sin(pi s / 2) / Gamma(1 - s)) * H_n(s),
      H_n(s)  = hemisphere integral of |theta_1|^(s+1),

* ``operator_weight_constant`` returns the constant for which the composed
  weighted Laplacian equals minus the Riesz fractional Laplacian.  On the
  Fourier side the weighted gradient has symbol 2 i c I_s H_n(s) sign(xi)
  |xi|^s with I_s = Gamma(1-s) sin(pi s/2) / s, so the composition carries
  the factor (2 c I_s H_n)^2; the normalized constant is c = 1/(2 I_s H_n).
  The closed form above exceeds it by 4 sin^2(pi s/2) H_n(s)^2, so it is
  reported but not used inside compositions.

The fractional-Laplacian kernel is taken with the positive sign,

    gamma_FL(x, y) = (C_{n,s} / 2) |x - y|^(-(n+2s)),

so that the associated bilinear form is nonnegative and the nonlocal
Laplacian equals -(-Delta)^s.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as _gamma

from .quadrature import (
    QuadratureBudget,
    angular_pairs,
    bridge_edges,
    gauss_rule,
    geometric_edges,
    graded_rule,
    panel_rule,
    refine,
    tail_rule,
)


class CoincidentPointsError(ValueError):
    """Two-point kernel evaluated on the diagonal x == y."""


def _check_order_dim(n, s):
    if n not in (1, 2):
        raise ValueError(f"spatial dimension must be 1 or 2, got {n}")
    if not (0.0 < s < 1.0):
        raise ValueError(f"fractional order must lie in (0, 1), got {s}")


def riesz_constant(n, s):
    """Normalization constant of the Riesz fractional Laplacian.

    Returns 4^s Gamma(s + n/2) / (pi^(n/2) |Gamma(-s)|).
    """
    _check_order_dim(n, s)
    return 4.0**s * _gamma(s + 0.5 * n) / (math.pi ** (0.5 * n) * abs(_gamma(-s)))


def hemisphere_moment(n, s):
    """Integral of |theta_1|^(s+1) over the hemisphere theta_1 >= 0 of S^(n-1).

    For n = 1 the sphere carries counting measure on {-1, +1} and the
    hemisphere integral is 1; for n = 2 it equals
    int_{-pi/2}^{pi/2} cos(phi)^(s+1) dphi = sqrt(pi) Gamma(1 + s/2) / Gamma((3+s)/2).
    """
    _check_order_dim(n, s)
    if n == 1:
        return 1.0
    return math.sqrt(math.pi) * _gamma(1.0 + 0.5 * s) / _gamma(0.5 * (3.0 + s))


def weight_constant(n, s):
    """Closed-form weight constant (2 s sin(pi s/2) / Gamma(1-s)) * H_n(s)."""
    _check_order_dim(n, s)
    return 2.0 * s * math.sin(0.5 * math.pi * s) / _gamma(1.0 - s) * hemisphere_moment(n, s)


def operator_weight_constant(n, s):
    """Weight constant that makes the composed weighted Laplacian Riesz-exact.

    Equals 1 / (2 I_s H_n(s)) with I_s = Gamma(1-s) sin(pi s/2) / s; with this
    choice the weighted gradient has Fourier symbol i sign(xi) |xi|^s and the
    divergence-of-gradient composition reproduces -(-Delta)^s.
    """
    _check_order_dim(n, s)
    i_s = _gamma(1.0 - s) * math.sin(0.5 * math.pi * s) / s
    return 1.0 / (2.0 * i_s * hemisphere_moment(n, s))


@dataclass(frozen=True)
class KernelSpec:
    """Fractional kernel parameters and truncation radii.

    r_inner is the singular-ball radius used for reflection-paired
    principal-value quadrature; r_outer the far-field truncation beyond
    which tails are handled by their power-law decay.  The equivalence
    kernel scales both by the separation of its two arguments.
    """

    s: float
    n: int = 1
    c_ns: float = field(default=None)
    c_omega: float = field(default=None)
    r_inner: float = 1e-3
    r_outer: float = 50.0

    def __post_init__(self):
        _check_order_dim(self.n, self.s)
        if self.c_ns is None:
            object.__setattr__(self, "c_ns", riesz_constant(self.n, self.s))
        if self.c_omega is None:
            object.__setattr__(self, "c_omega", weight_constant(self.n, self.s))
        if not (0.0 < self.r_inner < self.r_outer):
            raise ValueError("require 0 < r_inner < r_outer")
        if abs(self.c_ns - riesz_constant(self.n, self.s)) > 1e-12 * abs(self.c_ns):
            raise ValueError("c_ns inconsistent with its closed form")
        if abs(self.c_omega - weight_constant(self.n, self.s)) > 1e-10 * abs(self.c_omega):
            raise ValueError("c_omega inconsistent with its closed form")

    @property
    def c_op(self):
        """Composition-normalized weight constant used inside operators."""
        return operator_weight_constant(self.n, self.s)

    @property
    def gamma_coeff(self):
        """Coefficient C_{n,s}/2 of the fractional-Laplacian kernel."""
        return 0.5 * self.c_ns

    def digest(self):
        """Short stable hash for file headers."""
        import hashlib

        key = f"{self.n}:{self.s!r}:{self.r_inner!r}:{self.r_outer!r}"
        return hashlib.sha256(key.encode()).hexdigest()[:12]


def _as_points(x, y):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValueError("point shapes differ")
    return x, y


def eval_alpha(x, y):
    """Antisymmetric unit direction (y - x) / |y - x|."""
    xv, yv = _as_points(x, y)
    d = yv - xv
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise CoincidentPointsError("alpha undefined at coincident points")
    out = d / r
    return float(out[0]) if out.size == 1 else out


def eval_weight(spec, x, y):
    """Closed-form radial weight C_omega |x - y|^(-(n+s))."""
    xv, yv = _as_points(x, y)
    r = float(np.linalg.norm(yv - xv))
    if r == 0.0:
        raise CoincidentPointsError("weight undefined at coincident points")
    return spec.c_omega * r ** (-(spec.n + spec.s))


def eval_gamma_fl(spec, x, y):
    """Fractional-Laplacian kernel (C_{n,s}/2) |x - y|^(-(n+2s)), positive sign."""
    xv, yv = _as_points(x, y)
    r = float(np.linalg.norm(yv - xv))
    if r == 0.0:
        raise CoincidentPointsError("kernel undefined at coincident points")
    return spec.gamma_coeff * r ** (-(spec.n + 2.0 * spec.s))


def _sqrt_spd_2x2(a):
    """Closed-form principal square root of an SPD 2x2 matrix."""
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    tr = a[0, 0] + a[1, 1]
    sdet = math.sqrt(max(det, 0.0))
    denom = math.sqrt(tr + 2.0 * sdet)
    return (a + sdet * np.eye(2)) / denom


class DiffusionTensorField:
    """Pointwise SPD diffusion tensor A(x) with certified eigenvalue bounds.

    Parameters
    ----------
    eval_fn : callable mapping a point to an (n, n) symmetric matrix.
    lambda_min, lambda_max : global eigenvalue bounds supplied analytically
        by the constructor of the field (spot-checked by sampling).
    n : spatial dimension.
    scalar_fn : optional vectorized a(x) when A(x) = a(x) I; enables the
        fast scalar paths in 1-D quadrature.
    """

    def __init__(self, eval_fn, lambda_min, lambda_max, n=1, scalar_fn=None, name="tensor"):
        if not (0.0 < lambda_min <= lambda_max < math.inf):
            raise ValueError("require 0 < lambda_min <= lambda_max < inf")
        self.eval_fn = eval_fn
        self.lambda_min = float(lambda_min)
        self.lambda_max = float(lambda_max)
        self.n = int(n)
        self.scalar_fn = scalar_fn
        self.name = name

    def __call__(self, x):
        a = np.atleast_2d(np.asarray(self.eval_fn(x), dtype=float))
        return a

    def sqrt(self, x):
        """Principal square root A^(1/2)(x), closed form for n <= 2."""
        a = self(x)
        if a.shape == (1, 1):
            return np.array([[math.sqrt(a[0, 0])]])
        return _sqrt_spd_2x2(a)

    def scalar_values(self, pts):
        """Vectorized a(x) for scalar fields; generic fallback loops."""
        pts = np.asarray(pts, dtype=float)
        if self.scalar_fn is not None:
            return np.asarray(self.scalar_fn(pts), dtype=float) * np.ones(pts.shape[:1] or (1,))
        if self.n != 1:
            raise ValueError("scalar_values is only defined for 1-D tensor fields")
        return np.array([self(p)[0, 0] for p in np.atleast_1d(pts)])

    def spot_check(self, rng, n_samples=64, box=2.0):
        """Sample invariants: symmetry, ellipticity bracket, sqrt consistency."""
        for _ in range(n_samples):
            x = rng.uniform(-box, box, size=self.n)
            x = x if self.n > 1 else float(x[0])
            a = self(x)
            if np.linalg.norm(a - a.T) > 1e-14 * max(np.linalg.norm(a), 1e-30):
                raise ValueError(f"{self.name}: A(x) not symmetric at x={x}")
            v = rng.normal(size=self.n)
            v /= np.linalg.norm(v)
            q = float(v @ a @ v)
            if not (self.lambda_min - 1e-12 <= q <= self.lambda_max + 1e-12):
                raise ValueError(f"{self.name}: ellipticity bracket violated at x={x}")
            r = self.sqrt(x)
            if np.linalg.norm(r @ r - a) > 1e-12 * max(np.linalg.norm(a), 1e-30):
                raise ValueError(f"{self.name}: sqrt(A)^2 != A at x={x}")
        return True


def identity_tensor(n=1):
    eye = np.eye(n)
    return DiffusionTensorField(
        lambda x: eye, 1.0, 1.0, n=n, scalar_fn=lambda p: np.ones_like(np.asarray(p, dtype=float)), name="identity"
    )


def constant_tensor(a):
    """Constant SPD tensor field from an (n, n) matrix or a scalar."""
    mat = np.atleast_2d(np.asarray(a, dtype=float))
    lam = np.linalg.eigvalsh(mat)
    scalar = None
    if mat.shape == (1, 1):
        scalar = lambda p: np.full_like(np.asarray(p, dtype=float), mat[0, 0])
    return DiffusionTensorField(lambda x: mat, lam[0], lam[-1], n=mat.shape[0], scalar_fn=scalar, name="constant")


def scalar_tensor(a_fn, a_min, a_max, n=1, name="scalar"):
    """Isotropic field A(x) = a(x) I with certified bounds a_min <= a <= a_max."""
    eye = np.eye(n)

    def eval_fn(x):
        pt = np.asarray(x, dtype=float)
        val = float(a_fn(pt if n > 1 else float(np.atleast_1d(pt)[0])))
        return val * eye

    scalar = (lambda p: np.asarray(a_fn(np.asarray(p, dtype=float)), dtype=float)) if n == 1 else None
    return DiffusionTensorField(eval_fn, a_min, a_max, n=n, scalar_fn=scalar, name=name)


def sine_scalar_tensor(base=2.0, amplitude=1.0, n=1):
    """Shipped smooth isotropic field a(x) = base + amplitude*sin(x_1)."""
    if not base > abs(amplitude):
        raise ValueError("need base > |amplitude| for ellipticity")

    def a_fn(x):
        x1 = x if np.isscalar(x) else np.asarray(x, dtype=float)[..., 0] if n > 1 else np.asarray(x, dtype=float)
        return base + amplitude * np.sin(x1)

    return scalar_tensor(a_fn, base - abs(amplitude), base + abs(amplitude), n=n, name="sine-scalar")


def rotated_anisotropy(lam1=1.0, lam2=3.0, pitch=1.0):
    """Shipped genuinely anisotropic 2-D field: eigenvalues (lam1, lam2) with
    principal axis rotating as theta = pitch * (x_1 + x_2)."""

    def eval_fn(x):
        p = np.asarray(x, dtype=float)
        th = pitch * (p[0] + p[1])
        c, s = math.cos(th), math.sin(th)
        r = np.array([[c, -s], [s, c]])
        return r @ np.diag([lam1, lam2]) @ r.T

    return DiffusionTensorField(eval_fn, min(lam1, lam2), max(lam1, lam2), n=2, name="rotated-anisotropy")


# ---------------------------------------------------------------------------
# Equivalence kernel by principal-value quadrature
# ---------------------------------------------------------------------------
#
# For a two-point weight w(x, y) (here A^(1/2)(first argument) times the
# radial weight) the composed operator D_w G_w applied to u reads
# int (u(z) - u(x)) gstar(x, z) dz with
#
#   gstar = g_I + g_IIA + g_IIB,
#   g_I(x,z)   = [w a](x,z) . int [w a](x,y) dy,
#   g_IIA(x,z) = int  [w(y,z) a(y,z)] . [w(y,x) a(x,y)] dy,
#   g_IIB(x,z) = [w(z,x) a(x,z)] . int [w(z,y) a(y,z)] dy,
#
# all PV integrals paired symmetrically about their singular points.  For a
# radial weight the single integrals in g_I and g_IIB vanish identically
# under reflection pairing (odd integrands), which the paired evaluation
# reproduces exactly.  The kernel normalized so that the composed operator
# is 2 int (u(z)-u(x)) gamma_eq dz is gamma_eq = gstar / 2; with A = I and
# the fractional weight this equals gamma_FL.


def _gamma_iia_1d(spec, tensor, x, z, level, base):
    s = spec.s
    c2 = spec.c_op**2
    xl, zr = (x, z) if x < z else (z, x)
    d = zr - xl
    mid = 0.5 * (xl + zr)
    rho = min(spec.r_inner * d, 0.25 * d)
    R = spec.r_outer * d
    q = base * (1 << level)
    # panel widths also shrink with level so refinement resolves coefficient
    # fields varying on scales unrelated to the pair separation
    ratio = 2.0 ** (1.0 / (1 + level))

    a_of = tensor.scalar_values

    def integrand(y):
        return (
            c2
            * np.abs(y - xl) ** (-1.0 - s)
            * np.abs(y - zr) ** (-1.0 - s)
            * a_of(y)
            * np.sign(y - xl)
            * np.sign(zr - y)
        )

    total = 0.0
    # reflection-paired balls at each singular point, written in the distance
    # coordinate t = |y - c| so the near-singular factor is exact (forming
    # y = c + t and subtracting c back would destroy t in floating point).
    # The far-kernel difference is evaluated through expm1/atanh; the naive
    # subtraction loses all accuracy once t drops below ~1e-10 d.
    t, wt = graded_rule(rho, s, 2 * q)
    p = 1.0 + s
    kt = t ** (-1.0 - s)
    kp = (d + t) ** (-p)
    kdiff = kp * np.expm1(2.0 * p * np.arctanh(t / d))  # (d-t)^-p - (d+t)^-p
    ksum = kp * (np.expm1(2.0 * p * np.arctanh(t / d)) + 2.0)  # (d-t)^-p + (d+t)^-p
    for near, farplus, farminus in ((xl, xl + t, xl - t), (zr, zr - t, zr + t)):
        a_p = a_of(farplus)
        a_m = a_of(farminus)
        total += float(
            np.sum(wt * c2 * kt * (0.5 * kdiff * (a_p + a_m) + 0.5 * ksum * (a_p - a_m)))
        )
    # bridge between the two balls
    if zr - rho > xl + rho:
        edges = bridge_edges(xl + rho, zr - rho, rho, rho, ratio=ratio, max_panels=512)
        yn, wn = panel_rule(edges, q)
        total += float(np.sum(wn * integrand(yn)))
    # outer panels out to the truncation radius, graded toward the balls
    span_left = (xl - rho) - (mid - R)
    left_edges = (xl - rho) - geometric_edges(0.0, span_left, rho, ratio, 512)[::-1]
    right_edges = geometric_edges(zr + rho, mid + R, rho, ratio, 512)
    for edges in (left_edges, right_edges):
        yn, wn = panel_rule(edges, q)
        total += float(np.sum(wn * integrand(yn)))
    # power-law far tails
    for sgn in (-1.0, 1.0):
        t, wt = tail_rule(R, 1.0 + 2.0 * s, q)
        total += float(np.sum(wt * integrand(mid + sgn * t)))
    return total


def _pv_weight_direction_1d(spec, center, d, level, base):
    """Paired PV of int omega(center, y) alpha(center, y) dy.

    alpha flips sign across the singular point while the radial weight does
    not, so every reflection pair cancels exactly; evaluated explicitly so
    the full three-term kernel decomposition is computed, not assumed.
    """
    q = base * (1 << level)
    rho = min(spec.r_inner * d, 0.25 * d)
    R = spec.r_outer * d
    s = spec.s
    w = lambda t: spec.c_op * t ** (-1.0 - s)
    total = 0.0
    t, wt = graded_rule(rho, s, q)
    total += float(np.sum(wt * (w(t) * 1.0 + w(t) * -1.0)))
    yn, wn = panel_rule(geometric_edges(rho, R, rho), q)
    total += float(np.sum(wn * (w(yn) * 1.0 + w(yn) * -1.0)))
    return total


def _gamma_iia_2d(spec, tensor, x, z, level, base):
    s = spec.s
    c2 = spec.c_op**2
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    d = float(np.linalg.norm(z - x))
    mid = 0.5 * (x + z)
    rho = min(max(spec.r_inner * d, 5e-3 * d), 0.25 * d)
    R = spec.r_outer * d
    q = base * (1 << level)
    n_ang = 8 * (1 << level)

    def tensor_rows(pts):
        return np.array([tensor(p) for p in pts])

    def integrand(pts):
        pts = np.atleast_2d(pts)
        dx = pts - x[None, :]
        dz = z[None, :] - pts
        rx = np.linalg.norm(dx, axis=1)
        rz = np.linalg.norm(dz, axis=1)
        ax = dx / rx[:, None]
        az = dz / rz[:, None]
        amats = tensor_rows(pts)
        quad = np.einsum("pi,pij,pj->p", az, amats, ax)
        return c2 * rx ** (-2.0 - s) * rz ** (-2.0 - s) * quad

    dirs, w_ang = angular_pairs(n_ang)
    total = 0.0
    # paired discs around each singular point (polar measure r dr dtheta).
    # Distances to the near center are kept as the exact radial coordinate t;
    # forming y = c + t*u and subtracting c back would destroy t near c.
    t, wt = graded_rule(rho, s, q)
    for c, near_is_x in ((x, True), (z, False)):
        other_vec = (z - x) if near_is_x else (x - z)
        for u in dirs:
            ue = float(u @ other_vec)
            for sgn in (1.0, -1.0):
                pts = c[None, :] + (sgn * t)[:, None] * u[None, :]
                far = other_vec[None, :] - (sgn * t)[:, None] * u[None, :]
                r_far = np.sqrt(d * d - 2.0 * sgn * t * ue + t * t)
                amats = tensor_rows(pts)
                if near_is_x:
                    a_xy = sgn * u[None, :] * np.ones((t.size, 1))
                    a_yz = far / r_far[:, None]
                else:
                    a_yz = -sgn * u[None, :] * np.ones((t.size, 1))
                    a_xy = -far / r_far[:, None]
                quad = np.einsum("pi,pij,pj->p", a_yz, amats, a_xy)
                total += w_ang * float(
                    np.sum(wt * t * c2 * t ** (-2.0 - s) * r_far ** (-2.0 - s) * quad)
                )
    # remaining plane out to |y - mid| = R, split along the perpendicular bisector
    e_hat = (z - x) / d
    for c, toward in ((x, e_hat), (z, -e_hat)):
        cm = c - mid
        for u in np.concatenate([dirs, -dirs]):
            w = float(u @ toward)
            # distance to the bisector plane through mid
            r_bis = (0.5 * d) / w if w > 1e-12 else np.inf
            # distance to the outer circle |y - mid| = R
            b = float(cm @ u)
            r_out = -b + math.sqrt(max(R**2 - float(cm @ cm) + b**2, 0.0))
            r_max = min(r_bis, r_out)
            if r_max <= rho:
                continue
            edges = geometric_edges(rho, r_max, rho)
            rn, wn = panel_rule(edges, q)
            pts = c[None, :] + rn[:, None] * u[None, :]
            total += w_ang * float(np.sum(wn * rn * integrand(pts)))
    # far tail: integrand ~ -c2 * r^(-4-2s) * (theta^T A theta) on |y - mid| > R
    ring = np.concatenate([dirs, -dirs])
    ring_pts = mid[None, :] + R * ring
    amats = tensor_rows(ring_pts)
    ang = float(np.einsum("pi,pij,pj->", ring, amats, ring)) * w_ang
    total += -c2 * ang * R ** (-2.0 - 2.0 * s) / (2.0 + 2.0 * s)
    return total


def equivalence_kernel(spec, tensor, x, z, budget=None):
    """Symmetric kernel gamma_eq(x, z) of the composed weighted operator.

    Computed by principal-value quadrature of the three auxiliary integrals
    with weight A^(1/2) omega; quadrature nodes are paired symmetrically
    about each singular point (y = x and y = z) so the antisymmetric
    divergent parts cancel.  For A = I and the fractional weight the result
    converges to gamma_FL(x, z).

    Raises NonConvergenceError when successive refinements disagree beyond
    budget.tolerance.
    """
    budget = budget or QuadratureBudget(panels=12, levels=2, tolerance=1e-4)
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    zv = np.atleast_1d(np.asarray(z, dtype=float))
    d = float(np.linalg.norm(zv - xv))
    if d == 0.0:
        raise CoincidentPointsError("equivalence kernel undefined at coincident points")
    if tensor.n != spec.n:
        raise ValueError("tensor field dimension disagrees with kernel spec")

    if spec.n == 1:
        x1, z1 = float(xv[0]), float(zv[0])

        def evaluate(level):
            g_iia = _gamma_iia_1d(spec, tensor, x1, z1, level, budget.panels)
            # g_I and g_IIB carry A^(1/2) evaluated at the fixed endpoint, so
            # they reduce to the single PV integral below times bounded factors.
            g_i = _pv_weight_direction_1d(spec, x1, d, level, budget.panels)
            g_iib = _pv_weight_direction_1d(spec, z1, d, level, budget.panels)
            return 0.5 * (g_iia + g_i + g_iib)

    else:

        def evaluate(level):
            return 0.5 * _gamma_iia_2d(spec, tensor, xv, zv, level, budget.panels)

    scale = spec.gamma_coeff * d ** (-(spec.n + 2.0 * spec.s))
    value, _ = refine(evaluate, budget, scale=scale, what="equivalence kernel")
    return value
