"""Pointwise nonlocal operators on callable fields (1-D engines).

Every operator is a singular integral evaluated by the same scheme:

* a reflection-paired ball around the singular point, evaluated with the
  floored graded rule ``pv_odd_ball`` (the paired difference is modeled by
  its odd Taylor form below a floor where floating-point cancellation would
  otherwise be amplified by the kernel),
* geometrically graded Gauss panels out to a truncation distance D that
  always covers the field support (with panel breaks on support edges),
* analytic power-law tails, or mapped tail quadrature for integrands that
  decay but do not vanish, beyond D.

Each public operator evaluates at increasing refinement levels and raises
NonConvergenceError when the last two levels disagree beyond the budget
tolerance.  These routines are the mesh-free reference the Galerkin
assembly is validated against; they favor transparency over speed.
"""

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField, TwoPointVectorField
from .kernels import CoincidentPointsError, KernelSpec, eval_alpha
from .quadrature import (
    NonConvergenceError,
    QuadratureBudget,
    geometric_edges,
    graded_rule,
    panel_rule,
    pv_odd_ball,
    refine,
    tail_rule,
)

DEFAULT_BUDGET = QuadratureBudget(panels=12, levels=2, tolerance=1e-5)

# Floor ratios for pv_odd_ball: analytic integrands tolerate a deep floor,
# nested quadratures carry ~1e-6 relative noise and need a shallow one.
_FLOOR_ANALYTIC = 1e-2
_FLOOR_NESTED = 0.1


@dataclass(frozen=True)
class FractionalKernel:
    """Radial kernel coeff * |x - y|^(-power) with known exponent."""

    coeff: float
    power: float

    @classmethod
    def fractional_laplacian(cls, spec):
        return cls(spec.gamma_coeff, spec.n + 2.0 * spec.s)

    def __call__(self, x, y):
        r = abs(float(y) - float(x))
        if r == 0.0:
            raise CoincidentPointsError("kernel undefined at coincident points")
        return self.coeff * r ** (-self.power)


@dataclass(frozen=True)
class KernelPair:
    """Antisymmetric alpha with gamma = alpha . alpha for unweighted operators."""

    alpha: callable
    gamma: FractionalKernel

    @classmethod
    def fractional(cls, spec):
        g = FractionalKernel.fractional_laplacian(spec)

        def alpha(x, y):
            r = float(y) - float(x)
            if r == 0.0:
                raise CoincidentPointsError("alpha undefined at coincident points")
            return np.sign(r) * np.sqrt(g.coeff) * abs(r) ** (-0.5 * g.power)

        return cls(alpha, g)


def _require_1d(spec):
    if spec.n != 1:
        raise NotImplementedError("pointwise operator engines are implemented for n = 1")


def _truncation(u_support, x):
    """Symmetric truncation distance covering the support from x."""
    return abs(x) + u_support + 1.0


def _panel_nodes(x, rho, D, breaks, q):
    """Graded outside-ball panels on [x-D, x-rho] and [x+rho, x+D]."""
    base = geometric_edges(rho, D, rho)
    right = x + base
    left = (x - base)[::-1]
    brk = np.asarray(breaks, dtype=float)
    right = np.unique(np.concatenate([right, brk[(brk > x + rho) & (brk < x + D)]]))
    left = np.unique(np.concatenate([left, brk[(brk > x - D) & (brk < x - rho)]]))
    yr, wr = panel_rule(right, q)
    yl, wl = panel_rule(left, q)
    return yl, wl, yr, wr


def unweighted_gradient(u, x, y):
    """Two-point gradient (u(y) - u(x)) alpha(x, y)."""
    a = eval_alpha(x, y)
    return (float(u(y)) - float(u(x))) * a


def _weighted_gradient_fixed(u, spec, x, q):
    """Single-level weighted gradient at fixed quadrature order."""
    s = spec.s
    R = u.support_radius
    rho = min(spec.r_inner, 0.25 * max(R, 1.0))
    D = _truncation(R, x)
    ux = float(u(x))
    ball = pv_odd_ball(lambda t: u(x + t) - u(x - t), rho, s, 2 * q, _FLOOR_ANALYTIC)
    yl, wl, yr, wr = _panel_nodes(x, rho, D, (-R, R), q)
    right = np.sum(wr * (u(yr) - ux) * (yr - x) ** (-1.0 - s))
    left = -np.sum(wl * (u(yl) - ux) * (x - yl) ** (-1.0 - s))
    # beyond D the field vanishes and the symmetric -u(x) parts cancel
    return spec.c_op * float(ball + right + left)


def weighted_gradient(u, spec, x, budget=None):
    """PV integral of omega(x,y) (u(y) - u(x)) alpha(x,y) over the line.

    Uses the composition-normalized weight, so the Fourier symbol is
    i sign(xi) |xi|^s.
    """
    _require_1d(spec)
    budget = budget or DEFAULT_BUDGET
    x = float(x)

    def evaluate(level):
        return _weighted_gradient_fixed(u, spec, x, budget.order(level))

    scale = max(abs(float(u(x))), 1e-6)
    value, _ = refine(evaluate, budget, scale=scale, what="weighted gradient")
    return value


def _weighted_divergence_fixed(v_vec, spec, x, sup, q, floor, tail_decay):
    """Single-level weighted divergence of a one-point field."""
    s = spec.s
    rho = (0.1 if floor >= _FLOOR_NESTED else min(spec.r_inner, 0.25)) * max(min(sup, 10.0), 1.0)
    rho = min(rho, 0.25 * max(sup, 1.0))
    D = _truncation(sup, x)
    vx = float(np.atleast_1d(v_vec(np.array([x])))[0])
    ball = pv_odd_ball(lambda t: v_vec(x + t) - v_vec(x - t), rho, s, 2 * q, floor)
    yl, wl, yr, wr = _panel_nodes(x, rho, D, (-sup, sup), q)
    right = np.sum(wr * (vx + v_vec(yr)) * (yr - x) ** (-1.0 - s))
    left = -np.sum(wl * (vx + v_vec(yl)) * (x - yl) ** (-1.0 - s))
    total = ball + right + left
    # the symmetric v(x) parts beyond D cancel; v(y) decays there
    if tail_decay is not None:
        tt, twt = tail_rule(D, tail_decay, q)
        total += np.sum(twt * v_vec(x + tt) * tt ** (-1.0 - s))
        total -= np.sum(twt * v_vec(x - tt) * tt ** (-1.0 - s))
    return spec.c_op * float(total)


def weighted_divergence(v, spec, x, budget=None, v_tail_decay=None, v_support=None):
    """PV integral of (omega(x,y) v(x) + omega(y,x) v(y)) alpha(x,y).

    ``v`` is a one-point field.  If it is not compactly supported, pass
    ``v_tail_decay`` = beta so the far field is integrated with the mapped
    rule for ~ t^(-1-beta) decay of v(y) * omega.
    """
    _require_1d(spec)
    budget = budget or DEFAULT_BUDGET
    x = float(x)
    sup = v_support if v_support is not None else getattr(v, "support_radius", 1.0)
    v_vec = v if callable(getattr(v, "__call__", None)) else v
    arr = np.atleast_1d(np.asarray(v_vec(np.array([x])), dtype=float))
    if arr.size != 1:
        raise ValueError("weighted_divergence expects a scalar-per-point field in 1-D")

    def evaluate(level):
        return _weighted_divergence_fixed(
            v_vec, spec, x, sup, budget.order(level), _FLOOR_ANALYTIC, v_tail_decay
        )

    scale = max(float(np.abs(arr[0])), 1e-6)
    value, _ = refine(evaluate, budget, scale=scale, what="weighted divergence")
    return value


def _riesz_like(u, x, coeff, power, support, budget, what):
    """coeff * PV int (u(x) - u(y)) |x-y|^(-power) dy with Taylor subtraction.

    Inside the ball the second-order Taylor polynomial of u is subtracted
    and its moment integrated analytically; the remainder is O(t^(4-power))
    and integrates stably.  Below the pairing floor the remainder is
    O(t^(4-power)) and is dropped (its integral is negligible).
    """
    x = float(x)
    sigma = power - 1.0  # = 2s for the fractional kernel in 1-D
    rho = min(0.1, 0.25 * max(support, 1.0))
    D = max(abs(x) + support + 1.0, 2.0)
    ux = float(u(x))
    d2 = u.deriv2(x)
    tf = 1e-3 * rho

    def evaluate(level):
        q = budget.order(level)
        kappa = 1.0 / (1.0 - 0.5 * max(sigma - 1.0, 0.0))
        tau, gw = panel_rule(np.geomspace((tf / rho) ** (1.0 / kappa), 1.0, 4), 2 * q)
        t = rho * tau**kappa
        wt = gw * rho * kappa * tau ** (kappa - 1.0)
        paired = 2.0 * ux - u(x + t) - u(x - t) + d2 * t * t
        ball = np.sum(wt * paired * t ** (-1.0 - sigma))
        moment = -d2 * rho ** (2.0 - sigma) / (2.0 - sigma)
        yl, wl, yr, wr = _panel_nodes(x, rho, D, (-support, support), q)
        right = np.sum(wr * (ux - u(yr)) * (yr - x) ** (-1.0 - sigma))
        left = np.sum(wl * (ux - u(yl)) * (x - yl) ** (-1.0 - sigma))
        tail = 2.0 * ux * D ** (-sigma) / sigma
        return coeff * float(ball + moment + right + left + tail)

    value, _ = refine(evaluate, budget, what=what)
    return value


def riesz_laplacian(u, spec, x, budget=None):
    """Riesz fractional Laplacian C_{n,s} PV int (u(x)-u(y)) |x-y|^(-n-2s) dy."""
    _require_1d(spec)
    budget = budget or DEFAULT_BUDGET
    return _riesz_like(
        u, x, spec.c_ns, spec.n + 2.0 * spec.s, u.support_radius, budget, "riesz laplacian"
    )


def unweighted_laplacian(u, kernel, x, budget=None, support=None):
    """Nonlocal Laplacian 2 int (u(y) - u(x)) gamma(x, y) dy for a radial kernel."""
    budget = budget or DEFAULT_BUDGET
    sup = support if support is not None else u.support_radius
    return -_riesz_like(u, x, 2.0 * kernel.coeff, kernel.power, sup, budget, "unweighted laplacian")


def unweighted_divergence(v, pair, x, budget=None, support=1.0):
    """PV integral of (v(x,y) + v(y,x)) . alpha(x,y) for a two-point field v."""
    budget = budget or DEFAULT_BUDGET
    x = float(x)
    g = pair.gamma
    rho = min(0.05, 0.25 * support)
    D = abs(x) + support + 1.0

    def f(y):
        return (v(x, y) + v(y, x)) * pair.alpha(x, y)

    f_vec = np.vectorize(f, otypes=[float])

    def evaluate(level):
        q = budget.order(level)
        # after pairing the integrand behaves like t^(2-power)
        t, wt = graded_rule(rho, max(g.power - 2.0, 0.0), 2 * q)
        ball = np.sum(wt * (f_vec(x + t) + f_vec(x - t)))
        yl, wl, yr, wr = _panel_nodes(x, rho, D, (-support, support), q)
        total = float(ball + np.sum(wr * f_vec(yr)) + np.sum(wl * f_vec(yl)))
        # far field decays like the kernel with one power of cancellation
        tt, twt = tail_rule(D, g.power - 1.0, q)
        total += float(np.sum(twt * (f_vec(x + tt) + f_vec(x - tt))))
        return total

    value, _ = refine(evaluate, budget, what="unweighted divergence")
    return value


def weighted_laplacian(u, spec, x, budget=None):
    """Composition D_omega(G_omega u)(x) by nested PV quadrature."""
    return anisotropic_laplacian(u, spec, None, x, budget)


def anisotropic_laplacian(u, spec, tensor, x, budget=None):
    """Composition D_omega(A(.) G_omega u)(x) by nested PV quadrature.

    The inner weighted gradient is evaluated at the same refinement level
    as the outer divergence, so the refinement check controls the composite
    error.  A = None means the identity tensor.
    """
    _require_1d(spec)
    budget = budget or DEFAULT_BUDGET
    x = float(x)
    sup = u.support_radius

    def evaluate(level):
        q = budget.order(level)

        def grad_at(y):
            return _weighted_gradient_fixed(u, spec, float(y), q)

        if tensor is None:
            va = np.vectorize(grad_at, otypes=[float])
        else:
            a_of = tensor.scalar_values

            def one(y):
                return float(a_of(np.array([y]))[0]) * grad_at(y)

            va = np.vectorize(one, otypes=[float])

        # inner gradient decays like |y|^(-1-s): outer tail decay 1+2s
        return _weighted_divergence_fixed(
            va, spec, x, sup, q, _FLOOR_NESTED, 1.0 + 2.0 * spec.s
        )

    scale = max(abs(float(u(x))), 1e-6)
    value, _ = refine(evaluate, budget, scale=scale, what="weighted laplacian")
    return value
