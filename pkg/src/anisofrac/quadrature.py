"""Quadrature primitives for principal-value and power-law integrals.

All singular integrals in this package reduce to three building blocks:

* a graded rule on (0, rho] that absorbs an algebraic endpoint
  singularity t^(-p) exactly via the substitution t = rho * tau^(1/(1-p)),
* composite Gauss-Legendre panels with geometric grading toward steep
  endpoints,
* a mapped rule for tails int_R^inf f(t) dt with f ~ t^(-1-beta), using
  t = R * tau^(-1/beta) so the transformed integrand is smooth on (0, 1].

Principal values are never formed by cutoff subtraction: callers evaluate
reflection-paired sums f(c+t) + f(c-t) on the graded nodes so the odd
divergent part cancels identically.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class NonConvergenceError(RuntimeError):
    """Two successive quadrature refinements differ by more than the tolerance."""


@dataclass(frozen=True)
class QuadratureBudget:
    """Resolution knobs for the singular-integral engines.

    panels: base Gauss order / panel density (doubled per refinement level).
    levels: number of refinement passes used for the convergence estimate.
    tolerance: relative difference accepted between the last two passes.
    """

    panels: int = 8
    levels: int = 2
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.panels < 1 or self.levels < 1:
            raise ValueError("quadrature budget counts must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("quadrature budget tolerance must be > 0")

    def order(self, level):
        return self.panels * (1 << level)


@lru_cache(maxsize=256)
def gauss_rule(q):
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(int(q))
    return 0.5 * (x + 1.0), 0.5 * w


def panel_rule(edges, q):
    """Composite Gauss rule over consecutive panels given by `edges`."""
    edges = np.asarray(edges, dtype=float)
    x0, w0 = gauss_rule(q)
    widths = np.diff(edges)
    nodes = edges[:-1, None] + widths[:, None] * x0[None, :]
    weights = widths[:, None] * w0[None, :]
    return nodes.ravel(), weights.ravel()


def graded_rule(rho, p, q):
    """Nodes/weights for int_0^rho g(t) dt with g(t) ~ t^(-p), p < 1.

    The substitution t = rho * tau^kappa with kappa = 1/(1-p) maps the
    integrand to a smooth function of tau, so plain Gauss applies.
    """
    p = min(float(p), 0.95)
    kappa = 1.0 / (1.0 - p)
    tau, w = gauss_rule(q)
    t = rho * tau**kappa
    wt = w * rho * kappa * tau ** (kappa - 1.0)
    return t, wt

def tail_rule(R, beta, q):
    """Nodes/weights for int_R^inf f(t) dt with f(t) ~ t^(-1-beta), beta > 0.

    Uses t = R * tau^(-1/beta); the transformed integrand tends to a finite
    limit as tau -> 0, matching the assumed power-law decay exactly.
    """
    if beta <= 0:
        raise ValueError("tail decay exponent must be positive")
    tau, w = gauss_rule(q)
    t = R * tau ** (-1.0 / beta)
    wt = w * (R / beta) * tau ** (-1.0 / beta - 1.0)
    return t, wt


def geometric_edges(a, b, first, ratio=2.0, max_panels=64):
    """Panel edges from a to b with widths growing geometrically from `first`."""
    if b <= a:
        return np.array([a, b]) if b == a else np.array([a])
    edges = [a]
    wcur = first
    pos = a
    while pos + wcur < b and len(edges) < max_panels:
        pos += wcur
        edges.append(pos)
        wcur *= ratio
    edges.append(b)
    return np.asarray(edges)


def bridge_edges(a, b, ha, hb, ratio=2.0, max_panels=96):
    """Panel edges on [a, b] graded away from both endpoints.

    Widths start at ha near a and hb near b, growing toward the middle.
    """
    if b <= a:
        raise ValueError("empty bridge interval")
    mid = 0.5 * (a + b)
    left = geometric_edges(a, mid, ha, ratio, max_panels // 2)
    right = b - geometric_edges(0.0, b - mid, hb, ratio, max_panels // 2)[::-1]
    return np.unique(np.concatenate([left, right]))


def refine(evaluate, budget, scale=0.0, what="integral"):
    """Run `evaluate(level)` over refinement levels until stable.

    Returns (value, err_estimate). Raises NonConvergenceError if the last
    two levels still differ by more than budget.tolerance relative to
    max(|value|, scale).
    """
    prev = None
    val = None
    err = np.inf
    for lev in range(budget.levels + 1):
        val = evaluate(lev)
        if prev is not None:
            err = float(np.max(np.abs(np.asarray(val) - np.asarray(prev))))
            ref = max(float(np.max(np.abs(np.asarray(val)))), scale, 1e-300)
            if err <= budget.tolerance * ref:
                return val, err
        prev = val
    ref = max(float(np.max(np.abs(np.asarray(val)))), scale, 1e-300)
    if err > budget.tolerance * ref:
        raise NonConvergenceError(
            f"{what}: refinement stalled (last change {err:.3e}, "
            f"tolerance {budget.tolerance:.3e} on scale {ref:.3e})"
        )
    return val, err


def angular_pairs(m):
    """m directions covering half the circle; with their antipodes they tile it."""
    theta = (np.arange(m) + 0.5) * np.pi / m
    return np.stack([np.cos(theta), np.sin(theta)], axis=1), np.pi / m


def pv_odd_ball(delta_f, rho, sing, q, floor_ratio=1e-2):
    """Integral over (0, rho] of delta_f(t) * t^(-1-sing), delta_f odd-smooth.

    delta_f is a reflection-paired difference, so delta_f(t) = c1 t + c3 t^3
    + O(t^5) near zero.  Below the floor t_f = floor_ratio * rho the paired
    difference cannot be resolved in floating point (its relative noise is
    amplified by t^(-1-sing)), so that segment is integrated from the cubic
    model fitted at t_f and t_f/2; graded Gauss covers [t_f, rho].
    """
    tf = floor_ratio * rho
    d1 = float(delta_f(np.array([tf]))[0])
    d2 = float(delta_f(np.array([0.5 * tf]))[0])
    b = (d1 - 2.0 * d2) * 4.0 / (3.0 * tf**3)
    a = d1 / tf - b * tf * tf
    small = a * tf ** (1.0 - sing) / (1.0 - sing) + b * tf ** (3.0 - sing) / (3.0 - sing)
    kappa = 1.0 / (1.0 - min(sing, 0.95))
    tau_f = (tf / rho) ** (1.0 / kappa)
    # a few log-spaced panels in the graded coordinate
    tau_edges = np.geomspace(tau_f, 1.0, 4)
    tau, gw = panel_rule(tau_edges, q)
    t = rho * tau**kappa
    w = gw * rho * kappa * tau ** (kappa - 1.0)
    return small + float(np.sum(w * delta_f(t) * t ** (-1.0 - sing)))
