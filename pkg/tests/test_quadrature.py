"""Quadrature primitives: graded, tail, paired-ball rules and refinement."""

import numpy as np
import pytest

from anisofrac.quadrature import (
    NonConvergenceError,
    QuadratureBudget,
    bridge_edges,
    gauss_rule,
    geometric_edges,
    graded_rule,
    panel_rule,
    pv_odd_ball,
    refine,
    tail_rule,
)


def test_gauss_rule_polynomial_exactness():
    x, w = gauss_rule(6)
    for k in range(11):  # exact through degree 2q-1
        assert np.sum(w * x**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


def test_panel_rule_integrates_smooth():
    x, w = panel_rule([0.0, 0.3, 1.0, 2.0], 8)
    assert np.sum(w * np.exp(-x)) == pytest.approx(1.0 - np.exp(-2.0), rel=1e-12)


@pytest.mark.parametrize("p", [0.25, 0.5, 0.75])
def test_graded_rule_absorbs_singularity(p):
    # int_0^1 t^-p dt = 1/(1-p)
    t, w = graded_rule(1.0, p, 20)
    assert np.sum(w * t ** (-p)) == pytest.approx(1.0 / (1.0 - p), rel=1e-12)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_tail_rule_power_law(beta):
    # int_R^inf t^-(1+beta) dt = R^-beta / beta
    R = 2.0
    t, w = tail_rule(R, beta, 24)
    assert np.sum(w * t ** (-1.0 - beta)) == pytest.approx(R ** (-beta) / beta, rel=1e-12)


def test_tail_rule_rejects_nonpositive_decay():
    with pytest.raises(ValueError):
        tail_rule(1.0, 0.0, 8)


def test_geometric_edges_cover_and_grade():
    e = geometric_edges(0.001, 10.0, 0.001)
    assert e[0] == 0.001 and e[-1] == 10.0
    widths = np.diff(e)
    # widths grow geometrically, except a possibly smaller final remainder
    assert np.all(widths[:-2] <= widths[1:-1] + 1e-15)


def test_bridge_edges_grade_from_both_ends():
    e = bridge_edges(0.0, 1.0, 0.01, 0.01)
    w = np.diff(e)
    assert w[0] <= w[len(w) // 2] and w[-1] <= w[len(w) // 2]


@pytest.mark.parametrize("sing", [0.25, 0.5, 0.75])
def test_pv_odd_ball_power_integrand(sing):
    # delta(t) = 2t  ->  int_0^rho 2 t^-sing dt = 2 rho^(1-sing)/(1-sing)
    rho = 0.3
    val = pv_odd_ball(lambda t: 2.0 * t, rho, sing, 24)
    assert val == pytest.approx(2.0 * rho ** (1.0 - sing) / (1.0 - sing), rel=1e-10)


def test_pv_odd_ball_cubic_exact():
    rho = 0.5
    sing = 0.5
    val = pv_odd_ball(lambda t: t + 0.7 * t**3, rho, sing, 24)
    exact = rho**0.5 / 0.5 + 0.7 * rho**2.5 / 2.5
    assert val == pytest.approx(exact, rel=1e-10)


def test_budget_validation():
    with pytest.raises(ValueError):
        QuadratureBudget(panels=0)
    with pytest.raises(ValueError):
        QuadratureBudget(tolerance=0.0)
    assert QuadratureBudget(panels=4).order(2) == 16


def test_refine_converges():
    budget = QuadratureBudget(panels=4, levels=3, tolerance=1e-3)
    val, err = refine(lambda lev: 1.0 + 4.0 ** (-lev - 5), budget)
    assert val == pytest.approx(1.0, abs=1e-3)
    assert err <= 1e-3


def test_refine_raises_on_stall():
    budget = QuadratureBudget(panels=4, levels=2, tolerance=1e-12)
    alternating = [1.0, 2.0, 1.0, 2.0]
    with pytest.raises(NonConvergenceError):
        refine(lambda lev: alternating[lev], budget)
