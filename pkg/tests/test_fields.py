"""Shipped scalar fields: support, derivatives, scaling."""

import numpy as np
import pytest

from anisofrac.fields import constant_field, smooth_bump, sqrt_profile, truncated_gaussian


@pytest.mark.parametrize(
    "field",
    [smooth_bump(1.0), sqrt_profile(0.5, 1.0), truncated_gaussian(-0.5, 0.1, 0.45)],
)
def test_support(field):
    xs = np.linspace(-10, 10, 2001)
    vals = field(xs)
    outside = np.abs(xs) > field.support_radius
    assert np.all(vals[outside] == 0.0)
    assert np.any(vals != 0.0)


@pytest.mark.parametrize(
    "field,x",
    [
        (smooth_bump(1.0), 0.3),
        (smooth_bump(2.0), -0.9),
        (sqrt_profile(0.5, 1.0), 0.4),
        (sqrt_profile(0.75, 1.0), -0.2),
        (truncated_gaussian(-0.5, 0.1, 0.45), -0.45),
    ],
)
def test_analytic_derivatives_match_finite_differences(field, x):
    h = 1e-6
    fd1 = (field(x + h) - field(x - h)) / (2 * h)
    fd2 = (field(x + h) - 2 * field(x) + field(x - h)) / h**2
    assert field.deriv1(x) == pytest.approx(fd1, rel=1e-6, abs=1e-8)
    assert field.deriv2(x) == pytest.approx(fd2, rel=1e-3, abs=1e-3)


def test_scalar_and_array_evaluation_agree():
    b = smooth_bump(1.0)
    xs = np.array([-0.5, 0.0, 0.7, 2.0])
    arr = b(xs)
    assert arr.shape == xs.shape
    for x, v in zip(xs, arr):
        assert b(float(x)) == v


def test_scaled_field():
    b = smooth_bump(1.0)
    b2 = b.scaled(3.0)
    assert b2(0.2) == pytest.approx(3.0 * b(0.2))
    assert b2.deriv1(0.2) == pytest.approx(3.0 * b.deriv1(0.2))


def test_constant_field():
    c = constant_field(2.5)
    assert c(np.array([0.0, 100.0]))[1] == 2.5
    assert c.deriv2(3.0) == 0.0
