"""Pointwise operators against their independent oracles."""

import math

import numpy as np
import pytest
from scipy.special import gamma as Gamma

from anisofrac.fields import ScalarField, smooth_bump, sqrt_profile, truncated_gaussian
from anisofrac.kernels import KernelSpec, sine_scalar_tensor
from anisofrac.operators import (
    FractionalKernel,
    KernelPair,
    anisotropic_laplacian,
    riesz_laplacian,
    unweighted_divergence,
    unweighted_gradient,
    unweighted_laplacian,
    weighted_divergence,
    weighted_gradient,
    weighted_laplacian,
)
from anisofrac.quadrature import NonConvergenceError, QuadratureBudget

SPEC_HALF = KernelSpec(s=0.5, n=1)
BUDGET = QuadratureBudget(panels=12, levels=2, tolerance=1e-4)


def constant_fractional_laplacian(n, s):
    """Exact (-Delta)^s of (1 - |x|^2)_+^s inside the unit ball."""
    return 2.0 ** (2 * s) * Gamma(1 + s) * Gamma(s + n / 2) / Gamma(n / 2)


def spectral_gradient_oracle(u, s, x, L=60.0, n=2**18):
    """Fourier evaluation of the weighted gradient symbol i sign(xi) |xi|^s
    on a large periodic box; returns the value at the grid point nearest x."""
    dx = 2 * L / n
    xs = -L + dx * np.arange(n)
    vals = u(xs)
    xi = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    sym = 1j * np.sign(xi) * np.abs(xi) ** s
    grad = np.fft.ifft(sym * np.fft.fft(vals)).real
    k = int(round((x + L) / dx))
    return xs[k], grad[k]


class TestUnweightedGradient:
    def test_constant_gives_zero(self):
        c = ScalarField(lambda x: np.full_like(np.asarray(x, float), 4.0), math.inf)
        assert unweighted_gradient(c, 0.1, 0.9) == 0.0

    def test_linear_1d(self):
        lin = ScalarField(lambda x: np.asarray(x, float), math.inf)
        assert unweighted_gradient(lin, 0.0, 2.0) == pytest.approx(2.0)

    def test_symmetry_under_argument_swap(self):
        b = smooth_bump(1.0)
        assert unweighted_gradient(b, 0.2, 0.7) == pytest.approx(
            unweighted_gradient(b, 0.7, 0.2)
        )


class TestWeightedGradient:
    def test_even_field_zero_at_center(self):
        b = smooth_bump(1.0)
        assert weighted_gradient(b, SPEC_HALF, 0.0, BUDGET) == pytest.approx(0.0, abs=1e-10)

    def test_linearity(self):
        b = smooth_bump(1.0)
        g = truncated_gaussian(0.2, 0.3, 0.9)
        x = 0.4
        lhs = weighted_gradient(
            ScalarField(lambda t: 2 * b(t) + 3 * g(t), max(b.support_radius, g.support_radius)),
            SPEC_HALF,
            x,
            BUDGET,
        )
        rhs = 2 * weighted_gradient(b, SPEC_HALF, x, BUDGET) + 3 * weighted_gradient(
            g, SPEC_HALF, x, BUDGET
        )
        assert lhs == pytest.approx(rhs, rel=1e-8)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_spectral_oracle(self, s):
        spec = KernelSpec(s=s, n=1)
        b = smooth_bump(1.0)
        xg, oracle = spectral_gradient_oracle(b, s, 0.3)
        ours = weighted_gradient(b, spec, xg, BUDGET)
        assert ours == pytest.approx(oracle, rel=1e-3)

    def test_translation_covariance(self):
        b = smooth_bump(1.0)
        shift = 0.8
        shifted = ScalarField(lambda x: b(np.asarray(x, float) - shift), b.support_radius + shift)
        a = weighted_gradient(b, SPEC_HALF, 0.25, BUDGET)
        c = weighted_gradient(shifted, SPEC_HALF, 0.25 + shift, BUDGET)
        assert c == pytest.approx(a, rel=1e-6)


class TestWeightedDivergence:
    def test_zero_field(self):
        z = ScalarField(lambda x: np.zeros_like(np.asarray(x, float)), 1.0)
        assert weighted_divergence(z, SPEC_HALF, 0.2, BUDGET) == 0.0

    def test_constant_field_vanishes_in_pv(self):
        c = ScalarField(lambda x: np.full_like(np.asarray(x, float), 3.0), 2.0)
        # (v(x)+v(y)) alpha omega is odd about x; symmetric pairing kills it
        assert weighted_divergence(c, SPEC_HALF, 0.1, BUDGET, v_support=2.0) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_composition_is_weighted_laplacian(self):
        b = smooth_bump(1.0)
        x = 0.3
        from anisofrac.operators import _weighted_gradient_fixed

        grad = ScalarField(
            np.vectorize(lambda y: _weighted_gradient_fixed(b, SPEC_HALF, float(y), 48)),
            b.support_radius,
        )
        div = weighted_divergence(
            grad, SPEC_HALF, x, BUDGET, v_tail_decay=1.0 + 2 * SPEC_HALF.s, v_support=1.0
        )
        lap = weighted_laplacian(b, SPEC_HALF, x, QuadratureBudget(12, 2, 1e-3))
        assert div == pytest.approx(lap, rel=5e-3)


class TestRieszLaplacian:
    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_constant_profile_identity(self, s):
        spec = KernelSpec(s=s, n=1)
        u = sqrt_profile(s, 1.0)
        expected = constant_fractional_laplacian(1, s)
        for x in (0.0, 0.3, -0.6):
            assert riesz_laplacian(u, spec, x, BUDGET) == pytest.approx(expected, rel=1e-3)

    def test_getoor_half_is_one(self):
        u = sqrt_profile(0.5, 1.0)
        assert constant_fractional_laplacian(1, 0.5) == pytest.approx(1.0, rel=1e-14)
        assert riesz_laplacian(u, SPEC_HALF, 0.0, BUDGET) == pytest.approx(1.0, rel=1e-3)

    def test_linearity_scaling(self):
        b = smooth_bump(1.0)
        a = riesz_laplacian(b, SPEC_HALF, 0.2, BUDGET)
        c = riesz_laplacian(b.scaled(2.0), SPEC_HALF, 0.2, BUDGET)
        assert c == pytest.approx(2.0 * a, rel=1e-10)


class TestUnweightedLaplacian:
    def test_zero_field(self):
        z = ScalarField(lambda x: np.zeros_like(np.asarray(x, float)), 1.0, lambda x: 0.0, lambda x: 0.0)
        kern = FractionalKernel.fractional_laplacian(SPEC_HALF)
        assert unweighted_laplacian(z, kern, 0.0, BUDGET, support=1.0) == 0.0

    def test_getoor_value(self):
        u = sqrt_profile(0.5, 1.0)
        kern = FractionalKernel.fractional_laplacian(SPEC_HALF)
        assert unweighted_laplacian(u, kern, 0.0, BUDGET) == pytest.approx(-1.0, rel=1e-3)

    def test_equals_minus_riesz(self):
        b = smooth_bump(1.0)
        kern = FractionalKernel.fractional_laplacian(SPEC_HALF)
        assert unweighted_laplacian(b, kern, 0.4, BUDGET) == pytest.approx(
            -riesz_laplacian(b, SPEC_HALF, 0.4, BUDGET), rel=1e-12
        )


class TestUnweightedDivergence:
    def test_antisymmetric_two_point_field_vanishes(self):
        pair = KernelPair.fractional(SPEC_HALF)
        v = lambda x, y: (y - x)  # v(x,y) = -v(y,x)
        assert unweighted_divergence(v, pair, 0.2, BUDGET, support=1.0) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_composition_matches_laplacian(self):
        b = smooth_bump(1.0)
        pair = KernelPair.fractional(SPEC_HALF)

        def grad2(x, y):
            return (float(b(y)) - float(b(x))) * pair.alpha(x, y)

        x = 0.3
        div = unweighted_divergence(grad2, pair, x, QuadratureBudget(16, 2, 1e-3), support=1.0)
        lap = unweighted_laplacian(b, pair.gamma, x, BUDGET)
        assert div == pytest.approx(lap, rel=2e-3)


class TestWeightedLaplacian:
    def test_getoor_identity(self):
        u = sqrt_profile(0.5, 1.0)
        for x in (0.0, 0.3):
            wl = weighted_laplacian(u, SPEC_HALF, x, QuadratureBudget(12, 2, 1e-3))
            assert wl == pytest.approx(-1.0, rel=5e-3)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_equivalence_with_riesz(self, s):
        spec = KernelSpec(s=s, n=1)
        b = smooth_bump(1.0)
        budget = QuadratureBudget(12, 2, 1e-3)
        for x in (-0.4, 0.1, 0.6):
            wl = weighted_laplacian(b, spec, x, budget)
            rl = riesz_laplacian(b, spec, x, budget)
            assert abs(wl + rl) <= 5e-3


class TestAnisotropicLaplacian:
    def test_identity_tensor_reduces(self):
        from anisofrac.kernels import identity_tensor

        b = smooth_bump(1.0)
        budget = QuadratureBudget(12, 2, 1e-3)
        x = 0.2
        a = anisotropic_laplacian(b, SPEC_HALF, identity_tensor(1), x, budget)
        w = weighted_laplacian(b, SPEC_HALF, x, budget)
        assert a == pytest.approx(w, rel=1e-10)

    def test_constant_tensor_scales(self):
        from anisofrac.kernels import constant_tensor

        b = smooth_bump(1.0)
        budget = QuadratureBudget(12, 2, 1e-3)
        x = 0.2
        a = anisotropic_laplacian(b, SPEC_HALF, constant_tensor(np.array([[2.0]])), x, budget)
        w = weighted_laplacian(b, SPEC_HALF, x, budget)
        assert a == pytest.approx(2.0 * w, rel=1e-10)

    def test_varying_scalar_vs_brute_force(self):
        # independent dense evaluation: paired-trapezoid PV at 4x node count
        b = smooth_bump(1.0)
        tensor = sine_scalar_tensor(2.0, 1.0)
        x0 = 0.2
        fine = anisotropic_laplacian(b, SPEC_HALF, tensor, x0, QuadratureBudget(16, 2, 1e-4))

        s = SPEC_HALF.s
        c = SPEC_HALF.c_op
        t = np.geomspace(1e-7, 40.0, 36000)
        tm = 0.5 * (t[1:] + t[:-1])
        wdt = np.diff(t)

        def grad(y):
            du = b(y + tm) - b(y - tm)
            return c * np.sum(wdt * du * tm ** (-1.0 - s))

        av = lambda y: (2.0 + np.sin(y)) * np.array([grad(yy) for yy in np.atleast_1d(y)])
        inner_p = av(x0 + tm)
        inner_m = av(x0 - tm)
        vx = av(x0)[0]
        brute = c * np.sum(wdt * ((vx + inner_p) - (vx + inner_m)) * tm ** (-1.0 - s))
        assert fine == pytest.approx(brute, rel=1e-2)

    def test_non_convergence(self):
        b = smooth_bump(1.0)
        with pytest.raises(NonConvergenceError):
            anisotropic_laplacian(
                b, SPEC_HALF, None, 0.2, QuadratureBudget(panels=1, levels=1, tolerance=1e-14)
            )
