"""Kernel constants, weights, tensor fields, and the equivalence kernel."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import mpmath as mp

from anisofrac.kernels import (
    CoincidentPointsError,
    DiffusionTensorField,
    KernelSpec,
    constant_tensor,
    equivalence_kernel,
    eval_alpha,
    eval_gamma_fl,
    eval_weight,
    hemisphere_moment,
    identity_tensor,
    operator_weight_constant,
    riesz_constant,
    rotated_anisotropy,
    scalar_tensor,
    sine_scalar_tensor,
    weight_constant,
)
from anisofrac.quadrature import NonConvergenceError, QuadratureBudget


def mp_riesz_constant(n, s):
    with mp.workdps(40):
        s = mp.mpf(s)
        return float(4**s * mp.gamma(s + mp.mpf(n) / 2) / (mp.pi ** (mp.mpf(n) / 2) * abs(mp.gamma(-s))))


def mp_weight_constant(n, s):
    with mp.workdps(40):
        s = mp.mpf(s)
        if n == 1:
            hemi = mp.mpf(1)
        else:
            hemi = mp.quad(lambda phi: mp.cos(phi) ** (s + 1), [-mp.pi / 2, mp.pi / 2])
        return float(2 * s * mp.sin(mp.pi * s / 2) / mp.gamma(1 - s) * hemi)


class TestConstants:
    def test_riesz_constant_1d_half(self):
        # Gamma(-1/2) = -2 sqrt(pi) gives exactly 1/pi
        assert riesz_constant(1, 0.5) == pytest.approx(1.0 / math.pi, rel=1e-12)

    def test_riesz_constant_2d_half(self):
        assert riesz_constant(2, 0.5) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2])
    @pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 0.9])
    def test_riesz_constant_high_precision(self, n, s):
        assert riesz_constant(n, s) == pytest.approx(mp_riesz_constant(n, s), rel=1e-12)

    @pytest.mark.parametrize("s", [0.05, 0.3, 0.5, 0.8, 0.95])
    def test_riesz_constant_positive(self, s):
        assert riesz_constant(1, s) > 0.0

    @pytest.mark.parametrize("bad", [(1, 0.0), (1, 1.0), (1, -0.2), (3, 0.5), (0, 0.5)])
    def test_domain_errors(self, bad):
        n, s = bad
        with pytest.raises(ValueError):
            riesz_constant(n, s)
        with pytest.raises(ValueError):
            weight_constant(n, s)

    def test_weight_constant_1d_half(self):
        expected = math.sin(math.pi / 4) / math.gamma(0.5)
        assert weight_constant(1, 0.5) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2])
    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_weight_constant_vs_adaptive_quadrature(self, n, s):
        assert weight_constant(n, s) == pytest.approx(mp_weight_constant(n, s), rel=1e-10)

    def test_weight_constant_deterministic(self):
        a = weight_constant(2, 0.37)
        b = weight_constant(2, 0.37)
        assert a == b  # identical bits

    def test_hemisphere_closed_form_matches_quadrature(self):
        for s in (0.2, 0.6):
            with mp.workdps(30):
                quad = float(mp.quad(lambda p: mp.cos(p) ** (s + 1), [-mp.pi / 2, mp.pi / 2]))
            assert hemisphere_moment(2, s) == pytest.approx(quad, rel=1e-12)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_operator_weight_constant_identity(self, s):
        # 2 c I_s = 1 must hold for the composition-normalized constant
        i_s = math.gamma(1 - s) * math.sin(math.pi * s / 2) / s
        assert operator_weight_constant(1, s) * 2 * i_s == pytest.approx(1.0, rel=1e-14)


class TestKernelSpec:
    def test_defaults_fill_constants(self):
        spec = KernelSpec(s=0.5, n=1)
        assert spec.c_ns == pytest.approx(1 / math.pi, rel=1e-12)
        assert spec.c_omega == pytest.approx(weight_constant(1, 0.5), rel=1e-12)

    def test_inconsistent_constants_rejected(self):
        with pytest.raises(ValueError, match="c_ns"):
            KernelSpec(s=0.5, n=1, c_ns=0.5)
        with pytest.raises(ValueError, match="c_omega"):
            KernelSpec(s=0.5, n=1, c_omega=0.123)

    def test_radii_ordering(self):
        with pytest.raises(ValueError):
            KernelSpec(s=0.5, n=1, r_inner=2.0, r_outer=1.0)

    def test_order_range(self):
        with pytest.raises(ValueError):
            KernelSpec(s=1.2, n=1)


class TestPointKernels:
    def test_alpha_1d(self):
        assert eval_alpha(0.0, 1.0) == pytest.approx(1.0)

    def test_alpha_2d(self):
        a = eval_alpha(np.array([0.0, 0.0]), np.array([3.0, 4.0]))
        assert a == pytest.approx([0.6, 0.8])

    def test_alpha_coincident(self):
        with pytest.raises(CoincidentPointsError):
            eval_alpha(0.3, 0.3)

    @given(st.floats(-5, 5), st.floats(-5, 5))
    @settings(max_examples=50, deadline=None)
    def test_alpha_antisymmetry(self, x, y):
        if x == y:
            return
        assert eval_alpha(x, y) + eval_alpha(y, x) == 0.0

    def test_weight_value(self):
        spec = KernelSpec(s=0.5, n=1)
        assert eval_weight(spec, 0.0, 1.0) == pytest.approx(spec.c_omega, rel=1e-14)

    def test_weight_power_law(self):
        spec = KernelSpec(s=0.5, n=1)
        assert eval_weight(spec, 0.0, 2.0) == pytest.approx(spec.c_omega * 2 ** (-1.5), rel=1e-14)

    @given(st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=50, deadline=None)
    def test_weight_symmetry(self, x, y):
        if x == y:
            return
        spec = KernelSpec(s=0.6, n=1)
        assert eval_weight(spec, x, y) == eval_weight(spec, y, x)

    def test_gamma_fl_value(self):
        spec = KernelSpec(s=0.5, n=1)
        assert eval_gamma_fl(spec, 0.0, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-12)
        assert eval_gamma_fl(spec, 0.0, 1.0) > 0  # positive sign convention

    def test_gamma_fl_scaling(self):
        spec = KernelSpec(s=0.5, n=1)
        assert eval_gamma_fl(spec, 0.0, 2.0) == pytest.approx(
            eval_gamma_fl(spec, 0.0, 1.0) / 4.0, rel=1e-12
        )

    def test_gamma_fl_symmetry(self):
        spec = KernelSpec(s=0.7, n=1)
        assert eval_gamma_fl(spec, -0.3, 0.9) == eval_gamma_fl(spec, 0.9, -0.3)

    def test_coincident_errors(self):
        spec = KernelSpec(s=0.5, n=1)
        with pytest.raises(CoincidentPointsError):
            eval_weight(spec, 1.0, 1.0)
        with pytest.raises(CoincidentPointsError):
            eval_gamma_fl(spec, 1.0, 1.0)


class TestDiffusionTensorField:
    def test_identity_invariants(self):
        rng = np.random.default_rng(0)
        assert identity_tensor(2).spot_check(rng)

    def test_sine_scalar_invariants(self):
        rng = np.random.default_rng(1)
        assert sine_scalar_tensor(2.0, 1.0).spot_check(rng)

    def test_rotated_anisotropy_invariants(self):
        rng = np.random.default_rng(2)
        assert rotated_anisotropy(1.0, 3.0).spot_check(rng)

    def test_sqrt_closed_form_2x2(self):
        field = rotated_anisotropy(0.5, 4.0, pitch=0.7)
        x = np.array([0.3, -1.2])
        r = field.sqrt(x)
        assert np.allclose(r @ r, field(x), rtol=1e-12)

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            DiffusionTensorField(lambda x: np.eye(1), 0.0, 1.0)
        with pytest.raises(ValueError):
            sine_scalar_tensor(1.0, 1.0)

    def test_constant_tensor_eigs(self):
        field = constant_tensor(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert field.lambda_min == pytest.approx(1.0)
        assert field.lambda_max == pytest.approx(3.0)


class TestEquivalenceKernel:
    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_fractional_reduction_identity_tensor(self, s):
        spec = KernelSpec(s=s, n=1)
        tensor = identity_tensor(1)
        for d in (0.25, 1.0, 4.0):
            ge = equivalence_kernel(spec, tensor, 0.0, d)
            assert ge == pytest.approx(eval_gamma_fl(spec, 0.0, d), rel=1e-2)

    def test_value_1d_half(self):
        spec = KernelSpec(s=0.5, n=1)
        ge = equivalence_kernel(spec, identity_tensor(1), 0.0, 1.0)
        assert ge == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-2)

    def test_symmetry_varying_scalar(self):
        spec = KernelSpec(s=0.5, n=1)
        tensor = sine_scalar_tensor(2.0, 1.0)
        g1 = equivalence_kernel(spec, tensor, 0.3, 0.9)
        g2 = equivalence_kernel(spec, tensor, 0.9, 0.3)
        assert abs(g1 - g2) <= 1e-10 * abs(g1)

    def test_isotropic_bracket_short_separation(self):
        # see the near-field scan: for separations below the coefficient's
        # oscillation scale the kernel behaves like a local average of a
        spec = KernelSpec(s=0.5, n=1)
        tensor = sine_scalar_tensor(2.0, 1.0)
        for x, d in ((0.0, 0.3), (-0.8, 0.5), (0.5, 0.8)):
            ratio = equivalence_kernel(spec, tensor, x, x + d) / eval_gamma_fl(spec, x, x + d)
            assert tensor.lambda_min <= ratio <= tensor.lambda_max

    def test_matches_composed_operator_varying_scalar(self):
        # defining property: the kernel reproduces the composed operator
        from anisofrac.fields import smooth_bump
        from anisofrac.operators import anisotropic_laplacian
        from anisofrac.quadrature import geometric_edges, panel_rule

        spec = KernelSpec(s=0.5, n=1)
        tensor = sine_scalar_tensor(2.0, 1.0)
        u = smooth_bump(1.0)
        budget = QuadratureBudget(panels=12, levels=2, tolerance=5e-4)
        x0 = 0.2
        nested = anisotropic_laplacian(u, spec, tensor, x0, QuadratureBudget(16, 2, 1e-4))
        tn, tw = panel_rule(geometric_edges(1e-4, 60.0, 1e-4, 1.6), 8)
        core = 0.0
        for t, w in zip(tn, tw):
            gp = equivalence_kernel(spec, tensor, x0, x0 + t, budget)
            gm = equivalence_kernel(spec, tensor, x0, x0 - t, budget)
            core += w * ((u(x0 + t) - u(x0)) * gp + (u(x0 - t) - u(x0)) * gm)
        tail = -u(x0) * 2.0 * 2.0 * spec.gamma_coeff / 60.0  # mean(a) = 2 far field
        via_kernel = 2.0 * core + 2.0 * tail
        assert via_kernel == pytest.approx(nested, rel=2e-3)

    def test_2d_fractional_reduction(self):
        spec = KernelSpec(s=0.5, n=2)
        tensor = identity_tensor(2)
        budget = QuadratureBudget(panels=10, levels=2, tolerance=5e-3)
        for z in ([1.0, 0.0], [0.7, 0.7]):
            ge = equivalence_kernel(spec, tensor, [0.0, 0.0], z, budget)
            gf = eval_gamma_fl(spec, [0.0, 0.0], z)
            assert ge == pytest.approx(gf, rel=2e-2)

    def test_2d_symmetry_anisotropic(self):
        spec = KernelSpec(s=0.5, n=2)
        tensor = rotated_anisotropy(1.0, 3.0)
        budget = QuadratureBudget(panels=10, levels=2, tolerance=5e-3)
        x, z = np.array([0.1, -0.2]), np.array([0.8, 0.5])
        g1 = equivalence_kernel(spec, tensor, x, z, budget)
        g2 = equivalence_kernel(spec, tensor, z, x, budget)
        assert abs(g1 - g2) <= 5e-3 * abs(g1)

    def test_coincident_points_error(self):
        spec = KernelSpec(s=0.5, n=1)
        with pytest.raises(CoincidentPointsError):
            equivalence_kernel(spec, identity_tensor(1), 0.5, 0.5)

    def test_non_convergence_error(self):
        spec = KernelSpec(s=0.5, n=1)
        tensor = sine_scalar_tensor(2.0, 1.0)
        starved = QuadratureBudget(panels=1, levels=1, tolerance=1e-14)
        with pytest.raises(NonConvergenceError):
            equivalence_kernel(spec, tensor, 0.0, 1.0, starved)

    def test_dimension_mismatch(self):
        spec = KernelSpec(s=0.5, n=2)
        with pytest.raises(ValueError):
            equivalence_kernel(spec, identity_tensor(1), [0.0, 0.0], [1.0, 0.0])
