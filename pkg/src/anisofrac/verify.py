"""Identity-certification suite: every analytical identity as an executable check.

Each check produces an IdentityReport (name, anchor, measured error,
tolerance, pass flag).  The registry REQUIRED_IDENTITIES is closed: building
the default suite fails if any required identity is missing, so the suite
cannot silently lose coverage.

Checks and their anchors:

* operator-equivalence   : composed weighted Laplacian = minus Riesz Laplacian
* equivalence-kernel     : symmetry, fractional reduction, isotropic bounds
* greens-identity        : pointwise operator vs Galerkin pairing
* norm-equivalence       : weighted form with A = I equals the Gagliardo form
* coercivity-spectrum    : generalized spectrum of (K_A, K_iso) in the
                           tensor eigenvalue bracket
* weight-absorption      : tensor-in-weight route agrees with A-outside route
* parabolic-energy       : a-priori energy inequality along backward Euler
* transport-coercivity   : skew advection leaves the symmetric part intact
* kernel-bounds-scan     : empirical near/far kernel ratio scan (report only)
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import (
    DiscreteSystem,
    assemble_gram_isotropic,
    assemble_load,
    assemble_stiffness_weighted,
    build_system,
    gradient_table,
)
from .fields import smooth_bump, sqrt_profile
from .grid import DiscreteFunction, build_grid
from .kernels import (
    KernelSpec,
    constant_tensor,
    DiffusionTensorField,
    equivalence_kernel,
    eval_gamma_fl,
    identity_tensor,
    rotated_anisotropy,
    sine_scalar_tensor,
)
from .operators import (
    FractionalKernel,
    _panel_nodes,
    anisotropic_laplacian,
    riesz_laplacian,
    unweighted_laplacian,
    weighted_laplacian,
)
from .quadrature import QuadratureBudget, pv_odd_ball, tail_rule
from .solvers import TimeSteppingConfig, solve_elliptic, solve_parabolic, solve_transport

DEFAULT_TOLERANCES = {
    "operator-equivalence": 5e-3,
    "equivalence-kernel": 1e-2,
    "greens-identity": 0.02,
    "norm-equivalence": 0.01,
    "coercivity-spectrum": 0.02,
    "weight-absorption": 1e-3,
    "parabolic-energy": 0.05,
    "transport-coercivity": 0.02,
    "kernel-bounds-scan": math.inf,  # report-only
}

ANCHORS = {
    "operator-equivalence": "composed weighted Laplacian equals minus the Riesz fractional Laplacian",
    "equivalence-kernel": "symmetric equivalence kernel: fractional reduction and isotropic bounds",
    "greens-identity": "nonlocal first Green identity, pointwise operator vs Galerkin pairing",
    "norm-equivalence": "weighted and unweighted energies coincide for the identity tensor",
    "coercivity-spectrum": "generalized (K_A, K_iso) spectrum inside the tensor eigenvalue bracket",
    "weight-absorption": "square-root of the tensor absorbed into the weight leaves the operator unchanged",
    "parabolic-energy": "a-priori energy inequality along the backward-Euler flow",
    "transport-coercivity": "skew advection preserves the symmetric part and its coercivity",
    "kernel-bounds-scan": "empirical near-field/far-field kernel ratio scan (no claim)",
}

REQUIRED_IDENTITIES = frozenset(ANCHORS)


@dataclass
class IdentityReport:
    name: str
    anchor: str
    context: str
    error: float
    tolerance: float
    passed: bool = field(init=False)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.error <= self.tolerance)

    def row(self):
        return f"{self.name},{self.anchor!r},{self.error:.6e},{self.tolerance:.6e},{int(self.passed)}"


@dataclass
class KernelBoundsReport:
    """Empirical constants of the near/far kernel growth conditions.

    Records min/max of gamma_eq(x,z) |x-z|^(n+2s) over sampled near pairs
    (lam, Lam) and the max over far pairs (m_far).  Report only: finiteness
    and positivity are checked for isotropic fields, no bound is asserted
    for genuinely anisotropic tensors.
    """

    pairs: list
    near_ratios: list
    far_ratios: list
    lam: float
    lam_upper: float
    m_far: float


def check_operator_equivalence(spec, u, points, budget=None, tol=None):
    """Max over points of |L_omega u + (-Delta)^s u| and |L_omega u - L_gammaFL u|."""
    tol = tol if tol is not None else DEFAULT_TOLERANCES["operator-equivalence"]
    budget = budget or QuadratureBudget(panels=12, levels=2, tolerance=1e-3)
    kern = FractionalKernel.fractional_laplacian(spec)
    err_riesz = 0.0
    err_unw = 0.0
    for x in points:
        wl = weighted_laplacian(u, spec, x, budget)
        rl = riesz_laplacian(u, spec, x, budget)
        ul = unweighted_laplacian(u, kern, x, budget)
        err_riesz = max(err_riesz, abs(wl + rl))
        err_unw = max(err_unw, abs(wl - ul))
    return IdentityReport(
        "operator-equivalence",
        ANCHORS["operator-equivalence"],
        f"field={u.name};s={spec.s};n={spec.n};points={len(list(points))}",
        max(err_riesz, err_unw),
        tol,
        details={"riesz_defect": err_riesz, "unweighted_defect": err_unw},
    )


def check_equivalence_kernel(spec, tensor, pairs, budget=None, tol=None):
    """Symmetry defect, fractional-reduction ratio (A = I), bracket membership."""
    tol = tol if tol is not None else DEFAULT_TOLERANCES["equivalence-kernel"]
    budget = budget or QuadratureBudget(panels=12, levels=2, tolerance=1e-4)
    sym_defect = 0.0
    ratio_defect = 0.0
    bracket_defect = 0.0
    is_identity = tensor.lambda_min == tensor.lambda_max == 1.0
    for x, z in pairs:
        g1 = equivalence_kernel(spec, tensor, x, z, budget)
        g2 = equivalence_kernel(spec, tensor, z, x, budget)
        sym_defect = max(sym_defect, abs(g1 - g2) / max(abs(g1), 1e-300))
        gfl = eval_gamma_fl(spec, x, z)
        ratio = g1 / gfl
        if is_identity:
            ratio_defect = max(ratio_defect, abs(ratio - 1.0))
        lo, hi = tensor.lambda_min, tensor.lambda_max
        bracket_defect = max(bracket_defect, (lo - ratio) / lo, (ratio - hi) / hi, 0.0)
    err = max(sym_defect, ratio_defect, bracket_defect)
    return IdentityReport(
        "equivalence-kernel",
        ANCHORS["equivalence-kernel"],
        f"tensor={tensor.name};s={spec.s};n={spec.n};pairs={len(pairs)}",
        err,
        tol,
        details={
            "symmetry_defect": sym_defect,
            "ratio_defect": ratio_defect,
            "bracket_defect": bracket_defect,
        },
    )


def discrete_anisotropic_laplacian(grid, spec, tensor, coeffs, pts, q=12):
    """Pointwise D_omega(A G_omega u_h) for a P1 function, away from nodes.

    The weighted gradient of u_h is evaluated through the closed-form hat
    table; the outer PV divergence puts panel breaks on the nearby mesh
    nodes, where the gradient has |x - node|^(1-s) kinks.  Values at the
    nodes themselves diverge for s >= 1/2 (the classical kink behavior),
    so callers must supply element-interior points.
    """
    s = spec.s
    coeffs = np.asarray(coeffs, dtype=float)
    a_of = tensor.scalar_values
    A0, B0 = grid.extent
    sup = max(abs(A0), abs(B0))
    h = grid.h

    def v_vec(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return a_of(y) * (gradient_table(grid, spec, y) @ coeffs)

    out = np.empty(len(pts))
    for i, x in enumerate(np.atleast_1d(pts)):
        x = float(x)
        dist = np.abs(grid.nodes - x)
        rho = max(0.45 * dist.min(), 1e-6 * h)
        D = sup + abs(x) + 1.0
        near = grid.nodes[dist <= 8 * h]
        vx = float(v_vec(np.array([x]))[0])
        ball = pv_odd_ball(lambda t: v_vec(x + t) - v_vec(x - t), rho, s, 2 * q, 1e-2)
        yl, wl, yr, wr = _panel_nodes(x, rho, D, near, q)
        right = np.sum(wr * (vx + v_vec(yr)) * (yr - x) ** (-1.0 - s))
        left = -np.sum(wl * (vx + v_vec(yl)) * (x - yl) ** (-1.0 - s))
        tt, twt = tail_rule(D, 1.0 + 2.0 * s, q)
        tail = np.sum(twt * v_vec(x + tt) * tt ** (-1.0 - s))
        tail -= np.sum(twt * v_vec(x - tt) * tt ** (-1.0 - s))
        out[i] = spec.c_op * float(ball + right + left + tail)
    return out


def check_green_identity(system, u, v, tensor, q_elem=6, q_pv=8, tol=None):
    """|int L_{omega;A} u_h v_h + v^T K_A u| / |v^T K_A u| on interior dofs.

    The pairing integral is evaluated by element-interior Gauss points (the
    pointwise Laplacian of a P1 function is singular at the nodes) on
    sub-panels graded toward the element endpoints, where the integrand
    behaves like dist^(1-2s); the defect measures quadrature consistency of
    the two routes.
    """
    tol = tol if tol is not None else DEFAULT_TOLERANCES["greens-identity"]
    grid = system.grid
    spec = system.spec
    uk = u.values if isinstance(u, DiscreteFunction) else np.asarray(u, dtype=float)
    vk = v.values if isinstance(v, DiscreteFunction) else np.asarray(v, dtype=float)
    vfun = DiscreteFunction(grid, vk)
    xi0, gw0 = np.polynomial.legendre.leggauss(q_elem)
    xi0 = 0.5 * (xi0 + 1.0)
    gw0 = 0.5 * gw0
    cuts = np.array([0.0, 0.03, 0.15, 0.5, 0.85, 0.97, 1.0])
    xi = np.concatenate([cuts[j] + (cuts[j + 1] - cuts[j]) * xi0 for j in range(len(cuts) - 1)])
    gw = np.concatenate([(cuts[j + 1] - cuts[j]) * gw0 for j in range(len(cuts) - 1)])
    # elements inside Omega
    lo = grid.interior[0] - 1
    hi = grid.interior[-1] + 1
    lhs = 0.0
    for k in range(lo, hi):
        xq = grid.nodes[k] + grid.h * xi
        lap = discrete_anisotropic_laplacian(grid, spec, tensor, uk, xq, q=q_pv)
        lhs += grid.h * float(np.sum(gw * lap * vfun(xq)))
    rhs = float(vk @ system.K_A @ uk)
    defect = abs(lhs + rhs) / max(abs(rhs), 1e-300)
    return IdentityReport(
        "greens-identity",
        ANCHORS["greens-identity"],
        f"grid={grid.ident()};s={spec.s};tensor={tensor.name}",
        defect,
        tol,
        details={"pairing": lhs, "galerkin": rhs},
    )


def check_norm_equivalence(grid, spec, n_vectors=20, seed=0, budget=None, tol=None):
    """K_A(A=I) vs K_iso: entrywise agreement and random Rayleigh quotients."""
    tol = tol if tol is not None else DEFAULT_TOLERANCES["norm-equivalence"]
    K_iso = assemble_gram_isotropic(grid, spec)
    K_A = assemble_stiffness_weighted(grid, spec, identity_tensor(1), budget)
    mat_defect = float(np.abs(K_A - K_iso).max() / np.abs(K_iso).max())
    rng = np.random.default_rng(seed)
    ray_defect = 0.0
    for _ in range(n_vectors):
        uvec = rng.normal(size=grid.n_interior)
        ray = (uvec @ K_A @ uvec) / (uvec @ K_iso @ uvec)
        ray_defect = max(ray_defect, abs(ray - 1.0))
    return IdentityReport(
        "norm-equivalence",
        ANCHORS["norm-equivalence"],
        f"grid={grid.ident()};s={spec.s};vectors={n_vectors}",
        max(mat_defect, ray_defect),
        tol,
        details={"matrix_defect": mat_defect, "rayleigh_defect": ray_defect},
    )


def check_coercivity_spectrum(system, tol=None):
    """Extremal generalized eigenvalues of (K_A, K_iso) against [lam_min, lam_max]."""
    tol = tol if tol is not None else DEFAULT_TOLERANCES["coercivity-spectrum"]
    mu = sla.eigh(system.K_A, system.K_iso, eigvals_only=True)
    viol_lo = max(0.0, (system.lambda_min - mu[0]) / system.lambda_min)
    viol_hi = max(0.0, (mu[-1] - system.lambda_max) / system.lambda_max)
    return IdentityReport(
        "coercivity-spectrum",
        ANCHORS["coercivity-spectrum"],
        f"grid={system.grid.ident()};s={system.spec.s};tensor={system.tensor_name}",
        max(viol_lo, viol_hi),
        tol,
        details={
            "mu_min": float(mu[0]),
            "mu_max": float(mu[-1]),
            "lambda_min": system.lambda_min,
            "lambda_max": system.lambda_max,
        },
    )


def check_weight_absorption(spec, tensor, u, points, budget=None, tol=None):
    """A-outside route vs square-root-in-weight route for the composed operator.

    The second route distributes A^(1/2) across both stages of the
    composition and is evaluated at an independently refined budget, so the
    defect measures agreement of two distinct quadrature paths.
    """
    tol = tol if tol is not None else DEFAULT_TOLERANCES["weight-absorption"]
    budget = budget or QuadratureBudget(panels=12, levels=2, tolerance=1e-3)
    alt = QuadratureBudget(budget.panels + 5, budget.levels, budget.tolerance)
    a_of = tensor.scalar_values

    sqrt_tensor = DiffusionTensorField(
        lambda x: np.sqrt(tensor(x)),
        math.sqrt(tensor.lambda_min),
        math.sqrt(tensor.lambda_max),
        n=1,
        scalar_fn=lambda p: np.sqrt(a_of(p)),
        name=f"sqrt({tensor.name})",
    )

    err = 0.0
    for x in points:
        route_a = anisotropic_laplacian(u, spec, tensor, x, budget)
        route_b = _tilde_route_laplacian(u, spec, sqrt_tensor, x, alt)
        err = max(err, abs(route_a - route_b) / max(abs(route_a), 1e-12))
    return IdentityReport(
        "weight-absorption",
        ANCHORS["weight-absorption"],
        f"tensor={tensor.name};field={u.name};s={spec.s};points={len(list(points))}",
        err,
        tol,
        details={},
    )


def _tilde_route_laplacian(u, spec, sqrt_tensor, x, budget):
    """Composition with weight sqrt(A) omega: inner gradient carries sqrt(A)
    at its base point, outer divergence carries sqrt(A) at both arguments."""
    from .operators import _weighted_divergence_fixed, _weighted_gradient_fixed
    from .quadrature import refine

    sa = sqrt_tensor.scalar_values
    sup = u.support_radius

    def evaluate(level):
        q = budget.order(level)

        def w_tilde(y):
            y = np.atleast_1d(np.asarray(y, dtype=float))
            vals = np.array([_weighted_gradient_fixed(u, spec, float(yy), q) for yy in y])
            return sa(y) * vals

        def v_combined(y):
            y = np.atleast_1d(np.asarray(y, dtype=float))
            return sa(y) * w_tilde(y)

        return _weighted_divergence_fixed(
            v_combined, spec, float(x), sup, q, 0.1, 1.0 + 2.0 * spec.s
        )

    value, _ = refine(evaluate, budget, scale=max(abs(float(u(x))), 1e-6), what="tilde route")
    return value


def check_apriori_ledger(system, u0_values, forcing, cfg, tol=None):
    """Ledger inequality along the flow; monotone L2 decay when unforced."""
    tol = tol if tol is not None else DEFAULT_TOLERANCES["parabolic-energy"]
    result = solve_parabolic(system, u0_values, forcing, cfg)
    led = result.ledger
    slack = max(led.slack(), 0.0)
    mono_viol = 0.0
    if forcing is None:
        diffs = np.diff(np.array(led.l2))
        mono_viol = max(0.0, float(diffs.max()) / max(led.l2[0], 1e-300))
    return IdentityReport(
        "parabolic-energy",
        ANCHORS["parabolic-energy"],
        f"grid={system.grid.ident()};s={system.spec.s};forced={forcing is not None}",
        max(slack, mono_viol),
        tol,
        details={
            "certified_slack": led.slack(),
            "stated_constant_slack": led.stated_slack(),
            "poincare": led.c_p,
        },
    )


def check_transport_coercivity(system, tol=None):
    """Symmetric part of K_A + C equals K_A; its (K_iso) spectrum stays coercive."""
    tol = tol if tol is not None else DEFAULT_TOLERANCES["transport-coercivity"]
    if system.C is None:
        raise ValueError("system has no advection matrix")
    op = system.K_A + system.C
    sym = 0.5 * (op + op.T)
    sym_defect = float(np.abs(sym - system.K_A).max() / np.abs(system.K_A).max())
    mu_min = sla.eigh(sym, system.K_iso, eigvals_only=True, subset_by_index=[0, 0])[0]
    viol = max(0.0, (system.lambda_min - mu_min) / system.lambda_min)
    return IdentityReport(
        "transport-coercivity",
        ANCHORS["transport-coercivity"],
        f"grid={system.grid.ident()};s={system.spec.s}",
        max(sym_defect, viol),
        tol,
        details={"sym_defect": sym_defect, "mu_min": float(mu_min)},
    )


def scan_kernel_bounds(spec, tensor, pairs, budget=None):
    """Empirical near/far ratios gamma_eq |x-z|^(n+2s); report only."""
    budget = budget or QuadratureBudget(panels=10, levels=2, tolerance=5e-3)
    near, far = [], []
    plist = []
    for x, z in pairs:
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        zv = np.atleast_1d(np.asarray(z, dtype=float))
        d = float(np.linalg.norm(zv - xv))
        g = equivalence_kernel(spec, tensor, x, z, budget)
        ratio = g * d ** (spec.n + 2.0 * spec.s)
        plist.append((x, z))
        if d <= 1.0:
            near.append(ratio)
        else:
            far.append(ratio)
    lam = min(near) if near else math.nan
    lam_up = max(near) if near else math.nan
    m_far = max(far) if far else math.nan
    return KernelBoundsReport(plist, near, far, lam, lam_up, m_far)


def check_kernel_bounds_scan(spec, tensor, pairs, budget=None):
    """Wrap the scan as a report-only identity (finite, and positive for
    isotropic fields)."""
    rep = scan_kernel_bounds(spec, tensor, pairs, budget)
    vals = np.array(rep.near_ratios + rep.far_ratios)
    finite = bool(np.all(np.isfinite(vals)))
    err = 0.0 if finite else math.inf
    return IdentityReport(
        "kernel-bounds-scan",
        ANCHORS["kernel-bounds-scan"],
        f"tensor={tensor.name};s={spec.s};n={spec.n};pairs={len(pairs)}",
        err,
        DEFAULT_TOLERANCES["kernel-bounds-scan"],
        details={"lam": rep.lam, "lam_upper": rep.lam_upper, "m_far": rep.m_far},
    )


def run_convergence_study(problem, h_list, s=0.5, domain=(-1.0, 1.0), collar=2.0):
    """L2 errors and observed orders for a problem with known exact solution.

    Problems: 'getoor' (constant load, exact sqrt profile, s = 0.5) and
    'zero' (zero load, exact zero).
    """
    if problem not in ("getoor", "zero"):
        raise ValueError(f"unknown convergence problem {problem!r}")
    spec = KernelSpec(s=s, n=1)
    tensor = identity_tensor(1)
    rows = []
    prev_err = None
    for h in h_list:
        grid = build_grid(domain, h, collar)
        forcing = (lambda x: np.ones_like(x)) if problem == "getoor" else None
        system = build_system(grid, spec, tensor, forcing=forcing)
        if problem == "zero":
            system.F = np.zeros(grid.n_interior)
        u = solve_elliptic(system)
        if problem == "getoor":
            exact = np.sqrt(np.maximum(1.0 - grid.interior_nodes**2, 0.0))
        else:
            exact = np.zeros(grid.n_interior)
        diff = u.values - exact
        err = float(np.sqrt(diff @ system.M @ diff))
        order = math.nan if prev_err is None or err == 0.0 else math.log2(prev_err / err)
        rows.append({"h": h, "n_dofs": grid.n_interior, "l2_error": err, "order": order})
        prev_err = err
    return rows


# ---------------------------------------------------------------------------
# default suite
# ---------------------------------------------------------------------------


def build_suite(seed=0, fast=False):
    """Registry of named check thunks covering every required identity."""
    rng = np.random.default_rng(seed)
    bump = smooth_bump(1.0)
    s_values = (0.5,) if fast else (0.25, 0.5, 0.75)
    h_green = 1 / 32 if fast else 1 / 64

    def op_equiv():
        errs = []
        for s in s_values:
            spec = KernelSpec(s=s, n=1)
            rep = check_operator_equivalence(spec, bump, np.linspace(-0.8, 0.8, 9))
            errs.append(rep)
        worst = max(errs, key=lambda r: r.error)
        worst.context += f";orders={list(s_values)}"
        return worst

    def eq_kernel():
        spec = KernelSpec(s=0.5, n=1)
        pairs = [(0.0, d) for d in np.linspace(0.25, 4.0, 10)]
        rep_i = check_equivalence_kernel(spec, identity_tensor(1), pairs)
        tensor = sine_scalar_tensor(2.0, 1.0, n=1)
        pairs2 = [(x, x + d) for x, d in zip(np.linspace(-1, 1, 5), np.linspace(0.3, 2.0, 5))]
        rep_s = check_equivalence_kernel(spec, tensor, pairs2)
        worst = rep_i if rep_i.error >= rep_s.error else rep_s
        worst.details.update(identity_error=rep_i.error, scalar_error=rep_s.error)
        return worst

    def green():
        spec = KernelSpec(s=0.5, n=1)
        grid = build_grid((-1, 1), h_green, 2.0)
        tensor = identity_tensor(1)
        system = build_system(grid, spec, tensor)
        uvec = rng.normal(size=grid.n_interior)
        vvec = rng.normal(size=grid.n_interior)
        return check_green_identity(system, uvec, vvec, tensor)

    def norm_eq():
        spec = KernelSpec(s=0.5, n=1)
        grid = build_grid((-1, 1), 1 / 32, 2.0)
        return check_norm_equivalence(grid, spec, n_vectors=20, seed=seed)

    def coercivity():
        spec = KernelSpec(s=0.5, n=1)
        grid = build_grid((-1, 1), 1 / 32, 2.0)
        reps = []
        for tensor in (sine_scalar_tensor(2.0, 1.0), constant_tensor(np.array([[5.0]]))):
            system = build_system(grid, spec, tensor)
            reps.append(check_coercivity_spectrum(system))
        return max(reps, key=lambda r: r.error)

    def absorption():
        spec = KernelSpec(s=0.5, n=1)
        tensor = sine_scalar_tensor(2.0, 1.0)
        pts = np.linspace(-0.6, 0.6, 5)
        return check_weight_absorption(spec, tensor, bump, pts)

    def energy():
        spec = KernelSpec(s=0.5, n=1)
        grid = build_grid((-1, 1), 1 / 32, 2.0)
        system = build_system(grid, spec, identity_tensor(1))
        u0v = bump(grid.interior_nodes)
        cfg = TimeSteppingConfig(t_end=1.0, dt=0.01, theta=1.0, stride=10)
        rep0 = check_apriori_ledger(system, u0v, None, cfg)
        F1 = assemble_load(grid, lambda x: np.ones_like(x))
        rep1 = check_apriori_ledger(system, u0v, F1, cfg)
        worst = max((rep0, rep1), key=lambda r: r.error)
        worst.details.update(unforced_error=rep0.error, forced_error=rep1.error)
        return worst

    def transport():
        spec = KernelSpec(s=0.6, n=1)
        grid = build_grid((-1, 1), 1 / 32, 2.0)
        system = build_system(grid, spec, identity_tensor(1), velocity=0.8)
        return check_transport_coercivity(system)

    def bounds_scan():
        spec = KernelSpec(s=0.5, n=1)
        tensor = sine_scalar_tensor(2.0, 1.0)
        pairs = [(-0.4, -0.4 + d) for d in np.linspace(0.3, 3.0, 6)]
        rep1 = check_kernel_bounds_scan(spec, tensor, pairs)
        spec2 = KernelSpec(s=0.5, n=2)
        tensor2 = rotated_anisotropy(1.0, 3.0)
        pairs2 = [(np.zeros(2), np.array([d, 0.5 * d])) for d in (0.3, 0.8, 1.5)]
        rep2 = check_kernel_bounds_scan(spec2, tensor2, pairs2)
        rep1.details["anisotropic_2d"] = rep2.details
        return rep1

    suite = {
        "operator-equivalence": op_equiv,
        "equivalence-kernel": eq_kernel,
        "greens-identity": green,
        "norm-equivalence": norm_eq,
        "coercivity-spectrum": coercivity,
        "weight-absorption": absorption,
        "parabolic-energy": energy,
        "transport-coercivity": transport,
        "kernel-bounds-scan": bounds_scan,
    }
    missing = REQUIRED_IDENTITIES - set(suite)
    extra = set(suite) - REQUIRED_IDENTITIES
    if missing or extra:
        raise RuntimeError(f"identity registry mismatch: missing={missing}, extra={extra}")
    return suite


def run_suite(seed=0, fast=False, parallel=False):
    """Run every registered check; reports merged deterministically by name."""
    suite = build_suite(seed=seed, fast=fast)
    names = sorted(suite)
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=4) as pool:
            futures = {name: pool.submit(suite[name]) for name in names}
            reports = [futures[name].result() for name in names]
    else:
        reports = [suite[name]() for name in names]
    return reports


def write_report(path, reports):
    """Machine-readable report: one record per identity."""
    with open(path, "w") as fh:
        fh.write("name,anchor,error,tolerance,pass\n")
        for rep in sorted(reports, key=lambda r: r.name):
            fh.write(rep.row() + "\n")


def summarize(reports):
    lines = []
    for rep in sorted(reports, key=lambda r: r.name):
        status = "PASS" if rep.passed else "FAIL"
        tol = "report-only" if math.isinf(rep.tolerance) else f"tol {rep.tolerance:.2e}"
        lines.append(f"[{status}] {rep.name}: error {rep.error:.3e} ({tol}) -- {rep.anchor}")
    return "\n".join(lines)
