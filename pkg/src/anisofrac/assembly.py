"""Galerkin assembly of the nonlocal bilinear forms on P1 volume-constrained grids.

Isotropic fractional Gram matrix (Gagliardo double integral):
    K[i, j] = (C/2) iint (phi_i(x)-phi_i(y)) (phi_j(x)-phi_j(y)) |x-y|^(-1-2s) dy dx
integrated over (meshed region)^2 by element pairs, plus the analytic tail
for |y| beyond the mesh.  Element pairs are handled by distance:

* identical pair: both basis differences are proportional to (x - y), so
  the pair integral reduces exactly to the moment
  iint (x-y)^2 |x-y|^(-1-2s) = 2 h^(3-2s) / ((2-2s)(3-2s));
* touching pair: in corner coordinates a = q-x, b = y-q the integrand is
  (c.a + d.b)(c'.a + d'.b)(a+b)^(-1-2s); the Duffy split b = a*tau (and its
  mirror) separates exactly into h^(3-2s)/(3-2s) times smooth tau-moments
  T_m = int_0^1 tau^m (1+tau)^(-1-2s) dtau;
* separated pair: smooth tensor Gauss with order decreasing in distance.

On a uniform grid each distance class yields one block, scattered along
matrix diagonals.

Anisotropic stiffness (weighted form):
    K_A[i, j] = int g_j(x) A(x) g_i(x) dx,   g_j = weighted gradient of hat j,
with g_j evaluated by the closed form in the backend kernel, composite
Gauss panels inside the meshed region (sub-panels graded toward the nodes
where g has |x - node|^(1-s) kinks) and mapped tail quadrature outside.
The Gram product form makes K_A symmetric by construction; the recorded
asymmetry only measures roundoff.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .fields import ScalarField
from .grid import DiscreteFunction, Grid
from .kernels import DiffusionTensorField, KernelSpec
from .quadrature import NonConvergenceError, QuadratureBudget, gauss_rule, tail_rule

MAX_INTERIOR_DOFS = 4000

DEFAULT_ASSEMBLY_BUDGET = QuadratureBudget(panels=6, levels=1, tolerance=1e-5)


class AsymmetryError(RuntimeError):
    """Assembled matrix asymmetry exceeds the allowed quadrature tolerance."""


def _check_size(grid):
    if grid.n_interior > MAX_INTERIOR_DOFS:
        raise ValueError(
            f"{grid.n_interior} interior dofs exceed the dense-assembly cap {MAX_INTERIOR_DOFS}"
        )


# ---------------------------------------------------------------------------
# mass, advection, load
# ---------------------------------------------------------------------------


def assemble_mass(grid):
    """P1 mass matrix on interior dofs: tridiagonal h * (2/3, 1/6)."""
    _check_size(grid)
    n = grid.n_interior
    h = grid.h
    main = np.full(n, 2.0 * h / 3.0)
    off = np.full(n - 1, h / 6.0)
    return np.diag(main) + np.diag(off, 1) + np.diag(off, -1)


def assemble_advection(grid, velocity):
    """Advection matrix C[i, j] = int_Omega (v phi_j') phi_i dx, v constant.

    In 1-D a bounded solenoidal field is constant; a callable velocity is
    sampled and rejected if it varies.
    """
    _check_size(grid)
    if callable(velocity):
        xs = np.linspace(grid.a, grid.b, 17)
        vals = np.array([float(velocity(x)) for x in xs])
        if np.ptp(vals) > 1e-12 * max(1.0, np.abs(vals).max()):
            raise ValueError("velocity field is not divergence-free (non-constant in 1-D)")
        v = float(vals[0])
    else:
        v = float(velocity)
    n = grid.n_interior
    off = np.full(n - 1, 0.5 * v)
    return np.diag(off, 1) - np.diag(off, -1)


def assemble_load(grid, f, q=12):
    """Load vector F[i] = int_Omega f phi_i dx by composite Gauss."""
    _check_size(grid)
    xi, gw = gauss_rule(q)
    nodes = grid.nodes
    h = grid.h
    F = np.zeros(grid.n_nodes)
    # interior hats live on elements inside [a, b]
    lo = grid.interior[0] - 1
    hi = grid.interior[-1] + 1
    fn = f if callable(f) else (lambda x: np.full_like(x, float(f)))
    for k in range(lo, hi):
        xq = nodes[k] + h * xi
        fv = np.asarray(fn(xq), dtype=float)
        F[k] += h * np.sum(gw * fv * (1.0 - xi))
        F[k + 1] += h * np.sum(gw * fv * xi)
    return F[grid.interior]


# ---------------------------------------------------------------------------
# isotropic fractional Gram matrix
# ---------------------------------------------------------------------------


def _tau_moments(s, q=24):
    tau, gw = gauss_rule(q)
    w = (1.0 + tau) ** (-(1.0 + 2.0 * s))
    return tuple(float(np.sum(gw * tau**m * w)) for m in range(3))


def _same_element_block(h, s, coeff):
    q0 = 2.0 * h ** (3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s))
    base = coeff * q0 / (h * h)
    return base * np.array([[1.0, -1.0], [-1.0, 1.0]])

def _adjacent_block(h, s, coeff):
    t0, t1, t2 = _tau_moments(s)
    r = h ** (3.0 - 2.0 * s) / (3.0 - 2.0 * s)
    c = np.array([-1.0, 1.0, 0.0]) / h
    d = np.array([0.0, -1.0, 1.0]) / h
    cc = np.outer(c, c) + np.outer(d, d)
    cd = np.outer(c, d) + np.outer(d, c)
    return coeff * r * (cc * (t0 + t2) + cd * 2.0 * t1)


def _separated_block(m, h, s, coeff, q):
    xi, gw = gauss_rule(q)
    dist = h * (m + xi[None, :] - xi[:, None])
    gamma = gw[:, None] * gw[None, :] * coeff * h * h * dist ** (-(1.0 + 2.0 * s))
    shapes = np.stack([1.0 - xi, xi])
    row = gamma.sum(axis=1)
    col = gamma.sum(axis=0)
    bxx = np.einsum("a,ia,ja->ij", row, shapes, shapes)
    byy = np.einsum("b,ib,jb->ij", col, shapes, shapes)
    bxy = -np.einsum("ab,ia,jb->ij", gamma, shapes, shapes)
    out = np.empty((4, 4))
    out[:2, :2] = bxx
    out[2:, 2:] = byy
    out[:2, 2:] = bxy
    out[2:, :2] = bxy.T
    return out


def _separated_order(m, q_base):
    return max(3, q_base - int(math.log2(m)))


def gram_node_matrix(grid, spec, q_base=10):
    """Gagliardo pair-sum over the meshed region for all nodal hats.

    Rows/columns of nodes within one cell of the mesh edge omit beyond-mesh
    interactions; those dofs are constrained and never used.
    """
    h = grid.h
    s = spec.s
    coeff = spec.gamma_coeff
    nel = grid.n_elements
    nn = grid.n_nodes
    K = np.zeros((nn, nn))

    b0 = _same_element_block(h, s, coeff)
    rows = np.arange(nel)
    for a in range(2):
        for b in range(2):
            K[rows + a, rows + b] += b0[a, b]

    b1 = _adjacent_block(h, s, coeff)
    rows = np.arange(nel - 1)
    for a in range(3):
        for b in range(3):
            K[rows + a, rows + b] += 2.0 * b1[a, b]

    for m in range(2, nel):
        bm = _separated_block(m, h, s, coeff, _separated_order(m, q_base))
        off = (0, 1, m, m + 1)
        rows = np.arange(nel - m)
        for a in range(4):
            for b in range(4):
                K[rows + off[a], rows + off[b]] += 2.0 * bm[a, b]
    return K


def _exterior_tail_term(grid, spec, q=12):
    """Tridiagonal contribution 2 int phi_i phi_j psi with the analytic tail
    density psi(x) = (C/2)/(2s) [(B-x)^(-2s) + (x-A)^(-2s)] of interactions
    beyond the meshed region [A, B]."""
    s = spec.s
    coeff = spec.gamma_coeff
    A0, B0 = grid.extent
    h = grid.h
    nodes = grid.nodes
    nn = grid.n_nodes
    xi, gw = gauss_rule(q)
    out = np.zeros((nn, nn))
    for k in range(grid.n_elements):
        xq = nodes[k] + h * xi
        psi = (coeff / (2.0 * s)) * ((B0 - xq) ** (-2.0 * s) + (xq - A0) ** (-2.0 * s))
        n0 = 1.0 - xi
        n1 = xi
        w = 2.0 * h * gw * psi
        out[k, k] += np.sum(w * n0 * n0)
        out[k, k + 1] += np.sum(w * n0 * n1)
        out[k + 1, k] += np.sum(w * n0 * n1)
        out[k + 1, k + 1] += np.sum(w * n1 * n1)
    return out


def assemble_gram_isotropic(grid, spec, budget=None):
    """Fractional Gram matrix on interior dofs (kernel gamma_FL).

    With budget.levels >= 2 the assembly is repeated at a refined Gauss
    order and compared entrywise; disagreement beyond the tolerance raises
    NonConvergenceError.
    """
    _check_size(grid)
    budget = budget or QuadratureBudget(panels=10, levels=1, tolerance=1e-8)

    def build(q_base):
        full = gram_node_matrix(grid, spec, q_base)
        # interior hats vanish near the mesh edge, so the tail term is exact
        full += _exterior_tail_term(grid, spec)
        idx = grid.interior
        return full[np.ix_(idx, idx)]

    K = build(budget.panels)
    if budget.levels >= 2:
        K2 = build(budget.panels * 2)
        scale = np.abs(K2).max()
        if np.abs(K2 - K).max() > budget.tolerance * scale:
            raise NonConvergenceError(
                f"gram assembly: refinement changed entries by "
                f"{np.abs(K2 - K).max():.3e} (tolerance {budget.tolerance:.3e} on {scale:.3e})"
            )
        K = K2
    return 0.5 * (K + K.T)


# ---------------------------------------------------------------------------
# anisotropic weighted stiffness
# ---------------------------------------------------------------------------


def _outer_quadrature(grid, spec, q, n_sub=3, edge_frac=0.15):
    """Panels over the meshed region (graded sub-panels per element) plus
    mapped tails; returns (points, weights)."""
    A0, B0 = grid.extent
    h = grid.h
    # sub-panel split of [0, 1]: kinks of the hat gradients sit at the nodes
    if n_sub == 3:
        cuts = np.array([0.0, edge_frac, 1.0 - edge_frac, 1.0])
    else:
        cuts = np.linspace(0.0, 1.0, n_sub + 1)
    xi, gw = gauss_rule(q)
    xs = []
    ws = []
    for k in range(grid.n_elements):
        left = grid.nodes[k]
        for j in range(len(cuts) - 1):
            a = left + h * cuts[j]
            wdt = h * (cuts[j + 1] - cuts[j])
            xs.append(a + wdt * xi)
            ws.append(wdt * gw)
    # tails: integrand decays like (dist to hats)^(-2-2s)
    W = max(grid.collar, h)
    t, tw = tail_rule(W, 1.0 + 2.0 * spec.s, 2 * q)
    xs.append(B0 - W + t)
    ws.append(tw)
    xs.append(A0 + W - t)
    ws.append(tw)
    return np.concatenate(xs), np.concatenate(ws)


def gradient_table(grid, spec, pts, parallel=False):
    """Closed-form weighted gradients of all interior hats at given points."""
    pts = np.ascontiguousarray(pts, dtype=float)
    centers = grid.interior_nodes
    if parallel and pts.size > 4096:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(np.arange(pts.size), 8)
        out = np.empty((pts.size, centers.size))

        def run(ix):
            out[ix] = backend.hat_gradient_table(pts[ix], centers, grid.h, spec.s, spec.c_op)

        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(run, chunks))
        return out
    return backend.hat_gradient_table(pts, centers, grid.h, spec.s, spec.c_op)


def assemble_stiffness_weighted(grid, spec, tensor, budget=None, parallel=False):
    """Anisotropic stiffness K_A[i, j] = int g_j(x) A(x) g_i(x) dx.

    Symmetrized as (K + K^T)/2 with the (roundoff-level) asymmetry recorded
    on the result as ``assemble_stiffness_weighted.last_asymmetry``; an
    asymmetry beyond 10x the budget tolerance raises AsymmetryError.
    """
    _check_size(grid)
    budget = budget or DEFAULT_ASSEMBLY_BUDGET
    if tensor.n != 1:
        raise NotImplementedError("assembly is 1-D; 2-D tensor fields are not supported here")

    def build(q):
        pts, wts = _outer_quadrature(grid, spec, q)
        G = gradient_table(grid, spec, pts, parallel=parallel)
        avals = tensor.scalar_values(pts)
        return (G * (wts * avals)[:, None]).T @ G

    K = build(budget.panels)
    if budget.levels >= 2:
        K2 = build(budget.panels * 2)
        scale = np.abs(K2).max()
        if np.abs(K2 - K).max() > budget.tolerance * scale:
            raise NonConvergenceError(
                f"stiffness assembly: refinement changed entries by "
                f"{np.abs(K2 - K).max():.3e} (tolerance {budget.tolerance:.3e} on {scale:.3e})"
            )
        K = K2
    asym = float(np.abs(K - K.T).max())
    scale = float(np.abs(K).max())
    if asym > 10.0 * budget.tolerance * max(scale, 1e-300):
        raise AsymmetryError(f"stiffness asymmetry {asym:.3e} exceeds 10x tolerance")
    assemble_stiffness_weighted.last_asymmetry = asym
    return 0.5 * (K + K.T)


assemble_stiffness_weighted.last_asymmetry = 0.0


# ---------------------------------------------------------------------------
# discrete system
# ---------------------------------------------------------------------------


@dataclass
class DiscreteSystem:
    """Assembled matrices for one scenario; immutable after construction."""

    grid: Grid
    spec: KernelSpec
    tensor_name: str
    M: np.ndarray
    K_A: np.ndarray
    K_iso: np.ndarray
    C: np.ndarray = None
    F: np.ndarray = None
    lambda_min: float = 1.0
    lambda_max: float = 1.0

    def __post_init__(self):
        n = self.grid.n_interior
        for name in ("M", "K_A", "K_iso"):
            mat = getattr(self, name)
            if mat.shape != (n, n):
                raise ValueError(f"{name} has shape {mat.shape}, expected {(n, n)}")
        if self.F is None:
            self.F = np.zeros(n)

    @property
    def operator(self):
        """Diffusion plus advection operator matrix."""
        return self.K_A if self.C is None else self.K_A + self.C


def build_system(grid, spec, tensor, forcing=None, velocity=None, budget=None, parallel=False):
    """Assemble mass, stiffness, Gram, optional advection, and load."""
    M = assemble_mass(grid)
    K_A = assemble_stiffness_weighted(grid, spec, tensor, budget, parallel=parallel)
    K_iso = assemble_gram_isotropic(grid, spec)
    C = None if velocity is None else assemble_advection(grid, velocity)
    F = None if forcing is None else assemble_load(grid, forcing)
    return DiscreteSystem(
        grid,
        spec,
        tensor.name,
        M,
        K_A,
        K_iso,
        C,
        F,
        lambda_min=tensor.lambda_min,
        lambda_max=tensor.lambda_max,
    )


# ---------------------------------------------------------------------------
# discrete weighted gradients / pointwise operator on discrete functions
# ---------------------------------------------------------------------------


def discrete_weighted_gradient(grid, spec, coeffs, pts):
    """Weighted gradient of the P1 function with given interior coefficients."""
    G = gradient_table(grid, spec, np.atleast_1d(pts), parallel=False)
    return G @ np.asarray(coeffs, dtype=float)


def plateau_complement_gradient(grid, spec, pts):
    """Closed-form weighted gradient of 1 - (sum of all nodal hats).

    The complement is 1 beyond the mesh, 0 on it, with linear ramps of
    width h just outside; used to verify that the full-space operator
    annihilates the constant extension.
    """
    A0, B0 = grid.extent
    h = grid.h
    s = spec.s
    pts = np.atleast_1d(np.asarray(pts, dtype=float))
    out = np.zeros_like(pts)
    breaks = np.array([A0 - h, A0, B0, B0 + h])
    # pieces: 1 | ramp 1->0 | 0 | ramp 0->1 | 1   (value = a + b x per piece)
    coeffs = [
        (1.0, 0.0),
        (A0 / h, -1.0 / h),
        (0.0, 0.0),
        (-B0 / h, 1.0 / h),
        (1.0, 0.0),
    ]
    for i, x_i in enumerate(pts):
        out[i] = _pwl_gradient_value(x_i, breaks, coeffs, s)
    return spec.c_op * out


def _pwl_gradient_value(x, breaks, coeffs, s):
    """PV integral of (p(y) - p(x)) sign(y-x) |y-x|^(-1-s) dy for a piecewise
    linear, eventually constant function given by breakpoints and (a, b)
    coefficients per piece (len(coeffs) = len(breaks) + 1)."""
    edges = np.concatenate([[-np.inf], breaks, [np.inf]])
    # locate x's piece for an exactly consistent p(x)
    k = int(np.searchsorted(breaks, x, side="right"))
    ax, bx = coeffs[k]
    px = ax + bx * x
    total = 0.0
    for i, (a, b) in enumerate(coeffs):
        lo, hi = edges[i], edges[i + 1]
        c0 = a + b * x - px
        if hi <= x:
            total += _f_left(hi - x, c0, b, s) - _f_left(lo - x, c0, b, s)
        elif lo >= x:
            total += _f_right(hi - x, c0, b, s) - _f_right(lo - x, c0, b, s)
        else:
            # x interior to this piece: c0 = 0 exactly by construction
            total += _f_right(hi - x, 0.0, b, s) - _f_left(lo - x, 0.0, b, s)
    return total


def _f_right(t, c0, b, s):
    """Antiderivative of (c0 + b t) t^(-1-s) for t > 0 (0 at t = +inf for b=0)."""
    if not np.isfinite(t):
        return 0.0
    if t == 0.0:
        return 0.0
    return -(c0 / s) * t ** (-s) + (b / (1.0 - s)) * t ** (1.0 - s)


def _f_left(t, c0, b, s):
    """Antiderivative of -(c0 + b t) (-t)^(-1-s) for t < 0 (0 at t = -inf for b=0)."""
    if not np.isfinite(t):
        return 0.0
    if t == 0.0:
        return 0.0
    return -(c0 / s) * (-t) ** (-s) - (b / (1.0 - s)) * (-t) ** (1.0 - s)


# ---------------------------------------------------------------------------
# plain-text export
# ---------------------------------------------------------------------------


def export_matrix(path, mat, name, grid, spec):
    """Plain-text matrix with a one-line header (dimensions, grid id, spec hash)."""
    mat = np.atleast_2d(mat)
    header = f"rows={mat.shape[0]} cols={mat.shape[1]} grid={grid.ident()} spec={spec.digest()} name={name}"
    np.savetxt(path, mat, header=header)


def export_vector(path, vec, name, grid, spec):
    header = f"rows={vec.size} cols=1 grid={grid.ident()} spec={spec.digest()} name={name}"
    np.savetxt(path, np.asarray(vec), header=header)
