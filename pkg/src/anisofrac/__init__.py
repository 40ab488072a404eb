"""Anisotropic nonlocal and fractional diffusion: operators, solvers, checks.

Layers:

* ``kernels``    constants, radial weights, diffusion tensor fields, and the
                 equivalence kernel by principal-value quadrature;
* ``operators``  mesh-free pointwise nonlocal operators (the reference the
                 discretization is validated against);
* ``assembly``   P1 Galerkin matrices for the volume-constrained forms;
* ``solvers``    elliptic / parabolic / advection-diffusion with an energy ledger;
* ``verify``     the identity-certification suite;
* ``cli``        config-driven runs emitting CSV and SVG artifacts.

The hot evaluation kernel has a compiled backend with a pure-NumPy fallback
(see ``anisofrac.backend.BACKEND``).
"""

from .backend import BACKEND
from .fields import ScalarField, TwoPointVectorField, smooth_bump, sqrt_profile, truncated_gaussian
from .grid import DiscreteFunction, Grid, build_grid
from .kernels import (
    DiffusionTensorField,
    KernelSpec,
    constant_tensor,
    equivalence_kernel,
    eval_alpha,
    eval_gamma_fl,
    eval_weight,
    identity_tensor,
    operator_weight_constant,
    riesz_constant,
    rotated_anisotropy,
    scalar_tensor,
    sine_scalar_tensor,
    weight_constant,
)
from .operators import (
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
from .assembly import (
    DiscreteSystem,
    assemble_advection,
    assemble_gram_isotropic,
    assemble_load,
    assemble_mass,
    assemble_stiffness_weighted,
    build_system,
)
from .quadrature import NonConvergenceError, QuadratureBudget
from .solvers import (
    EnergyLedger,
    TimeSteppingConfig,
    estimate_poincare,
    solve_elliptic,
    solve_parabolic,
    solve_transport,
)

__version__ = "0.1.0"
