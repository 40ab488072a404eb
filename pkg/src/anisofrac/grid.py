"""Uniform 1-D grids with an exterior collar carrying the volume constraint."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform mesh over (a, b) plus a collar of width W on each side.

    Nodes strictly inside (a, b) are interior degrees of freedom; nodes on
    the boundary or in the collar are constrained to zero (homogeneous
    volume constraint).
    """

    a: float
    b: float
    h: float
    collar: float
    nodes: np.ndarray = field(repr=False)
    interior: np.ndarray = field(repr=False)

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def n_elements(self):
        return self.nodes.size - 1

    @property
    def n_interior(self):
        return self.interior.size

    @property
    def interior_nodes(self):
        return self.nodes[self.interior]

    @property
    def extent(self):
        """Meshed region [a - W, b + W]."""
        return float(self.nodes[0]), float(self.nodes[-1])

    def ident(self):
        return f"omega=({self.a:g},{self.b:g});h={self.h:g};W={self.collar:g}"


def build_grid(domain, h, collar):
    """Uniform grid covering the domain plus an exterior collar.

    The mesh size must divide the domain length; the collar width is
    rounded up to a whole number of cells (W >= h required).
    """
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise ValueError(f"degenerate domain ({a}, {b})")
    if not h > 0:
        raise ValueError("mesh size must be positive")
    if collar < h:
        raise ValueError(f"collar width {collar} must be at least the mesh size {h}")
    n_cells = round((b - a) / h)
    if abs(n_cells * h - (b - a)) > 1e-9 * (b - a) or n_cells < 2:
        raise ValueError(f"mesh size {h} must divide the domain length {b - a}")
    m_cells = int(np.ceil(collar / h - 1e-12))
    total = n_cells + 2 * m_cells
    nodes = np.linspace(a - m_cells * h, b + m_cells * h, total + 1)
    interior = np.arange(m_cells + 1, m_cells + n_cells)
    return Grid(a, b, (b - a) / n_cells, m_cells * h, nodes, interior)


@dataclass
class DiscreteFunction:
    """Coefficients over interior dofs; constrained dofs implicitly zero."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_interior,):
            raise ValueError(
                f"coefficient vector length {self.values.size} does not match "
                f"{self.grid.n_interior} interior dofs"
            )

    def node_values(self):
        """Full nodal vector including zero constrained dofs."""
        full = np.zeros(self.grid.n_nodes)
        full[self.grid.interior] = self.values
        return full

    def __call__(self, x):
        """Piecewise-linear evaluation (zero outside the meshed region)."""
        return np.interp(
            np.asarray(x, dtype=float), self.grid.nodes, self.node_values(), left=0.0, right=0.0
        )
