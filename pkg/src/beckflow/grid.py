"""Uniform cell-centered grids on the unit box and discrete calculus.

The domain is Omega = (0,1)^d with d in {1, 2}.  Nodes sit at cell centers
(i + 1/2) * h with h = 1/n, so homogeneous Neumann conditions become plain
ghost-cell reflections and the midpoint rule integrates exactly over the box.

Derivatives use second-order centered differences in the interior and
second-order one-sided differences on the two boundary layers of each axis
(the stencils of ``numpy.gradient`` with ``edge_order=2``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered discretization of the unit box.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    n : int
        Nodes per axis, at least 4.  Spacing is h = 1/n.
    """

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 4:
            raise ValueError(f"n must be >= 4, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    def axis(self) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        return (np.arange(self.n) + 0.5) * self.h

    def meshgrid(self) -> list[np.ndarray]:
        """Coordinate arrays of shape ``self.shape``, 'ij' indexing."""
        ax = self.axis()
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def points(self) -> np.ndarray:
        """All node coordinates, shape (size, dim)."""
        return np.stack([m.ravel() for m in self.meshgrid()], axis=-1)


@dataclass(frozen=True)
class ScalarField:
    """Grid-sampled scalar function; values indexed like the meshgrid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite values in scalar field")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class VectorField:
    """One ScalarField per axis, same grid."""

    grid: Grid
    components: tuple[ScalarField, ...]

    def __post_init__(self):
        if len(self.components) != self.grid.dim:
            raise ValueError("component count must equal grid dimension")
        for c in self.components:
            if c.grid != self.grid:
                raise ValueError("component lives on a different grid")

    def as_array(self) -> np.ndarray:
        """Components stacked on the leading axis, shape (dim, *grid.shape)."""
        return np.stack([c.values for c in self.components])


def vector_field(grid: Grid, arrays) -> VectorField:
    """Bundle raw per-axis arrays into a VectorField."""
    return VectorField(grid, tuple(ScalarField(grid, a) for a in arrays))


def integrate(f: ScalarField) -> float:
    """Midpoint quadrature of f over the unit box, exact for affine integrands."""
    return f.grid.h**f.grid.dim * float(f.values.sum())


def gradient(f: ScalarField) -> VectorField:
    """Second-order finite-difference gradient (one-sided at the walls)."""
    g = np.gradient(f.values, f.grid.h, edge_order=2)
    if f.grid.dim == 1:
        g = [g]
    return vector_field(f.grid, g)


def divergence(v: VectorField) -> ScalarField:
    """Second-order finite-difference divergence, same stencils as gradient."""
    h = v.grid.h
    out = np.zeros(v.grid.shape)
    for ax, comp in enumerate(v.components):
        out += np.gradient(comp.values, h, axis=ax, edge_order=2)
    return ScalarField(v.grid, out)


def sample_at(values: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of node values at arbitrary points.

    Points are clamped to the hull of the cell centers, which extends the
    field constantly across the outermost half-cells.

    Parameters
    ----------
    values : ndarray with shape ``grid.shape``
    points : ndarray (N, dim) or (dim,)

    Returns
    -------
    ndarray (N,) of interpolated values.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, h = grid.n, grid.h
    g = pts / h - 0.5
    g = np.clip(g, 0.0, n - 1.0)
    i0 = np.clip(np.floor(g).astype(np.intp), 0, n - 2)
    fr = g - i0
    if grid.dim == 1:
        i = i0[:, 0]
        f = fr[:, 0]
        return values[i] * (1.0 - f) + values[i + 1] * f
    i, j = i0[:, 0], i0[:, 1]
    fx, fy = fr[:, 0], fr[:, 1]
    v00 = values[i, j]
    v10 = values[i + 1, j]
    v01 = values[i, j + 1]
    v11 = values[i + 1, j + 1]
    return (
        v00 * (1 - fx) * (1 - fy)
        + v10 * fx * (1 - fy)
        + v01 * (1 - fx) * fy
        + v11 * fx * fy
    )
