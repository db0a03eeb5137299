"""Neumann-Poisson solver on the mean-zero subspace.

Solves  lap u = f  on the box with homogeneous Neumann walls, discretized by
the compact 3/5-point Laplacian with ghost-cell reflection.  The operator is
singular (constants are in the kernel), so conjugate gradients run with an
explicit mean projection applied to the right-hand side and to the iterate
after every step; the returned potential is mean-zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CompatibilityViolated, NonConvergence
from .grid import Grid, ScalarField, integrate

COMPAT_TOL = 1e-8
DEMEAN_CUTOFF = 1e-4
DEFAULT_CG_TOL = 1e-10


@dataclass(frozen=True)
class NeumannProblem:
    """Right-hand side of  lap u = f  with zero-flux walls."""

    f: ScalarField
    compat_tol: float = COMPAT_TOL

    @property
    def grid(self) -> Grid:
        return self.f.grid

    @property
    def compat_integral(self) -> float:
        return integrate(self.f)


@dataclass(frozen=True)
class Potential:
    """Mean-zero solution with the final inf-norm CG residual."""

    u: ScalarField
    residual_inf: float
    iterations: int

    @property
    def grid(self) -> Grid:
        return self.u.grid


def check_compatibility(f: ScalarField, tol: float) -> bool:
    """True iff the Fredholm condition |int f| <= tol holds."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return abs(integrate(f)) <= tol


def apply_laplacian(values: np.ndarray, h: float) -> np.ndarray:
    """Compact Neumann Laplacian (ghost reflection) applied to node values."""
    out = np.zeros_like(values)
    for ax in range(values.ndim):
        v = np.swapaxes(values, 0, ax)
        o = np.swapaxes(out, 0, ax)
        o[1:-1] += v[2:] - 2.0 * v[1:-1] + v[:-2]
        o[0] += v[1] - v[0]
        o[-1] += v[-2] - v[-1]
    out /= h * h
    return out


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, apply_laplacian(f.values, f.grid.h))


def solve_neumann(
    problem: NeumannProblem,
    cg_tol: float = DEFAULT_CG_TOL,
    max_iter: int | None = None,
    demean_slack: bool = True,
) -> Potential:
    """Projected conjugate-gradient solve of the singular Neumann system.

    Termination is relative in the max norm: the iteration stops once
    ``||r||_inf <= cg_tol * ||b||_inf``.  An incompatible right-hand side
    raises :class:`CompatibilityViolated`; a mild violation (below 1e-4) is
    mean-corrected with a warning when ``demean_slack`` is set, since coarse
    quadrature should not hard-fail a valid density pair.

    Returns
    -------
    Potential
        Mean-zero ``u`` with ``residual_inf`` measured against the projected
        right-hand side, and the CG iteration count.
    """
    grid = problem.grid
    fvals = problem.f.values
    compat = problem.compat_integral
    if abs(compat) > problem.compat_tol:
        if demean_slack and abs(compat) < DEMEAN_CUTOFF:
            warnings.warn(
                f"rhs integral {compat:.3e} exceeds {problem.compat_tol:.1e}; "
                "subtracting its mean",
                stacklevel=2,
            )
        else:
            raise CompatibilityViolated(
                f"rhs integral {compat:.3e} exceeds tolerance {problem.compat_tol:.1e}"
            )
    if max_iter is None:
        max_iter = 20 * grid.size

    h = grid.h
    # SPD system: A = -lap on the mean-zero subspace
    b = -(fvals - fvals.mean())
    b_inf = float(np.abs(b).max())
    if b_inf == 0.0:
        zero = ScalarField(grid, np.zeros(grid.shape))
        return Potential(u=zero, residual_inf=0.0, iterations=0)

    tol_abs = cg_tol * b_inf
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(np.sum(r * r))
    res_inf = float(np.abs(r).max())
    it = 0
    while it < max_iter and res_inf > tol_abs:
        it += 1
        ap = -apply_laplacian(p, h)
        denom = float(np.sum(p * ap))
        alpha = rs / denom
        x += alpha * p
        r -= alpha * ap
        # projection keeps the iterate and residual out of the constant kernel
        x -= x.mean()
        r -= r.mean()
        res_inf = float(np.abs(r).max())
        rs_new = float(np.sum(r * r))
        p = r + (rs_new / rs) * p
        rs = rs_new
    if res_inf > tol_abs:
        raise NonConvergence(
            f"CG stalled at residual {res_inf:.3e} (target {tol_abs:.3e}) "
            f"after {it} iterations"
        )
    x -= x.mean()
    return Potential(u=ScalarField(grid, x), residual_inf=res_inf, iterations=it)


def solve_residual(u: Potential, f: ScalarField) -> float:
    """A posteriori check: max-norm of lap_h u - f against the raw rhs."""
    if u.grid != f.grid:
        raise ValueError("potential and rhs live on different grids")
    return float(np.abs(apply_laplacian(u.u.values, u.grid.h) - f.values).max())
