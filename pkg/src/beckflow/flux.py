"""Flux fields w = grad u, constraint diagnostics, and the optimality probe.

``flux_from_potential`` is orientation-agnostic: it differentiates whatever
potential it is given and reports how well div w matches the rhs the caller
prescribed.  The quadratic objective is J(w) = 1/2 int |w|^2.

The optimality probe tests minimality by the quadratic-expansion argument:
for a divergence-free competitor v with zero normal trace,

    J(w + v) = J(w) + J(v) + int w . v,

and the cross term vanishes.  Discretely, rotated gradients of a stream
function that is zeroed on the three outermost node layers are exactly
divergence-free and exactly orthogonal to gradients (the one-sided boundary
stencils never activate), so each trial raises J by J(v) up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField, VectorField, divergence, gradient, integrate, vector_field
from .poisson import Potential

STREAM_MARGIN = 3


@dataclass(frozen=True)
class FluxField:
    w: VectorField
    div_residual_inf: float
    boundary_flux_inf: float
    objective: float

    @property
    def grid(self) -> Grid:
        return self.w.grid


@dataclass(frozen=True)
class PerturbationTrial:
    seed: int
    competitor_objective: float   # J(w + v)
    perturbation_objective: float  # J(v)
    cross_term: float              # int w . v
    div_deviation: float           # ||div(w+v) - f||_inf - ||div w - f||_inf


@dataclass(frozen=True)
class OptimalityReport:
    base_objective: float
    trials: tuple[PerturbationTrial, ...]
    min_margin: float              # min over trials of J(w+v) - J(w)
    max_cross: float


def beckmann_objective(v: VectorField) -> float:
    """J(v) = 1/2 int |v|^2 by midpoint quadrature."""
    sq = np.zeros(v.grid.shape)
    for c in v.components:
        sq += c.values**2
    return 0.5 * integrate(ScalarField(v.grid, sq))


def wall_normal_inf(v: VectorField) -> float:
    """Max normal component on the walls, linearly extrapolated to them.

    Cell centers sit half a cell inside the domain; the zero-flux condition
    lives on the wall itself, so the trace is read off by second-order
    extrapolation from the two nearest node layers.
    """
    worst = 0.0
    for ax, comp in enumerate(v.components):
        a = np.moveaxis(comp.values, ax, 0)
        lo = 0.5 * (3.0 * a[0] - a[1])
        hi = 0.5 * (3.0 * a[-1] - a[-2])
        worst = max(worst, float(np.abs(lo).max()), float(np.abs(hi).max()))
    return worst


def layer_normal_inf(v: VectorField) -> float:
    """Max normal component on the outermost node layer (no extrapolation)."""
    worst = 0.0
    for ax, comp in enumerate(v.components):
        a = np.moveaxis(comp.values, ax, 0)
        worst = max(worst, float(np.abs(a[0]).max()), float(np.abs(a[-1]).max()))
    return worst


def flux_from_potential(u: Potential, f: ScalarField) -> FluxField:
    """Differentiate the potential and attach constraint diagnostics.

    ``f`` is the divergence the potential was solved for; the field records
    ``||div w - f||_inf``, the extrapolated wall flux, and J(w).
    """
    if u.grid != f.grid:
        raise ValueError("potential and rhs live on different grids")
    w = gradient(u.u)
    div_res = float(np.abs(divergence(w).values - f.values).max())
    return FluxField(
        w=w,
        div_residual_inf=div_res,
        boundary_flux_inf=wall_normal_inf(w),
        objective=beckmann_objective(w),
    )


def stream_perturbation(grid: Grid, psi: np.ndarray, margin: int = STREAM_MARGIN) -> VectorField:
    """Divergence-free competitor v = (-d psi/dy, d psi/dx) from a stream function.

    The stream function is forced to vanish on the ``margin`` outermost node
    layers per side; with margin >= 3 the discrete curl is exactly
    divergence-free and exactly L2-orthogonal to every discrete gradient,
    because the one-sided boundary stencils only see zeros.
    """
    if grid.dim != 2:
        raise ValueError("stream perturbations require d = 2")
    if 2 * margin >= grid.n:
        raise ValueError("margin leaves no interior")
    p = np.array(psi, dtype=float)
    if p.shape != grid.shape:
        raise ValueError("stream function shape mismatch")
    if margin > 0:
        p[:margin, :] = 0.0
        p[-margin:, :] = 0.0
        p[:, :margin] = 0.0
        p[:, -margin:] = 0.0
    h = grid.h
    vx = -np.gradient(p, h, axis=1, edge_order=2)
    vy = np.gradient(p, h, axis=0, edge_order=2)
    return vector_field(grid, [vx, vy])


def _random_stream(grid: Grid, seed: int) -> np.ndarray:
    """Smooth seeded stream function with wall-compatible decay."""
    rng = np.random.default_rng(seed)
    x, y = grid.meshgrid()
    envelope = (np.sin(np.pi * x) * np.sin(np.pi * y)) ** 2
    psi = np.zeros(grid.shape)
    for k in range(1, 4):
        for l in range(1, 4):
            c = rng.normal() / (k * l)
            psi += c * np.sin(k * np.pi * x) * np.sin(l * np.pi * y)
    return 0.25 * envelope * psi


def optimality_probe(
    base: FluxField, f: ScalarField, trials: int, seed: int
) -> OptimalityReport:
    """Quadratic-expansion minimality test with random stream competitors.

    Each trial builds a divergence-free perturbation v, checks that the
    divergence defect of w + v matches that of w up to discretization
    roundoff, and records J(w+v), J(v) and the cross term int w . v.
    """
    if base.grid.dim != 2:
        raise ValueError("the probe perturbs rotated gradients; d must be 2")
    if trials < 1:
        raise ValueError("need at least one trial")
    grid = base.grid
    warr = base.w.as_array()
    celldv = grid.h**grid.dim
    out = []
    for k in range(trials):
        v = stream_perturbation(grid, _random_stream(grid, seed + k))
        varr = v.as_array()
        cross = celldv * float(np.sum(warr * varr))
        jv = beckmann_objective(v)
        wpv = vector_field(grid, list(warr + varr))
        jwpv = beckmann_objective(wpv)
        div_dev = float(
            np.abs(divergence(wpv).values - f.values).max()
        ) - base.div_residual_inf
        out.append(
            PerturbationTrial(
                seed=seed + k,
                competitor_objective=jwpv,
                perturbation_objective=jv,
                cross_term=cross,
                div_deviation=div_dev,
            )
        )
    margins = [t.competitor_objective - base.objective for t in out]
    return OptimalityReport(
        base_objective=base.objective,
        trials=tuple(out),
        min_margin=min(margins),
        max_cross=max(abs(t.cross_term) for t in out),
    )
