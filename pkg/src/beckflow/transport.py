"""Transport vector fields xi(t, .) driving a probability path.

The continuity equation  d rho/dt + div(rho xi) = 0  fixes the divergence of
the flux w(t) = rho_t xi(t) to be the *negated* path rate,

    div w(t) = -d rho_t/dt,     w(t) . eta = 0 on the walls,

so each slice solves a Neumann problem with rhs -rho_dot(t).  For the linear
path the rate is constant in t and a single flux is shared by every slice;
generic paths solve per node.  Slices live on a user-chosen node list
(default: Chebyshev-spaced, dense near the endpoints where geometric paths
move fastest) and queries interpolate linearly in t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import Density
from .errors import DivisionFloor, NumericalError
from .flux import FluxField
from .grid import Grid, ScalarField, VectorField, divergence, gradient, sample_at, vector_field
from .paths import LinearPath, ProbabilityPath
from .poisson import DEFAULT_CG_TOL, NeumannProblem, solve_neumann

DIVISION_FLOOR = 1e-12
DEFAULT_T_NODES = 17


def chebyshev_nodes(m: int) -> np.ndarray:
    """m Chebyshev-Lobatto nodes on [0, 1], endpoints included."""
    if m < 2:
        raise ValueError("need at least two nodes")
    return (1.0 - np.cos(np.pi * np.arange(m) / (m - 1))) / 2.0


def _as_nodes(t_nodes) -> np.ndarray:
    ts = np.asarray(list(t_nodes), dtype=float)
    ts = np.unique(ts)
    if len(ts) < 2 or ts[0] != 0.0 or ts[-1] != 1.0:
        raise ValueError("node list must contain 0 and 1")
    return ts


def _divide(w_arr: np.ndarray, rho: np.ndarray) -> np.ndarray:
    if float(rho.min()) < DIVISION_FLOOR:
        raise DivisionFloor(
            f"path density {rho.min():.3e} below division floor {DIVISION_FLOOR:.0e}"
        )
    return w_arr / rho


def _ghost_pad(arr: np.ndarray, comp: int) -> np.ndarray:
    """One ghost layer per side: odd reflection along the component's own
    axis (the wall-normal velocity vanishes at the wall), even otherwise."""
    out = arr
    for ax in range(arr.ndim):
        first = np.take(out, [0], axis=ax)
        last = np.take(out, [-1], axis=ax)
        sign = -1.0 if ax == comp else 1.0
        out = np.concatenate([sign * first, out, sign * last], axis=ax)
    return out


def _sample_ghost(padded: np.ndarray, grid: Grid, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation on a ghost-padded array; padded nodes sit at
    (i - 1/2) h for i in 0..n+1, covering [-h/2, 1 + h/2]."""
    n, h = grid.n, grid.h
    g = np.clip(pts / h + 0.5, 0.0, float(n + 1))
    i0 = np.clip(np.floor(g).astype(np.intp), 0, n)
    fr = g - i0
    if grid.dim == 1:
        i = i0[:, 0]
        f = fr[:, 0]
        return padded[i] * (1.0 - f) + padded[i + 1] * f
    i, j = i0[:, 0], i0[:, 1]
    fx, fy = fr[:, 0], fr[:, 1]
    return (
        padded[i, j] * (1 - fx) * (1 - fy)
        + padded[i + 1, j] * fx * (1 - fy)
        + padded[i, j + 1] * (1 - fx) * fy
        + padded[i + 1, j + 1] * fx * fy
    )


@dataclass(frozen=True)
class TransportField:
    """Velocity slices xi(t_i, .) with linear interpolation between nodes."""

    path: ProbabilityPath
    t_nodes: np.ndarray
    slices: tuple[VectorField, ...]

    @property
    def grid(self) -> Grid:
        return self.path.grid

    def _bracket(self, t: float):
        j = int(np.searchsorted(self.t_nodes, t, side="right")) - 1
        j = min(max(j, 0), len(self.t_nodes) - 2)
        t0, t1 = self.t_nodes[j], self.t_nodes[j + 1]
        lam = (t - t0) / (t1 - t0)
        return j, float(np.clip(lam, 0.0, 1.0))

    def velocity(self, t: float) -> VectorField:
        """Slice at time t, linear in t between stored nodes."""
        j, lam = self._bracket(t)
        a = self.slices[j].as_array()
        b = self.slices[j + 1].as_array()
        return vector_field(self.grid, list((1.0 - lam) * a + lam * b))

    def _padded(self) -> np.ndarray:
        """Ghost-padded slices, cached: (nodes, dim, (n+2)^dim)."""
        cached = self.__dict__.get("_padded_slices")
        if cached is None:
            cached = np.stack(
                [
                    np.stack([_ghost_pad(sl.as_array()[c], c)
                              for c in range(self.grid.dim)])
                    for sl in self.slices
                ]
            )
            object.__setattr__(self, "_padded_slices", cached)
        return cached

    def velocity_at(self, t: float, points: np.ndarray) -> np.ndarray:
        """xi(t, points): linear blend in t, multilinear in space with
        zero-flux ghost reflection at the walls. Returns (N, dim)."""
        j, lam = self._bracket(t)
        padded = self._padded()
        blend = (1.0 - lam) * padded[j] + lam * padded[j + 1]
        pts = np.atleast_2d(points)
        out = np.empty((pts.shape[0], self.grid.dim))
        for c in range(self.grid.dim):
            out[:, c] = _sample_ghost(blend[c], self.grid, pts)
        return out

    def jacobian_slices(self) -> np.ndarray:
        """grad xi per node: array (nodes, dim, dim, *grid.shape); entry
        [k, a, c] is the a-derivative of component c at node k."""
        g = self.grid
        out = np.empty((len(self.t_nodes), g.dim, g.dim) + g.shape)
        for k, sl in enumerate(self.slices):
            for c, comp in enumerate(sl.components):
                gr = gradient(comp)
                for a in range(g.dim):
                    out[k, a, c] = gr.components[a].values
        return out


def linear_transport_field(w: FluxField, p: ProbabilityPath, t_nodes) -> TransportField:
    """Time-constant flux route: slice at t is w / rho_t pointwise."""
    if not isinstance(p, LinearPath):
        raise ValueError("the constant-flux route applies to linear paths only")
    if p.kappa_path <= 0:
        raise ValueError("path lower bound must be positive")
    ts = _as_nodes(t_nodes)
    warr = w.w.as_array()
    slices = []
    for t in ts:
        rho = p.density_values(float(t))
        slices.append(vector_field(p.grid, list(_divide(warr, rho))))
    return TransportField(path=p, t_nodes=ts, slices=tuple(slices))


def path_transport_field(
    p: ProbabilityPath,
    t_nodes,
    cg_tol: float = DEFAULT_CG_TOL,
    max_iter: int | None = None,
) -> TransportField:
    """Generic route: per node, solve div w = -rho_dot and divide by rho_t."""
    ts = _as_nodes(t_nodes)
    slices = []
    for t in ts:
        t = float(t)
        rd = p.rate(t)
        rhs = ScalarField(p.grid, -rd.rho_dot.values)
        try:
            pot = solve_neumann(NeumannProblem(rhs), cg_tol=cg_tol, max_iter=max_iter)
        except NumericalError as exc:
            raise type(exc)(f"at path node t={t}: {exc}") from exc
        warr = gradient(pot.u).as_array()
        rho = p.density_values(t)
        slices.append(vector_field(p.grid, list(_divide(warr, rho))))
    return TransportField(path=p, t_nodes=ts, slices=tuple(slices))


def continuity_residual(tf: TransportField, t: float) -> float:
    """Max-norm of  rho_dot + div(rho_t xi_t)  at time t.

    The rate is analytic, the divergence discrete, and xi interpolated
    linearly between slices; at a stored node the residual reduces to the
    spatial discretization error of the underlying solve.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must be strictly inside (0, 1)")
    p = tf.path
    rd = p.rate(t).rho_dot.values
    rho = p.density_values(t)
    xi = tf.velocity(t).as_array()
    flux = vector_field(tf.grid, list(rho * xi))
    return float(np.abs(rd + divergence(flux).values).max())
