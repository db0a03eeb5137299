"""Flow maps of transport fields, their Jacobians, and density pushforward.

Trajectories follow the classical fourth-order Runge-Kutta scheme.  Steps are
laid out segment by segment between the transport field's time nodes (the
velocity is smooth inside a segment but only continuous across nodes, and a
step that straddled a node would drop the order), with the per-segment step
close to the nominal 1/steps.  Jacobians evolve along the same stages via

    d/dt (grad Phi) = grad xi(t, Phi) . grad Phi,

with grad xi read from per-slice gradient grids by the same interpolation as
the velocity.  Any sub-step that leaves the box is projected back onto it and
counted; projection events are diagnostics, not failures.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .density import Density
from .errors import SingularJacobian
from .grid import Grid, ScalarField, integrate, sample_at
from .transport import TransportField

DET_FLOOR = 1e-12
EXACT_HIT = 1e-13


@dataclass(frozen=True)
class AnalyticVelocity:
    """Manufactured smooth velocity, duck-typed like a TransportField.

    Used by time-order studies: grid-sampled fields are only piecewise
    multilinear in space, which caps the observable time order of the
    integrator at two; an analytic field exposes the full fourth order.
    """

    grid: Grid
    fn: Callable[[float, np.ndarray], np.ndarray]
    t_nodes: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))

    def velocity_at(self, t: float, points: np.ndarray) -> np.ndarray:
        return self.fn(float(t), np.atleast_2d(np.asarray(points, dtype=float)))


class TransportError(NamedTuple):
    l1: float
    linf: float


@dataclass(frozen=True)
class FlowMap:
    """Particle positions (and optionally Jacobians) at requested times."""

    grid: Grid
    starts: np.ndarray                       # (N, dim)
    t0: float
    t1: float
    steps: int
    record_ts: tuple[float, ...]
    positions_at: dict[float, np.ndarray]    # t -> (N, dim)
    projection_events: int
    jacobians_at: dict[float, np.ndarray] | None = None  # t -> (N, dim, dim)

    def positions(self, t: float) -> np.ndarray:
        return self.positions_at[float(t)]

    def jacobians(self, t: float) -> np.ndarray:
        if self.jacobians_at is None:
            raise ValueError("jacobians not integrated; run integrate_jacobians")
        return self.jacobians_at[float(t)]


def _segments(tf: TransportField, t0: float, t1: float, steps: int, record_ts):
    """Sub-intervals whose boundaries include the field nodes and all record
    times, each with enough uniform sub-steps to keep the step near 1/steps."""
    cuts = set([t0, t1])
    for t in tf.t_nodes:
        if t0 < t < t1:
            cuts.add(float(t))
    for t in record_ts:
        if t0 < t < t1:
            cuts.add(float(t))
    bounds = sorted(cuts)
    nominal = (t1 - t0) / steps
    segs = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        m = max(1, int(np.ceil((b - a) / nominal - 1e-12)))
        segs.append((a, b, m))
    return segs


def _project(pos: np.ndarray) -> tuple[np.ndarray, int]:
    clipped = np.clip(pos, 0.0, 1.0)
    events = int(np.sum(np.any(clipped != pos, axis=1)))
    return clipped, events


def _advance(tf: TransportField, pos, jac, t, dt, grad_slices):
    """One RK4 step of positions (and Jacobians when jac is not None)."""

    def vel(tt, pp):
        return tf.velocity_at(tt, pp)

    def gxi(tt, pp):
        # grad xi at (tt, pp): blend the per-node gradient grids in t, then
        # interpolate each entry at the particle positions
        j = int(np.searchsorted(tf.t_nodes, tt, side="right")) - 1
        j = min(max(j, 0), len(tf.t_nodes) - 2)
        ta, tb = tf.t_nodes[j], tf.t_nodes[j + 1]
        lam = float(np.clip((tt - ta) / (tb - ta), 0.0, 1.0))
        blend = (1.0 - lam) * grad_slices[j] + lam * grad_slices[j + 1]
        d = tf.grid.dim
        out = np.empty((pp.shape[0], d, d))
        for a in range(d):
            for c in range(d):
                out[:, a, c] = sample_at(blend[a, c], tf.grid, pp)
        return out

    k1 = vel(t, pos)
    p2 = pos + 0.5 * dt * k1
    k2 = vel(t + 0.5 * dt, p2)
    p3 = pos + 0.5 * dt * k2
    k3 = vel(t + 0.5 * dt, p3)
    p4 = pos + dt * k3
    k4 = vel(t + dt, p4)
    new_pos = pos + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    new_jac = None
    if jac is not None:
        # J[n, i, j] = d Phi_i / d x_j and G[n, a, i] = d xi_i / d x_a, so the
        # variational rhs is (dJ)[i, j] = sum_a G[a, i] J[a, j]
        g1 = gxi(t, pos)
        j1 = np.einsum("nai,naj->nij", g1, jac)
        g2 = gxi(t + 0.5 * dt, p2)
        j2 = np.einsum("nai,naj->nij", g2, jac + 0.5 * dt * j1)
        g3 = gxi(t + 0.5 * dt, p3)
        j3 = np.einsum("nai,naj->nij", g3, jac + 0.5 * dt * j2)
        g4 = gxi(t + dt, p4)
        j4 = np.einsum("nai,naj->nij", g4, jac + dt * j3)
        new_jac = jac + (dt / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4)
    return new_pos, new_jac


def _run(tf: TransportField, starts, steps, t0, t1, record_ts, with_jacobians):
    grid = tf.grid
    pos = np.atleast_2d(np.asarray(starts, dtype=float)).copy()
    if pos.shape[1] != grid.dim:
        raise ValueError(f"start points must have {grid.dim} coordinates")
    jac = None
    grad_slices = None
    if with_jacobians:
        jac = np.tile(np.eye(grid.dim), (pos.shape[0], 1, 1))
        grad_slices = tf.jacobian_slices()

    record = sorted(set(float(t) for t in record_ts) | {float(t1)})
    if record[0] < t0 or record[-1] > t1:
        raise ValueError("record times must lie within [t0, t1]")
    positions_at: dict[float, np.ndarray] = {}
    jacobians_at: dict[float, np.ndarray] = {}
    events = 0
    t = t0
    if t0 in record:
        positions_at[t0] = pos.copy()
        if with_jacobians:
            jacobians_at[t0] = jac.copy()
    for a, b, m in _segments(tf, t0, t1, steps, record):
        dt = (b - a) / m
        for k in range(m):
            t = a + k * dt
            pos, jac = _advance(tf, pos, jac, t, dt, grad_slices)
            pos, ev = _project(pos)
            events += ev
            if with_jacobians:
                dets = np.linalg.det(jac)
                if float(dets.min()) <= DET_FLOOR:
                    raise SingularJacobian(
                        f"det(grad Phi) reached {dets.min():.3e} at t={a + (k + 1) * dt:.4f}; "
                        "dynamics under-resolved"
                    )
        t = b
        if t in record:
            positions_at[t] = pos.copy()
            if with_jacobians:
                jacobians_at[t] = jac.copy()
    return positions_at, (jacobians_at if with_jacobians else None), events


def integrate_flow(
    tf: TransportField,
    starts: np.ndarray,
    steps: int,
    t0: float = 0.0,
    t1: float = 1.0,
    record_ts=(),
) -> FlowMap:
    """Integrate particle trajectories of the transport field.

    ``starts`` is (N, dim); positions are recorded at ``record_ts`` and at
    ``t1``.  Requires ``steps >= 8``.
    """
    if steps < 8:
        raise ValueError("need at least 8 steps")
    if not 0.0 <= t0 < t1 <= 1.0:
        raise ValueError("need 0 <= t0 < t1 <= 1")
    positions_at, _, events = _run(tf, starts, steps, t0, t1, record_ts, False)
    return FlowMap(
        grid=tf.grid,
        starts=np.atleast_2d(np.asarray(starts, dtype=float)),
        t0=t0,
        t1=t1,
        steps=steps,
        record_ts=tuple(sorted(set(float(t) for t in record_ts) | {float(t1)})),
        positions_at=positions_at,
        projection_events=events,
    )


def integrate_jacobians(fm: FlowMap, tf: TransportField) -> FlowMap:
    """Re-run the flow with the variational system attached.

    The scheme and step layout are identical to the position-only pass, so
    the recorded positions are reproduced bitwise; raises
    :class:`SingularJacobian` if a determinant falls below 1e-12.
    """
    positions_at, jacobians_at, events = _run(
        tf, fm.starts, fm.steps, fm.t0, fm.t1, fm.record_ts, True
    )
    return replace(fm, positions_at=positions_at, jacobians_at=jacobians_at,
                   projection_events=events)


@dataclass(frozen=True)
class Pushforward:
    field: ScalarField
    mass_defect: float       # |mass - 1| before renormalization
    filled_nodes: int        # nodes that received no particle and were infilled


def node_seeded_flow(tf: TransportField, steps: int, record_ts=()) -> FlowMap:
    """Flow map started on every grid node, Jacobians included."""
    fm = integrate_flow(tf, tf.grid.points(), steps, record_ts=record_ts)
    return integrate_jacobians(fm, tf)


def pushforward_density(fm: FlowMap, rho_nu: Density, t: float = 1.0) -> Pushforward:
    """Transport rho_nu through the flow and resample it on the grid.

    Each node-seeded particle carries the value rho_nu(x0) / det(grad Phi)
    to its transported position; values scatter to the corners of the
    containing cell with inverse-distance weights.  Nodes left empty are
    filled from their neighbors, the pre-normalization mass defect is
    recorded, and the field is rescaled to unit mass.
    """
    grid = fm.grid
    if fm.jacobians_at is None:
        raise ValueError("pushforward needs jacobians; run integrate_jacobians")
    if fm.starts.shape[0] != grid.size:
        raise ValueError("pushforward requires particles seeded on all grid nodes")
    pos = fm.positions(t)
    dets = np.linalg.det(fm.jacobians(t))
    vals = rho_nu.values.ravel() / dets

    n, h = grid.n, grid.h
    g = np.clip(pos / h - 0.5, 0.0, n - 1.0)
    i0 = np.clip(np.floor(g).astype(np.intp), 0, n - 2)
    num = np.zeros(grid.shape)
    den = np.zeros(grid.shape)
    corners = [(0,), (1,)] if grid.dim == 1 else [(0, 0), (1, 0), (0, 1), (1, 1)]
    for corner in corners:
        idx = tuple(i0[:, a] + corner[a] for a in range(grid.dim))
        node_xy = np.stack([(idx[a] + 0.5) * h for a in range(grid.dim)], axis=-1)
        dist = np.linalg.norm(pos - node_xy, axis=-1)
        wgt = 1.0 / (dist + EXACT_HIT)
        np.add.at(num, idx, wgt * vals)
        np.add.at(den, idx, wgt)

    out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    filled = int(np.sum(den == 0))
    # dilate neighbor averages into empty nodes until none remain
    guard = 0
    while np.any(den == 0):
        guard += 1
        if guard > n:
            raise RuntimeError("scatter infill failed to converge")
        empty = den == 0
        acc = np.zeros(grid.shape)
        cnt = np.zeros(grid.shape)
        for ax in range(grid.dim):
            for shift in (1, -1):
                nb_val = np.roll(out, shift, axis=ax)
                nb_ok = np.roll(den > 0, shift, axis=ax)
                edge = [slice(None)] * grid.dim
                edge[ax] = 0 if shift == 1 else -1
                nb_ok[tuple(edge)] = False
                acc += np.where(nb_ok, nb_val, 0.0)
                cnt += nb_ok
        fill = empty & (cnt > 0)
        out[fill] = acc[fill] / cnt[fill]
        den[fill] = 1.0

    mass = grid.h**grid.dim * float(out.sum())
    defect = abs(mass - 1.0)
    out = out / mass
    return Pushforward(field=ScalarField(grid, out), mass_defect=defect, filled_nodes=filled)


def transport_error(pushed: ScalarField, target: Density) -> TransportError:
    """L1 and max-norm distance between a pushforward and its target."""
    if pushed.grid != target.grid:
        raise ValueError("fields live on different grids")
    diff = pushed.values - target.values
    l1 = integrate(ScalarField(pushed.grid, np.abs(diff)))
    return TransportError(l1=l1, linf=float(np.abs(diff).max()))
