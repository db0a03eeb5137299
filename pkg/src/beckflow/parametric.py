"""Parameter-dependent flux problems and Hölder stability in the parameter.

A family maps prompt parameters theta in (0,1)^q, q in {1, 2}, to target
densities; the source is fixed.  Each node solves its own mean-zero Neumann
problem, and stability is probed empirically through ratios

    ||u(theta) - u(vartheta)||_{C^{min(k+2,2),alpha}}
    ---------------------------------------------------
    ||f(theta) - f(vartheta)||_{C^{0,alpha}}

over node pairs, which grid-stable elliptic regularity keeps bounded.

Joint (theta, x) Hölder norms treat the tensor tabulation as one
(q+d)-dimensional grid; the Banach-valued two-stage norm takes an inner
spatial Hölder norm per node and an outer quotient over node pairs, with
parameter derivatives approximated by node differences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .density import Density, HolderEstimate, holder_norm_estimate, holder_norm_nd
from .errors import NumericalError
from .grid import Grid, ScalarField, integrate
from .poisson import DEFAULT_CG_TOL, NeumannProblem, Potential, solve_neumann

SKIP_DEN = 1e-12


def _as_theta(theta) -> tuple[float, ...]:
    t = np.atleast_1d(np.asarray(theta, dtype=float))
    return tuple(float(v) for v in t)


@dataclass(frozen=True)
class ParametricFamily:
    """theta-indexed target densities over a fixed source."""

    theta_nodes: tuple[tuple[float, ...], ...]
    rho_nu: Density
    rho_mu_of: Callable[[tuple[float, ...]], Density]

    def __post_init__(self):
        nodes = tuple(_as_theta(t) for t in self.theta_nodes)
        if not nodes:
            raise ValueError("need at least one theta node")
        q = len(nodes[0])
        if q not in (1, 2) or any(len(t) != q for t in nodes):
            raise ValueError("theta nodes must share dimension q in {1, 2}")
        for t in nodes:
            if any(not 0.0 <= c <= 1.0 for c in t):
                raise ValueError(f"theta node {t} outside the unit cube")
        object.__setattr__(self, "theta_nodes", nodes)

    @property
    def q(self) -> int:
        return len(self.theta_nodes[0])

    @property
    def grid(self) -> Grid:
        return self.rho_nu.grid

    def target(self, theta) -> Density:
        d = self.rho_mu_of(_as_theta(theta))
        if d.grid != self.grid:
            raise ValueError("family target lives on a different grid")
        return d

    def rhs(self, theta) -> ScalarField:
        """f(theta) = rho_mu(theta) - rho_nu; mean-free by unit masses."""
        return ScalarField(self.grid, self.target(theta).values - self.rho_nu.values)

    def validate(self) -> None:
        for t in self.theta_nodes:
            f = self.rhs(t)  # target() already enforces Density validity
            if abs(integrate(f)) > 1e-10:
                raise ValueError(f"family rhs at theta={t} is not mean-free")


def solve_family(
    fam: ParametricFamily,
    cg_tol: float = DEFAULT_CG_TOL,
    max_iter: int | None = None,
) -> dict[tuple[float, ...], Potential]:
    """One mean-zero Neumann solve per theta node, keyed by node."""
    fam.validate()
    out: dict[tuple[float, ...], Potential] = {}
    for theta in fam.theta_nodes:
        try:
            out[theta] = solve_neumann(
                NeumannProblem(fam.rhs(theta)), cg_tol=cg_tol, max_iter=max_iter
            )
        except NumericalError as exc:
            raise type(exc)(f"at theta={theta}: {exc}") from exc
    return out


@dataclass(frozen=True)
class PairRatio:
    theta: tuple[float, ...]
    vartheta: tuple[float, ...]
    num: float
    den: float
    ratio: float


@dataclass(frozen=True)
class StabilityReport:
    pairs: tuple[PairRatio, ...]
    beta: float
    max_ratio: float | None
    skipped: int
    k: int
    alpha: float


def stability_ratios(
    fam: ParametricFamily,
    solutions: dict[tuple[float, ...], Potential],
    k: int,
    alpha: float,
    beta: float,
    pair_budget: int = 1 << 22,
) -> StabilityReport:
    """Empirical elliptic-stability ratios over all node pairs.

    Pairs whose data difference has norm below 1e-12 are skipped and counted
    (a constant family skips everything).
    """
    nodes = fam.theta_nodes
    if len(nodes) < 2:
        raise ValueError("need at least two theta nodes")
    k_eff = min(k + 2, 2)
    pairs = []
    skipped = 0
    for a, b in itertools.combinations(nodes, 2):
        fdiff = ScalarField(fam.grid, fam.rhs(a).values - fam.rhs(b).values)
        den = holder_norm_estimate(fdiff, 0, alpha, pair_budget).norm
        if den < SKIP_DEN:
            skipped += 1
            continue
        udiff = ScalarField(fam.grid, solutions[a].u.values - solutions[b].u.values)
        num = holder_norm_estimate(udiff, k_eff, alpha, pair_budget).norm
        pairs.append(PairRatio(theta=a, vartheta=b, num=num, den=den, ratio=num / den))
    max_ratio = max((p.ratio for p in pairs), default=None)
    return StabilityReport(
        pairs=tuple(pairs), beta=beta, max_ratio=max_ratio, skipped=skipped,
        k=k, alpha=alpha,
    )


# ---------------------------------------------------------------------------
# joint and Banach-valued Hölder estimation on tensor tabulations
# ---------------------------------------------------------------------------


def joint_holder_estimate(
    values: np.ndarray,
    theta_axes: list[np.ndarray],
    grid: Grid,
    k: int,
    alpha: float,
    pair_budget: int,
    seed: int = 0,
) -> HolderEstimate:
    """C^{k,alpha} norm of a field tabulated on theta-axes x grid.

    The tabulation is treated as a single (q+d)-dimensional grid with the
    Euclidean metric on (theta, x); mixed derivatives enter for k = 1.
    """
    coords = [np.asarray(a, dtype=float) for a in theta_axes]
    coords += [grid.axis() for _ in range(grid.dim)]
    expected = tuple(len(c) for c in coords)
    if values.shape != expected:
        raise ValueError(f"tabulation shape {values.shape} != axes {expected}")
    return holder_norm_nd(values, coords, k, alpha, pair_budget, seed=seed)


def banach_valued_holder(
    values: np.ndarray,
    theta_axes: list[np.ndarray],
    grid: Grid,
    ell: int,
    beta: float,
    k: int,
    alpha: float,
    pair_budget: int,
    seed: int = 0,
) -> float:
    """Two-stage norm of C^{ell,beta}(Theta; C^{k,alpha}(Omega)) type.

    Inner spatial Hölder norm per theta node; parameter derivatives up to
    order ``ell`` by node finite differences; outer beta-quotient over node
    pairs of the top parameter derivative.
    """
    q = len(theta_axes)
    coords = [np.asarray(a, dtype=float) for a in theta_axes]
    spatial: list[np.ndarray] = [grid.axis() for _ in range(grid.dim)]

    def spatial_norm(block: np.ndarray) -> float:
        return holder_norm_nd(block, spatial, k, alpha, pair_budget, seed=seed).norm

    def theta_derivs(order):
        out = []
        for beta_idx in itertools.combinations_with_replacement(range(q), order):
            d = values
            for ax in beta_idx:
                d = np.gradient(d, coords[ax], axis=ax, edge_order=2)
            out.append(d)
        return out

    total_sup = 0.0
    top = []
    for order in range(ell + 1):
        for d in theta_derivs(order):
            flatt = d.reshape((-1,) + grid.shape)
            total_sup = max(total_sup, max(spatial_norm(b) for b in flatt))
            if order == ell:
                top.append(d)

    # outer Hölder quotient of the order-ell derivative over theta pairs
    mesh = np.meshgrid(*coords, indexing="ij")
    tpts = np.stack([m.ravel() for m in mesh], axis=-1)
    quot = 0.0
    for d in top:
        flatt = d.reshape((-1,) + grid.shape)
        m = flatt.shape[0]
        for i in range(m):
            for j in range(i + 1, m):
                dist = float(np.linalg.norm(tpts[i] - tpts[j]))
                quot = max(quot, spatial_norm(flatt[i] - flatt[j]) / dist**beta)
    return total_sup + quot
