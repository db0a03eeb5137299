"""Probability paths t -> rho_t joining a source to a target density.

Three kinds:

* ``LinearPath``      rho_t = (1-t) rho_nu + t rho_mu, rate rho_mu - rho_nu.
* ``FisherRaoPath``   rho_t = Z_t^{-1} rho_nu^{1-t} rho_mu^t, the closed-form
  KL gradient flow; a linear interpolation of the Gibbs potentials.  Its rate
  is rho_t (L - m_t) with L = log(rho_mu / rho_nu) and m_t = int rho_t L, so
  the rate integrates to zero exactly as the Neumann solve requires.  The
  uncentered variant rho_t L is available behind a flag for comparison.
* ``TabulatedPath``   stored slices, linear in t, finite-difference rate;
  second class, kept honest by ``validate_path``.

All paths carry ``kappa_path``, a certified uniform-in-t positive lower
bound on the density.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .density import Density
from .errors import PathViolation
from .grid import Grid, ScalarField, integrate

MASS_TOL = 1e-8


@dataclass(frozen=True)
class PathDerivative:
    t: float
    rho_dot: ScalarField
    mass_defect: float


@dataclass(frozen=True)
class PathNodeCheck:
    t: float
    mass: float
    min_value: float
    mass_defect: float


@dataclass(frozen=True)
class PathReport:
    nodes: tuple[PathNodeCheck, ...]
    kappa_path: float  # observed min over the checked nodes


class ProbabilityPath:
    """Common requirements; subclasses fill in the density and its rate."""

    kind: str
    rho_nu: Density
    rho_mu: Density
    kappa_path: float

    @property
    def grid(self) -> Grid:
        return self.rho_nu.grid

    def _check_t(self, t: float) -> float:
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t={t} outside [0, 1]")
        return t

    def density_values(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def rate_values(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def at(self, t: float) -> Density:
        t = self._check_t(t)
        # endpoints return the stored arrays bitwise
        if t == 0.0:
            return self.rho_nu
        if t == 1.0:
            return self.rho_mu
        v = self.density_values(t)
        return Density(
            ScalarField(self.grid, v), kappa=float(v.min()), big_k=float(v.max())
        )

    def rate(self, t: float) -> PathDerivative:
        t = self._check_t(t)
        rd = self.rate_values(t)
        f = ScalarField(self.grid, rd)
        return PathDerivative(t=t, rho_dot=f, mass_defect=abs(integrate(f)))


@dataclass(frozen=True)
class LinearPath(ProbabilityPath):
    rho_nu: Density
    rho_mu: Density
    kind: str = field(default="linear", init=False)

    def __post_init__(self):
        if self.rho_nu.grid != self.rho_mu.grid:
            raise ValueError("endpoint densities live on different grids")

    @property
    def kappa_path(self) -> float:
        # convexity: the interpolant never dips below either endpoint bound
        return min(self.rho_nu.kappa, self.rho_mu.kappa)

    def density_values(self, t):
        return (1.0 - t) * self.rho_nu.values + t * self.rho_mu.values

    def rate_values(self, t):
        return self.rho_mu.values - self.rho_nu.values


@dataclass(frozen=True)
class FisherRaoPath(ProbabilityPath):
    rho_nu: Density
    rho_mu: Density
    centered_rate: bool = True
    kind: str = field(default="fisher-rao", init=False)

    def __post_init__(self):
        if self.rho_nu.grid != self.rho_mu.grid:
            raise ValueError("endpoint densities live on different grids")
        object.__setattr__(self, "_log_nu", np.log(self.rho_nu.values))
        object.__setattr__(self, "_log_mu", np.log(self.rho_mu.values))

    @property
    def kappa_path(self) -> float:
        # rho_t >= kappa / Z_t and Z_t <= K |Omega| with |Omega| = 1
        kap = min(self.rho_nu.kappa, self.rho_mu.kappa)
        big = max(self.rho_nu.big_k, self.rho_mu.big_k)
        return kap / big

    def _geometric(self, t):
        return np.exp((1.0 - t) * self._log_nu + t * self._log_mu)

    def density_values(self, t):
        geo = self._geometric(t)
        z = self.grid.h**self.grid.dim * float(geo.sum())
        return geo / z

    def rate_values(self, t):
        rho = self.density_values(t)
        ell = self._log_mu - self._log_nu
        if not self.centered_rate:
            return rho * ell
        m_t = self.grid.h**self.grid.dim * float((rho * ell).sum())
        return rho * (ell - m_t)

    def log_ratio(self) -> np.ndarray:
        """L = log(rho_mu / rho_nu) on the grid."""
        return self._log_mu - self._log_nu


@dataclass(frozen=True)
class TabulatedPath(ProbabilityPath):
    """Stored slices, held as raw fields so validation can flag bad data."""

    t_grid: tuple[float, ...]
    slices: tuple[ScalarField, ...]
    kind: str = field(default="tabulated", init=False)

    def __post_init__(self):
        ts = np.asarray(self.t_grid, dtype=float)
        if len(ts) < 2 or ts[0] != 0.0 or ts[-1] != 1.0 or np.any(np.diff(ts) <= 0):
            raise ValueError("t grid must increase strictly from 0 to 1")
        if len(self.slices) != len(ts):
            raise ValueError("one slice per t node required")
        g = self.slices[0].grid
        if any(s.grid != g for s in self.slices):
            raise ValueError("slices live on different grids")

    @property
    def rho_nu(self) -> Density:
        v = self.slices[0].values
        return Density(self.slices[0], kappa=float(v.min()), big_k=float(v.max()))

    @property
    def rho_mu(self) -> Density:
        v = self.slices[-1].values
        return Density(self.slices[-1], kappa=float(v.min()), big_k=float(v.max()))

    @property
    def kappa_path(self) -> float:
        return min(float(s.values.min()) for s in self.slices)

    def _bracket(self, t):
        j = bisect.bisect_right(self.t_grid, t) - 1
        return min(max(j, 0), len(self.t_grid) - 2)

    def density_values(self, t):
        j = self._bracket(t)
        t0, t1 = self.t_grid[j], self.t_grid[j + 1]
        lam = (t - t0) / (t1 - t0)
        return (1.0 - lam) * self.slices[j].values + lam * self.slices[j + 1].values

    def rate_values(self, t):
        # slope of the interpolant; central average at interior nodes
        j = self._bracket(t)
        t0, t1 = self.t_grid[j], self.t_grid[j + 1]
        slope = (self.slices[j + 1].values - self.slices[j].values) / (t1 - t0)
        if t == t0 and 0 < j:
            tm = self.t_grid[j - 1]
            prev = (self.slices[j].values - self.slices[j - 1].values) / (t0 - tm)
            slope = 0.5 * (slope + prev)
        return slope


def tabulated_from_densities(t_grid, densities) -> TabulatedPath:
    return TabulatedPath(
        t_grid=tuple(float(t) for t in t_grid),
        slices=tuple(d.field for d in densities),
    )


def eval_path(p: ProbabilityPath, t: float) -> Density:
    """Density at time t; endpoints are returned bitwise."""
    return p.at(t)


def path_derivative(p: ProbabilityPath, t: float) -> PathDerivative:
    """Analytic time derivative of the path at t (finite differences for
    tabulated paths), with its quadrature mass defect."""
    return p.rate(t)


def validate_path(p: ProbabilityPath, t_nodes) -> PathReport:
    """Positivity / unit-mass / mean-free-rate audit at the given nodes.

    Raises :class:`PathViolation` on the first node whose mass is off by more
    than 1e-8 or whose minimum is not positive.
    """
    checks = []
    kappa_obs = np.inf
    for t in t_nodes:
        t = p._check_t(t)
        v = p.density_values(t)
        mass = p.grid.h**p.grid.dim * float(v.sum())
        mn = float(v.min())
        if abs(mass - 1.0) > MASS_TOL:
            raise PathViolation(f"mass {mass} off by more than {MASS_TOL} at t={t}")
        if mn <= 0.0:
            raise PathViolation(f"nonpositive density minimum {mn} at t={t}")
        defect = p.rate(t).mass_defect
        checks.append(PathNodeCheck(t=t, mass=mass, min_value=mn, mass_defect=defect))
        kappa_obs = min(kappa_obs, mn)
    return PathReport(nodes=tuple(checks), kappa_path=float(kappa_obs))
