import numpy as np
import pytest

from beckflow import (
    Grid,
    NeumannProblem,
    ScalarField,
    beckmann_objective,
    divergence,
    flux_from_potential,
    gaussian_bump,
    integrate,
    optimality_probe,
    solve_neumann,
    stream_perturbation,
    vector_field,
)

from conftest import fitted_order, smooth_pair


def solve_flux(grid, f_values, cg_tol=1e-11):
    f = ScalarField(grid, f_values)
    pot = solve_neumann(NeumannProblem(f), cg_tol=cg_tol)
    return flux_from_potential(pot, f), f


def cdf_at_nodes(values: np.ndarray, h: float) -> np.ndarray:
    """Antiderivative oracle: F(x_i) by midpoint cumsum up to each node."""
    csum = np.cumsum(values) * h
    return csum - 0.5 * h * values


class TestFluxFromPotential:
    def test_equal_densities_zero_flux(self, bump_pair_1d):
        g, rho_nu, _ = bump_pair_1d
        fl, _ = solve_flux(g, rho_nu.values - rho_nu.values)
        assert np.all(fl.w.as_array() == 0.0)
        assert fl.objective == 0.0

    def test_cdf_difference_oracle(self):
        # u'(x) = int_0^x (rho_mu - rho_nu), i.e. w = F_mu - F_nu
        errs = []
        for n in (64, 128, 256):
            g, rho_nu, rho_mu = smooth_pair(1, n)
            fl, _ = solve_flux(g, rho_mu.values - rho_nu.values)
            oracle = cdf_at_nodes(rho_mu.values, g.h) - cdf_at_nodes(rho_nu.values, g.h)
            errs.append(np.abs(fl.w.components[0].values - oracle).max())
        assert errs[0] <= 2e-3
        assert fitted_order((64, 128, 256), errs) >= 1.8

    def test_div_residual_order(self):
        errs = []
        for n in (32, 64, 128):
            g, rho_nu, rho_mu = smooth_pair(2, n)
            fl, _ = solve_flux(g, rho_nu.values - rho_mu.values)
            errs.append(fl.div_residual_inf)
        assert fitted_order((32, 64, 128), errs) == pytest.approx(2.0, abs=0.2)

    def test_boundary_flux_order(self):
        vals = []
        for n in (32, 64, 128):
            g, rho_nu, rho_mu = smooth_pair(1, n)
            fl, f = solve_flux(g, rho_nu.values - rho_mu.values)
            vals.append(fl.boundary_flux_inf)
            assert fl.boundary_flux_inf <= 10 * g.h**2 * np.abs(f.values).max()
        assert fitted_order((32, 64, 128), vals) >= 1.5

    def test_homogeneity(self, bump_pair_1d):
        g, rho_nu, rho_mu = bump_pair_1d
        base = rho_nu.values - rho_mu.values
        fl1, _ = solve_flux(g, base, cg_tol=1e-12)
        fl3, _ = solve_flux(g, 3.0 * base, cg_tol=1e-12)
        dev = np.abs(fl3.w.as_array() - 3.0 * fl1.w.as_array()).max()
        assert dev <= 1e-10


class TestObjective:
    def test_zero(self):
        g = Grid(2, 16)
        assert beckmann_objective(vector_field(g, [np.zeros(g.shape)] * 2)) == 0.0

    def test_unit_horizontal(self):
        g = Grid(2, 16)
        v = vector_field(g, [np.ones(g.shape), np.zeros(g.shape)])
        assert beckmann_objective(v) == pytest.approx(0.5, abs=1e-14)

    def test_manufactured_closed_form(self):
        # w = grad(-cos(pi x)/pi^2) = sin(pi x)/pi, J = 1/(4 pi^2)
        g = Grid(1, 128)
        x = g.meshgrid()[0]
        f = ScalarField(g, np.cos(np.pi * x))
        pot = solve_neumann(NeumannProblem(f), cg_tol=1e-12)
        fl = flux_from_potential(pot, f)
        assert fl.objective == pytest.approx(1.0 / (4 * np.pi**2), abs=1e-5)


class TestOptimality:
    def test_zero_perturbation_leaves_objective(self, bump_pair_2d):
        g, rho_nu, rho_mu = bump_pair_2d
        fl, f = solve_flux(g, rho_nu.values - rho_mu.values)
        v = stream_perturbation(g, np.zeros(g.shape))
        assert beckmann_objective(v) == 0.0
        warr = fl.w.as_array() + v.as_array()
        assert beckmann_objective(vector_field(g, list(warr))) == fl.objective

    def test_sin_squared_stream_orthogonality(self, bump_pair_2d):
        g, rho_nu, rho_mu = bump_pair_2d
        fl, f = solve_flux(g, rho_nu.values - rho_mu.values)
        x, y = g.meshgrid()
        psi = (np.sin(np.pi * x) * np.sin(np.pi * y)) ** 2
        v = stream_perturbation(g, psi)
        assert np.abs(divergence(v).values).max() <= 1e-10
        cross = g.h**2 * float(np.sum(fl.w.as_array() * v.as_array()))
        assert abs(cross) <= 1e-10
        jv = beckmann_objective(v)
        jwpv = beckmann_objective(vector_field(g, list(fl.w.as_array() + v.as_array())))
        assert jwpv - fl.objective == pytest.approx(jv, abs=1e-10)
        assert jv > 0

    def test_sixteen_seeded_trials(self):
        g, rho_nu, rho_mu = smooth_pair(2, 64)
        fl, f = solve_flux(g, rho_nu.values - rho_mu.values)
        report = optimality_probe(fl, f, trials=16, seed=7)
        assert report.min_margin > 0
        assert report.max_cross <= 1e-3
        for trial in report.trials:
            gain = trial.competitor_objective - report.base_objective
            assert gain >= trial.perturbation_objective - 1e-8
            # expansion identity J(w+v) = J(w) + J(v) + cross
            assert gain == pytest.approx(
                trial.perturbation_objective + trial.cross_term, abs=1e-12
            )
            # perturbed field stays within discretization error of the constraint
            assert abs(trial.div_deviation) <= 1e-9

    def test_requires_2d(self, bump_pair_1d):
        g, rho_nu, rho_mu = bump_pair_1d
        fl, f = solve_flux(g, rho_nu.values - rho_mu.values)
        with pytest.raises(ValueError):
            optimality_probe(fl, f, trials=1, seed=0)
