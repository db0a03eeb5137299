import numpy as np
import pytest

from beckflow import (
    Grid,
    FisherRaoPath,
    LinearPath,
    NeumannProblem,
    ScalarField,
    SingularJacobian,
    TransportField,
    chebyshev_nodes,
    eval_path,
    flux_from_potential,
    gaussian_bump,
    integrate_flow,
    integrate_jacobians,
    linear_transport_field,
    node_seeded_flow,
    path_transport_field,
    pushforward_density,
    sample_at,
    solve_neumann,
    transport_error,
    vector_field,
)

from conftest import smooth_pair


def linear_pipeline(d, n, t_node_count=65, cg_tol=1e-11):
    g, rho_nu, rho_mu = smooth_pair(d, n)
    p = LinearPath(rho_nu, rho_mu)
    rhs = ScalarField(g, rho_nu.values - rho_mu.values)
    pot = solve_neumann(NeumannProblem(rhs), cg_tol=cg_tol)
    fl = flux_from_potential(pot, rhs)
    tf = linear_transport_field(fl, p, chebyshev_nodes(t_node_count))
    return g, p, tf


def zero_field(g):
    uniform = gaussian_bump(g, [0.5] * g.dim, sigma=1e3)
    p = LinearPath(uniform, uniform)
    zero = vector_field(g, [np.zeros(g.shape)] * g.dim)
    return p, TransportField(path=p, t_nodes=np.array([0.0, 1.0]), slices=(zero, zero))


class TestIdentityFlow:
    def test_zero_field_is_identity(self):
        g = Grid(2, 16)
        p, tf = zero_field(g)
        fm = node_seeded_flow(tf, steps=16)
        assert np.array_equal(fm.positions(1.0), g.points())
        assert fm.projection_events == 0
        assert np.abs(fm.jacobians(1.0) - np.eye(2)).max() == 0.0

    def test_equal_endpoints_identity(self, bump_pair_1d):
        g, rho_nu, _ = bump_pair_1d
        p = LinearPath(rho_nu, rho_nu)
        rhs = ScalarField(g, np.zeros(g.shape))
        fl = flux_from_potential(solve_neumann(NeumannProblem(rhs)), rhs)
        tf = linear_transport_field(fl, p, [0.0, 0.5, 1.0])
        fm = integrate_flow(tf, g.points(), steps=32)
        assert np.abs(fm.positions(1.0) - g.points()).max() <= 1e-12

    def test_pushforward_roundtrip(self, bump_pair_1d):
        g, rho_nu, _ = bump_pair_1d
        p, tf = zero_field(g)
        fm = node_seeded_flow(tf, steps=8)
        push = pushforward_density(fm, rho_nu)
        assert transport_error(push.field, rho_nu).l1 <= 1e-10
        assert push.mass_defect <= 1e-10


class TestTrajectoryAccuracy:
    def test_endpoint_against_refined_reference(self):
        g, p, tf = linear_pipeline(1, 128)
        starts = g.points()
        fm = integrate_flow(tf, starts, steps=256)
        ref = integrate_flow(tf, starts, steps=2560)
        assert np.abs(fm.positions(1.0) - ref.positions(1.0)).max() <= 1e-6

    def test_semigroup_composition(self):
        g, p, tf = linear_pipeline(1, 128)
        starts = g.points()
        whole = integrate_flow(tf, starts, steps=256)
        first = integrate_flow(tf, starts, steps=128, t0=0.0, t1=0.5)
        second = integrate_flow(tf, first.positions(0.5), steps=128, t0=0.5, t1=1.0)
        dev = np.abs(second.positions(1.0) - whole.positions(1.0)).max()
        assert dev <= 5e-6

    def test_time_step_guard(self):
        g, p, tf = linear_pipeline(1, 32)
        with pytest.raises(ValueError):
            integrate_flow(tf, g.points(), steps=4)

    def test_record_window_guard(self):
        g, p, tf = linear_pipeline(1, 32)
        with pytest.raises(ValueError):
            integrate_flow(tf, g.points(), steps=16, t0=0.5, record_ts=[0.25])


class TestJacobians:
    def test_matches_flow_differences(self):
        # interior comparison: in the wall half-cells the ghost-reflected
        # interpolant and the grid gradient legitimately differ
        gaps = []
        for n, steps in ((64, 128), (128, 256)):
            g, p, tf = linear_pipeline(1, n)
            fm = node_seeded_flow(tf, steps=steps)
            pos = fm.positions(1.0)[:, 0]
            jac = fm.jacobians(1.0)[:, 0, 0]
            fd = np.gradient(pos, g.axis(), edge_order=2)
            m = max(2, n // 32)
            gaps.append(np.abs(jac - fd)[m:-m].max())
        assert gaps[0] <= 0.15
        assert gaps[1] <= 0.05
        assert gaps[1] <= 0.5 * gaps[0]

    def test_mass_conservation_along_trajectories(self):
        # rho_t(Phi) det(grad Phi) = rho_nu pointwise
        devs = []
        for n, steps in ((64, 128), (128, 256)):
            g, p, tf = linear_pipeline(1, n)
            fm = node_seeded_flow(tf, steps=steps)
            jac = fm.jacobians(1.0)[:, 0, 0]
            rho1 = sample_at(p.rho_mu.values, g, fm.positions(1.0))
            devs.append(np.abs(rho1 * jac / p.rho_nu.values.ravel() - 1.0).max())
        assert devs[0] <= 0.08
        assert devs[1] <= 0.02
        assert devs[1] < devs[0]

    def test_determinants_stay_positive(self):
        g, p, tf = linear_pipeline(2, 32, t_node_count=33)
        fm = node_seeded_flow(tf, steps=64, record_ts=[0.5])
        for t in (0.5, 1.0):
            assert np.linalg.det(fm.jacobians(t)).min() > 0

    def test_singular_jacobian_detected(self):
        # strongly compressive synthetic field: J ~ exp(-40 t) underflows the
        # determinant floor before t = 1
        g = Grid(1, 16)
        uniform = gaussian_bump(g, 0.5, sigma=1e3)
        p = LinearPath(uniform, uniform)
        x = g.axis()
        squeeze = vector_field(g, [-40.0 * (x - 0.5)])
        tf = TransportField(path=p, t_nodes=np.array([0.0, 1.0]),
                            slices=(squeeze, squeeze))
        fm = integrate_flow(tf, g.points(), steps=64)
        with pytest.raises(SingularJacobian):
            integrate_jacobians(fm, tf)

    def test_requires_jacobians_for_pushforward(self):
        g, p, tf = linear_pipeline(1, 32)
        fm = integrate_flow(tf, g.points(), steps=16)
        with pytest.raises(ValueError):
            pushforward_density(fm, p.rho_nu)

    def test_requires_node_seeding(self):
        g, p, tf = linear_pipeline(1, 32)
        fm = integrate_flow(tf, g.points()[:5], steps=16)
        fm = integrate_jacobians(fm, tf)
        with pytest.raises(ValueError):
            pushforward_density(fm, p.rho_nu)


class TestTransportCorrectness:
    def test_l1_decreases_under_joint_refinement(self):
        results = {}
        for n, steps in ((32, 64), (64, 128), (128, 256)):
            g, p, tf = linear_pipeline(1, n)
            fm = node_seeded_flow(tf, steps=steps)
            push = pushforward_density(fm, p.rho_nu)
            results[n] = (transport_error(push.field, p.rho_mu).l1,
                          push.mass_defect, fm.projection_events)
        l1s = [results[n][0] for n in (32, 64, 128)]
        assert l1s[0] <= 0.06
        assert l1s[1] <= 0.02 and l1s[1] <= 0.7 * l1s[0]
        assert l1s[2] <= 0.008 and l1s[2] <= 0.7 * l1s[1]
        for n in (64, 128):
            l1, defect, events = results[n]
            assert defect <= 0.01
            assert events == 0
        assert results[128][1] < results[64][1]

    def test_fisher_rao_mid_path_consistency(self):
        g, rho_nu, rho_mu = smooth_pair(1, 64)
        p = FisherRaoPath(rho_nu, rho_mu)
        tf = path_transport_field(p, chebyshev_nodes(33))
        fm = node_seeded_flow(tf, steps=128, record_ts=[0.5])
        tol_end = 0.02
        end = transport_error(pushforward_density(fm, rho_nu, t=1.0).field,
                              eval_path(p, 1.0))
        mid = transport_error(pushforward_density(fm, rho_nu, t=0.5).field,
                              eval_path(p, 0.5))
        assert end.l1 <= tol_end
        assert mid.l1 <= tol_end
        assert fm.projection_events == 0

    def test_two_dimensional_pipeline(self):
        g, p, tf = linear_pipeline(2, 32, t_node_count=33)
        fm = node_seeded_flow(tf, steps=64)
        push = pushforward_density(fm, p.rho_nu)
        err = transport_error(push.field, p.rho_mu)
        assert err.l1 <= 0.06
        assert push.mass_defect <= 0.01
        assert fm.projection_events == 0


class TestTransportError:
    def test_identical_fields(self, bump_pair_1d):
        g, rho_nu, _ = bump_pair_1d
        err = transport_error(rho_nu.field, rho_nu)
        assert err == (0.0, 0.0)

    def test_cosine_perturbation_closed_form(self):
        # L1 of 0.1 cos(2 pi x) is 0.2 / pi
        g = Grid(1, 128)
        uniform = gaussian_bump(g, 0.5, sigma=1e3)
        pert = ScalarField(g, uniform.values + 0.1 * np.cos(2 * np.pi * g.axis()))
        err = transport_error(pert, uniform)
        assert err.l1 == pytest.approx(0.2 / np.pi, abs=1e-4)
