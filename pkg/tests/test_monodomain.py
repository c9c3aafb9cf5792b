import numpy as np
import pytest
import scipy.sparse as sp

from cardiowave import analytic as an
from cardiowave.ionic import IonicModel, create_model
from cardiowave.mesh import DiffusionSpec, line_mesh, uniform_fiber_frame
from cardiowave.monodomain import (ActivationTracker, MonodomainConfig,
                                   MonodomainSolver, ProbeSet, SimulationError,
                                   lumped_l2_norm)
from cardiowave.stimulus import Interval, Stimulus


class Quiescent(IonicModel):
    """No transmembrane current; used to isolate the diffusion operator."""

    def i_ion(self, V, W=None):
        return np.zeros_like(V)

    def i_ion_partials(self, V, W=None):
        return np.zeros_like(V), np.zeros((0, len(V)))


class LinearDecay(IonicModel):
    """i_ion = V so that a single node obeys dV/dt = -V."""

    def i_ion(self, V, W=None):
        return np.asarray(V, dtype=float)

    def i_ion_partials(self, V, W=None):
        return np.ones_like(V), np.zeros((0, len(V)))


def single_node_solver(model, cfg):
    one = sp.csr_matrix(np.array([[1.0]]))
    zero = sp.csr_matrix((1, 1))
    return MonodomainSolver.from_operators(one, np.array([1.0]), zero, model, cfg)


class TestReactionSubstep:
    def test_stateless_model_keeps_empty_states(self):
        cfg = MonodomainConfig(dt=0.1, t_end=1.0)
        s = single_node_solver(create_model("McKean"), cfg)
        W = s.reaction_substep(s.state, 0.1, order=1)
        assert W.shape == (0, 1)

    def test_aliev_panfilov_rest_is_fixed_point(self):
        cfg = MonodomainConfig(dt=0.1, t_end=1.0)
        s = single_node_solver(create_model("AP"), cfg)
        W = s.reaction_substep(s.state, 0.1, order=1)
        np.testing.assert_allclose(W, 0.0, atol=1e-15)

    def test_fk_gate_forward_euler(self):
        cfg = MonodomainConfig(dt=0.25, t_end=1.0)
        s = single_node_solver(create_model("FK3"), cfg)
        s.state.V[:] = 0.5
        W = s.reaction_substep(s.state, 0.25, order=1)
        assert W[0, 0] == pytest.approx(1.0 - 0.25 / 3.33)
        assert W[1, 0] == pytest.approx(1.0 - 0.25 / 870.0)

    def test_gate_nan_aborts_with_node_id(self):
        cfg = MonodomainConfig(dt=0.1, t_end=1.0)
        s = single_node_solver(create_model("FK3"), cfg)
        s.state.W[:] = np.nan
        with pytest.raises(SimulationError, match="node 0"):
            s.reaction_substep(s.state, 0.1, order=1)


class TestScalarReduction:
    def test_single_node_backward_euler_identity(self):
        # Q(n+1) = (tau C Q(n) + dt (R + tau R')) / (C (tau + dt)) with K = 0
        tau, dt, C_m = 0.7, 0.05, 1.3
        cfg = MonodomainConfig(dt=dt, t_end=dt, tau=tau, C_m=C_m)
        s = single_node_solver(create_model("McKean", alpha=0.1), cfg)
        s.state.V[:] = 0.5
        s.state.Q[:] = 0.2
        # reaction R = -i_ion(0.5) = 0.5, R' = -dI/dV * Q = -0.2
        s.step()
        expected_q = (tau * C_m * 0.2 + dt * (0.5 + tau * (-0.2))) / (C_m * (tau + dt))
        assert s.state.Q[0] == pytest.approx(expected_q, rel=1e-12)
        assert s.state.V[0] == pytest.approx(0.5 + dt * expected_q, rel=1e-12)

    def test_tau_zero_is_parabolic_step_same_path(self):
        dt = 0.05
        cfg = MonodomainConfig(dt=dt, t_end=dt, tau=0.0)
        s = single_node_solver(create_model("McKean", alpha=0.1), cfg)
        s.state.V[:] = 0.05   # below threshold: R = -V
        s.step()
        # C dt Q = dt R  ->  Q = -0.05, V = 0.05 (1 - dt)
        assert s.state.Q[0] == pytest.approx(-0.05, rel=1e-12)
        assert s.state.V[0] == pytest.approx(0.05 * (1 - dt), rel=1e-12)


class TestUniformStates:
    def test_subthreshold_uniform_decays_without_spatial_variation(self):
        mesh = line_mesh(10.0, 64)
        cfg = MonodomainConfig(dt=0.01, t_end=0.5, tau=0.4)
        s = MonodomainSolver(mesh, uniform_fiber_frame(mesh), DiffusionSpec(1.0),
                             create_model("McKean", alpha=0.3), cfg)
        s.state.V[:] = 0.1
        res = s.run()
        V = res.state.V
        assert np.ptp(V) < 1e-10
        assert 0.0 < V[0] < 0.1

    def test_rest_stays_at_rest(self):
        mesh = line_mesh(5.0, 32)
        cfg = MonodomainConfig(dt=0.02, t_end=0.4, tau=0.2, integrator_order=2)
        s = MonodomainSolver(mesh, uniform_fiber_frame(mesh), DiffusionSpec(1.0),
                             create_model("FK3"), cfg)
        res = s.run()
        # rest is a fixed point up to the unclamped tanh tail of the slow current
        np.testing.assert_allclose(res.state.V, 0.0, atol=1e-8)
        np.testing.assert_allclose(res.state.Q, 0.0, atol=1e-8)

    def test_lumped_mass_conservation_pure_diffusion(self):
        mesh = line_mesh(4.0, 50)
        cfg = MonodomainConfig(dt=0.01, t_end=0.5, tau=0.0, cg_tol=1e-12)
        s = MonodomainSolver(mesh, uniform_fiber_frame(mesh), DiffusionSpec(1.0),
                             Quiescent(), cfg)
        rng = np.random.default_rng(4)
        s.state.V[:] = rng.uniform(0.0, 1.0, mesh.n_nodes)
        before = float(np.sum(s.M_L * s.state.V))
        res = s.run()
        after = float(np.sum(s.M_L * res.state.V))
        assert after == pytest.approx(before, abs=1e-10)


class TestAccuracy:
    @pytest.mark.parametrize("tau", [0.0, 0.3])
    def test_second_order_on_linear_decay(self, tau):
        # dV/dt = -V with exact solution e^{-t}; observed order ~2
        errs = []
        for dt in (0.1, 0.05, 0.025):
            cfg = MonodomainConfig(dt=dt, t_end=1.0, tau=tau, integrator_order=2)
            s = single_node_solver(LinearDecay(), cfg)
            s.state.V[:] = 1.0
            s.state.Q[:] = -1.0    # consistent with dV/dt = -V
            s.run()
            errs.append(abs(s.state.V[0] - np.exp(-1.0)))
        p1 = np.log2(errs[0] / errs[1])
        p2 = np.log2(errs[1] / errs[2])
        assert p1 > 1.8 and p2 > 1.8

    def test_first_order_stepper_is_first_order(self):
        errs = []
        for dt in (0.1, 0.05, 0.025):
            cfg = MonodomainConfig(dt=dt, t_end=1.0, tau=0.2, integrator_order=1)
            s = single_node_solver(LinearDecay(), cfg)
            s.state.V[:] = 1.0
            s.state.Q[:] = -1.0
            s.run()
            errs.append(abs(s.state.V[0] - np.exp(-1.0)))
        p = np.log2(errs[0] / errs[1])
        assert 0.8 < p < 1.4

    def test_o2_step_differs_from_o1_at_second_order(self):
        # one step on a smooth state: |o1 - o2| should shrink ~4x when dt halves
        diffs = []
        for dt in (0.02, 0.01):
            vals = []
            for order in (1, 2):
                cfg = MonodomainConfig(dt=dt, t_end=dt, tau=0.5,
                                       integrator_order=order)
                s = single_node_solver(LinearDecay(), cfg)
                s.state.V[:] = 0.8
                s.state.Q[:] = -0.5
                s.step()
                vals.append(s.state.V[0])
            diffs.append(abs(vals[0] - vals[1]))
        assert diffs[0] / diffs[1] > 3.0

    def test_mckean_front_speed_matches_exact(self):
        # short hyperbolic run seeded with the closed-form front
        alpha, mu = 0.1, 1.0
        mesh = line_mesh(30.0, 600, origin=-15.0)
        x = mesh.nodes[:, 0]
        cfg = MonodomainConfig(dt=0.005, t_end=17.0, tau=mu)
        s = MonodomainSolver(mesh, uniform_fiber_frame(mesh), DiffusionSpec(1.0),
                             create_model("McKean", alpha=alpha), cfg)
        V0, Q0 = an.front_initial_state(x, alpha, mu, front_position=-5.0)
        s.state.V[:] = V0
        s.state.Q[:] = Q0
        res = s.run(threshold=0.9)
        i1, i2 = 300, 380     # x = 0 and x = 4
        cv = 4.0 / (res.activation[i2] - res.activation[i1])
        assert cv == pytest.approx(an.mckean_speed(alpha, mu), rel=0.02)


class TestSymmetryAndDeterminism:
    def test_centered_stimulus_symmetric_solution(self):
        mesh = line_mesh(10.0, 100)
        stim = Stimulus(Interval(4.5, 5.5), 1.0, 0.0, 0.5)
        cfg = MonodomainConfig(dt=0.01, t_end=1.0, tau=0.3, stimuli=[stim])
        s = MonodomainSolver(mesh, uniform_fiber_frame(mesh), DiffusionSpec(1.0),
                             create_model("McKean", alpha=0.1), cfg)
        res = s.run()
        V = res.state.V
        assert np.max(np.abs(V - V[::-1])) < 1e-10

    def test_rerun_is_bitwise_identical(self):
        def go():
            mesh = line_mesh(8.0, 64)
            stim = Stimulus(Interval(3.5, 4.5), 1.0, 0.0, 0.5)
            cfg = MonodomainConfig(dt=0.02, t_end=1.0, tau=0.0, stimuli=[stim],
                                   integrator_order=2)
            s = MonodomainSolver(mesh, uniform_fiber_frame(mesh),
                                 DiffusionSpec(1.0),
                                 create_model("McKean", alpha=0.1), cfg)
            return s.run().state.V
        a, b = go(), go()
        np.testing.assert_array_equal(a, b)


class TestGuards:
    def test_cfl_violation_rejected(self):
        mesh = line_mesh(1.0, 100)
        cfg = MonodomainConfig(dt=0.1, t_end=1.0, v_est=2.0)
        with pytest.raises(ValueError, match="CFL"):
            MonodomainSolver(mesh, uniform_fiber_frame(mesh), DiffusionSpec(1.0),
                             create_model("McKean"), cfg)

    def test_nan_abort_reports_time(self):
        mesh = line_mesh(1.0, 8)
        stim = Stimulus(Interval(0.0, 1.0), 1e308, 0.0, 1.0)
        cfg = MonodomainConfig(dt=0.5, t_end=5.0, tau=0.0, stimuli=[stim])
        s = MonodomainSolver(mesh, uniform_fiber_frame(mesh), DiffusionSpec(1.0),
                             create_model("Cubic"), cfg)
        with pytest.raises(SimulationError, match="t="):
            s.run()


class TestProbesAndActivation:
    def test_probe_interpolation_linear(self):
        mesh = line_mesh(1.0, 4)
        ps = ProbeSet(mesh, [0.375])
        V = mesh.nodes[:, 0] * 2.0
        assert ps.interpolate(V)[0] == pytest.approx(0.75, rel=1e-12)

    def test_probe_outside_rejected(self):
        mesh = line_mesh(1.0, 4)
        with pytest.raises(ValueError, match="outside"):
            ProbeSet(mesh, [1.5])

    def test_activation_interpolates_crossing_time(self):
        tr = ActivationTracker(2, threshold=0.9)
        tr.update(0.0, 1.0, np.array([0.5, 0.95]), np.array([1.3, 0.99]))
        assert tr.t_act[0] == pytest.approx(0.5)
        assert np.isnan(tr.t_act[1])   # started above threshold, no upward crossing

    def test_initially_active_nodes_marked_at_start(self):
        tr = ActivationTracker(2, threshold=0.9)
        tr.start(np.array([1.0, 0.0]), t0=0.0)
        assert tr.t_act[0] == 0.0 and np.isnan(tr.t_act[1])

    def test_periodic_stimulus_windows(self):
        s = Stimulus(Interval(0, 1), 1.0, start=1.0, duration=0.5,
                     period=2.0, count=3)
        assert s.is_active(1.2) and s.is_active(3.2) and s.is_active(5.2)
        assert not s.is_active(2.0) and not s.is_active(7.2)

    def test_finite_propagation_cone(self):
        # compact subthreshold bump must stay inside r0 + c_s t + 3h
        tau, sigma, r0 = 0.5, 1.0, 2.0
        mesh = line_mesh(50.0, 800)
        h = 50.0 / 800
        cfg = MonodomainConfig(dt=0.0025, t_end=1.0, tau=tau)
        s = MonodomainSolver(mesh, uniform_fiber_frame(mesh), DiffusionSpec(sigma),
                             create_model("McKean", alpha=0.3), cfg)
        x = mesh.nodes[:, 0]
        amp = 0.05
        u = np.clip((x - 25.0) / r0, -1.0, 1.0)
        bump = amp * np.cos(u * np.pi / 2) ** 4
        bump[np.abs(x - 25.0) >= r0] = 0.0
        s.state.V[:] = bump
        c_s = np.sqrt(sigma / (tau * 1.0))
        n_checks = 0
        while s.state.t < cfg.t_end - 1e-12:
            s.step()
            radius = r0 + c_s * s.state.t + 3.0 * h
            outside = np.abs(x - 25.0) > radius
            assert np.max(np.abs(s.state.V[outside]), initial=0.0) < 1e-6 * amp
            n_checks += 1
        assert n_checks > 100
