import numpy as np
import pytest

from froth1d.energy import total_energy
from froth1d.minimize import (MinimizeOptions, minimize_energy,
                              minimize_with_mean_constraint, multistart,
                              restart_rng)
from froth1d.profiles import GridProfile


class TestMinimizeEnergy:
    def test_uniform_minimum_at_gamma_zero(self, params):
        init = GridProfile.constant(params.m_beta, L=16.0, dx=1.0 / 16.0)
        res = minimize_energy(params, init, 0.0,
                              MinimizeOptions(max_iters=50, grad_tol=1e-8))
        assert res.converged
        assert res.iterations <= 2
        assert res.energy == pytest.approx(0.0, abs=1e-12)

    def test_monotone_energy_and_box(self, params, rng):
        n, dx = 256, 1.0 / 16.0
        init = GridProfile(L=n * dx, dx=dx, samples=rng.uniform(-1, 1, n))
        res = minimize_energy(params, init, 1e-2,
                              MinimizeOptions(max_iters=400, grad_tol=1e-9))
        energies = res.trace[:, 1]
        assert np.all(np.diff(energies) <= 1e-12)
        assert np.max(np.abs(res.profile.samples)) <= 1.0

    def test_trial_profile_stays_near_optimal(self, params_tau,
                                              instanton_default):
        gamma = 1e-2
        from froth1d.sharp import optimal_h
        h_star, e_star, _, _ = optimal_h(params_tau, gamma)
        dx = 1.0 / 16.0
        h = round(h_star / dx) * dx
        from froth1d.instanton import build_trial_profile
        init = build_trial_profile(h, 8 * h, instanton_default, bc="periodic",
                                   dx=dx)
        e0 = total_energy(params_tau, init, gamma).total
        res = minimize_energy(params_tau, init, gamma,
                              MinimizeOptions(max_iters=1500, grad_tol=1e-6))
        assert res.energy <= e0 + 1e-12
        assert res.energy / init.L <= 1.02 * e_star

    def test_spin_flip_equivariance(self, params, rng):
        n, dx = 128, 1.0 / 16.0
        samples = rng.uniform(-1, 1, n)
        opts = MinimizeOptions(max_iters=600, grad_tol=1e-7)
        up = minimize_energy(params, GridProfile(L=n * dx, dx=dx,
                                                 samples=samples,
                                                 bc="periodic"), 1e-2, opts)
        dn = minimize_energy(params, GridProfile(L=n * dx, dx=dx,
                                                 samples=-samples,
                                                 bc="periodic"), 1e-2, opts)
        assert dn.energy == pytest.approx(up.energy, abs=1e-9)


class TestMeanConstraint:
    @pytest.mark.parametrize("mean", [0.96, 0.98, 1.0])
    def test_uniform_minimizer_above_m_beta(self, params, mean):
        res = minimize_with_mean_constraint(
            params, length=20.0, mean=mean, bc="open", gamma=0.0,
            options=MinimizeOptions(max_iters=4000, grad_tol=1e-8))
        prof = res.profile
        assert abs(prof.mean() - mean) < 1e-12
        assert np.max(np.abs(prof.samples - mean)) < 1e-6

    def test_from_random_start(self, params, rng):
        mean = 0.97
        n, dx = 640, 1.0 / 32.0
        init = GridProfile(L=n * dx, dx=dx, samples=rng.uniform(-1, 1, n))
        res = minimize_with_mean_constraint(
            params, length=20.0, mean=mean, bc="open", gamma=0.0,
            options=MinimizeOptions(max_iters=6000, grad_tol=1e-8),
            dx=dx, init=init)
        assert abs(res.profile.mean() - mean) < 1e-12
        assert np.max(np.abs(res.profile.samples - mean)) < 1e-6

    def test_mean_m_beta_gives_zero_energy(self, params):
        res = minimize_with_mean_constraint(
            params, length=16.0, mean=params.m_beta, bc="open", gamma=0.0,
            options=MinimizeOptions(max_iters=200, grad_tol=1e-9))
        assert res.energy == pytest.approx(0.0, abs=1e-12)

    def test_saturated_mean(self, params):
        res = minimize_with_mean_constraint(
            params, length=8.0, mean=1.0, bc="open", gamma=0.0,
            options=MinimizeOptions(max_iters=50, grad_tol=1e-6))
        assert np.all(res.profile.samples == 1.0)


class TestMultistart:
    def test_deterministic(self, params):
        opts = MinimizeOptions(max_iters=120, grad_tol=1e-9, seed=31)
        best1, t1 = multistart(params, 1e-2, 16.0, "periodic", 3, opts)
        best2, t2 = multistart(params, 1e-2, 16.0, "periodic", 3, opts)
        assert np.array_equal(best1.profile.samples, best2.profile.samples)
        assert t1 == t2

    def test_single_start_equals_minimize(self, params, instanton_default):
        from froth1d.instanton import build_trial_profile
        init = build_trial_profile(24.0, 48.0, instanton_default, bc="periodic")
        opts = MinimizeOptions(max_iters=60, grad_tol=1e-9, seed=0)
        best, _ = multistart(params.with_tau(instanton_default.tau), 1e-2,
                             init.L, "periodic", 1, opts, dx=init.dx,
                             init=init)
        ref = minimize_energy(params, init, 1e-2, opts)
        assert best.energy == pytest.approx(ref.energy, rel=1e-12)

    def test_rng_streams_differ(self):
        a = restart_rng(5, 0).uniform(size=4)
        b = restart_rng(5, 1).uniform(size=4)
        assert not np.allclose(a, b)
        again = restart_rng(5, 0).uniform(size=4)
        assert np.array_equal(a, again)


class TestStationarity:
    def test_projected_gradient_at_convergence(self, params, rng):
        n, dx = 128, 1.0 / 16.0
        init = GridProfile(L=n * dx, dx=dx,
                           samples=rng.uniform(-0.5, 0.5, n), bc="periodic")
        opts = MinimizeOptions(max_iters=5000, grad_tol=1e-8)
        res = minimize_energy(params, init, 1e-2, opts)
        assert res.converged
        assert res.grad_norm <= 1e-8
