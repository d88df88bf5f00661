import numpy as np
import pytest

from irs_swipt.channel import ExperimentConfig, sample_channels
from irs_swipt.oracle import (GridSpec, finite_difference_gradient, grid_delta,
                              grid_search_p1, grid_search_p2,
                              p2_objective_of_theta, random_search)


class TestFiniteDifferences:
    def test_quadratic_exact_gradient(self):
        # f(x) = x^T A x with known gradient 2 A x
        rng = np.random.default_rng(0)
        a_mat = rng.standard_normal((4, 4))
        a_mat = 0.5 * (a_mat + a_mat.T)
        x0 = rng.standard_normal(4)
        grad = finite_difference_gradient(lambda x: x @ a_mat @ x, x0, 1e-5)
        assert np.allclose(grad, 2 * a_mat @ x0, atol=1e-8)

    def test_convergence_order(self):
        # central differences: halving h divides the error by about 4
        x0 = np.array([0.3])
        f = lambda x: np.sin(3 * x[0])
        exact = 3 * np.cos(0.9)
        e1 = abs(finite_difference_gradient(f, x0, 2e-3)[0] - exact)
        e2 = abs(finite_difference_gradient(f, x0, 1e-3)[0] - exact)
        assert e1 / e2 == pytest.approx(4.0, rel=0.15)

    def test_rejects_bad_h(self):
        with pytest.raises(ValueError):
            finite_difference_gradient(lambda x: 0.0, np.zeros(2), 0.0)


class TestGridP2:
    def test_no_irs_single_point(self):
        cfg = ExperimentConfig(m=3, n=0, k_i=0, k_e=1, seed=0)
        ch = sample_channels(cfg, np.random.default_rng(0))
        theta, obj = grid_search_p2(ch, cfg, GridSpec(levels=16))
        assert theta.size == 0
        assert obj == pytest.approx(cfg.power * np.linalg.norm(ch.g_d[0]) ** 2,
                                    rel=1e-10)

    def test_refinement_monotone(self):
        cfg = ExperimentConfig(m=2, n=3, k_i=0, k_e=2, seed=1)
        ch = sample_channels(cfg, np.random.default_rng(1))
        _, coarse = grid_search_p2(ch, cfg, GridSpec(levels=4))
        _, fine = grid_search_p2(ch, cfg, GridSpec(levels=8))
        assert fine >= coarse - 1e-15

    def test_deterministic(self):
        cfg = ExperimentConfig(m=2, n=3, k_i=0, k_e=2, seed=2)
        ch = sample_channels(cfg, np.random.default_rng(2))
        a = grid_search_p2(ch, cfg, GridSpec(levels=8))
        b = grid_search_p2(ch, cfg, GridSpec(levels=8))
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]

    def test_rejects_large_n(self):
        cfg = ExperimentConfig(m=2, n=8, k_i=0, k_e=1, seed=0)
        ch = sample_channels(cfg, np.random.default_rng(0))
        with pytest.raises(ValueError):
            grid_search_p2(ch, cfg, GridSpec(levels=16, max_n=6))

    def test_one_dim_fine_grid_matches_best(self):
        # the grid maximum at 360 levels is within grid resolution of the
        # exhaustively scanned maximum of the same objective
        cfg = ExperimentConfig(m=2, n=1, k_i=0, k_e=1, seed=3)
        ch = sample_channels(cfg, np.random.default_rng(3))
        theta_g, obj_g = grid_search_p2(ch, cfg, GridSpec(levels=360, max_n=1))
        thetas = np.linspace(0, 2 * np.pi, 3600, endpoint=False)
        brute = max(p2_objective_of_theta(ch, cfg, [t]) for t in thetas)
        assert obj_g == pytest.approx(brute, rel=1e-3)

    def test_grid_delta_nonnegative(self):
        cfg = ExperimentConfig(m=2, n=2, k_i=0, k_e=1, seed=4)
        ch = sample_channels(cfg, np.random.default_rng(4))
        theta, _ = grid_search_p2(ch, cfg, GridSpec(levels=8))
        d = grid_delta(lambda t: p2_objective_of_theta(ch, cfg, t), theta, 8)
        assert d >= 0.0


class TestGridP1:
    def test_two_point_enumeration(self):
        cfg = ExperimentConfig(m=2, n=1, k_i=1, k_e=1, gamma=1.0, seed=5)
        ch = sample_channels(cfg, np.random.default_rng(5))
        theta, obj = grid_search_p1(ch, cfg, GridSpec(levels=2, max_n=1))
        from irs_swipt.oracle import p1_objective_of_theta
        vals = [p1_objective_of_theta(ch, cfg, [t]) for t in (0.0, np.pi)]
        assert obj == pytest.approx(max(vals), rel=1e-9)

    def test_rejects_large_n(self):
        cfg = ExperimentConfig(m=2, n=5, k_i=1, k_e=1, seed=0)
        ch = sample_channels(cfg, np.random.default_rng(0))
        with pytest.raises(ValueError):
            grid_search_p1(ch, cfg, GridSpec(levels=4, max_n=6))

    def test_all_infeasible_reported(self):
        cfg = ExperimentConfig(m=2, n=1, k_i=1, k_e=1, gamma=1e12, seed=6)
        ch = sample_channels(cfg, np.random.default_rng(6))
        theta, obj = grid_search_p1(ch, cfg, GridSpec(levels=2, max_n=1))
        assert theta is None and obj == -np.inf


class TestRandomSearch:
    def test_single_trial_deterministic(self):
        cfg = ExperimentConfig(m=2, n=3, k_i=0, k_e=1, seed=7)
        ch = sample_channels(cfg, np.random.default_rng(7))
        a = random_search(ch, cfg, 1, np.random.default_rng(0))
        b = random_search(ch, cfg, 1, np.random.default_rng(0))
        assert a == b

    def test_rejects_zero_trials(self):
        cfg = ExperimentConfig(m=2, n=3, k_i=0, k_e=1, seed=7)
        ch = sample_channels(cfg, np.random.default_rng(7))
        with pytest.raises(ValueError):
            random_search(ch, cfg, 0, np.random.default_rng(0))

    def test_large_sample_approaches_grid(self):
        cfg = ExperimentConfig(m=2, n=1, k_i=0, k_e=1, seed=8)
        ch = sample_channels(cfg, np.random.default_rng(8))
        _, grid_best = grid_search_p2(ch, cfg, GridSpec(levels=360, max_n=1))
        rand_best = random_search(ch, cfg, 3000, np.random.default_rng(1))
        assert rand_best <= grid_best * (1 + 1e-6)
        assert rand_best >= grid_best * (1 - 1e-3)
