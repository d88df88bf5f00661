import numpy as np
import pytest

from irs_swipt import sdp
from irs_swipt.channel import (ExperimentConfig, PhaseVector, effective_channels,
                               sample_channels)
from irs_swipt.swipt import build_phase_sdp, build_sdr1, solve_precoders


def rand_herm(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


class TestBasics:
    def test_diagonal_max_eig(self):
        p = sdp.SdpProblem(blocks=[3], objective=[np.diag([1.0, 4.0, 2.0]).astype(complex)])
        p.add_constraint({0: np.eye(3, dtype=complex)}, "==", 1.0)
        s = sdp.solve(p)
        assert s.status == sdp.SdpStatus.Optimal
        assert s.objective_value == pytest.approx(4.0, rel=1e-6)
        x = s.primal[0]
        assert x[1, 1].real == pytest.approx(1.0, abs=1e-5)
        rep = sdp.check_kkt(p, s)
        assert rep.primal_feasibility < 1e-8
        assert rep.dual_feasibility > -1e-8
        assert rep.gap < 1e-6
        assert s.dual[0] == pytest.approx(4.0, rel=1e-5)

    def test_degenerate_zero(self):
        p = sdp.SdpProblem(blocks=[2], objective=[np.eye(2, dtype=complex)])
        p.add_constraint({0: np.eye(2, dtype=complex)}, "<=", 0.0)
        s = sdp.solve(p)
        assert s.status == sdp.SdpStatus.Optimal
        assert abs(s.objective_value) < 1e-7
        assert np.linalg.norm(s.primal[0]) < 1e-6

    def test_infeasible_certified(self):
        p = sdp.SdpProblem(blocks=[2], objective=[np.eye(2, dtype=complex)])
        p.add_constraint({0: np.eye(2, dtype=complex)}, "<=", 0.0)
        p.add_constraint({0: np.eye(2, dtype=complex)}, ">=", 1.0)
        s = sdp.solve(p)
        assert s.status == sdp.SdpStatus.Infeasible

    def test_unbounded(self):
        p = sdp.SdpProblem(blocks=[2], objective=[np.eye(2, dtype=complex)])
        p.add_constraint({0: np.diag([1.0, 0.0]).astype(complex)}, "<=", 1.0)
        s = sdp.solve(p)
        assert s.status == sdp.SdpStatus.Unbounded

    def test_min_sense(self):
        rng = np.random.default_rng(3)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        hmat = np.outer(h, h.conj())
        p = sdp.SdpProblem(blocks=[4], objective=[np.eye(4, dtype=complex)], sense="min")
        p.add_constraint({0: hmat}, ">=", 2.0)
        s = sdp.solve(p)
        # analytic optimum: power along h, tr = 2/||h||^2
        assert s.objective_value == pytest.approx(2.0 / np.linalg.norm(h) ** 2, rel=1e-6)


class TestCrossCheck:
    def test_random_sdr1_vs_reference(self):
        # same instance to both solvers, built at O(1) channel scales so the
        # reference solver is in its comfort zone too
        cp = pytest.importorskip("cvxpy")
        cfg = ExperimentConfig(m=4, n=8, k_i=2, k_e=2, gamma=2.0, sigma2=0.1, seed=0)
        ch = sample_channels(cfg, np.random.default_rng(12))
        phases = PhaseVector(np.random.default_rng(12).uniform(0, 2 * np.pi, cfg.n))
        h_eff, g_eff = effective_channels(ch, phases)
        h_eff = h_eff / np.mean(np.linalg.norm(h_eff, axis=1))
        g_eff = g_eff / np.mean(np.linalg.norm(g_eff, axis=1))
        prob = build_sdr1(h_eff, g_eff, cfg)
        sol = sdp.solve(prob)
        assert sol.status == sdp.SdpStatus.Optimal

        xs = [cp.Variable((4, 4), hermitian=True) for _ in range(2)]
        cons = [x >> 0 for x in xs]
        for c in prob.constraints:
            expr = 0
            for b, a_mat in enumerate(c.mats):
                if a_mat is not None:
                    expr = expr + cp.real(cp.trace(a_mat @ xs[b]))
            if c.sense == ">=":
                cons.append(expr >= c.rhs)
            elif c.sense == "<=":
                cons.append(expr <= c.rhs)
            else:
                cons.append(expr == c.rhs)
        obj = cp.Maximize(sum(cp.real(cp.trace(C @ x))
                              for C, x in zip(prob.objective, xs)))
        ref = cp.Problem(obj, cons)
        ref.solve(solver=cp.CLARABEL)
        assert ref.status == "optimal"
        assert sol.objective_value == pytest.approx(ref.value, rel=1e-5)

    def test_random_multiblock_vs_reference(self):
        cp = pytest.importorskip("cvxpy")
        rng = np.random.default_rng(7)
        dims = [3, 2]
        cs = [rand_herm(rng, d) for d in dims]
        p = sdp.SdpProblem(blocks=dims, objective=cs, sense="max")
        for k, (sense, rhs) in enumerate([("<=", 5.0), (">=", -1.0), ("==", 1.0)]):
            p.add_constraint([rand_herm(rng, d) for d in dims], sense, rhs)
        p.add_constraint([np.eye(3, dtype=complex), np.eye(2, dtype=complex)], "<=", 10.0)
        s = sdp.solve(p)
        assert s.status == sdp.SdpStatus.Optimal

        xs = [cp.Variable((d, d), hermitian=True) for d in dims]
        cons = [x >> 0 for x in xs]
        for c in p.constraints:
            expr = sum(cp.real(cp.trace(a_mat @ x))
                       for a_mat, x in zip(c.mats, xs) if a_mat is not None)
            cons.append(expr >= c.rhs if c.sense == ">="
                        else expr <= c.rhs if c.sense == "<=" else expr == c.rhs)
        ref = cp.Problem(cp.Maximize(sum(cp.real(cp.trace(C @ x))
                                         for C, x in zip(cs, xs))), cons)
        ref.solve(solver=cp.CLARABEL)
        assert s.objective_value == pytest.approx(ref.value, rel=1e-5)


class TestKkt:
    def _solved_diag(self):
        p = sdp.SdpProblem(blocks=[3], objective=[np.diag([1.0, 4.0, 2.0]).astype(complex)])
        p.add_constraint({0: np.eye(3, dtype=complex)}, "==", 1.0)
        return p, sdp.solve(p)

    def test_clean_solution(self):
        p, s = self._solved_diag()
        rep = sdp.check_kkt(p, s)
        assert rep.primal_feasibility < 1e-8
        assert rep.gap < 1e-6
        assert np.all(rep.comp_slackness < 1e-6)

    def test_perturbed_primal_flagged(self):
        p, s = self._solved_diag()
        x = s.primal[0] + 0.1 * np.eye(3)
        x = x / np.trace(x).real * 1.5   # deliberately breaks tr(X) = 1
        s.primal[0] = x
        rep = sdp.check_kkt(p, s)
        assert rep.primal_feasibility > 1e-3

    def test_phase_sdp_gap(self):
        cfg = ExperimentConfig(m=3, n=10, k_i=2, k_e=2, gamma=2.0, seed=1)
        ch = sample_channels(cfg, np.random.default_rng(5))
        phases = PhaseVector.zeros(cfg.n)
        h_eff, g_eff = effective_channels(ch, phases)
        prec, _ = solve_precoders(h_eff, g_eff, cfg)
        prob, _ = build_phase_sdp(prec, ch, cfg)
        sol = sdp.solve(prob)
        assert sol.status == sdp.SdpStatus.Optimal
        assert sol.gap < 1e-6
        rep = sdp.check_kkt(prob, sol)
        assert rep.primal_feasibility < 1e-6
        assert np.all(rep.comp_slackness < 1e-6)


class TestInvariants:
    @pytest.mark.parametrize("d", [3, 17, 51])
    def test_lambda_max_family(self, d):
        rng = np.random.default_rng(d)
        c = rand_herm(rng, d)
        p = sdp.SdpProblem(blocks=[d], objective=[c])
        p.add_constraint({0: np.eye(d, dtype=complex)}, "==", 1.0)
        s = sdp.solve(p)
        lam = np.linalg.eigvalsh(c)[-1]
        assert s.status == sdp.SdpStatus.Optimal
        assert s.objective_value == pytest.approx(lam, rel=1e-6)
        assert s.gap < 1e-7

    def test_weak_duality(self):
        rng = np.random.default_rng(2)
        c = rand_herm(rng, 6)
        p = sdp.SdpProblem(blocks=[6], objective=[c])
        p.add_constraint({0: np.eye(6, dtype=complex)}, "<=", 2.0)
        p.add_constraint({0: rand_herm(rng, 6)}, ">=", -4.0)
        s = sdp.solve(p)
        rep = sdp.check_kkt(p, s)
        # dual objective bounds the primal from above for maximization
        dobj = s.objective_value + rep.gap * (1 + 2 * abs(s.objective_value))
        assert s.objective_value <= dobj + 1e-6

    def test_objective_scaling_invariance(self):
        rng = np.random.default_rng(9)
        c = rand_herm(rng, 5)
        kappa = 123.0
        sols = []
        for cc in (c, kappa * c):
            p = sdp.SdpProblem(blocks=[5], objective=[cc])
            p.add_constraint({0: np.eye(5, dtype=complex)}, "==", 1.0)
            sols.append(sdp.solve(p))
        assert sols[1].objective_value == pytest.approx(
            kappa * sols[0].objective_value, rel=1e-6)
        assert np.linalg.norm(sols[1].primal[0] - sols[0].primal[0]) < 1e-6

    def test_psd_floor(self):
        rng = np.random.default_rng(14)
        c = rand_herm(rng, 8)
        p = sdp.SdpProblem(blocks=[8], objective=[c])
        p.add_constraint({0: np.eye(8, dtype=complex)}, "==", 1.0)
        s = sdp.solve(p)
        for x in s.primal:
            w = np.linalg.eigvalsh(x)
            assert w[0] > -1e-8 * max(1.0, w[-1])


def test_dump_problem_format():
    p = sdp.SdpProblem(blocks=[2], objective=[np.diag([1.0, 2.0]).astype(complex)])
    p.add_constraint({0: np.eye(2, dtype=complex)}, "<=", 1.5)
    text = sdp.dump_problem(p)
    lines = text.strip().split("\n")
    assert lines[0] == "max 1 2"
    assert any(line.startswith("con 0 <= 1.5") for line in lines)
    assert any(line.startswith("obj 0 0 0 1") for line in lines)
