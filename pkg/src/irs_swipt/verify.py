"""Self-check property suites behind the `verify` CLI subcommand.

Each suite returns a list of (check name, passed, detail) tuples; the CLI
prints one line per check and exits nonzero on any failure.
"""

import numpy as np

from . import sdp
from .channel import (ExperimentConfig, PhaseVector, effective_channels,
                      sample_channels)
from .numerics import herm_eig, principal_eigvec
from .oracle import (GridSpec, finite_difference_gradient, grid_search_p2,
                     p2_objective_of_theta)
from .swipt import verify_prop1
from .wpt import (phase_objective, sca_phase_coefficients, sca_phase_step,
                  solve_p2, surrogate_value, u_from_phases)

SUITES = ("numerics", "sdp", "sca", "prop1", "oracle", "scaling")


def _rand_herm(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


def suite_numerics(rng=None):
    rng = np.random.default_rng(11) if rng is None else rng
    checks = []
    worst = 0.0
    for n in (2, 8, 31, 64):
        h_mat = _rand_herm(rng, n)
        w, v = herm_eig(h_mat)
        resid = np.linalg.norm(v @ np.diag(w) @ v.conj().T - h_mat)
        worst = max(worst, resid / max(1.0, np.linalg.norm(h_mat)))
        worst = max(worst, np.linalg.norm(v.conj().T @ v - np.eye(n)))
        worst = max(worst, float(np.max(np.diff(w) < -1e-14)))
    checks.append(("eig reconstruction/orthonormality/order", worst < 1e-10,
                   f"worst residual {worst:.2e}"))
    h_mat = _rand_herm(rng, 12)
    h_mat = h_mat @ h_mat.conj().T
    lam, _ = principal_eigvec(h_mat)
    xs = rng.standard_normal((1000, 12)) + 1j * rng.standard_normal((1000, 12))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    quad = np.real(np.einsum("ki,ij,kj->k", xs.conj(), h_mat, xs))
    checks.append(("Rayleigh-quotient maximality", float(np.max(quad)) <= lam + 1e-9,
                   f"max quotient {np.max(quad):.6e} vs {lam:.6e}"))
    return checks


def suite_sdp(rng=None):
    rng = np.random.default_rng(13) if rng is None else rng
    checks = []
    worst = 0.0
    worst_comp = 0.0
    for d in (3, 17, 51):
        c_mat = _rand_herm(rng, d)
        prob = sdp.SdpProblem(blocks=[d], objective=[c_mat], sense="max")
        prob.add_constraint({0: np.eye(d, dtype=complex)}, "==", 1.0)
        sol = sdp.solve(prob)
        lam = np.linalg.eigvalsh(c_mat)[-1]
        worst = max(worst, abs(sol.objective_value - lam) / abs(lam))
        rep = sdp.check_kkt(prob, sol)
        if len(rep.comp_slackness):
            worst_comp = max(worst_comp, float(np.max(rep.comp_slackness)))
    checks.append(("lambda_max SDPs up to dim 51", worst < 1e-6,
                   f"worst rel err {worst:.2e}"))
    checks.append(("complementary slackness", worst_comp < 1e-6,
                   f"max |dual*slack| {worst_comp:.2e}"))
    c_mat = _rand_herm(rng, 8)
    prob = sdp.SdpProblem(blocks=[8], objective=[c_mat], sense="max")
    prob.add_constraint({0: np.eye(8, dtype=complex)}, "==", 1.0)
    base = sdp.solve(prob)
    kappa = 37.5
    prob2 = sdp.SdpProblem(blocks=[8], objective=[kappa * c_mat], sense="max")
    prob2.add_constraint({0: np.eye(8, dtype=complex)}, "==", 1.0)
    scaled = sdp.solve(prob2)
    drift = max(abs(scaled.objective_value - kappa * base.objective_value)
                / abs(kappa * base.objective_value),
                float(np.linalg.norm(scaled.primal[0] - base.primal[0])))
    checks.append(("objective scaling invariance", drift < 1e-6,
                   f"drift {drift:.2e}"))
    return checks


def suite_sca(rng=None):
    rng = np.random.default_rng(17) if rng is None else rng
    checks = []
    cfg = ExperimentConfig(m=3, n=5, k_i=0, k_e=2, seed=3)
    ch = sample_channels(cfg, np.random.default_rng(3))
    alpha = cfg.alpha_vec()
    v0 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v0 *= np.sqrt(cfg.power) / np.linalg.norm(v0)
    a, b, a_big = sca_phase_coefficients(ch, v0, alpha)
    u_hat = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))

    tight = abs(surrogate_value(u_hat, u_hat, a, b, alpha, a_big)
                - phase_objective(u_hat, a, b, alpha))
    checks.append(("surrogate tight at expansion point", tight < 1e-10,
                   f"gap {tight:.2e}"))

    worst = -np.inf
    for _ in range(100):
        u = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
        worst = max(worst, surrogate_value(u, u_hat, a, b, alpha, a_big)
                    - phase_objective(u, a, b, alpha))
    checks.append(("surrogate is a global lower bound", worst <= 1e-9,
                   f"max surrogate excess {worst:.2e}"))

    theta0 = np.mod(-np.angle(u_hat), 2 * np.pi)

    def true_of_theta(theta):
        return phase_objective(np.exp(-1j * theta), a, b, alpha)

    def surr_of_theta(theta):
        return surrogate_value(np.exp(-1j * theta), u_hat, a, b, alpha, a_big)

    g_true = finite_difference_gradient(true_of_theta, theta0, 1e-6)
    g_surr = finite_difference_gradient(surr_of_theta, theta0, 1e-6)
    gerr = float(np.max(np.abs(g_true - g_surr)))
    scale = max(1.0, float(np.max(np.abs(g_true))))
    checks.append(("surrogate gradient matches objective", gerr < 1e-6 * scale,
                   f"max gradient gap {gerr:.2e}"))

    u = np.ones(5, dtype=complex)
    prev = phase_objective(u, a, b, alpha)
    mono = True
    for _ in range(50):
        u = sca_phase_step(u, a_big, a, b, alpha)
        cur = phase_objective(u, a, b, alpha)
        mono = mono and cur >= prev - 1e-9 * max(1.0, prev)
        prev = cur
    checks.append(("SCA steps never decrease the objective", mono, ""))
    return checks


def suite_prop1(instances=50, rng=None):
    rng = np.random.default_rng(19) if rng is None else rng
    worst_rel = 0.0
    failures = 0
    for t in range(instances):
        cfg = ExperimentConfig(
            m=4, n=int(rng.choice([0, 8, 20])),
            k_i=int(rng.integers(1, 4)), k_e=int(rng.integers(1, 4)),
            gamma=float(rng.uniform(0.5, 5.0)),
            fading_g=("los" if t % 2 == 0 else "rayleigh"), seed=t)
        ch = sample_channels(cfg, np.random.default_rng(1000 + t))
        phases = PhaseVector(rng.uniform(0, 2 * np.pi, cfg.n))
        h_eff, g_eff = effective_channels(ch, phases)
        try:
            rep = verify_prop1(h_eff, g_eff, cfg)
        except Exception:
            failures += 1
            continue
        rel = abs(rep.e_with - rep.e_without) / max(abs(rep.e_without), 1e-300)
        worst_rel = max(worst_rel, rel)
        if not rep.reconstructed_equal:
            failures += 1
    ok = worst_rel < 1e-5 and failures == 0
    return [("energy-block equivalence over random instances", ok,
             f"worst rel gap {worst_rel:.2e}, failures {failures}")]


def suite_oracle(rng=None):
    checks = []
    cfg = ExperimentConfig(m=2, n=1, k_i=0, k_e=1, seed=5)
    ch = sample_channels(cfg, np.random.default_rng(5))
    _, obj360 = grid_search_p2(ch, cfg, GridSpec(levels=360, max_n=1))
    res = solve_p2(ch, cfg)
    rel = abs(res.objective - obj360) / max(obj360, 1e-300)
    checks.append(("1-D fine grid matches alignment optimum", rel < 1e-3,
                   f"rel gap {rel:.2e}"))
    cfg4 = ExperimentConfig(m=2, n=3, k_i=0, k_e=2, seed=7)
    ch4 = sample_channels(cfg4, np.random.default_rng(7))
    _, coarse = grid_search_p2(ch4, cfg4, GridSpec(levels=4, max_n=4))
    _, fine = grid_search_p2(ch4, cfg4, GridSpec(levels=8, max_n=4))
    checks.append(("grid optimum non-decreasing in levels",
                   fine >= coarse - 1e-15, f"{coarse:.4e} -> {fine:.4e}"))
    again = grid_search_p2(ch4, cfg4, GridSpec(levels=8, max_n=4))[1]
    checks.append(("oracle determinism", again == fine, ""))
    return checks


def suite_scaling(trials=50):
    ratios = []
    for t in range(trials):
        objs = []
        for n in (20, 40):
            cfg = ExperimentConfig(m=4, n=n, k_i=0, k_e=1, fading_g="los",
                                   direct_links=False, seed=t)
            ch = sample_channels(cfg, np.random.default_rng(2000 + t))
            objs.append(solve_p2(ch, cfg).objective)
        ratios.append(objs[1] / objs[0])
    mean = float(np.mean(ratios))
    ok = 3.6 <= mean <= 4.4
    return [("received power scales like N^2", ok, f"mean ratio {mean:.3f}")]


def run_suite(name):
    fn = {
        "numerics": suite_numerics,
        "sdp": suite_sdp,
        "sca": suite_sca,
        "prop1": suite_prop1,
        "oracle": suite_oracle,
        "scaling": suite_scaling,
    }.get(name)
    if fn is None:
        raise KeyError(name)
    return fn()
