"""SINR-constrained harvested-power maximization.

The precoder subproblem is the semidefinite relaxation over per-IDR beam
covariances (no dedicated energy covariance: dropping it is lossless, which
`verify_prop1` checks numerically, including the constructive fold of a
nonzero energy covariance into an SINR-active beam).  The phase subproblem
lifts the unit-modulus vector to a PSD matrix with unit diagonal; Gaussian
randomization recovers feasible phases from the relaxed solution.  The outer
loop alternates the two and only ever accepts updates that do not decrease
the true objective.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .channel import (PhaseVector, effective_channels, energy_matrix,
                      harvested_power, sinr)
from .numerics import herm_eig
from .wpt import phases_from_u, solve_p2, u_from_phases


class InfeasibleError(RuntimeError):
    """Raised when the SINR targets cannot be met within the power budget."""


@dataclass
class PrecoderSet:
    w: np.ndarray             # (K_I, M) information precoders, sqrt-watts
    v: np.ndarray = None      # (K_v, M) energy precoders; empty/None if unused

    def total_power(self):
        p = float(np.sum(np.abs(self.w) ** 2))
        if self.v is not None and len(self.v):
            p += float(np.sum(np.abs(self.v) ** 2))
        return p


@dataclass
class PhaseSdpData:
    """Lifted phase-problem data at fixed precoders.

    re_mats[j, i] and ri_mats[i, k] are (N+1) x (N+1) Hermitian with zero
    bottom-right entry; the quadratic identity is
    ubar^H R ubar = |u^H vec + scalar|^2 - |scalar|^2 for ubar = [u; 1].
    """
    a_vecs: np.ndarray     # (K_E, K_I, N) EHR-side reflected couplings
    b: np.ndarray          # (K_E, K_I) EHR-side direct couplings
    c_vecs: np.ndarray     # (K_I, K_I, N) IDR-side reflected couplings
    d: np.ndarray          # (K_I, K_I) IDR-side direct couplings
    re_mats: np.ndarray    # (K_E, K_I, N+1, N+1)
    ri_mats: np.ndarray    # (K_I, K_I, N+1, N+1)
    alpha: np.ndarray
    gamma: np.ndarray
    sigma2: np.ndarray
    obj_const: float       # sum_j alpha_j sum_i |b_ji|^2


@dataclass
class P1Result:
    precoders: PrecoderSet
    phases: PhaseVector
    objective: float
    trace: list = field(default_factory=list)
    sdp_bounds: list = field(default_factory=list)   # phase-SDP optima per outer pass
    iterations: int = 0
    converged: bool = False
    stop_reason: str = ""
    sinr_margin: float = 0.0        # min_i SINR_i/gamma_i - 1 at the solution
    power_slack: float = 0.0        # P - used power
    wall_time: float = 0.0


def build_sdr1(h_eff, g_eff, cfg, include_energy=False):
    """Relaxed precoder problem at fixed phases.

    Blocks are the per-IDR beam covariances (plus one common energy
    covariance when include_energy); objective sum_b tr(S X_b) with
    S = sum_j alpha_j g_j g_j^H; per-IDR SINR rows and one power row.
    """
    if cfg.k_i < 1:
        raise ValueError("build_sdr1 needs at least one information receiver")
    m = h_eff.shape[1]
    gamma = cfg.gamma_vec()
    sigma2 = cfg.sigma2_vec()
    s_mat = energy_matrix(g_eff, cfg.alpha_vec())
    nblocks = cfg.k_i + (1 if include_energy else 0)
    prob = sdp.SdpProblem(blocks=[m] * nblocks, objective=[s_mat] * nblocks,
                          sense="max")
    for i in range(cfg.k_i):
        h_i = np.outer(h_eff[i], h_eff[i].conj())
        h_i = 0.5 * (h_i + h_i.conj().T)
        mats = []
        for k in range(cfg.k_i):
            mats.append(h_i / gamma[i] if k == i else -h_i)
        if include_energy:
            mats.append(-h_i)
        prob.add_constraint(mats, ">=", float(sigma2[i]))
    eye = np.eye(m, dtype=complex)
    prob.add_constraint([eye] * nblocks, "<=", float(cfg.power))
    return prob


def _rank_one_extract(w_mat, tol):
    """(lead vector, rank ratio lambda_2/lambda_1) of a PSD covariance."""
    w, v = herm_eig(w_mat)
    lam1 = max(w[-1], 0.0)
    lam2 = max(w[-2], 0.0) if len(w) > 1 else 0.0
    ratio = lam2 / lam1 if lam1 > 0 else 0.0
    vec = np.sqrt(lam1) * v[:, -1]
    return vec, ratio


def _power_allocation_repair(dirs, h_eff, s_mat, cfg):
    """LP over per-beam powers at fixed directions; None when infeasible."""
    k_i = dirs.shape[0]
    gamma = cfg.gamma_vec()
    sigma2 = cfg.sigma2_vec()
    gains = np.abs(h_eff.conj() @ dirs.T) ** 2        # [i, k] = |h_i^H d_k|^2
    rewards = np.real(np.einsum("km,mn,kn->k", dirs.conj(), s_mat, dirs))
    prob = sdp.SdpProblem(blocks=[1] * k_i,
                          objective=[np.array([[r]], complex) for r in rewards],
                          sense="max")
    for i in range(k_i):
        mats = [np.array([[gains[i, k] / gamma[i] if k == i else -gains[i, k]]],
                         complex) for k in range(k_i)]
        prob.add_constraint(mats, ">=", float(sigma2[i]))
    prob.add_constraint([np.array([[1.0]], complex)] * k_i, "<=", float(cfg.power))
    sol = sdp.solve(prob, cfg.sdp_feas_tol, cfg.sdp_gap_tol, cfg.sdp_max_iter)
    if sol.status != sdp.SdpStatus.Optimal:
        return None
    p = np.array([max(X[0, 0].real, 0.0) for X in sol.primal])
    return dirs * np.sqrt(p)[:, None]


def solve_precoders(h_eff, g_eff, cfg):
    """Rank-one precoders from the energy-free relaxation.

    Returns (PrecoderSet with empty v, relaxation optimum); raises
    InfeasibleError when the SINR targets cannot be met at these phases.
    """
    prob = build_sdr1(h_eff, g_eff, cfg, include_energy=False)
    sol = sdp.solve(prob, cfg.sdp_feas_tol, cfg.sdp_gap_tol, cfg.sdp_max_iter)
    if sol.status == sdp.SdpStatus.Infeasible:
        raise InfeasibleError("SINR targets infeasible at the current phases")
    if sol.status != sdp.SdpStatus.Optimal:
        raise InfeasibleError(f"precoder SDP did not converge ({sol.status.name})")
    w = []
    clean = True
    for x_mat in sol.primal:
        vec, ratio = _rank_one_extract(x_mat, cfg.rank1_tol)
        clean = clean and ratio < cfg.rank1_tol
        w.append(vec)
    w = np.array(w)
    if not clean:
        # keep the principal directions, restore the budget, re-solve powers
        total = np.sum(np.abs(w) ** 2)
        if total > 0:
            w = w * np.sqrt(cfg.power / total)
        norms = np.linalg.norm(w, axis=1, keepdims=True)
        dirs = np.where(norms > 0, w / np.where(norms > 0, norms, 1.0), w)
        s_mat = energy_matrix(g_eff, cfg.alpha_vec())
        repaired = _power_allocation_repair(dirs, h_eff, s_mat, cfg)
        if repaired is None:
            raise InfeasibleError("rank-one repair failed")
        w = repaired
    total = float(np.sum(np.abs(w) ** 2))
    if total > cfg.power:
        # the SDP meets the power row only to its feasibility tolerance
        w = w * np.sqrt(cfg.power / total)
    return PrecoderSet(w=w, v=np.zeros((0, h_eff.shape[1]))), sol.objective_value


@dataclass
class Prop1Report:
    e_with: float
    e_without: float
    tr_we: float
    reconstructed_equal: bool      # Appendix-style fold checked (or vacuous)
    construction_ran: bool


def verify_prop1(h_eff, g_eff, cfg, tol=1e-6):
    """Numerical check that the energy covariance block is unnecessary.

    Solves the relaxation with and without the energy block.  When the
    returned energy covariance is materially nonzero, folds it into a beam
    whose SINR row has a positive multiplier and confirms the folded
    solution stays feasible with the same objective.
    """
    prob_with = build_sdr1(h_eff, g_eff, cfg, include_energy=True)
    prob_wo = build_sdr1(h_eff, g_eff, cfg, include_energy=False)
    sol_with = sdp.solve(prob_with, cfg.sdp_feas_tol, cfg.sdp_gap_tol, cfg.sdp_max_iter)
    sol_wo = sdp.solve(prob_wo, cfg.sdp_feas_tol, cfg.sdp_gap_tol, cfg.sdp_max_iter)
    if (sol_with.status != sdp.SdpStatus.Optimal
            or sol_wo.status != sdp.SdpStatus.Optimal):
        raise InfeasibleError("relaxation not solvable on this instance")

    w_e = sol_with.primal[-1]
    tr_we = float(np.trace(w_e).real)
    report = Prop1Report(e_with=sol_with.objective_value,
                         e_without=sol_wo.objective_value,
                         tr_we=tr_we, reconstructed_equal=True,
                         construction_ran=False)
    if tr_we <= 1e-7 * max(1.0, cfg.power):
        return report

    report.construction_ran = True
    lam = sol_with.dual[:cfg.k_i]
    m_idx = int(np.argmax(lam))
    folded = [x_mat.copy() for x_mat in sol_with.primal[:cfg.k_i]]
    folded[m_idx] = folded[m_idx] + w_e

    # feasibility of the folded solution for the energy-free relaxation
    gamma = cfg.gamma_vec()
    sigma2 = cfg.sigma2_vec()
    s_mat = energy_matrix(g_eff, cfg.alpha_vec())
    ok = True
    scale = max(1.0, float(np.max(sigma2)))
    for i in range(cfg.k_i):
        h_i = np.outer(h_eff[i], h_eff[i].conj())
        lhs = np.trace(h_i @ folded[i]).real / gamma[i]
        lhs -= sum(np.trace(h_i @ folded[k]).real for k in range(cfg.k_i) if k != i)
        ok = ok and lhs >= sigma2[i] - tol * scale
    total = sum(np.trace(f).real for f in folded)
    ok = ok and total <= cfg.power * (1.0 + tol)
    obj_folded = sum(np.trace(s_mat @ f).real for f in folded)
    rel = abs(obj_folded - sol_with.objective_value) / max(abs(sol_with.objective_value), 1e-300)
    report.reconstructed_equal = bool(ok and rel < tol)
    return report


def build_phase_sdp(precoders, ch, cfg):
    """Lifted phase problem at fixed precoders.

    One (N+1) block V with unit diagonal; the SINR rows collapse each IDR's
    signal and interference traces into a single matrix; the objective
    carries the constant sum_j alpha_j sum_i |b_ji|^2 separately.
    """
    n = ch.g_r.shape[1]
    alpha = cfg.alpha_vec()
    gamma = cfg.gamma_vec()
    sigma2 = cfg.sigma2_vec()
    w = np.asarray(precoders.w, dtype=complex)
    k_i, k_e = cfg.k_i, cfg.k_e

    gv = ch.g_mat @ w.T                    # (N, K_I) columns G w_i
    a_vecs = np.empty((k_e, k_i, n), dtype=complex)
    b = np.empty((k_e, k_i), dtype=complex)
    for j in range(k_e):
        for i in range(k_i):
            a_vecs[j, i] = ch.g_r[j].conj() * gv[:, i]
            b[j, i] = ch.g_d[j].conj() @ w[i]
    c_vecs = np.empty((k_i, k_i, n), dtype=complex)
    d = np.empty((k_i, k_i), dtype=complex)
    for i in range(k_i):
        for k in range(k_i):
            c_vecs[i, k] = ch.h_r[i].conj() * gv[:, k]
            d[i, k] = ch.h_d[i].conj() @ w[k]

    def lift(vec, scalar):
        r_mat = np.zeros((n + 1, n + 1), dtype=complex)
        r_mat[:n, :n] = np.outer(vec, vec.conj())
        r_mat[:n, n] = vec * np.conj(scalar)
        r_mat[n, :n] = vec.conj() * scalar
        return r_mat

    re_mats = np.empty((k_e, k_i, n + 1, n + 1), dtype=complex)
    for j in range(k_e):
        for i in range(k_i):
            re_mats[j, i] = lift(a_vecs[j, i], b[j, i])
    ri_mats = np.empty((k_i, k_i, n + 1, n + 1), dtype=complex)
    for i in range(k_i):
        for k in range(k_i):
            ri_mats[i, k] = lift(c_vecs[i, k], d[i, k])

    c_obj = np.tensordot(alpha, re_mats.sum(axis=1), (0, 0))
    c_obj = 0.5 * (c_obj + c_obj.conj().T)
    obj_const = float(alpha @ np.sum(np.abs(b) ** 2, axis=1))

    prob = sdp.SdpProblem(blocks=[n + 1], objective=[c_obj], sense="max")
    for i in range(k_i):
        mat = ri_mats[i, i].copy()
        rhs = gamma[i] * sigma2[i] - abs(d[i, i]) ** 2
        for k in range(k_i):
            if k != i:
                mat -= gamma[i] * ri_mats[i, k]
                rhs += gamma[i] * abs(d[i, k]) ** 2
        mat = 0.5 * (mat + mat.conj().T)
        prob.add_constraint({0: mat}, ">=", float(rhs))
    for idx in range(n + 1):
        e_mat = np.zeros((n + 1, n + 1), dtype=complex)
        e_mat[idx, idx] = 1.0
        prob.add_constraint({0: e_mat}, "==", 1.0)

    data = PhaseSdpData(a_vecs=a_vecs, b=b, c_vecs=c_vecs, d=d,
                        re_mats=re_mats, ri_mats=ri_mats, alpha=alpha,
                        gamma=gamma, sigma2=sigma2, obj_const=obj_const)
    return prob, data


def phase_true_objective(u, data: PhaseSdpData):
    """sum_j alpha_j sum_i |u^H a_ji + b_ji|^2 for one or many u vectors."""
    u = np.atleast_2d(u)
    k_e, k_i, n = data.a_vecs.shape
    amps = u.conj() @ data.a_vecs.reshape(-1, n).T + data.b.reshape(-1)[None, :]
    vals = np.abs(amps) ** 2
    obj = vals.reshape(u.shape[0], k_e, k_i).sum(axis=2) @ data.alpha
    return obj if obj.size > 1 else float(obj[0])


def phase_sinr(u, data: PhaseSdpData):
    """Per-IDR SINR for one or many u vectors, at the fixed precoders."""
    u = np.atleast_2d(u)
    k_i, _, n = data.c_vecs.shape
    amps = u.conj() @ data.c_vecs.reshape(-1, n).T + data.d.reshape(-1)[None, :]
    pw = (np.abs(amps) ** 2).reshape(u.shape[0], k_i, k_i)
    sig = np.einsum("lii->li", pw)
    interf = pw.sum(axis=2) - sig
    return sig / (interf + data.sigma2[None, :])


def gaussian_randomization(v_mat, data: PhaseSdpData, count, rng,
                           rank1_tol=1e-6, feas_slack=1e-6):
    """Recover unit-modulus phases from the relaxed lifted solution.

    Rank-one solutions are read off the principal eigenvector; otherwise
    `count` Gaussian samples with covariance V are projected to unit modulus
    and the SINR-feasible candidate (within feas_slack relative) with the
    best true objective wins.  Returns (PhaseVector, u) or (None, None) when
    no candidate is feasible.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    n1 = v_mat.shape[0]
    n = n1 - 1
    w, vecs = herm_eig(v_mat)
    w = np.clip(w, 0.0, None)

    if w[-1] > 0 and (w[-2] / w[-1] if n1 > 1 else 0.0) < rank1_tol:
        lead = vecs[:, -1]
        u = np.exp(1j * (np.angle(lead[:n]) - np.angle(lead[n])))
        cands = u[None, :]
    else:
        factor = vecs * np.sqrt(w)[None, :]
        xi = (rng.standard_normal((count, n1))
              + 1j * rng.standard_normal((count, n1))) / np.sqrt(2.0)
        r = xi @ factor.conj().T
        u = np.exp(1j * (np.angle(r[:, :n]) - np.angle(r[:, n:n + 1])))
        cands = u

    sinr_vals = phase_sinr(cands, data)
    feas = np.all(sinr_vals >= data.gamma[None, :] * (1.0 - feas_slack), axis=1)
    if not np.any(feas):
        return None, None
    objs = np.atleast_1d(phase_true_objective(cands, data))
    objs = np.where(feas, objs, -np.inf)
    best = int(np.argmax(objs))
    u_best = cands[best]
    return phases_from_u(u_best), u_best


def solve_p1(ch, cfg, rng=None):
    """Alternate precoder and phase optimization until the fractional gain
    drops below cfg.eps, the phase relaxation goes infeasible, or the outer
    cap is reached.  Raises InfeasibleError when no feasible start exists."""
    if cfg.k_i < 1 or cfg.k_e < 1:
        raise ValueError("solve_p1 needs both receiver types present")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(cfg.seed if rng is None else rng)
    t0 = time.perf_counter()
    n = ch.g_r.shape[1]
    alpha = cfg.alpha_vec()

    # warm start: serve the EHRs alone, fall back to zero phases, then to
    # random restarts if the SINR targets are infeasible at the start
    if n > 0:
        candidates = [solve_p2(ch, cfg).phases, PhaseVector.zeros(n)]
        candidates += [PhaseVector(rng.uniform(0, 2 * np.pi, n))
                       for _ in range(cfg.phase_restarts)]
    else:
        candidates = [PhaseVector.zeros(0)]
    phases = None
    precoders = None
    for cand in candidates:
        h_eff, g_eff = effective_channels(ch, cand)
        try:
            precoders, _ = solve_precoders(h_eff, g_eff, cfg)
            phases = cand
            break
        except InfeasibleError:
            continue
    if phases is None:
        raise InfeasibleError("no feasible phase initialization found")

    _, obj = harvested_power(g_eff, precoders, alpha)
    trace = [obj]
    bounds = []
    converged = False
    reason = "max_outer"
    it = 0
    for it in range(1, cfg.max_outer_p1 + 1):
        prev = obj
        if n > 0:
            prob, data = build_phase_sdp(precoders, ch, cfg)
            sol = sdp.solve(prob, cfg.sdp_feas_tol, cfg.sdp_gap_tol, cfg.sdp_max_iter)
            if sol.status == sdp.SdpStatus.Infeasible:
                reason = "phase_sdp_infeasible"
                break
            if sol.status == sdp.SdpStatus.Optimal:
                bound = sol.objective_value + data.obj_const
                bounds.append(bound)
                new_phases, u_new = gaussian_randomization(
                    sol.primal[0], data, cfg.randomization_count, rng,
                    cfg.rank1_tol)
                if new_phases is not None:
                    cand_obj = phase_true_objective(u_new, data)
                    if cand_obj >= obj * (1.0 - 1e-12):
                        phases = new_phases
                        obj = cand_obj
                        trace.append(obj)
            # MaxIter/Unbounded phase solves leave the phases untouched

        h_eff, g_eff = effective_channels(ch, phases)
        try:
            cand_prec, _ = solve_precoders(h_eff, g_eff, cfg)
        except InfeasibleError:
            reason = "precoder_sdp_infeasible"
            break
        _, cand_obj = harvested_power(g_eff, cand_prec, alpha)
        if cand_obj >= obj * (1.0 - 1e-12):
            precoders = cand_prec
            obj = cand_obj
            trace.append(obj)
        if obj - prev <= cfg.eps * max(prev, 1e-300):
            converged = True
            reason = "fractional_increase"
            break

    h_eff, g_eff = effective_channels(ch, phases)
    sinr_vals = sinr(h_eff, precoders, cfg.sigma2_vec())
    margin = float(np.min(sinr_vals / cfg.gamma_vec() - 1.0))
    return P1Result(precoders=precoders, phases=phases, objective=obj,
                    trace=trace, sdp_bounds=bounds, iterations=it,
                    converged=converged, stop_reason=reason,
                    sinr_margin=margin,
                    power_slack=float(cfg.power - precoders.total_power()),
                    wall_time=time.perf_counter() - t0)


def result_record(cfg, res: P1Result):
    """JSON-serializable run record: config echo, trace, solution, residuals."""
    def cpairs(arr):
        a = np.asarray(arr)
        return [[float(z.real), float(z.imag)] for z in a.reshape(-1)]

    return {
        "config": cfg.to_dict(),
        "objective_w": res.objective,
        "trace_w": [float(t) for t in res.trace],
        "phase_sdp_bounds_w": [float(t) for t in res.sdp_bounds],
        "iterations": res.iterations,
        "converged": res.converged,
        "stop_reason": res.stop_reason,
        "precoders_w": {"shape": list(np.asarray(res.precoders.w).shape),
                        "entries": cpairs(res.precoders.w)},
        "theta": [float(t) for t in res.phases.theta],
        "residuals": {"sinr_margin": res.sinr_margin,
                      "power_slack_w": res.power_slack,
                      "unit_modulus_error": 0.0},
        "wall_time_s": res.wall_time,
    }
