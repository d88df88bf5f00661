"""Benchmark schemes: strongest-eigenmode precoders with SCA phases, the
no-IRS system, and separately designed information/energy beams with
interference nulling."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import sdp
from .channel import (PhaseVector, effective_channels, energy_matrix,
                      harvested_power, sinr)
from .numerics import null_space_projector, principal_eigvec
from .swipt import InfeasibleError, PrecoderSet, build_sdr1, _rank_one_extract
from .wpt import WptIterate, optimize_phases, solve_p2


class SchemeId(Enum):
    Proposed = "proposed"
    EigG = "eig_g"
    EigHd = "eig_hd"
    NoIrs = "no_irs"
    SeparateBeams = "separate_beams"


def eig_g_scheme(ch, cfg):
    """Energy precoder along the strongest eigenmode of G^H G, phases then
    optimized by the SCA loop."""
    if ch.g_mat.shape[0] == 0:
        raise ValueError("eig_g_scheme needs a reflecting surface (N >= 1)")
    gram = ch.g_mat.conj().T @ ch.g_mat
    _, v = principal_eigvec(gram)
    v0 = np.sqrt(cfg.power) * v
    phases, obj, trace = optimize_phases(ch, cfg, v0)
    return WptIterate(v0=v0, phases=phases, objective=obj,
                      iteration=len(trace) - 1, trace=trace)


def eig_hd_scheme(ch, cfg, use_irs=True):
    """Energy precoder along the strongest eigenmode of the stacked direct
    EHR channels; with use_irs the phases are SCA-optimized, otherwise the
    received power counts the direct links only."""
    if cfg.k_e < 1:
        raise ValueError("eig_hd_scheme needs at least one energy receiver")
    gram = energy_matrix(ch.g_d, np.ones(cfg.k_e))
    _, v = principal_eigvec(gram)
    v0 = np.sqrt(cfg.power) * v
    alpha = cfg.alpha_vec()
    if use_irs and ch.g_r.shape[1] > 0:
        phases, obj, trace = optimize_phases(ch, cfg, v0)
    else:
        phases = PhaseVector.zeros(0)
        obj = float(alpha @ np.abs(ch.g_d.conj() @ v0) ** 2)
        trace = [obj]
    return WptIterate(v0=v0, phases=phases, objective=obj,
                      iteration=len(trace) - 1, trace=trace)


@dataclass
class SeparateBeamsResult:
    precoders: PrecoderSet
    phases: PhaseVector
    objective: float
    feasible: bool
    min_power: float            # stage-1 total transmit power
    nulling_residual: float     # max |h^H v0| / (||v0|| ||h||) over nulled rows


def separate_beams_scheme(ch, cfg):
    """Two-stage benchmark: min-power information beams meeting the SINR
    targets, then one energy beam in the null space of the protected
    channels using the residual power.

    Phases are held fixed throughout: warm-started from the energy-only
    solve by default, or zero per cfg.separate_beams_phases.
    """
    if cfg.k_i > cfg.m - 1:
        raise ValueError("separate_beams_scheme requires K_I <= M - 1")
    n = ch.g_r.shape[1]
    if cfg.separate_beams_phases == "wpt" and n > 0 and cfg.k_e >= 1:
        phases = solve_p2(ch, cfg).phases
    else:
        phases = PhaseVector.zeros(n)
    h_eff, g_eff = effective_channels(ch, phases)
    alpha = cfg.alpha_vec()

    # stage 1: minimize total transmit power under the SINR rows
    m = cfg.m
    gamma = cfg.gamma_vec()
    sigma2 = cfg.sigma2_vec()
    eye = np.eye(m, dtype=complex)
    prob = sdp.SdpProblem(blocks=[m] * cfg.k_i, objective=[eye] * cfg.k_i,
                          sense="min")
    for i in range(cfg.k_i):
        h_i = np.outer(h_eff[i], h_eff[i].conj())
        h_i = 0.5 * (h_i + h_i.conj().T)
        mats = [h_i / gamma[i] if k == i else -h_i for k in range(cfg.k_i)]
        prob.add_constraint(mats, ">=", float(sigma2[i]))
    sol = sdp.solve(prob, cfg.sdp_feas_tol, cfg.sdp_gap_tol, cfg.sdp_max_iter)
    # the budget comparison below only needs ~4 digits, so a near-converged
    # iterate is fine on badly conditioned high-gamma instances
    near = (sol.status == sdp.SdpStatus.MaxIter
            and sol.gap < 1e-5 and sol.primal_residual < 1e-5)
    if sol.status != sdp.SdpStatus.Optimal and not near:
        raise InfeasibleError("min-power stage infeasible")
    w = np.array([_rank_one_extract(x_mat, cfg.rank1_tol)[0] for x_mat in sol.primal])
    min_power = float(np.sum(np.abs(w) ** 2))
    p_res = max(cfg.power - min_power, 0.0)
    feasible = min_power <= cfg.power * (1.0 + 1e-9)

    # stage 2: residual-power energy beam nulled on the protected channels
    nulled = h_eff if not cfg.null_on_direct else ch.h_d
    rows = [nulled[i].conj() for i in range(cfg.k_i)]
    pi_mat, degenerate = null_space_projector(rows, m)
    v0 = np.zeros(m, dtype=complex)
    if feasible and p_res > 0 and not degenerate:
        s_mat = energy_matrix(g_eff, alpha)
        proj = pi_mat @ s_mat @ pi_mat
        lam, vec = principal_eigvec(0.5 * (proj + proj.conj().T))
        if lam > 0:
            v0 = np.sqrt(p_res) * vec

    prec = PrecoderSet(w=w, v=v0[None, :])
    _, obj = harvested_power(g_eff, prec, alpha)
    resid = 0.0
    v_norm = np.linalg.norm(v0)
    if v_norm > 0:
        for i in range(cfg.k_i):
            h_norm = np.linalg.norm(nulled[i])
            if h_norm > 0:
                resid = max(resid, abs(nulled[i].conj() @ v0) / (v_norm * h_norm))
    return SeparateBeamsResult(precoders=prec, phases=phases, objective=obj,
                               feasible=feasible, min_power=min_power,
                               nulling_residual=float(resid))
