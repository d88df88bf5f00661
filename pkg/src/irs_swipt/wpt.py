"""Energy-only optimization: alternating closed-form precoder and reflect
phases.

The precoder step transmits along the principal eigenvector of the weighted
energy matrix S; the phase step maximizes a first-order surrogate of the
convex quadratic phase objective, which has the elementwise closed form
u_n = eta_n / |eta_n|.

Phase bookkeeping: the optimization variable u collects the reflect
coefficients through the channel product, so sum_n conj(u_n) a_j[n] is the
reflected path seen by receiver j and the physical phase shift is
theta_n = -arg(u_n).
"""

import numpy as np
from dataclasses import dataclass, field

from .channel import PhaseVector, effective_channels, energy_matrix
from .numerics import principal_eigvec


@dataclass
class WptIterate:
    v0: np.ndarray            # (M,) common energy precoder, sqrt-watts
    phases: PhaseVector
    objective: float          # weighted sum received power, W
    iteration: int
    trace: list = field(default_factory=list)   # objective after every update
    converged: bool = True
    degenerate: bool = False


def u_from_phases(phases: PhaseVector):
    return np.conj(phases.u)


def phases_from_u(u):
    return PhaseVector(np.mod(-np.angle(u), 2 * np.pi))


def optimal_energy_precoder(s_mat, power):
    """sqrt(P) times the principal eigenvector of S; (v0, degenerate)."""
    lam, v = principal_eigvec(s_mat)
    if lam <= 0 or np.linalg.norm(s_mat) == 0:
        v = np.zeros(s_mat.shape[0], dtype=complex)
        v[0] = 1.0
        return np.sqrt(power) * v, True
    return np.sqrt(power) * v, False


def sca_phase_coefficients(ch, v0, alpha):
    """Per-EHR reflected/direct coupling (a_j, b_j) and A = sum alpha a a^H.

    a_j[n] = conj(g_r_j[n]) (G v0)[n], b_j = g_d_j^H v0, so the received
    amplitude at EHR j is sum_n conj(u_n) a_j[n] + b_j.
    """
    gv = ch.g_mat @ v0                    # (N,)
    a = ch.g_r.conj() * gv[None, :]       # (K_E, N)
    b = ch.g_d.conj() @ v0                # (K_E,)
    n = a.shape[1]
    a_big = np.zeros((n, n), dtype=complex)
    for j in range(a.shape[0]):
        a_big += alpha[j] * np.outer(a[j], a[j].conj())
    a_big = 0.5 * (a_big + a_big.conj().T)
    return a, b, a_big


def phase_objective(u, a, b, alpha):
    """Weighted received power sum_j alpha_j |u^H a_j + b_j|^2 at fixed v0."""
    vals = np.conj(u) @ a.T + b
    return float(alpha @ np.abs(vals) ** 2)


def surrogate_value(u, u_hat, a, b, alpha, a_big):
    """First-order lower bound of the phase objective, tight at u_hat."""
    q = (alpha * np.conj(b)) @ a          # sum_j alpha_j conj(b_j) a_j
    lin = 2.0 * np.real(np.conj(u) @ (a_big @ u_hat + q))
    return float(lin - np.real(np.conj(u_hat) @ a_big @ u_hat)
                 + alpha @ np.abs(b) ** 2)


def sca_phase_step(u_hat, a_big, a, b, alpha):
    """One surrogate maximization: u_n = eta_n/|eta_n| (1 where eta_n = 0)."""
    eta = a_big @ u_hat + (alpha * np.conj(b)) @ a
    mag = np.abs(eta)
    u = np.where(mag > 0, eta / np.where(mag > 0, mag, 1.0), 1.0 + 0j)
    return u


def global_rotation_step(u, a, b, alpha):
    """Exact ascent over the common-rotation orbit u e^{j phi}.

    The objective restricted to the orbit is const + 2 Re{e^{-j phi} z} with
    z = sum_j alpha_j (u^H a_j) conj(b_j), maximized at phi = arg z.  This
    removes the slowly-converging global-phase mode of the elementwise step
    without breaking monotonicity.
    """
    amps = np.conj(u) @ a.T
    z = alpha @ (amps * np.conj(b))
    if abs(z) == 0:
        return u
    return u * np.exp(1j * np.angle(z))


def optimize_phases(ch, cfg, v0, phases0=None):
    """SCA loop over the phases with the precoder held fixed.

    Returns (phases, objective, trace).
    """
    alpha = cfg.alpha_vec()
    n = ch.g_r.shape[1]
    if n == 0:
        _, g_eff = effective_channels(ch, PhaseVector.zeros(0))
        obj = float(alpha @ np.abs(g_eff.conj() @ v0) ** 2)
        return PhaseVector.zeros(0), obj, [obj]
    a, b, a_big = sca_phase_coefficients(ch, v0, alpha)
    u = u_from_phases(phases0) if phases0 is not None else np.ones(n, dtype=complex)
    obj = phase_objective(u, a, b, alpha)
    trace = [obj]
    for _ in range(cfg.max_iter_p2):
        u = sca_phase_step(u, a_big, a, b, alpha)
        u = global_rotation_step(u, a, b, alpha)
        new = phase_objective(u, a, b, alpha)
        trace.append(new)
        if new - obj <= cfg.eps * max(obj, 1e-300):
            obj = new
            break
        obj = new
    return phases_from_u(u), obj, trace


def solve_p2(ch, cfg, phases0=None, restarts=0, rng=None):
    """Alternate the closed-form precoder and one SCA phase pass.

    Stops when the fractional objective increase over one full pass drops
    below cfg.eps or after cfg.max_iter_p2 passes.  With restarts > 0 the
    best of additional random phase initializations is kept.
    """
    if cfg.k_e < 1:
        raise ValueError("solve_p2 needs at least one energy receiver")
    best = _solve_p2_once(ch, cfg, phases0)
    if restarts > 0:
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        n = ch.g_r.shape[1]
        for _ in range(restarts):
            init = PhaseVector(rng.uniform(0.0, 2 * np.pi, size=n))
            cand = _solve_p2_once(ch, cfg, init)
            if cand.objective > best.objective:
                best = cand
    return best


def _solve_p2_once(ch, cfg, phases0):
    alpha = cfg.alpha_vec()
    n = ch.g_r.shape[1]
    phases = phases0 if phases0 is not None else PhaseVector.zeros(n)
    u = u_from_phases(phases)

    _, g_eff = effective_channels(ch, phases)
    s_mat = energy_matrix(g_eff, alpha)
    v0, degenerate = optimal_energy_precoder(s_mat, cfg.power)
    obj = float(alpha @ np.abs(g_eff.conj() @ v0) ** 2)
    trace = [obj]

    if n == 0 or degenerate:
        return WptIterate(v0=v0, phases=phases, objective=obj, iteration=1,
                          trace=trace, converged=True, degenerate=degenerate)

    converged = False
    it = 0
    for it in range(1, cfg.max_iter_p2 + 1):
        prev = obj
        a, b, a_big = sca_phase_coefficients(ch, v0, alpha)
        u = sca_phase_step(u, a_big, a, b, alpha)
        u = global_rotation_step(u, a, b, alpha)
        obj_phase = phase_objective(u, a, b, alpha)
        trace.append(obj_phase)
        phases = phases_from_u(u)

        _, g_eff = effective_channels(ch, phases)
        s_mat = energy_matrix(g_eff, alpha)
        v0, degenerate = optimal_energy_precoder(s_mat, cfg.power)
        obj = float(alpha @ np.abs(g_eff.conj() @ v0) ** 2)
        trace.append(obj)
        if degenerate:
            break
        if obj - prev <= cfg.eps * max(prev, 1e-300):
            converged = True
            break

    return WptIterate(v0=v0, phases=phases, objective=obj, iteration=it,
                      trace=trace, converged=converged, degenerate=degenerate)
