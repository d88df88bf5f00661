"""Independent brute-force verifiers: phase-grid enumeration, random search
and finite-difference gradients.  These never share code paths with the
solvers they audit."""

import numpy as np
from dataclasses import dataclass

from .channel import PhaseVector, effective_channels, energy_matrix, harvested_power

_CHUNK = 1 << 14


@dataclass
class GridSpec:
    levels: int = 16
    max_n: int = 6

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("levels must be >= 2")


def _check_grid(n, grid):
    if n > grid.max_n:
        raise ValueError(f"exhaustive search capped at N <= {grid.max_n}, got N = {n}")
    if grid.levels ** max(n, 1) > 20_000_000:
        raise ValueError("grid too large to enumerate")


def _grid_chunks(n, levels):
    """Yield (L, n) arrays of theta combinations covering the full grid."""
    total = levels ** n
    step = 2 * np.pi / levels
    shape = (levels,) * n
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        digits = np.stack(np.unravel_index(idx, shape), axis=1) if n else np.zeros((1, 0), int)
        yield step * digits


def p2_objective_of_theta(ch, cfg, theta):
    """Weighted received power with the analytically optimal precoder at theta."""
    alpha = cfg.alpha_vec()
    _, g_eff = effective_channels(ch, PhaseVector(np.asarray(theta, float)))
    s_mat = energy_matrix(g_eff, alpha)
    lam = np.linalg.eigvalsh(s_mat)[-1]
    return float(cfg.power * max(lam, 0.0))


def grid_search_p2(ch, cfg, grid: GridSpec):
    """Exhaustive phase grid for the energy-only problem.

    Per grid point the optimal precoder is the principal eigenvector of the
    induced S, so the objective is P * lambda_max(S).  Returns
    (best_theta, best_objective).
    """
    n = ch.g_r.shape[1]
    _check_grid(n, grid)
    alpha = cfg.alpha_vec()
    if n == 0:
        return np.zeros(0), p2_objective_of_theta(ch, cfg, np.zeros(0))

    # g_j(theta) = B_j conj(phi) + g_d_j with phi = e^{j theta}
    b_mats = np.array([ch.g_mat.conj().T * ch.g_r[j][None, :]
                       for j in range(cfg.k_e)])           # (K_E, M, N)
    best_obj, best_theta = -np.inf, None
    for thetas in _grid_chunks(n, grid.levels):
        phi_c = np.exp(-1j * thetas)                        # conj(e^{j theta})
        m = ch.g_mat.shape[1]
        s_all = np.zeros((thetas.shape[0], m, m), dtype=complex)
        for j in range(cfg.k_e):
            g_all = phi_c @ b_mats[j].T + ch.g_d[j][None, :]   # (L, M)
            s_all += alpha[j] * g_all[:, :, None] * g_all.conj()[:, None, :]
        lam = np.linalg.eigvalsh(s_all)[:, -1]
        k = int(np.argmax(lam))
        if lam[k] > best_obj:
            best_obj = float(lam[k])
            best_theta = thetas[k].copy()
    return best_theta, float(cfg.power * best_obj)


def grid_delta(objective, theta, levels):
    """Empirical grid slack: largest objective drop under a one-level
    perturbation of a single coordinate at the grid optimum."""
    f0 = objective(theta)
    step = 2 * np.pi / levels
    delta = 0.0
    for i in range(len(theta)):
        for s in (step, -step):
            t = theta.copy()
            t[i] = np.mod(t[i] + s, 2 * np.pi)
            delta = max(delta, abs(f0 - objective(t)))
    return delta


def grid_search_p1(ch, cfg, grid: GridSpec):
    """Exhaustive phase grid for the SINR-constrained problem.

    Each grid point costs one precoder SDP, so the dimension cap is tight
    (N <= 4).  Returns (best_theta, best_objective); with no feasible grid
    point, (None, -inf).
    """
    from .swipt import InfeasibleError, solve_precoders

    n = ch.g_r.shape[1]
    if n > min(grid.max_n, 4):
        raise ValueError(f"grid_search_p1 capped at N <= 4, got N = {n}")
    alpha = cfg.alpha_vec()
    best_obj, best_theta = -np.inf, None
    for thetas in _grid_chunks(n, grid.levels):
        for theta in thetas:
            phases = PhaseVector(theta)
            h_eff, g_eff = effective_channels(ch, phases)
            try:
                prec, _ = solve_precoders(h_eff, g_eff, cfg)
            except InfeasibleError:
                continue
            _, obj = harvested_power(g_eff, prec, alpha)
            if obj > best_obj:
                best_obj, best_theta = obj, theta.copy()
    return best_theta, best_obj


def p1_objective_of_theta(ch, cfg, theta):
    """Harvested power with SDP-optimal precoders at fixed theta; -inf if
    the SINR targets are infeasible there."""
    from .swipt import InfeasibleError, solve_precoders

    phases = PhaseVector(np.asarray(theta, float))
    h_eff, g_eff = effective_channels(ch, phases)
    try:
        prec, _ = solve_precoders(h_eff, g_eff, cfg)
    except InfeasibleError:
        return -np.inf
    _, obj = harvested_power(g_eff, prec, cfg.alpha_vec())
    return obj


def random_search(ch, cfg, trials, rng):
    """Best energy-only objective over uniformly random phase draws."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    n = ch.g_r.shape[1]
    best = -np.inf
    for _ in range(trials):
        theta = rng.uniform(0.0, 2 * np.pi, size=n)
        best = max(best, p2_objective_of_theta(ch, cfg, theta))
    return best


def finite_difference_gradient(objective, theta, h=1e-6):
    """Central-difference gradient of objective(theta) per coordinate."""
    if h <= 0:
        raise ValueError("h must be positive")
    theta = np.asarray(theta, float)
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        grad[i] = (objective(tp) - objective(tm)) / (2.0 * h)
    return grad
