"""Small dense complex SDP solver.

Solves problems with multiple complex Hermitian PSD blocks and linear trace
constraints,

    max/min  sum_b tr(C_b X_b)
    s.t.     sum_b tr(A_{c,b} X_b)  <= / == / >=  r_c      for each c
             X_b >= 0,

with a primal-dual interior-point method (HKM direction, Mehrotra
predictor-corrector).  Each d x d complex block is handled through the
standard real symmetric embedding (a 2d x 2d real PSD block); inequality
constraints receive nonnegative slack variables, so the core iteration only
sees equality-constrained block-diagonal real SDPs.

Infeasibility is certified by an (approximate) dual improving ray; when no
certificate is found within the iteration cap the best iterate is returned
with status MaxIter.
"""

import numpy as np
from dataclasses import dataclass, field
from enum import Enum

from scipy.linalg import solve_triangular
from threadpoolctl import threadpool_limits

from .numerics import require_hermitian

_RAY_TOL = 1e-9


class SdpStatus(Enum):
    Optimal = "optimal"
    Infeasible = "infeasible"
    Unbounded = "unbounded"
    MaxIter = "max_iter"


@dataclass
class SdpConstraint:
    """One linear trace constraint: sum_b tr(mats[b] X_b) sense rhs.

    mats has one entry per block; None marks a block that does not appear.
    """
    mats: list
    sense: str  # "<=", "==", ">="
    rhs: float


@dataclass
class SdpProblem:
    """Block-structured complex SDP with linear trace constraints."""
    blocks: list            # block dimensions
    objective: list         # Hermitian cost matrix per block
    sense: str = "max"      # "max" or "min"
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError(f"unknown sense {self.sense!r}")
        if len(self.objective) != len(self.blocks):
            raise ValueError("objective must provide one matrix per block")
        self.objective = [
            require_hermitian(np.asarray(C, dtype=complex)) for C in self.objective
        ]
        for d, C in zip(self.blocks, self.objective):
            if d <= 0:
                raise ValueError("block dimensions must be positive")
            if C.shape != (d, d):
                raise ValueError("objective matrix shape does not match block")

    def add_constraint(self, mats, sense, rhs):
        """Append a constraint; mats is a dict {block_index: HermMat} or a list."""
        if isinstance(mats, dict):
            full = [None] * len(self.blocks)
            for k, A in mats.items():
                full[k] = A
            mats = full
        if len(mats) != len(self.blocks):
            raise ValueError("constraint must provide one entry per block")
        if sense not in ("<=", "==", ">="):
            raise ValueError(f"unknown constraint sense {sense!r}")
        if not np.isfinite(rhs):
            raise ValueError("constraint rhs must be finite")
        checked = []
        for d, A in zip(self.blocks, mats):
            if A is None:
                checked.append(None)
                continue
            A = require_hermitian(np.asarray(A, dtype=complex))
            if A.shape != (d, d):
                raise ValueError("constraint matrix shape does not match block")
            checked.append(A)
        self.constraints.append(SdpConstraint(checked, sense, float(rhs)))


@dataclass
class SdpSolution:
    primal: list                 # one PSD complex Hermitian matrix per block
    dual: np.ndarray             # one multiplier per constraint (see below)
    objective_value: float       # in the problem's own sense
    status: SdpStatus
    gap: float                   # relative duality gap
    iterations: int
    primal_residual: float       # scaled primal infeasibility at termination
    dual_residual: float         # scaled dual infeasibility at termination

    # Dual convention: for inequality constraints `dual[c]` is the
    # nonnegative Lagrange multiplier (complementary slackness
    # dual[c] * slack[c] ~ 0); for equality constraints it is the signed
    # sensitivity d(objective)/d(rhs).


@dataclass
class KktReport:
    primal_feasibility: float        # worst relative constraint violation
    psd_floor: float                 # most negative primal eigenvalue (hybrid-scaled)
    dual_feasibility: float          # most negative eigenvalue of the dual slack
    gap: float                       # relative duality gap from reported duals
    comp_slackness: np.ndarray       # |dual[c] * slack[c]| per constraint
    slacks: np.ndarray               # rhs - lhs per constraint (signed)


# --- real symmetric embedding -------------------------------------------------

def _embed(A):
    """Complex Hermitian d x d -> real symmetric 2d x 2d with
    tr(_embed(A) Y) = tr(A X) when Y is the (unscaled) embedding of X."""
    top = np.hstack([A.real, -A.imag])
    bot = np.hstack([A.imag, A.real])
    return 0.5 * np.vstack([top, bot])


def _extract(Y, d):
    """Real symmetric 2d x 2d embedded PSD matrix -> complex Hermitian d x d."""
    X = 0.5 * (Y[:d, :d] + Y[d:, d:]) + 0.5j * (Y[d:, :d] - Y[:d, d:])
    return 0.5 * (X + X.conj().T)


# --- internal standard form ---------------------------------------------------

class _StandardForm:
    """min sum_b <C_b, X_b> s.t. <A_cb, X_b> summed = b_c, X_b >= 0 (real sym),
    plus an elementwise-nonnegative slack vector with +/-1 coefficients."""

    def __init__(self, dims, C, b, constr_mats, lp_sign, lp_cidx):
        self.dims = dims
        self.C = C
        self.b = b
        self.m = len(b)
        self.nlp = len(lp_sign)
        self.lp_sign = lp_sign
        self.lp_cidx = lp_cidx
        # Split each block's constraint matrices into dense and purely
        # diagonal ones; diagonal rows (e.g. unit-diagonal constraints) get a
        # cheap Schur-complement path.
        self.dense_idx = []
        self.dense_mats = []
        self.diag_idx = []
        self.diag_vecs = []
        for bidx, n in enumerate(dims):
            didx, dmats, gidx, gvecs = [], [], [], []
            for c in range(self.m):
                A = constr_mats[c][bidx]
                if A is None:
                    continue
                off = A - np.diag(np.diag(A))
                if not off.any():
                    gidx.append(c)
                    gvecs.append(np.diag(A).copy())
                else:
                    didx.append(c)
                    dmats.append(A)
            self.dense_idx.append(np.array(didx, dtype=int))
            self.dense_mats.append(np.array(dmats).reshape(len(didx), n, n))
            self.diag_idx.append(np.array(gidx, dtype=int))
            self.diag_vecs.append(np.array(gvecs).reshape(len(gidx), n))

    @property
    def ntot(self):
        return sum(self.dims) + self.nlp

    def op_a(self, Xs, xlp):
        """r_c = sum_b tr(A_cb X_b) + slack terms."""
        r = np.zeros(self.m)
        for bi in range(len(self.dims)):
            if len(self.dense_idx[bi]):
                r[self.dense_idx[bi]] += np.einsum(
                    "ipq,qp->i", self.dense_mats[bi], Xs[bi], optimize=True)
            if len(self.diag_idx[bi]):
                r[self.diag_idx[bi]] += self.diag_vecs[bi] @ np.diag(Xs[bi])
        if self.nlp:
            np.add.at(r, self.lp_cidx, self.lp_sign * xlp)
        return r

    def op_at(self, y):
        """Adjoint: per-block sum_c y_c A_cb, plus the slack coordinates."""
        mats = []
        for bi, n in enumerate(self.dims):
            Z = np.zeros((n, n))
            if len(self.dense_idx[bi]):
                Z += np.tensordot(y[self.dense_idx[bi]], self.dense_mats[bi], (0, 0))
            if len(self.diag_idx[bi]):
                Z += np.diag(self.diag_vecs[bi].T @ y[self.diag_idx[bi]])
            mats.append(Z)
        zlp = self.lp_sign * y[self.lp_cidx] if self.nlp else np.zeros(0)
        return mats, zlp

    def schur(self, Xs, Sinvs, xlp, slp):
        """M_cd = sum_b tr(A_cb X_b A_db Sinv_b) + slack contributions."""
        M = np.zeros((self.m, self.m))
        self._gcache = []
        for bi in range(len(self.dims)):
            didx, gidx = self.dense_idx[bi], self.diag_idx[bi]
            G = None
            if len(didx):
                G = Xs[bi][None] @ self.dense_mats[bi] @ Sinvs[bi][None]
                M[np.ix_(didx, didx)] += np.einsum(
                    "ipq,jqp->ij", self.dense_mats[bi], G, optimize=True)
            if len(gidx):
                T = self.diag_vecs[bi] @ (Xs[bi] * Sinvs[bi]) @ self.diag_vecs[bi].T
                M[np.ix_(gidx, gidx)] += T
                if G is not None:
                    Gdiag = np.einsum("ipp->ip", G)
                    cross = Gdiag @ self.diag_vecs[bi].T
                    M[np.ix_(didx, gidx)] += cross
                    M[np.ix_(gidx, didx)] += cross.T
            self._gcache.append(G)
        if self.nlp:
            np.add.at(
                np.einsum("ii->i", M), self.lp_cidx, self.lp_sign**2 * xlp / slp)
        return 0.5 * (M + M.T)


def _maxstep_block(X, dX):
    """Largest alpha with X + alpha dX >= 0, given X > 0 (Cholesky-based)."""
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        w = np.linalg.eigvalsh(0.5 * (X + X.T))
        shift = max(0.0, -w[0]) + 1e-14 * max(1.0, w[-1])
        L = np.linalg.cholesky(X + shift * np.eye(X.shape[0]))
    Y = solve_triangular(L, dX, lower=True, check_finite=False)
    W = solve_triangular(L, Y.T, lower=True, check_finite=False)
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))[0]
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _maxstep_lp(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def _solve_standard(sf, feas_tol, gap_tol, max_iter):
    """Mehrotra predictor-corrector on the internal standard form."""
    nb = len(sf.dims)
    ntot = max(sf.ntot, 1)
    normA = max([1.0] + [np.linalg.norm(m) for ms in
                         (sf.dense_mats + [v for v in sf.diag_vecs]) for m in ms])
    normb = np.linalg.norm(sf.b)
    normC = max(1.0, max([0.0] + [np.linalg.norm(C) for C in sf.C]))

    xi_p = max(10.0, np.sqrt(ntot),
               ntot * max([0.0] + [abs(v) for v in sf.b]) / (1.0 + normA))
    xi_d = max(10.0, np.sqrt(ntot), normC, normA)

    Xs = [xi_p * np.eye(n) for n in sf.dims]
    Ss = [xi_d * np.eye(n) for n in sf.dims]
    y = np.zeros(sf.m)
    xlp = xi_p * np.ones(sf.nlp)
    slp = xi_d * np.ones(sf.nlp)

    best = None
    best_score = np.inf
    good = None            # last iterate meeting all tolerances
    good_relmu = np.inf
    polish_left = None     # bonus iterations to shrink complementarity further
    status = SdpStatus.MaxIter
    it = 0
    for it in range(1, max_iter + 1):
        gap_inner = sum(np.vdot(X, S).real for X, S in zip(Xs, Ss)) + xlp @ slp
        mu = gap_inner / ntot
        rp = sf.b - sf.op_a(Xs, xlp)
        Aty, aty_lp = sf.op_at(y)
        Rd = [C - S - Z for C, S, Z in zip(sf.C, Ss, Aty)]
        rd_lp = -slp - aty_lp

        pobj = sum(np.vdot(C, X).real for C, X in zip(sf.C, Xs))
        dobj = float(sf.b @ y)
        pinf = np.linalg.norm(rp) / (1.0 + normb)
        dinf = np.sqrt(sum(np.linalg.norm(R) ** 2 for R in Rd) +
                       np.linalg.norm(rd_lp) ** 2) / (1.0 + normC)
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        relmu = gap_inner / (1.0 + abs(pobj) + abs(dobj))

        score = max(pinf, dinf, relgap)
        if score < best_score:
            best_score = score
            best = ([X.copy() for X in Xs], [S.copy() for S in Ss],
                    y.copy(), xlp.copy(), slp.copy(),
                    pobj, dobj, pinf, dinf, relgap, it - 1)
        converged = (pinf < feas_tol and dinf < feas_tol
                     and relgap < gap_tol and relmu < 10 * gap_tol)
        if converged and relmu < good_relmu:
            good = ([X.copy() for X in Xs], [S.copy() for S in Ss],
                    y.copy(), xlp.copy(), slp.copy(),
                    pobj, dobj, pinf, dinf, relgap, it - 1)
            good_relmu = relmu
        if converged and polish_left is None:
            # a few bonus steps shrink the complementarity products well
            # below the stopping tolerance, which sharpens rank-one primal
            # faces; revert to the last compliant iterate if they misbehave
            polish_left = 4
        elif polish_left is not None:
            polish_left -= 1
        if polish_left is not None and (polish_left <= 0 or not converged):
            status = SdpStatus.Optimal
            break
        # numerical divergence guard: once mu is pushed below the noise floor
        # the Newton systems lose the primal residual; return the best iterate
        if score > 1e3 * best_score and best_score < 1e-4:
            break

        # Dual improving ray => primal infeasible.  Require the primal to be
        # clearly away from feasibility to avoid false positives on marginal
        # instances (documented heuristic).
        bty = sf.b @ y
        if it >= 3 and bty > 1e-8 and pinf > 10 * feas_tol:
            yn = y / bty
            Atyn, atyn_lp = sf.op_at(yn)
            rho = max([float(atyn_lp.max()) if sf.nlp else 0.0] +
                      [np.linalg.eigvalsh(Z)[-1] for Z in Atyn if Z.size])
            if rho <= _RAY_TOL * max(1.0, np.linalg.norm(yn)):
                status = SdpStatus.Infeasible
                break
        # Primal improving ray => dual infeasible / primal unbounded.
        if it >= 3 and pobj < -1e-8 and relgap > 10 * gap_tol and dinf > 10 * feas_tol:
            scale = -pobj
            ax = sf.op_a(Xs, xlp) / scale
            xnorm = (sum(np.linalg.norm(X) for X in Xs) +
                     (np.linalg.norm(xlp) if sf.nlp else 0.0)) / scale
            if np.linalg.norm(ax) <= _RAY_TOL * max(1.0, xnorm):
                status = SdpStatus.Unbounded
                break

        Sinvs = []
        for S in Ss:
            try:
                L = np.linalg.cholesky(S)
            except np.linalg.LinAlgError:
                w = np.linalg.eigvalsh(S)
                L = np.linalg.cholesky(S + (abs(w[0]) + 1e-14) * np.eye(S.shape[0]))
            Li = np.linalg.inv(L)
            Si = Li.T @ Li
            Sinvs.append(0.5 * (Si + Si.T))

        M = sf.schur(Xs, Sinvs, xlp, slp)
        jitter = 0.0
        for _ in range(10):
            try:
                Lm = np.linalg.cholesky(M if jitter == 0.0 else
                                        M + jitter * np.eye(sf.m))
                break
            except np.linalg.LinAlgError:
                jitter = max(jitter * 100.0,
                             1e-15 * max(1.0, np.trace(M) / max(sf.m, 1)))
        else:
            break  # hopelessly singular Schur complement; bail to best iterate

        def solve_m(r):
            z = np.linalg.solve(Lm, r)
            return np.linalg.solve(Lm.T, z)

        def newton(nu, corrX=None, corr_lp=None):
            # rhs_c = rp_c - A(nu Sinv - X - corr Sinv) + A(X Rd Sinv)
            rhs = rp.copy()
            for bi in range(nb):
                Z = nu * Sinvs[bi] - Xs[bi] + Xs[bi] @ Rd[bi] @ Sinvs[bi]
                if corrX is not None:
                    Z -= corrX[bi] @ Sinvs[bi]
                if len(sf.dense_idx[bi]):
                    rhs[sf.dense_idx[bi]] -= np.einsum(
                        "ipq,qp->i", sf.dense_mats[bi], Z, optimize=True)
                if len(sf.diag_idx[bi]):
                    rhs[sf.diag_idx[bi]] -= sf.diag_vecs[bi] @ np.diag(Z)
            if sf.nlp:
                zlp = nu / slp - xlp + xlp * rd_lp / slp
                if corr_lp is not None:
                    zlp -= corr_lp / slp
                np.add.at(rhs, sf.lp_cidx, -sf.lp_sign * zlp)
            dy = solve_m(rhs)
            # one step of iterative refinement on the Schur system
            dy += solve_m(rhs - M @ dy)
            dAty, dAty_lp = sf.op_at(dy)
            dS = [R - Z for R, Z in zip(Rd, dAty)]
            ds_lp = rd_lp - dAty_lp
            dX = []
            for bi in range(nb):
                V = nu * Sinvs[bi] - Xs[bi] - Xs[bi] @ dS[bi] @ Sinvs[bi]
                if corrX is not None:
                    V -= corrX[bi] @ Sinvs[bi]
                dX.append(0.5 * (V + V.T))
            if sf.nlp:
                dx_lp = nu / slp - xlp - xlp * ds_lp / slp
                if corr_lp is not None:
                    dx_lp -= corr_lp / slp
            else:
                dx_lp = np.zeros(0)
            return dX, dx_lp, dy, dS, ds_lp

        # predictor
        dXa, dxa, dya, dSa, dsa = newton(0.0)
        ap = min([1.0] + [_maxstep_block(Xs[bi], dXa[bi]) for bi in range(nb)] +
                 ([_maxstep_lp(xlp, dxa)] if sf.nlp else []))
        ad = min([1.0] + [_maxstep_block(Ss[bi], dSa[bi]) for bi in range(nb)] +
                 ([_maxstep_lp(slp, dsa)] if sf.nlp else []))
        gap_aff = (sum(np.vdot(Xs[bi] + ap * dXa[bi], Ss[bi] + ad * dSa[bi]).real
                       for bi in range(nb)) +
                   (xlp + ap * dxa) @ (slp + ad * dsa))
        sigma = min(1.0, max(0.0, (gap_aff / gap_inner)) ** 3) if gap_inner > 0 else 0.1

        # corrector with second-order term dXa dSa
        corrX = [dXa[bi] @ dSa[bi] for bi in range(nb)]
        corr_lp = dxa * dsa if sf.nlp else None
        dX, dx, dy, dS, ds_lp = newton(sigma * mu, corrX, corr_lp)

        tau = 0.95 if it <= 2 else 0.98
        ap = min(1.0, tau * min([np.inf] + [_maxstep_block(Xs[bi], dX[bi]) for bi in range(nb)] +
                                ([_maxstep_lp(xlp, dx)] if sf.nlp else [])))
        ad = min(1.0, tau * min([np.inf] + [_maxstep_block(Ss[bi], dS[bi]) for bi in range(nb)] +
                                ([_maxstep_lp(slp, ds_lp)] if sf.nlp else [])))
        if ap < 1e-10 and ad < 1e-10:
            break  # numerically stuck; return best iterate
        for bi in range(nb):
            Xs[bi] = 0.5 * ((Xs[bi] + ap * dX[bi]) + (Xs[bi] + ap * dX[bi]).T)
            Ss[bi] = 0.5 * ((Ss[bi] + ad * dS[bi]) + (Ss[bi] + ad * dS[bi]).T)
        y = y + ad * dy
        if sf.nlp:
            xlp = xlp + ap * dx
            slp = slp + ad * ds_lp

    if good is not None:
        status = SdpStatus.Optimal
        Xs, Ss, y, xlp, slp, pobj, dobj, pinf, dinf, relgap, _ = good
    elif status == SdpStatus.MaxIter and best is not None:
        # hand back the best iterate seen, with honest status
        Xs, Ss, y, xlp, slp, pobj, dobj, pinf, dinf, relgap, _ = best
    return status, (Xs, Ss, y, xlp, slp, pobj, dobj, pinf, dinf, relgap, it)


def solve(p: SdpProblem, feas_tol=1e-7, gap_tol=1e-7, max_iter=200) -> SdpSolution:
    """Solve the block SDP; see module docstring for the method.

    Tolerances apply to the equilibrated problem: relative primal/dual
    feasibility below feas_tol, relative duality gap below gap_tol.
    """
    nb = len(p.blocks)
    m = len(p.constraints)

    # constraint scaling by data norms, then objective and rhs scaling
    r_scale = np.ones(m)
    for c, con in enumerate(p.constraints):
        nrm = max([np.linalg.norm(A) for A in con.mats if A is not None] + [0.0])
        r_scale[c] = max(nrm, 1e-300) if nrm > 0 else 1.0
    b_raw = np.array([con.rhs / r_scale[c] for c, con in enumerate(p.constraints)])
    s_b = max(1.0, np.max(np.abs(b_raw))) if m else 1.0
    obj_sign = -1.0 if p.sense == "max" else 1.0
    # normalize the objective to unit norm in both directions, otherwise the
    # relative-gap test is meaningless for tiny (e.g. watt-scale) objectives
    s_c = max([np.linalg.norm(C) for C in p.objective] + [0.0]) or 1.0

    dims = [2 * d for d in p.blocks]
    C_int = [obj_sign * _embed(C) / s_c for C in p.objective]
    b_int = b_raw / s_b

    constr_mats = []
    lp_sign, lp_cidx = [], []
    for c, con in enumerate(p.constraints):
        mats = [None if A is None else _embed(A) / r_scale[c] for A in con.mats]
        constr_mats.append(mats)
        if con.sense == "<=":
            lp_sign.append(1.0)
            lp_cidx.append(c)
        elif con.sense == ">=":
            lp_sign.append(-1.0)
            lp_cidx.append(c)

    sf = _StandardForm(dims, C_int, b_int, constr_mats,
                       np.array(lp_sign), np.array(lp_cidx, dtype=int))
    # blocks are small (<= ~100); multithreaded BLAS only adds sync overhead
    with threadpool_limits(limits=1):
        status, res = _solve_standard(sf, feas_tol, gap_tol, max_iter)
    Xs, Ss, y_int, xlp, slp, pobj_i, dobj_i, pinf, dinf, relgap, iters = res

    # unscale: X = s_b * X_hat, y = s_c * y_hat / r_c
    primal = [s_b * _extract(Y, d) for Y, d in zip(Xs, p.blocks)]
    y_orig = s_c * y_int / r_scale

    # reported multipliers: nonnegative for inequalities (= -sigma_c * y),
    # signed sensitivity for equalities
    dual = np.zeros(m)
    for c, con in enumerate(p.constraints):
        if con.sense == "<=":
            dual[c] = -y_orig[c]
        elif con.sense == ">=":
            dual[c] = y_orig[c]
        else:
            dual[c] = -y_orig[c] if p.sense == "max" else y_orig[c]
    if status == SdpStatus.Optimal:
        # inequality multipliers are nonnegative up to roundoff; clamp
        for c, con in enumerate(p.constraints):
            if con.sense in ("<=", ">="):
                dual[c] = max(dual[c], 0.0)

    obj = sum(np.vdot(C, X).real for C, X in zip(p.objective, primal))
    if status == SdpStatus.Infeasible:
        obj = np.nan
    return SdpSolution(
        primal=primal, dual=dual, objective_value=float(obj), status=status,
        gap=float(relgap), iterations=iters,
        primal_residual=float(pinf), dual_residual=float(dinf))


def check_kkt(p: SdpProblem, s: SdpSolution) -> KktReport:
    """Audit a solution against the original (unscaled) problem data."""
    m = len(p.constraints)
    slacks = np.zeros(m)
    viol = 0.0
    for c, con in enumerate(p.constraints):
        lhs = sum(np.vdot(A, X).real for A, X in zip(con.mats, s.primal)
                  if A is not None)
        slacks[c] = con.rhs - lhs
        rel = 1.0 + abs(con.rhs)
        if con.sense == "<=":
            viol = max(viol, max(0.0, lhs - con.rhs) / rel)
        elif con.sense == ">=":
            viol = max(viol, max(0.0, con.rhs - lhs) / rel)
        else:
            viol = max(viol, abs(lhs - con.rhs) / rel)

    psd_floor = 0.0
    for X in s.primal:
        w = np.linalg.eigvalsh(X)
        psd_floor = min(psd_floor, w[0] / max(1.0, abs(w[-1])))

    # dual slack: for max problems Z_b = sum_c mu_c A_cb - C_b >= 0, for min
    # problems Z_b = C_b - sum_c mu_c A_cb >= 0, where mu is the reported
    # multiplier with a sign flip on (max, >=) and (min, <=) rows.
    def signed_mu(c):
        mu = s.dual[c]
        sense = p.constraints[c].sense
        if (p.sense == "max" and sense == ">=") or (p.sense == "min" and sense == "<="):
            mu = -mu
        return mu

    dual_feas = 0.0
    dobj = sum(signed_mu(c) * con.rhs for c, con in enumerate(p.constraints))
    for b in range(len(p.blocks)):
        Z = -p.objective[b] if p.sense == "max" else p.objective[b]
        for c, con in enumerate(p.constraints):
            A = con.mats[b]
            if A is None:
                continue
            Z = Z + signed_mu(c) * A if p.sense == "max" else Z - signed_mu(c) * A
        w = np.linalg.eigvalsh(Z)
        dual_feas = min(dual_feas, w[0] / max(1.0, abs(w[-1])))

    pobj = s.objective_value
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    comp = np.abs(s.dual * slacks)
    for c, con in enumerate(p.constraints):
        if con.sense == "==":
            comp[c] = 0.0
    return KktReport(primal_feasibility=float(viol), psd_floor=float(psd_floor),
                     dual_feasibility=float(dual_feas), gap=float(gap),
                     comp_slackness=comp, slacks=slacks)


def dump_problem(p: SdpProblem) -> str:
    """Plain-text dump for offline cross-checking.

    Format: one header line `sense nblocks dims...`; then for each block the
    objective entries as `obj b i j re im` (upper triangle, nonzeros); then
    for each constraint a line `con c sense rhs` followed by its entries as
    `c b i j re im`.
    """
    out = [f"{p.sense} {len(p.blocks)} " + " ".join(str(d) for d in p.blocks)]

    def emit(tag, bidx, A):
        lines = []
        for i in range(A.shape[0]):
            for j in range(i, A.shape[1]):
                v = A[i, j]
                if v != 0:
                    lines.append(f"{tag} {bidx} {i} {j} {v.real:.17g} {v.imag:.17g}")
        return lines

    for bidx, C in enumerate(p.objective):
        out += emit("obj", bidx, C)
    for c, con in enumerate(p.constraints):
        out.append(f"con {c} {con.sense} {con.rhs:.17g}")
        for bidx, A in enumerate(con.mats):
            if A is not None:
                out += emit(str(c), bidx, A)
    return "\n".join(out) + "\n"
