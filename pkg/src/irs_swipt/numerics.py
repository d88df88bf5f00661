"""Dense complex linear algebra kernel: Hermitian eigendecompositions,
principal eigenvectors and null-space projectors used by every solver module."""

import numpy as np

HERM_TOL = 1e-12


def _hybrid_tol(tol, scale):
    return tol * max(1.0, scale)


def require_hermitian(H, tol=HERM_TOL):
    """Validate conjugate symmetry and return the symmetrized (H + H^H)/2.

    Raises ValueError if the anti-Hermitian part exceeds tol * max(1, ||H||_F)
    or if any entry is non-finite.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H.view(float))):
        raise ValueError("matrix contains NaN or Inf entries")
    nrm = np.linalg.norm(H)
    asym = np.linalg.norm(H - H.conj().T)
    if asym > _hybrid_tol(tol, nrm):
        raise ValueError(f"matrix is not Hermitian: asymmetry {asym:.3e} exceeds tolerance")
    return 0.5 * (H + H.conj().T)


def herm_eig(H, tol=HERM_TOL):
    """Eigendecomposition H = V diag(w) V^H of a Hermitian matrix.

    Returns (w, V) with w real ascending and V orthonormal columns.
    Input is symmetrized to absorb accumulation error; non-Hermitian
    input beyond tolerance is rejected.
    """
    Hs = require_hermitian(H, tol)
    w, V = np.linalg.eigh(Hs)
    return w, V


def principal_eigvec(H, tol=HERM_TOL):
    """Largest eigenvalue and a unit eigenvector of a Hermitian matrix.

    Returns (lam_max, v) with ||v|| = 1 and v^H H v = lam_max.
    """
    w, V = herm_eig(H, tol)
    return float(w[-1]), V[:, -1].copy()


def null_space_projector(rows, dim, tol=1e-10):
    """Orthogonal projector onto the joint null space of the given row vectors.

    `rows` are 1-D complex vectors of length `dim`, interpreted as row
    vectors: the returned Pi satisfies r @ Pi ~ 0 for every row r, with
    Pi^2 = Pi and Pi^H = Pi.  With no rows the identity is returned.

    Returns (Pi, degenerate) where degenerate is True when the rows span
    the full space (Pi is then the zero matrix).
    """
    rows = [np.asarray(r, dtype=complex).reshape(-1) for r in rows]
    if any(r.shape[0] != dim for r in rows):
        raise ValueError("row length does not match dim")
    if not rows:
        return np.eye(dim, dtype=complex), False
    R = np.vstack(rows)
    # Pi projects onto null(R) = null space of the row stack: Pi = I - V_r V_r^H
    # with V_r the right singular vectors of R above the rank cutoff.
    _, s, Vh = np.linalg.svd(R)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    Vr = Vh[:rank].conj().T
    Pi = np.eye(dim, dtype=complex) - Vr @ Vr.conj().T
    degenerate = rank >= dim
    if degenerate:
        Pi = np.zeros((dim, dim), dtype=complex)
    return Pi, degenerate
