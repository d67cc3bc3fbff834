"""Dense real-matrix kernels.

Lyapunov and continuous algebraic Riccati solvers, symmetric eigen
decomposition, Kronecker products, minimum-norm least squares, and
definiteness/Hurwitz tests.  Everything works on plain 2-D float64
``numpy`` arrays; outputs of the symmetric solvers are explicitly
symmetrized to kill backend drift.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    IllConditioned,
    NoStabilizingSolution,
    NotHurwitz,
    NotSymmetric,
)

__all__ = [
    "SolverReport",
    "as_matrix",
    "kron",
    "solve_lyapunov",
    "solve_care",
    "eig_sym",
    "is_hurwitz",
    "is_positive_definite",
    "solve_lsq",
    "is_stabilizable",
    "is_detectable",
]


@dataclass(frozen=True)
class SolverReport:
    """Convergence record of a matrix-equation solve."""

    residual_norm: float
    iterations: int
    converged: bool


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array with at least one row and column."""
    m = np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1) if m.size else m
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {np.shape(a)}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _require_square(m: np.ndarray, name: str) -> np.ndarray:
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def _require_symmetric(m: np.ndarray, name: str, rtol: float = 1e-10) -> np.ndarray:
    """Check relative asymmetry and return the symmetrized matrix."""
    _require_square(m, name)
    gap = np.linalg.norm(m - m.T)
    if gap > rtol * (1.0 + np.linalg.norm(m)):
        raise NotSymmetric(f"{name} is asymmetric: ||m - m.T|| = {gap:.3e}")
    return 0.5 * (m + m.T)


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result equals a[i, j] * b."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def max_real_eig(a) -> float:
    """Largest real part over the eigenvalues of a general square matrix."""
    a = _require_square(as_matrix(a, "a"), "a")
    return float(np.max(np.linalg.eigvals(a).real))


def is_hurwitz(a, margin: float = 0.0) -> bool:
    """True iff every eigenvalue of ``a`` has real part < -margin."""
    return max_real_eig(a) < -margin


def is_positive_definite(m, tol: float = 1e-9) -> bool:
    """True iff the symmetric matrix ``m`` has minimum eigenvalue > tol."""
    m = _require_symmetric(as_matrix(m, "m"), "m")
    return float(np.linalg.eigvalsh(m)[0]) > tol


def eig_sym(m, asym_rtol: float = 1e-10):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(w, V)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvectors in the columns of ``V`` so that ``m = V diag(w) V.T``.
    """
    m = _require_symmetric(as_matrix(m, "m"), "m", rtol=asym_rtol)
    w, v = np.linalg.eigh(m)
    return w, v


def solve_lyapunov(a, w, hurwitz_margin: float = 0.0, rtol: float = 1e-9):
    """Solve the continuous Lyapunov equation a X + X a' + w = 0.

    Parameters
    ----------
    a : array, square and Hurwitz (real parts < -hurwitz_margin)
    w : array, symmetric
    rtol : residual target, relative to 1 + ||w||_F

    Returns
    -------
    (X, SolverReport) with X symmetric.

    Raises ``NotHurwitz`` when ``a`` has an eigenvalue with real part
    >= -hurwitz_margin (the equation would not have a unique PSD-compatible
    solution) and ``IllConditioned`` when the residual target cannot be met.
    """
    a = _require_square(as_matrix(a, "a"), "a")
    w = _require_symmetric(as_matrix(w, "w"), "w")
    if a.shape[0] != w.shape[0]:
        raise ValueError(f"shape mismatch: a is {a.shape}, w is {w.shape}")
    worst = max_real_eig(a)
    if worst >= -hurwitz_margin:
        raise NotHurwitz(
            f"coefficient matrix has an eigenvalue with real part {worst:.3e}"
        )

    tol = rtol * (1.0 + np.linalg.norm(w))
    try:
        x = scipy.linalg.solve_continuous_lyapunov(a, -w)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - backend failure
        raise IllConditioned(f"Lyapunov solve failed: {exc}") from exc
    x = 0.5 * (x + x.T)

    iterations = 0
    residual = np.linalg.norm(a @ x + x @ a.T + w)
    # iterative refinement on the residual equation, same solver
    while residual > tol and iterations < 3:
        corr = scipy.linalg.solve_continuous_lyapunov(a, -(a @ x + x @ a.T + w))
        x = 0.5 * (x + x.T + corr + corr.T)
        residual = np.linalg.norm(a @ x + x @ a.T + w)
        iterations += 1
    if residual > tol:
        raise IllConditioned(
            f"Lyapunov residual {residual:.3e} above tolerance {tol:.3e}"
        )
    return x, SolverReport(float(residual), iterations, True)


def solve_care(
    a,
    s,
    q,
    rtol: float = 1e-8,
    imag_axis_rtol: float = 1e-8,
    max_refine: int = 8,
):
    """Stabilizing solution of a' X + X a - X s X + q = 0.

    ``s`` and ``q`` must be symmetric positive semidefinite.  The solution is
    obtained from the stable invariant subspace of the 2n x 2n Hamiltonian
    matrix (ordered real Schur form), then refined by Newton/Kleinman steps
    until the residual is below ``rtol * (1 + ||q||_F)``.

    Returns ``(X, SolverReport)`` with X symmetric, X >= 0, and a - s X
    Hurwitz.  Raises ``NoStabilizingSolution`` when the Hamiltonian has
    eigenvalues on the imaginary axis (within a scale-relative tolerance)
    or the subspace does not split evenly, and ``IllConditioned`` when the
    residual target cannot be reached.
    """
    a = _require_square(as_matrix(a, "a"), "a")
    s = _require_symmetric(as_matrix(s, "s"), "s")
    q = _require_symmetric(as_matrix(q, "q"), "q")
    n = a.shape[0]
    if s.shape[0] != n or q.shape[0] != n:
        raise ValueError("a, s, q must share the same size")
    for name, m in (("s", s), ("q", q)):
        if np.linalg.eigvalsh(m)[0] < -1e-8 * (1.0 + np.linalg.norm(m)):
            raise ValueError(f"{name} must be positive semidefinite")

    ham = np.block([[a, -s], [-q, -a.T]])
    axis_tol = imag_axis_rtol * (1.0 + np.linalg.norm(ham))
    ham_eigs = np.linalg.eigvals(ham)
    if np.min(np.abs(ham_eigs.real)) < axis_tol:
        raise NoStabilizingSolution(
            "Hamiltonian has eigenvalues on the imaginary axis"
        )

    _, z, sdim = scipy.linalg.schur(ham, output="real", sort="lhp")
    if sdim != n:
        raise NoStabilizingSolution(
            f"stable invariant subspace has dimension {sdim}, expected {n}"
        )
    z11 = z[:n, :n]
    z21 = z[n:, :n]
    try:
        x = np.linalg.solve(z11.T, z21.T).T
    except np.linalg.LinAlgError as exc:
        raise IllConditioned("stable subspace basis is singular") from exc
    x = 0.5 * (x + x.T)

    tol = rtol * (1.0 + np.linalg.norm(q))
    residual = np.linalg.norm(a.T @ x + x @ a - x @ s @ x + q)
    iterations = 0
    # Newton/Kleinman: linearize around the current iterate and re-solve
    while residual > tol and iterations < max_refine:
        closed = a - s @ x
        if max_real_eig(closed) >= 0.0:
            break
        x = scipy.linalg.solve_continuous_lyapunov(closed.T, -(x @ s @ x + q))
        x = 0.5 * (x + x.T)
        residual = np.linalg.norm(a.T @ x + x @ a - x @ s @ x + q)
        iterations += 1
    if residual > tol:
        raise IllConditioned(
            f"Riccati residual {residual:.3e} above tolerance {tol:.3e}"
        )

    if max_real_eig(a - s @ x) >= 0.0:
        raise NoStabilizingSolution("computed solution is not stabilizing")
    min_eig = float(np.linalg.eigvalsh(x)[0])
    if min_eig < -1e-9 * (1.0 + np.linalg.norm(x)):
        raise NoStabilizingSolution(
            f"computed solution is indefinite (min eigenvalue {min_eig:.3e})"
        )
    return x, SolverReport(float(residual), iterations, True)


def solve_lsq(coef, rhs):
    """Minimum-norm least squares: minimize ||coef @ x - rhs||_2.

    Returns ``(x, residual_norm)``.  Rank deficiency is handled by the
    minimum-norm convention of the underlying SVD solve.
    """
    coef = as_matrix(coef, "coef")
    rhs = np.asarray(rhs, dtype=float)
    vector = rhs.ndim == 1
    rhs_mat = rhs.reshape(-1, 1) if vector else rhs
    if rhs_mat.shape[0] != coef.shape[0]:
        raise ValueError(
            f"rhs has {rhs_mat.shape[0]} rows, expected {coef.shape[0]}"
        )
    x, _, _, _ = np.linalg.lstsq(coef, rhs_mat, rcond=None)
    residual = float(np.linalg.norm(coef @ x - rhs_mat))
    return (x.ravel() if vector else x), residual


def _pbh_rank_ok(a: np.ndarray, b: np.ndarray, lam: complex) -> bool:
    n = a.shape[0]
    pencil = np.hstack([a - lam * np.eye(n), b])
    return np.linalg.matrix_rank(pencil) == n


def is_stabilizable(a, b, real_tol: float = 1e-9) -> bool:
    """PBH test: every eigenvalue of ``a`` with Re >= -real_tol is controllable."""
    a = _require_square(as_matrix(a, "a"), "a")
    b = as_matrix(b, "b")
    for lam in np.linalg.eigvals(a):
        if lam.real >= -real_tol and not _pbh_rank_ok(a, b, lam):
            return False
    return True


def is_detectable(c, a, real_tol: float = 1e-9) -> bool:
    """PBH test on the dual pair: (c, a) detectable iff (a', c') stabilizable."""
    a = _require_square(as_matrix(a, "a"), "a")
    c = as_matrix(c, "c")
    return is_stabilizable(a.T, c.T, real_tol=real_tol)
