"""Dense symmetric linear algebra helpers shared by the rest of the package.

Symmetric matrices are plain ``numpy`` arrays; the helpers here centralize
symmetrization, eigenvalue queries and the relative tolerances used by all
PSD checks so that every module agrees on what "numerically PSD" means.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "NumericalError",
    "as_symmetric",
    "eig_sym",
    "min_eig",
    "frob",
    "psd_check",
    "psd_margin",
    "solve_linear",
    "kron",
    "random_symmetric",
    "random_psd",
]


class NumericalError(RuntimeError):
    """Raised when a dense factorization or eigensolve cannot be completed."""


def as_symmetric(a, tol: float = 1e-9) -> np.ndarray:
    """Return a float symmetric copy of ``a``.

    Rejects matrices whose asymmetry exceeds ``tol`` relative to scale,
    so silent symmetrization never hides corrupted input.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.linalg.norm(a)))
    skew = float(np.linalg.norm(a - a.T))
    if skew > tol * scale:
        raise ValueError(f"matrix is not symmetric (asymmetry {skew:.3e})")
    return 0.5 * (a + a.T)


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, "fro"))


def eig_sym(a: np.ndarray):
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues ascending, orthonormal eigenvectors as columns).
    """
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericalError("eig_sym: non-finite input")
    try:
        w, v = np.linalg.eigh(0.5 * (a + a.T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - QL failure is rare
        raise NumericalError(f"symmetric eigensolve failed: {exc}") from exc
    return w, v


def min_eig(a: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    w, _ = eig_sym(a)
    return float(w[0])


def psd_check(a: np.ndarray, tol: float = 1e-8) -> bool:
    """True iff ``a`` is PSD up to ``-tol`` relative to max(1, ||a||_F)."""
    a = np.asarray(a, dtype=float)
    return min_eig(a) >= -tol * max(1.0, frob(a))


def psd_margin(a: np.ndarray) -> float:
    """Smallest eigenvalue scaled by max(1, ||a||_F); >= 0 means PSD."""
    a = np.asarray(a, dtype=float)
    return min_eig(a) / max(1.0, frob(a))


def solve_linear(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``m x = b`` for square nonsingular ``m`` with a residual check."""
    m = np.asarray(m, dtype=float)
    b = np.asarray(b, dtype=float)
    try:
        x = np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"linear solve failed: {exc}") from exc
    resid = np.linalg.norm(m @ x - b)
    bound = 1e-10 * (np.linalg.norm(m) * np.linalg.norm(x) + np.linalg.norm(b))
    if resid > max(bound, 1e-12):
        raise NumericalError(f"linear solve residual {resid:.3e} too large")
    return x


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n)) * scale
    return 0.5 * (a + a.T)


def random_psd(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    b = rng.standard_normal((n, n)) * scale
    return b @ b.T / np.sqrt(n)
