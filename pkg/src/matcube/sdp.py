"""Dense primal-dual interior-point solver for block-diagonal SDPs.

Standard form:

    (P)  min  <C, X>    s.t.  <A_k, X> = b_k  (k = 1..p),   X >= 0
    (D)  max  b^T y     s.t.  sum_k y_k A_k + Z = C,        Z >= 0

with all matrix data block-diagonal over a shared block structure.  The
solver is an infeasible-start Mehrotra predictor-corrector with the HKM
scaling; the Schur complement is formed densely per block, which is ample
for the desk-scale problems this package generates.

LMI feasibility questions are posed through :func:`solve_margin`: maximize
the smallest slack ``t`` such that every block is ``>= t I`` (capped at
``t <= 1``), giving a signed feasible / infeasible / marginal verdict.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SdpProblem",
    "SdpSolution",
    "SdpError",
    "solve",
    "FEASIBILITY_TOL",
]

# Signed margin below which a feasibility verdict is reported as marginal.
FEASIBILITY_TOL = 1e-6

_FRACTION_TO_BOUNDARY = 0.98


class SdpError(RuntimeError):
    """Structural problem errors (dimension mismatches, bad data)."""


@dataclass
class SdpProblem:
    """Block-diagonal standard-form SDP (minimization)."""

    block_dims: list
    C: list                    # one symmetric matrix per block
    A: list                    # A[k] = list of blocks for constraint k
    b: np.ndarray

    def __post_init__(self):
        self.block_dims = [int(d) for d in self.block_dims]
        if any(d < 1 for d in self.block_dims):
            raise SdpError("block dimensions must be positive")
        self.b = np.asarray(self.b, dtype=float)
        if not np.all(np.isfinite(self.b)):
            raise SdpError("right-hand side has non-finite entries")
        self.C = [self._blk(c, d) for c, d in zip(self.C, self.block_dims)]
        if len(self.C) != len(self.block_dims):
            raise SdpError("objective block count mismatch")
        if len(self.A) != len(self.b):
            raise SdpError("constraint count mismatch")
        self.A = [
            [self._blk(ab, d) for ab, d in zip(ak, self.block_dims)] for ak in self.A
        ]
        for ak in self.A:
            if len(ak) != len(self.block_dims):
                raise SdpError("constraint block count mismatch")

    @staticmethod
    def _blk(a, d):
        a = np.asarray(a, dtype=float)
        if a.shape != (d, d):
            raise SdpError(f"block has shape {a.shape}, expected {(d, d)}")
        if not np.all(np.isfinite(a)):
            raise SdpError("matrix block has non-finite entries")
        return 0.5 * (a + a.T)

    @property
    def n_constraints(self) -> int:
        return len(self.b)


@dataclass
class SdpSolution:
    status: str                # "optimal" | "max-iterations" | "numerical-failure"
    X: list
    y: np.ndarray
    Z: list
    primal_obj: float
    dual_obj: float
    iterations: int = 0
    residuals: dict = field(default_factory=dict)


def _inner(blocks_a, blocks_b) -> float:
    return float(sum(np.tensordot(a, b) for a, b in zip(blocks_a, blocks_b)))


def _stacked(problem: SdpProblem):
    """Per-block (p, d, d) arrays of constraint matrices for fast Schur builds."""
    out = []
    for j, d in enumerate(problem.block_dims):
        out.append(np.stack([ak[j] for ak in problem.A]) if problem.A
                   else np.zeros((0, d, d)))
    return out


def _step_length(x_chol, dx) -> float:
    """Largest alpha with X + alpha dX psd, scaled by fraction-to-boundary."""
    alpha = 1.0
    for lo, d in zip(x_chol, dx):
        # eigenvalues of L^-1 dX L^-T
        w = np.linalg.solve(lo, np.linalg.solve(lo, d).T)
        lam = float(np.linalg.eigvalsh(0.5 * (w + w.T))[0])
        if lam < 0:
            alpha = min(alpha, -_FRACTION_TO_BOUNDARY / lam)
    return alpha


def _chol(blocks):
    try:
        return [np.linalg.cholesky(blk) for blk in blocks]
    except np.linalg.LinAlgError:
        return None


def solve(problem: SdpProblem, tol: float = 1e-8, max_iters: int = 200,
          verbose: bool = False) -> SdpSolution:
    """Run the predictor-corrector iteration on ``problem``.

    Returns a solution whose status is ``optimal`` only when primal and dual
    feasibility and the relative duality gap are all below ``tol``-level
    thresholds; positive-definiteness loss yields ``numerical-failure``.
    """
    dims = problem.block_dims
    p = problem.n_constraints
    total_dim = sum(dims)
    b, C = problem.b, problem.C
    A_st = _stacked(problem)

    scale = max(
        1.0,
        max((float(np.abs(c).max()) for c in C), default=1.0),
        float(np.abs(b).max()) if p else 1.0,
    )
    eta = max(10.0, np.sqrt(scale))
    X = [eta * np.eye(d) for d in dims]
    Z = [eta * np.eye(d) for d in dims]
    y = np.zeros(p)

    log_level = os.environ.get("MATCUBE_LOG", "quiet") if not verbose else "debug"

    best = None
    for it in range(max_iters):
        # residuals
        rp = b - np.array([_inner(ak, X) for ak in problem.A]) if p else np.zeros(0)
        Rd = [C[j] - Z[j] - sum(y[k] * problem.A[k][j] for k in range(p))
              for j in range(len(dims))]
        mu = _inner(X, Z) / total_dim
        pobj = _inner(C, X)
        dobj = float(b @ y)
        rel_p = np.linalg.norm(rp, np.inf) / (1.0 + np.linalg.norm(b, np.inf)) if p else 0.0
        rel_d = max(np.linalg.norm(r, "fro") for r in Rd) / (
            1.0 + max(np.linalg.norm(c, "fro") for c in C))
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))

        if log_level == "debug":
            print(json.dumps({"iter": it, "mu": mu, "rp": rel_p, "rd": rel_d,
                              "gap": gap}), file=sys.stderr)

        if rel_p <= 10 * tol and rel_d <= 10 * tol and gap <= 10 * tol:
            return SdpSolution("optimal", X, y, Z, pobj, dobj, it,
                              {"primal": rel_p, "dual": rel_d, "gap": gap})
        best = (rel_p, rel_d, gap)

        z_chol = _chol(Z)
        x_chol = _chol(X)
        if z_chol is None or x_chol is None:
            return SdpSolution("numerical-failure", X, y, Z, pobj, dobj, it,
                              {"primal": rel_p, "dual": rel_d, "gap": gap})

        zinv = [np.linalg.inv(zb) for zb in Z]

        # Schur complement M[j,k] = sum_blocks tr(A_j Z^-1 A_k X)
        if p:
            M = np.zeros((p, p))
            T_blocks = []
            for jb in range(len(dims)):
                T = zinv[jb] @ A_st[jb] @ X[jb]            # (p, d, d)
                T_blocks.append(T)
                d = dims[jb]
                M += A_st[jb].reshape(p, d * d) @ T.transpose(0, 2, 1).reshape(p, d * d).T
        else:
            M = np.zeros((0, 0))
            T_blocks = [None] * len(dims)

        def direction(k_blocks):
            """Solve for (dy, dX, dZ) given complementarity residual blocks K."""
            rhs_blocks = [k_blocks[j] - X[j] - zinv[j] @ Rd[j] @ X[j]
                          for j in range(len(dims))]
            rhs = rp - np.array([_inner(ak, rhs_blocks) for ak in problem.A]) \
                if p else np.zeros(0)
            try:
                dy = np.linalg.solve(M, rhs) if p else np.zeros(0)
            except np.linalg.LinAlgError:
                dy, *_ = np.linalg.lstsq(M, rhs, rcond=None)
            dZ = [Rd[j] - sum(dy[k] * problem.A[k][j] for k in range(p))
                  for j in range(len(dims))]
            dX = []
            for j in range(len(dims)):
                g = k_blocks[j] - X[j] - zinv[j] @ dZ[j] @ X[j]
                dX.append(0.5 * (g + g.T))
            return dy, dX, dZ

        # predictor (sigma = 0)
        zero_k = [np.zeros((d, d)) for d in dims]
        dy_a, dX_a, dZ_a = direction(zero_k)
        ap = _step_length(x_chol, dX_a)
        ad = _step_length(z_chol, dZ_a)
        mu_aff = _inner([X[j] + ap * dX_a[j] for j in range(len(dims))],
                        [Z[j] + ad * dZ_a[j] for j in range(len(dims))]) / total_dim
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        corr_k = [sigma * mu * zinv[j] - zinv[j] @ dZ_a[j] @ dX_a[j]
                  for j in range(len(dims))]
        dy, dX, dZ = direction(corr_k)
        ap = _step_length(x_chol, dX)
        ad = _step_length(z_chol, dZ)
        if not (np.all(np.isfinite(dy)) if p else True) or \
           any(not np.all(np.isfinite(d)) for d in dX + dZ):
            return SdpSolution("numerical-failure", X, y, Z, pobj, dobj, it,
                              {"primal": rel_p, "dual": rel_d, "gap": gap})

        X = [X[j] + ap * dX[j] for j in range(len(dims))]
        Z = [Z[j] + ad * dZ[j] for j in range(len(dims))]
        y = y + ad * dy

    rel_p, rel_d, gap = best if best is not None else (np.inf,) * 3
    return SdpSolution("max-iterations", X, y, Z, _inner(C, X), float(b @ y),
                      max_iters, {"primal": rel_p, "dual": rel_d, "gap": gap})
