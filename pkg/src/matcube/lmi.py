"""Affine LMI systems over free scalar variables, solved through the SDP dual.

A :class:`LmiProgram` is

    maximize  g^T y   s.t.   F0_j + sum_i y_i F_ij >= 0   for each block j.

This is exactly the dual side of the standard form handled by
:mod:`matcube.sdp` (with ``C = diag(F0_j)`` and ``A_i = -diag(F_ij)``), so a
single interior-point run recovers the free variables ``y`` as the dual
multipliers.  Symmetric and skew-symmetric matrix variables are layered on
top as index bookkeeping.

Feasibility questions go through :func:`LmiProgram.solve_margin`: every
designated block gets an extra ``- t I`` and ``t`` (capped at 1) is
maximized, giving the signed verdict convention used package-wide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sdp import FEASIBILITY_TOL, SdpProblem, SdpSolution, solve

__all__ = ["LmiProgram", "MatVar", "SolverFailure", "MARGIN_CAP"]

MARGIN_CAP = 1.0


class SolverFailure(RuntimeError):
    """The interior-point solver did not reach an optimal certificate."""

    def __init__(self, solution: SdpSolution):
        super().__init__(f"SDP solver status: {solution.status} "
                         f"(residuals {solution.residuals})")
        self.solution = solution


@dataclass(frozen=True)
class MatVar:
    """A symmetric or skew-symmetric matrix of scalar free variables.

    ``indices[(a, b)]`` (a <= b for symmetric, a < b for skew) maps an entry
    to its scalar variable id; :meth:`value` reassembles the matrix.
    """

    dim: int
    kind: str                  # "sym" | "skew"
    indices: dict

    def value(self, y: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for (a, b), i in self.indices.items():
            if self.kind == "sym":
                out[a, b] = out[b, a] = y[i]
            else:
                out[a, b] = y[i]
                out[b, a] = -y[i]
        return out


class LmiProgram:
    def __init__(self):
        self._nvars = 0
        self._objective: dict = {}
        self._blocks: list = []          # (dim, F0, {var: coeff matrix})

    # -- variables --------------------------------------------------------

    def add_scalar(self, objective: float = 0.0) -> int:
        i = self._nvars
        self._nvars += 1
        if objective:
            self._objective[i] = objective
        return i

    def add_sym_matrix(self, dim: int) -> MatVar:
        idx = {(a, b): self.add_scalar() for a in range(dim) for b in range(a, dim)}
        return MatVar(dim, "sym", idx)

    def add_skew_matrix(self, dim: int) -> MatVar:
        idx = {(a, b): self.add_scalar() for a in range(dim) for b in range(a + 1, dim)}
        return MatVar(dim, "skew", idx)

    # -- blocks -----------------------------------------------------------

    def add_block(self, const: np.ndarray, coeffs: dict | None = None) -> int:
        """Add a PSD block ``const + sum_i y_i coeffs[i] >= 0``.

        Coefficient matrices accumulate if a variable id repeats.
        """
        const = np.asarray(const, dtype=float)
        dim = const.shape[0]
        merged: dict = {}
        for i, mat in (coeffs or {}).items():
            mat = np.asarray(mat, dtype=float)
            if mat.shape != (dim, dim):
                raise ValueError("coefficient shape mismatch")
            merged[i] = merged.get(i, 0.0) + 0.5 * (mat + mat.T)
        self._blocks.append((dim, 0.5 * (const + const.T), merged))
        return len(self._blocks) - 1

    def add_matvar_entry(self, block: int, var: MatVar, row_block: int,
                         col_block: int, scale: float = 1.0):
        """Place ``scale * var`` into an (n x n)-block position of a big block.

        ``row_block`` / ``col_block`` are offsets in units of ``var.dim``;
        the mirrored position is filled so the big block stays symmetric.
        """
        if var.kind == "skew" and row_block == col_block:
            raise ValueError("a skew variable on the diagonal vanishes")
        dim, const, merged = self._blocks[block]
        d = var.dim
        r, c = row_block * d, col_block * d
        sgn = 1.0 if var.kind == "sym" else -1.0
        for (a, b), i in var.indices.items():
            m = np.zeros((dim, dim))
            # the (a, b) entry of var, plus its intra-matrix mirror
            m[r + a, c + b] += scale
            if (a, b) != (b, a):
                m[r + b, c + a] += sgn * scale
            if row_block != col_block:
                m += m.T.copy()
            merged[i] = merged.get(i, 0.0) + m
        self._blocks[block] = (dim, const, merged)

    # -- solving ----------------------------------------------------------

    def _to_sdp(self) -> SdpProblem:
        dims = [blk[0] for blk in self._blocks]
        C = [blk[1] for blk in self._blocks]
        A = []
        b = np.zeros(self._nvars)
        for i in range(self._nvars):
            A.append([-blk[2].get(i, np.zeros((blk[0], blk[0]))) for blk in self._blocks])
            b[i] = self._objective.get(i, 0.0)
        return SdpProblem(dims, C, A, b)

    def solve(self, tol: float = 1e-8, max_iters: int = 200):
        """Maximize the objective; returns (y, objective value, sdp solution)."""
        sol = solve(self._to_sdp(), tol=tol, max_iters=max_iters)
        if sol.status != "optimal":
            raise SolverFailure(sol)
        return sol.y, float(sol.dual_obj), sol

    def solve_margin(self, margin_blocks=None, tol: float = 1e-8,
                     max_iters: int = 200):
        """Maximize t with the selected blocks shifted to ``>= t I`` (t <= 1).

        Returns (t_star, y, verdict) with verdict in
        {"feasible", "infeasible", "marginal"} at ``FEASIBILITY_TOL``.
        """
        margin_blocks = list(range(len(self._blocks)) if margin_blocks is None
                             else margin_blocks)
        t = self.add_scalar(objective=1.0)
        for j in margin_blocks:
            dim, const, merged = self._blocks[j]
            merged = dict(merged)
            merged[t] = merged.get(t, 0.0) - np.eye(dim)
            self._blocks[j] = (dim, const, merged)
        cap = self.add_block(np.array([[MARGIN_CAP]]), {t: -np.eye(1)})
        try:
            y, t_star, _ = self.solve(tol=tol, max_iters=max_iters)
        finally:
            # restore: drop the cap block and the t coefficients
            self._blocks.pop(cap)
            for j in margin_blocks:
                dim, const, merged = self._blocks[j]
                merged = dict(merged)
                merged.pop(t, None)
                self._blocks[j] = (dim, const, merged)
            self._nvars -= 1
            self._objective.pop(t, None)
        if t_star >= FEASIBILITY_TOL:
            verdict = "feasible"
        elif t_star <= -FEASIBILITY_TOL:
            verdict = "infeasible"
        else:
            verdict = "marginal"
        return float(t_star), y[:-1], verdict
