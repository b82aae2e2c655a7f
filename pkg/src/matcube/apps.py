"""Applications: robust quadratic stability and binary-quadratic bounds.

Stability: an uncertain system ``x' = (A_0 + sum d_i A_i) x`` over the cube
``|d_i| <= R`` is quadratically stable when one Lyapunov matrix ``P > 0``
works for every parameter value, i.e. the affine family
``H(P, d) = -(A(d)^T P + P A(d))`` is positive definite on the cube.  The
searches below couple the cube certificates with the free variable ``P``
(normalized to ``tr P = n``) in a single LMI solve.

Binary quadratic programming: bounds on ``max / min x^T A x`` over
``x in {-1, 1}^n`` through the cube-PSD reformulation
``[[t, x^T], [x, A^{-1}]] >= 0 <=> t >= x^T A x`` (for ``A > 0``), which
yields upper bounds on the max; minima are bounded below by complementing
with ``B = (lambda_max(A) + 1) I - A``.  MAXCUT bounds follow from
``cut(x) = W_total / 2 - x^T W x / 4``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube import FEASIBILITY_TOL, VERTEX_GUARD, _vertices
from .lmi import LmiProgram
from .numerics import as_symmetric, frob, min_eig
from .sdp import SdpProblem, solve
from .lmi import SolverFailure

__all__ = [
    "UncertainLinearSystem",
    "StabilityReport",
    "WeightedGraph",
    "stability_feasible",
    "stability_radius",
    "bqp_to_cube",
    "quadform_max",
    "bqp_min_lower_bound",
    "maxcut_bound",
    "STRICTNESS_EPS",
    "RADIUS_CAP",
]

# Strictness shift: stability blocks must clear eps * I, not just 0.
STRICTNESS_EPS = 1e-6
# Bisection caps for the stability radius search.
RADIUS_CAP = float(2 ** 20)
RADIUS_FLOOR = float(2 ** -20)


@dataclass(frozen=True)
class UncertainLinearSystem:
    """dx/dt = (A_0 + sum d_i A_i) x with |d_i| <= radius."""

    n: int
    m: int
    A: tuple
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        A = tuple(np.asarray(a, dtype=float) for a in self.A)
        if len(A) != self.m + 1:
            raise ValueError(f"expected {self.m + 1} matrices, got {len(A)}")
        for a in A:
            if a.shape != (self.n, self.n):
                raise ValueError("system matrix dimension mismatch")
            if not np.all(np.isfinite(a)):
                raise ValueError("system matrix has non-finite entries")
        object.__setattr__(self, "A", A)

    def with_radius(self, radius: float) -> "UncertainLinearSystem":
        return UncertainLinearSystem(self.n, self.m, self.A, radius)


@dataclass(frozen=True)
class StabilityReport:
    method: str
    radius: float
    t_star: float
    verdict: str               # "feasible" | "infeasible" | "marginal"
    P: np.ndarray | None

    @property
    def stable(self) -> bool:
        return self.verdict == "feasible"


def _traced_sym_var(prog: LmiProgram, n: int):
    """Symmetric n x n variable normalized to trace n.

    The last diagonal entry is eliminated (``p_nn = n - sum p_ii``).
    Returns (constant part, {scalar id: effective basis matrix}, assembler).
    """
    ids = {}
    basis = {}
    for a in range(n):
        for b in range(a, n):
            if (a, b) == (n - 1, n - 1):
                continue
            i = prog.add_scalar()
            ids[(a, b)] = i
            e = np.zeros((n, n))
            e[a, b] = e[b, a] = 1.0
            if a == b:
                e[n - 1, n - 1] = -1.0
            basis[i] = e
    const = np.zeros((n, n))
    const[n - 1, n - 1] = float(n)

    def assemble(y: np.ndarray) -> np.ndarray:
        out = const.copy()
        for i, e in basis.items():
            out += y[i] * e
        return out

    return const, basis, assemble


def _lyap(a: np.ndarray, p: np.ndarray) -> np.ndarray:
    """The Lyapunov-derivative coefficient -(a^T p + p a)."""
    return -(a.T @ p + p @ a)


def stability_feasible(sys: UncertainLinearSystem, method: str = "quad",
                       eps: float = STRICTNESS_EPS) -> StabilityReport:
    """Search for a common Lyapunov matrix by the requested cube method.

    ``method`` is one of ``vertex`` (exact, 2^m blocks), ``bental``
    (scalar-certificate relaxation) or ``quad`` (quadratic refutation).
    """
    n, m, R = sys.n, sys.m, sys.radius
    A = sys.A
    prog = LmiProgram()
    P0, Pbasis, P_assemble = _traced_sym_var(prog, n)
    eye = np.eye(n)
    prog.add_block(P0, {i: e for i, e in Pbasis.items()})   # P >= t I

    if method == "vertex":
        if m > VERTEX_GUARD:
            raise ValueError(f"m = {m} exceeds the vertex enumeration guard")
        for delta in _vertices(m):
            Ad = A[0] + sum(R * delta[i] * A[i + 1] for i in range(m))
            prog.add_block(_lyap(Ad, P0) - eps * eye,
                           {i: _lyap(Ad, e) for i, e in Pbasis.items()})
    elif method == "bental":
        Xs = [prog.add_sym_matrix(n) for _ in range(m)]
        b0 = prog.add_block(_lyap(A[0], P0) - eps * eye,
                            {i: _lyap(A[0], e) for i, e in Pbasis.items()})
        for X in Xs:
            prog.add_matvar_entry(b0, X, 0, 0, scale=-1.0)
        for k, X in enumerate(Xs, start=1):
            for sgn in (1.0, -1.0):
                blk = prog.add_block(
                    sgn * R * _lyap(A[k], P0),
                    {i: sgn * R * _lyap(A[k], e) for i, e in Pbasis.items()})
                prog.add_matvar_entry(blk, X, 0, 0)
    elif method == "quad":
        dim = n * (m + 1)
        const = np.zeros((dim, dim))
        const[m * n:, m * n:] = _lyap(A[0], P0) - eps * eye
        coeffs = {}
        for i, e in Pbasis.items():
            mat = np.zeros((dim, dim))
            mat[m * n:, m * n:] = _lyap(A[0], e)
            for k in range(1, m + 1):
                half = 0.5 * R * _lyap(A[k], e)
                mat[0:n, k * n:(k + 1) * n] += half
                mat[k * n:(k + 1) * n, 0:n] += half.T
            coeffs[i] = mat
        for k in range(1, m + 1):
            half = 0.5 * R * _lyap(A[k], P0)
            const[0:n, k * n:(k + 1) * n] += half
            const[k * n:(k + 1) * n, 0:n] += half.T
        blk = prog.add_block(const, coeffs)
        for i in range(m):
            V = prog.add_sym_matrix(n)
            prog.add_matvar_entry(blk, V, i, i)
            prog.add_matvar_entry(blk, V, m, m, scale=-1.0)
        for i in range(1, m + 1):
            K = prog.add_skew_matrix(n)
            prog.add_matvar_entry(blk, K, 0, i)
            for j in range(i + 1, m + 1):
                K2 = prog.add_skew_matrix(n)
                prog.add_matvar_entry(blk, K2, i, j)
    else:
        raise ValueError(f"unknown stability method {method!r}")

    t_star, y, verdict = prog.solve_margin()
    P = P_assemble(y) if verdict != "infeasible" else None
    return StabilityReport(method, R, float(t_star), verdict, P)


def stability_radius(sys: UncertainLinearSystem, method: str = "quad",
                     tol_r: float = 1e-3) -> float:
    """Largest certified radius by bisection (0 when even tiny cubes fail).

    Doubles up from the system's radius to bracket, caps at ``RADIUS_CAP``
    (returned as-is when the method never fails below it), then bisects to
    relative tolerance ``tol_r``.
    """

    def ok(R: float) -> bool:
        return stability_feasible(sys.with_radius(R), method).stable

    R = sys.radius
    if ok(R):
        lo = R
        hi = None
        while lo < RADIUS_CAP:
            nxt = min(2 * lo, RADIUS_CAP)
            if ok(nxt):
                lo = nxt
            else:
                hi = nxt
                break
        if hi is None:
            return float(lo)
    else:
        hi = R
        lo = None
        while hi > RADIUS_FLOOR:
            nxt = hi / 2
            if ok(nxt):
                lo = nxt
                break
            hi = nxt
        if lo is None:
            return 0.0
    while hi - lo > tol_r * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return float(lo)


# ---------------------------------------------------------------------------
# binary quadratic programming / MAXCUT


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph given by its symmetric weight matrix."""

    n: int
    W: np.ndarray

    def __post_init__(self):
        W = as_symmetric(self.W)
        if W.shape != (self.n, self.n):
            raise ValueError("weight matrix dimension mismatch")
        if np.any(np.abs(np.diag(W)) > 1e-12):
            raise ValueError("weight matrix must have zero diagonal")
        object.__setattr__(self, "W", W)

    @property
    def total_weight(self) -> float:
        return float(self.W.sum() / 2.0)

    def cut_value(self, x: np.ndarray) -> float:
        return float((self.W.sum() - x @ self.W @ x) / 4.0)


def bqp_to_cube(A: np.ndarray, t: float):
    """The cube instance whose PSD-ness over the unit cube says t >= x^T A x
    for every x in the cube (A must be positive definite)."""
    from .cube import MatrixCubeInstance

    A = as_symmetric(A)
    n = A.shape[0]
    if min_eig(A) <= 0:
        raise ValueError("conversion needs a positive definite matrix")
    H0 = np.zeros((n + 1, n + 1))
    H0[0, 0] = t
    H0[1:, 1:] = np.linalg.inv(A)
    H = [H0]
    for i in range(n):
        e = np.zeros((n + 1, n + 1))
        e[0, i + 1] = e[i + 1, 0] = 1.0
        H.append(e)
    return MatrixCubeInstance(n + 1, n, tuple(H))


def _quadform_max_lmi(B: np.ndarray, method: str) -> float:
    """min t s.t. the cube family of ``bqp_to_cube(B, t)`` passes ``method``."""
    B = as_symmetric(B)
    n = B.shape[0]
    Binv = np.linalg.inv(B)
    N = n + 1
    Hs = []
    for i in range(n):
        e = np.zeros((N, N))
        e[0, i + 1] = e[i + 1, 0] = 1.0
        Hs.append(e)
    H0c = np.zeros((N, N))
    H0c[1:, 1:] = Binv
    E11 = np.zeros((N, N))
    E11[0, 0] = 1.0

    prog = LmiProgram()
    t = prog.add_scalar(objective=-1.0)      # maximize -t  ==  minimize t
    if method == "bental":
        Xs = [prog.add_sym_matrix(N) for _ in range(n)]
        b0 = prog.add_block(H0c, {t: E11})
        for X in Xs:
            prog.add_matvar_entry(b0, X, 0, 0, scale=-1.0)
        for k, X in enumerate(Xs):
            for sgn in (1.0, -1.0):
                blk = prog.add_block(sgn * Hs[k])
                prog.add_matvar_entry(blk, X, 0, 0)
    elif method == "quad":
        m = n
        dim = N * (m + 1)
        const = np.zeros((dim, dim))
        const[m * N:, m * N:] = H0c
        tcoeff = np.zeros((dim, dim))
        tcoeff[m * N:, m * N:] = E11
        for k in range(1, m + 1):
            const[0:N, k * N:(k + 1) * N] += 0.5 * Hs[k - 1]
            const[k * N:(k + 1) * N, 0:N] += 0.5 * Hs[k - 1]
        blk = prog.add_block(const, {t: tcoeff})
        for i in range(m):
            V = prog.add_sym_matrix(N)
            prog.add_matvar_entry(blk, V, i, i)
            prog.add_matvar_entry(blk, V, m, m, scale=-1.0)
        for i in range(1, m + 1):
            K = prog.add_skew_matrix(N)
            prog.add_matvar_entry(blk, K, 0, i)
            for j in range(i + 1, m + 1):
                K2 = prog.add_skew_matrix(N)
                prog.add_matvar_entry(blk, K2, i, j)
    else:
        raise ValueError(f"unknown method {method!r}")
    _, obj, _ = prog.solve()
    return float(-obj)


def _gw_sdp_value(B: np.ndarray, tol: float = 1e-8) -> float:
    """max <B, Y> s.t. diag Y = 1, Y >= 0 (the classical SDP relaxation)."""
    B = as_symmetric(B)
    n = B.shape[0]
    A = []
    for i in range(n):
        e = np.zeros((n, n))
        e[i, i] = 1.0
        A.append([e])
    sol = solve(SdpProblem([n], [-B], A, np.ones(n)), tol=tol)
    if sol.status != "optimal":
        raise SolverFailure(sol)
    return float(-sol.primal_obj)


def quadform_max(B: np.ndarray, method: str = "quad") -> float:
    """Upper bound (exact for ``method='exact'``) on max x^T B x over
    x in {-1, 1}^n, for positive definite B."""
    B = as_symmetric(B)
    n = B.shape[0]
    if method == "exact":
        if n > VERTEX_GUARD:
            raise ValueError(f"n = {n} exceeds the vertex enumeration guard")
        return max(float(x @ B @ x) for x in _vertices(n))
    if method == "gw_sdp":
        return _gw_sdp_value(B)
    if min_eig(B) <= 0:
        raise ValueError("cube reformulation needs a positive definite matrix")
    return _quadform_max_lmi(B, method)


def bqp_min_lower_bound(A: np.ndarray, method: str = "quad") -> float:
    """Lower bound (exact for ``method='exact'``) on min x^T A x over
    x in {-1, 1}^n, via complementation with a definite shift."""
    A = as_symmetric(A)
    n = A.shape[0]
    d = float(np.linalg.eigvalsh(A)[-1]) + 1.0
    B = d * np.eye(n) - A
    return d * n - quadform_max(B, method)


def maxcut_bound(graph: WeightedGraph, method: str = "quad") -> float:
    """Upper bound (exact for ``method='exact'``) on the maximum cut weight.

    Uses ``cut(x) = (sum of weights - x^T W x) / 4`` and a certified lower
    bound on ``min x^T W x``, obtained through the positive-definite shift
    ``A = W + cI``.
    """
    W = graph.W
    n = graph.n
    if method == "exact":
        if n > VERTEX_GUARD:
            raise ValueError(f"n = {n} exceeds the vertex enumeration guard")
        return max(graph.cut_value(x) for x in _vertices(n))
    c = abs(float(np.linalg.eigvalsh(W)[0])) + 1.0
    A = W + c * np.eye(n)
    t = bqp_min_lower_bound(A, method)       # lower bound on min x^T A x
    return float((W.sum() - (t - c * n)) / 4.0)
