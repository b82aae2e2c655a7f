"""Certificate searches for PSD-ness of an affine matrix map over a hypercube.

Everything here works on a :class:`MatrixCubeInstance` ``G(d) = H_0 + sum
d_i H_i`` over ``|d_i| <= R``.  Radius is folded into the coefficients up
front, so all searches run on the unit cube.  The exact ground truth is the
vertex oracle (``2^m`` eigenchecks); the certificate routes are, from most
to least conservative: the scalar-certificate LMI test, the quadratic
(degree-2) refutation, and the constructive degree-``2m`` certificate.  A
dual moment program recovers worst-case ``(d, x)`` pairs when its rank
condition permits rank-one extraction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import mpoly
from .lmi import LmiProgram, SolverFailure
from .mpoly import GramForm, MatrixPoly, coeff_residual, expand_gram, in_Q1, in_Q2
from .numerics import NumericalError, as_symmetric, eig_sym, frob, kron, min_eig
from .sdp import FEASIBILITY_TOL, SdpProblem, solve

__all__ = [
    "MatrixCubeInstance",
    "BenTalCertificate",
    "QuadraticCertificate",
    "FullCertificate",
    "SimplexCertificate",
    "VerificationResult",
    "DualSolution",
    "Atom",
    "ConstructionError",
    "g_poly",
    "vertex_oracle",
    "bental_test",
    "quad_test",
    "quad_margin",
    "build_Nm",
    "monomial_basis_z",
    "construct_full_certificate",
    "verify_certificate",
    "simplex_test",
    "m2_certificate",
    "definite_case_certificate",
    "dual_solve",
    "rank_one_extract",
]

# Max parameter count for exhaustive vertex enumeration.
VERTEX_GUARD = 24
# Relative tolerance on polynomial-identity residuals in verification.
IDENTITY_TOL = 1e-8
# Relative PSD tolerance on certificate matrices.
PSD_TOL = 1e-8


class ConstructionError(RuntimeError):
    """A closed-form certificate construction failed its identity check."""


@dataclass(frozen=True)
class MatrixCubeInstance:
    """The data of the matrix cube problem: H_0..H_m and a cube radius."""

    n: int
    m: int
    H: tuple
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        H = tuple(as_symmetric(h) for h in self.H)
        if len(H) != self.m + 1:
            raise ValueError(f"expected {self.m + 1} matrices, got {len(H)}")
        for h in H:
            if h.shape != (self.n, self.n):
                raise ValueError("coefficient matrix dimension mismatch")
        object.__setattr__(self, "H", H)

    @property
    def Hn(self) -> tuple:
        """Coefficients after folding the radius into H_1..H_m (unit cube)."""
        return (self.H[0],) + tuple(self.radius * h for h in self.H[1:])

    def scale(self) -> float:
        return max(1.0, max(frob(h) for h in self.Hn))


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class BenTalCertificate:
    """Scalar certificates X_1..X_m of the Ben-Tal / Nemirovski LMI test."""

    X: tuple

    variant = "bental"


@dataclass(frozen=True)
class QuadraticCertificate:
    """Degree-2 refutation: PSD structured Gram L, multipliers X_i = L_ii."""

    m: int
    X: tuple
    L: np.ndarray
    S0: MatrixPoly

    variant = "quadratic"


@dataclass(frozen=True)
class FullCertificate:
    """Degree-2m refutation: SOS S_0 over the multilinear basis, S_i in Q_1."""

    S0: GramForm
    S: tuple                  # S_1..S_m as MatrixPoly
    path: str                 # "closed-form" | "least-squares"

    variant = "full"


@dataclass(frozen=True)
class SimplexCertificate:
    """Exact simplex certificate S_0..S_{m+1}, all constant PSD matrices."""

    S: tuple

    variant = "simplex"


@dataclass(frozen=True)
class VerificationResult:
    valid: bool
    residual: float
    psd_margins: dict
    reasons: tuple = ()


# ---------------------------------------------------------------------------
# basic maps


def g_poly(inst: MatrixCubeInstance) -> MatrixPoly:
    """The affine map as a MatrixPoly over the unit cube."""
    Hn = inst.Hn
    terms = {(0,) * inst.m: Hn[0]}
    for i in range(1, inst.m + 1):
        e = tuple(1 if j == i - 1 else 0 for j in range(inst.m))
        terms[e] = Hn[i]
    return MatrixPoly(inst.n, inst.m, terms)


def _vertices(m: int):
    """Deterministic vertex order: delta_i = (-1)^(bit i-1 of the counter)."""
    for j in range(1 << m):
        yield np.array([1.0 if not (j >> i) & 1 else -1.0 for i in range(m)])


def _eval_vertex(Hn, delta):
    g = Hn[0].copy()
    for i, h in enumerate(Hn[1:]):
        g += delta[i] * h
    return g


def vertex_oracle(inst: MatrixCubeInstance):
    """Exact minimum eigenvalue of G over all cube vertices, with a witness.

    The instance is PSD on the whole cube iff the returned minimum is >= 0.
    """
    if inst.m > VERTEX_GUARD:
        raise ValueError(
            f"m = {inst.m} exceeds the 2^m enumeration guard ({VERTEX_GUARD}); "
            "use a certificate method instead")
    Hn = inst.Hn
    best = None
    best_delta = None
    for delta in _vertices(inst.m):
        lam = min_eig(_eval_vertex(Hn, delta))
        if best is None or lam < best:
            best, best_delta = lam, delta
    return float(best), best_delta


# ---------------------------------------------------------------------------
# LMI-backed searches


def bental_test(inst: MatrixCubeInstance):
    """Search the scalar-certificate LMI system; None when infeasible."""
    Hn = inst.Hn
    n, m = inst.n, inst.m
    prog = LmiProgram()
    Xs = [prog.add_sym_matrix(n) for _ in range(m)]
    b0 = prog.add_block(Hn[0])
    for X in Xs:
        prog.add_matvar_entry(b0, X, 0, 0, scale=-1.0)
    for i, X in enumerate(Xs):
        bp = prog.add_block(Hn[i + 1])
        prog.add_matvar_entry(bp, X, 0, 0)
        bm = prog.add_block(-Hn[i + 1])
        prog.add_matvar_entry(bm, X, 0, 0)
    t_star, y, verdict = prog.solve_margin()
    if t_star < -FEASIBILITY_TOL:
        return None
    cert = BenTalCertificate(tuple(X.value(y) for X in Xs))
    if not verify_certificate(inst, cert).valid:
        return None
    return cert


def _quad_program(inst: MatrixCubeInstance, shift_var: bool = False):
    """LMI program whose single big block is the structured Gram matrix L.

    Free variables: L_00..L_{m-1,m-1} (symmetric; L_mm is eliminated through
    the trace-split equality), skew parts of L_0i, and skew blocks L_ij.
    With ``shift_var`` a scalar t with objective 1 is subtracted from the
    eliminated diagonal block, turning the search into max t such that the
    refutation exists for H_0 - t I.
    """
    Hn = inst.Hn
    n, m = inst.n, inst.m
    prog = LmiProgram()
    big = np.zeros((n * (m + 1), n * (m + 1)))
    big[m * n:, m * n:] = Hn[0]
    for i in range(1, m + 1):
        big[0:n, i * n:(i + 1) * n] = 0.5 * Hn[i]
        big[i * n:(i + 1) * n, 0:n] = 0.5 * Hn[i]
    blk = prog.add_block(big)
    diag_vars = []
    for i in range(m):                       # L_00 .. L_{m-1,m-1}
        V = prog.add_sym_matrix(n)
        diag_vars.append(V)
        prog.add_matvar_entry(blk, V, i, i)
        prog.add_matvar_entry(blk, V, m, m, scale=-1.0)
    skew0 = []
    for i in range(1, m + 1):                # skew parts of L_0i
        K = prog.add_skew_matrix(n)
        skew0.append(K)
        prog.add_matvar_entry(blk, K, 0, i)
    for i in range(1, m + 1):                # skew blocks L_ij, i < j
        for j in range(i + 1, m + 1):
            K = prog.add_skew_matrix(n)
            prog.add_matvar_entry(blk, K, i, j)
    t = None
    if shift_var:
        t = prog.add_scalar(objective=1.0)
        dim = n * (m + 1)
        coeff = np.zeros((dim, dim))
        coeff[m * n:, m * n:] = -np.eye(n)
        prog._blocks[blk] = (
            prog._blocks[blk][0], prog._blocks[blk][1],
            {**prog._blocks[blk][2], t: coeff},
        )
    return prog, blk, t


def _assemble_block(prog: LmiProgram, blk: int, y: np.ndarray) -> np.ndarray:
    dim, const, merged = prog._blocks[blk]
    out = const.copy()
    for i, coeff in merged.items():
        if i < len(y):
            out += y[i] * coeff
    return out


def _quad_certificate_from_L(inst: MatrixCubeInstance, L: np.ndarray):
    n, m = inst.n, inst.m
    basis = tuple(
        tuple(1 if j == i - 1 else 0 for j in range(m)) for i in range(m + 1)
    )
    gram = GramForm(n, m, basis, L)
    X = tuple(L[i * n:(i + 1) * n, i * n:(i + 1) * n].copy() for i in range(1, m + 1))
    return QuadraticCertificate(m, X, 0.5 * (L + L.T), expand_gram(gram))


def quad_test(inst: MatrixCubeInstance):
    """Search the quadratic refutation SDP; None when infeasible."""
    prog, blk, _ = _quad_program(inst)
    t_star, y, verdict = prog.solve_margin(margin_blocks=[blk])
    if t_star < -FEASIBILITY_TOL:
        return None
    L = _assemble_block(prog, blk, y)
    cert = _quad_certificate_from_L(inst, L)
    if not verify_certificate(inst, cert).valid:
        return None
    return cert


def quad_margin(inst: MatrixCubeInstance) -> float:
    """Largest t such that the quadratic refutation exists for H_0 - t I."""
    prog, blk, t = _quad_program(inst, shift_var=True)
    _, obj, _ = prog.solve()
    return float(obj)


# ---------------------------------------------------------------------------
# constructive degree-2m certificate


def monomial_basis_z(m: int) -> tuple:
    """Recursive multilinear basis; entry j's exponent is j's bit pattern."""
    return tuple(
        tuple((j >> i) & 1 for i in range(m)) for j in range(1 << m)
    )


def build_Nm(inst: MatrixCubeInstance) -> np.ndarray:
    """The recursively stacked vertex matrix; PSD whenever G is PSD on the cube."""
    lam, delta = vertex_oracle(inst)
    if lam < -1e-9 * inst.scale():
        raise ValueError(
            f"instance is not PSD at vertex {delta.tolist()} "
            f"(min eigenvalue {lam:.3e})")
    Hn = inst.Hn
    N = Hn[0].copy()
    for k in range(1, inst.m + 1):
        G_k = kron(np.eye(1 << (k - 1)), Hn[k])
        N = np.block([[N, G_k], [G_k, N]])
    return N


def _elementary_square_sum(m: int, size: int, excluded: tuple) -> MatrixPoly:
    """Scalar polynomial: sum over |A| = size subsets avoiding ``excluded`` of
    the product of delta_j^2 for j in A (1-based index convention)."""
    allowed = [j for j in range(1, m + 1) if j not in excluded]
    terms = {}
    for A in itertools.combinations(allowed, size):
        e = tuple(2 if (i + 1) in A else 0 for i in range(m))
        terms[e] = terms.get(e, 0.0) + 1.0
    return mpoly.scalar_poly(terms, m)


def _bidiagonal_M(k: int) -> np.ndarray:
    """Lower-bidiagonal matrix with diagonal k..1 and subdiagonal -1..-(k-1)."""
    M = np.diag(np.arange(k, 0, -1.0))
    for i in range(1, k):
        M[i, i - 1] = -float(i)
    return M


def _closed_form_multipliers(inst: MatrixCubeInstance):
    Hn = inst.Hn
    n, m = inst.n, inst.m
    c = np.linalg.solve(_bidiagonal_M(m), np.eye(m)[0] - 2.0 ** (-m))
    d = (np.linalg.solve(_bidiagonal_M(m - 1), np.eye(m - 1)[0] - 2.0 ** (-m + 1))
         if m >= 2 else np.zeros(0))
    S = []
    for k in range(1, m + 1):
        poly_c = mpoly.scalar_poly({(0,) * m: c[0]}, m)
        for i in range(1, m):
            poly_c = poly_c + _elementary_square_sum(m, i, (k,)).scale(c[i])
        Sk = mpoly.constant_poly(Hn[0], m).mul_scalar_poly(poly_c)
        for i in range(1, m + 1):
            if i == k:
                continue
            poly_d = mpoly.scalar_poly(
                {tuple(1 if j == i - 1 else 0 for j in range(m)): d[0]}, m
            ) if m >= 2 else mpoly.scalar_poly({}, m)
            for j in range(1, m - 1):
                shift = _elementary_square_sum(m, j, (i, k)).scale(d[j])
                e_i = {tuple(1 if q == i - 1 else 0 for q in range(m)): 1.0}
                poly_d = poly_d + shift.mul_scalar_poly(
                    mpoly.scalar_poly(e_i, m))
            Sk = Sk + mpoly.constant_poly(Hn[i], m).mul_scalar_poly(poly_d)
        S.append(Sk)
    return S


def _one_minus_sq(i: int, m: int) -> MatrixPoly:
    e = tuple(2 if j == i else 0 for j in range(m))
    return mpoly.scalar_poly({(0,) * m: 1.0, e: -1.0}, m)


def _identity_residual(inst: MatrixCubeInstance, S0_poly: MatrixPoly, S) -> float:
    total = S0_poly
    for i, Si in enumerate(S):
        total = total + Si.mul_scalar_poly(_one_minus_sq(i, inst.m))
    return coeff_residual(g_poly(inst), total)


def _lstsq_multipliers(inst: MatrixCubeInstance, S0_poly: MatrixPoly):
    """Solve the linear identity G - S_0 = sum (1 - d_i^2) S_i for S_i in Q_1.

    The S_i carry no PSD constraint once S_0 is pinned, so the search is a
    plain least-squares system over their coefficients.
    """
    n, m = inst.n, inst.m
    cols = [(i, beta) for i in range(m)
            for beta in itertools.product((0, 1, 2), repeat=m)]
    col_index = {cb: j for j, cb in enumerate(cols)}
    rhs_poly = g_poly(inst) - S0_poly
    rows: dict = {}

    def row_of(gamma):
        if gamma not in rows:
            rows[gamma] = len(rows)
        return rows[gamma]

    entries = []
    for (i, beta), j in col_index.items():
        entries.append((row_of(beta), j, 1.0))
        shifted = tuple(b + 2 if q == i else b for q, b in enumerate(beta))
        entries.append((row_of(shifted), j, -1.0))
    for gamma in rhs_poly.terms:
        row_of(gamma)
    T = np.zeros((len(rows), len(cols)))
    for r, jcol, v in entries:
        T[r, jcol] += v
    D = np.zeros((len(rows), n * n))
    for gamma, cmat in rhs_poly.terms.items():
        D[rows[gamma]] = cmat.ravel()
    sol, *_ = np.linalg.lstsq(T, D, rcond=None)
    S = []
    for i in range(m):
        terms = {}
        for beta in itertools.product((0, 1, 2), repeat=m):
            cmat = sol[col_index[(i, beta)]].reshape(n, n)
            terms[beta] = cmat
        S.append(MatrixPoly(n, m, terms))
    return S


def construct_full_certificate(inst: MatrixCubeInstance) -> FullCertificate:
    """Explicit degree-2m certificate for an instance that is PSD on the cube.

    Tries the closed-form multiplier formula first; if its identity residual
    is out of tolerance the multipliers are re-derived by least squares (the
    identity is linear in them once S_0 is fixed).  The result always passes
    the independent verifier before being returned.
    """
    m = inst.m
    N = build_Nm(inst)              # also enforces the vertex precondition
    S0 = GramForm(inst.n, m, monomial_basis_z(m), (2.0 ** (-m)) * N)
    S0_poly = expand_gram(S0)
    tol = IDENTITY_TOL * inst.scale()
    if m == 0:
        return FullCertificate(S0, (), "closed-form")
    S = _closed_form_multipliers(inst)
    path = "closed-form"
    if _identity_residual(inst, S0_poly, S) > tol:
        S = _lstsq_multipliers(inst, S0_poly)
        path = "least-squares"
    cert = FullCertificate(S0, tuple(S), path)
    result = verify_certificate(inst, cert)
    if not result.valid:
        raise ConstructionError(
            f"degree-2m construction failed verification "
            f"(residual {result.residual:.3e}, path {path})")
    return cert


# ---------------------------------------------------------------------------
# exactness-case constructions


def simplex_test(H):
    """Closed-form certificate over the simplex; None when infeasible.

    Takes the raw coefficient list H_0..H_m; feasibility is H_0 >= 0 and
    H_0 + H_i >= 0 for every i.
    """
    H = [as_symmetric(h) for h in H]
    scale = max(1.0, max(frob(h) for h in H))
    tol = PSD_TOL * scale
    if min_eig(H[0]) < -tol:
        return None
    S = [np.zeros_like(H[0])]
    for h in H[1:]:
        s = H[0] + h
        if min_eig(s) < -tol:
            return None
        S.append(s)
    S.append(H[0].copy())
    return SimplexCertificate(tuple(S))


def _require_cube_psd(inst: MatrixCubeInstance):
    lam, delta = vertex_oracle(inst)
    if lam < -1e-9 * inst.scale():
        raise ValueError(
            f"instance is not PSD on the cube (vertex {delta.tolist()}, "
            f"min eigenvalue {lam:.3e})")


def m2_certificate(inst: MatrixCubeInstance) -> QuadraticCertificate:
    """Schur-complement construction of an exact quadratic certificate, m <= 2.

    Instances with m < 2 are padded with zero coefficients; the returned
    certificate is for the padded two-parameter instance.
    """
    if inst.m > 2:
        raise ValueError("construction applies to m <= 2 only")
    _require_cube_psd(inst)
    n = inst.n
    Hn = list(inst.Hn) + [np.zeros((n, n))] * (2 - inst.m)
    H0, H1, H2 = Hn
    w = np.abs(np.linalg.eigvalsh(H0))
    if w.min() <= 1e-12 * max(1.0, w.max()):
        H0 = H0 + 1e-9 * max(1.0, frob(H0)) * np.eye(n)
    H0inv = np.linalg.inv(H0)
    Q1 = H2 @ H0inv @ H2
    Q2 = H2 @ H0inv @ H1
    Q3 = H1 @ H0inv @ H1
    W1 = 0.25 * (H0 + Q3 - Q1)
    W2 = 0.25 * (H0 - Q3 + Q1)
    K = 0.25 * (Q2.T - Q2)
    J = np.block([
        [H0 - W1 - W2, 0.5 * H1, 0.5 * H2],
        [0.5 * H1, W1, K],
        [0.5 * H2, K.T, W2],
    ])
    padded = MatrixCubeInstance(n, 2, (Hn[0],) + (H1, H2))
    return _quad_certificate_from_L(padded, J)


def definite_case_certificate(inst: MatrixCubeInstance) -> QuadraticCertificate:
    """Exact quadratic certificate when H_1..H_m share a semidefinite sign."""
    Hn = inst.Hn
    n, m = inst.n, inst.m
    scale = inst.scale()
    all_psd = all(min_eig(h) >= -PSD_TOL * scale for h in Hn[1:])
    all_nsd = all(min_eig(-h) >= -PSD_TOL * scale for h in Hn[1:])
    if not (all_psd or all_nsd):
        raise ValueError("H_1..H_m are not all PSD nor all NSD")
    _require_cube_psd(inst)
    Q = [h if all_psd else -h for h in Hn[1:]]
    L = np.zeros((n * (m + 1), n * (m + 1)))
    L[0:n, 0:n] = Hn[0] - 0.5 * sum(Q, np.zeros((n, n)))
    for i in range(1, m + 1):
        L[0:n, i * n:(i + 1) * n] = 0.5 * Hn[i]
        L[i * n:(i + 1) * n, 0:n] = 0.5 * Hn[i]
        L[i * n:(i + 1) * n, i * n:(i + 1) * n] = 0.5 * Q[i - 1]
    return _quad_certificate_from_L(inst, L)


# ---------------------------------------------------------------------------
# verification


def _check_psd(margins: dict, name: str, mat: np.ndarray, reasons: list):
    margin = min_eig(mat) / max(1.0, frob(mat))
    margins[name] = margin
    if margin < -PSD_TOL:
        reasons.append(f"{name} is not PSD (relative margin {margin:.3e})")


def verify_certificate(inst: MatrixCubeInstance, cert) -> VerificationResult:
    """Independent re-check of a certificate against its instance.

    Re-expands every polynomial identity from scratch with exact coefficient
    arithmetic; never reuses anything from the search that produced the
    certificate.
    """
    Hn = inst.Hn
    n = inst.n
    scale = inst.scale()
    tol = IDENTITY_TOL * scale
    margins: dict = {}
    reasons: list = []
    residual = 0.0

    if isinstance(cert, BenTalCertificate):
        if len(cert.X) != inst.m:
            reasons.append("certificate arity mismatch")
        else:
            acc = Hn[0].copy()
            for X in cert.X:
                acc -= X
            _check_psd(margins, "H0_minus_sum", acc, reasons)
            for i, X in enumerate(cert.X, start=1):
                _check_psd(margins, f"X{i}_plus_H{i}", X + Hn[i], reasons)
                _check_psd(margins, f"X{i}_minus_H{i}", X - Hn[i], reasons)

    elif isinstance(cert, QuadraticCertificate):
        m = cert.m
        if m < inst.m:
            reasons.append("certificate arity mismatch")
            return VerificationResult(False, np.inf, margins, tuple(reasons))
        # pad the instance with zero coefficients if the certificate was
        # built on an extended parameter list (m2 construction)
        Hp = list(Hn) + [np.zeros((n, n))] * (m - inst.m)
        G = g_poly(MatrixCubeInstance(n, m, tuple(Hp)))
        _check_psd(margins, "gram_L", cert.L, reasons)
        # structural equalities of the refutation SDP
        blocks = [[cert.L[a * n:(a + 1) * n, b * n:(b + 1) * n]
                   for b in range(m + 1)] for a in range(m + 1)]
        trace_split = sum((blocks[i][i] for i in range(m + 1)),
                          np.zeros((n, n))) - Hp[0]
        residual = max(residual, frob(trace_split))
        for i in range(1, m + 1):
            residual = max(residual, frob(blocks[0][i] + blocks[0][i].T - Hp[i]))
            for j in range(i + 1, m + 1):
                residual = max(residual, frob(blocks[i][j] + blocks[i][j].T))
        basis = tuple(tuple(1 if q == i - 1 else 0 for q in range(m))
                      for i in range(m + 1))
        S0 = expand_gram(GramForm(n, m, basis, cert.L))
        residual = max(residual, coeff_residual(S0, cert.S0))
        if not in_Q2(cert.S0):
            reasons.append("S_0 is not quadratic")
        total = S0
        for i, X in enumerate(cert.X, start=1):
            _check_psd(margins, f"S{i}", X, reasons)
            total = total + mpoly.constant_poly(X, m).mul_scalar_poly(
                _one_minus_sq(i - 1, m))
        residual = max(residual, coeff_residual(G, total))

    elif isinstance(cert, FullCertificate):
        m = inst.m
        margins["gram_S0"] = cert.S0.psd_margin() if cert.S0.gram.size else 0.0
        if margins["gram_S0"] < -PSD_TOL:
            reasons.append("S_0 Gram matrix is not PSD")
        total = expand_gram(cert.S0)
        for i, Si in enumerate(cert.S, start=1):
            if not in_Q1(Si):
                reasons.append(f"S_{i} has per-variable degree above 2")
            if Si.total_degree() > 2 * m:
                reasons.append(f"S_{i} has total degree above 2m")
            total = total + Si.mul_scalar_poly(_one_minus_sq(i - 1, m))
        residual = coeff_residual(g_poly(inst), total)

    elif isinstance(cert, SimplexCertificate):
        m = inst.m
        if len(cert.S) != m + 2:
            reasons.append("certificate arity mismatch")
            return VerificationResult(False, np.inf, margins, tuple(reasons))
        for i, s in enumerate(cert.S):
            _check_psd(margins, f"S{i}", s, reasons)
        # constant term: S_0 + S_{m+1} = H_0; linear: S_i - S_{m+1} = H_i
        residual = frob(cert.S[0] + cert.S[m + 1] - Hn[0])
        for i in range(1, m + 1):
            residual = max(residual, frob(cert.S[i] - cert.S[m + 1] - Hn[i]))

    else:
        raise TypeError(f"unknown certificate type {type(cert)!r}")

    if residual > tol:
        reasons.append(f"identity residual {residual:.3e} exceeds {tol:.3e}")
    return VerificationResult(not reasons, float(residual), margins, tuple(reasons))


# ---------------------------------------------------------------------------
# dual moment program and extraction


@dataclass(frozen=True)
class Atom:
    """A recovered worst-case pair: vertex delta, unit vector x, weight."""

    delta: np.ndarray
    x: np.ndarray
    weight: float


@dataclass
class DualSolution:
    L_star: np.ndarray
    d_star: float
    n: int
    m: int
    atoms: list = field(default_factory=list)
    diagnostic: str = ""

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.n
        return self.L_star[i * n:(i + 1) * n, j * n:(j + 1) * n]


def dual_solve(inst: MatrixCubeInstance, tol: float = 1e-8) -> DualSolution:
    """Solve the moment relaxation min tr(H L) over the structured L >= 0.

    The optimal value lower-bounds the worst vertex eigenvalue; it is
    nonnegative iff the quadratic refutation margin is.
    """
    Hn = inst.Hn
    n, m = inst.n, inst.m
    dim = n * (m + 1)
    C = np.zeros((dim, dim))
    C[0:n, 0:n] = Hn[0]
    for i in range(1, m + 1):
        C[0:n, i * n:(i + 1) * n] = 0.5 * Hn[i]
        C[i * n:(i + 1) * n, 0:n] = 0.5 * Hn[i]
    A = []
    b = []
    tr00 = np.zeros((dim, dim))
    tr00[0:n, 0:n] = np.eye(n)
    A.append([tr00])
    b.append(1.0)
    for i in range(1, m + 1):
        for a in range(n):
            for c_ in range(a, n):
                mat = np.zeros((dim, dim))
                mat[i * n + a, i * n + c_] += 0.5
                mat[i * n + c_, i * n + a] += 0.5
                mat[a, c_] -= 0.5
                mat[c_, a] -= 0.5
                A.append([mat])
                b.append(0.0)
    sol = solve(SdpProblem([dim], [C], A, np.array(b)), tol=tol)
    if sol.status != "optimal":
        raise SolverFailure(sol)
    d = DualSolution(sol.X[0], float(sol.primal_obj), n, m)
    rank_one_extract(d)
    return d


def rank_one_extract(d: DualSolution, rank_tol: float = 1e-6, seed: int = 0):
    """Recover rank-one atoms from the dual optimum when the rank condition
    rank(L) = rank(L_00) holds; fills ``d.atoms`` and returns them.

    The commuting family linking the row blocks to the leading block is
    jointly diagonalized through a seeded random linear combination; sign
    eigenvalues outside +-1 by more than 0.05 reject the atom.
    """
    n, m = d.n, d.m
    d.atoms = []
    d.diagnostic = ""
    w, V = eig_sym(d.L_star)
    sigma = max(w.max(), 0.0)
    if sigma <= 0:
        d.diagnostic = "dual optimum is numerically zero"
        return d.atoms
    p = int(np.sum(w > rank_tol * sigma))
    w00 = np.linalg.eigvalsh(d.block(0, 0))
    p00 = int(np.sum(w00 > rank_tol * max(w00.max(), sigma)))
    if p != p00:
        d.diagnostic = f"rank condition fails: rank(L)={p}, rank(L00)={p00}"
        return d.atoms
    F = V[:, -p:] * np.sqrt(np.clip(w[-p:], 0.0, None))
    F0 = F[0:n, :]
    F0p = np.linalg.pinv(F0)
    D = []
    for i in range(1, m + 1):
        Di = F0p @ F[i * n:(i + 1) * n, :]
        if np.linalg.norm(F0 @ Di - F[i * n:(i + 1) * n, :]) > 1e-5 * np.sqrt(sigma):
            d.diagnostic = f"row block {i} is not spanned by the leading block"
            return d.atoms
        D.append(0.5 * (Di + Di.T))
    for i in range(len(D)):
        for j in range(i + 1, len(D)):
            if np.linalg.norm(D[i] @ D[j] - D[j] @ D[i]) > 1e-4 * (p + 1):
                d.diagnostic = "linking family does not commute to tolerance"
                return d.atoms
    rng = np.random.default_rng(seed)
    combo = sum((rng.standard_normal() * Di for Di in D), np.zeros((p, p)))
    _, U = eig_sym(combo) if m else (None, np.eye(p))
    atoms = []
    Xcols = F0 @ U
    for k in range(p):
        lams = np.array([float(U[:, k] @ Di @ U[:, k]) for Di in D])
        signs = np.sign(lams) if m else np.zeros(0)
        signs[signs == 0] = 1.0
        if m and np.max(np.abs(lams - signs)) > 0.05:
            continue
        xk = Xcols[:, k]
        weight = float(xk @ xk)
        if weight <= 1e-14:
            continue
        atoms.append(Atom(signs, xk / np.sqrt(weight), weight))
    recon = np.zeros_like(d.L_star)
    for a in atoms:
        zeta = np.concatenate(([1.0], a.delta))
        recon += a.weight * np.kron(np.outer(zeta, zeta), np.outer(a.x, a.x))
    if np.linalg.norm(recon - d.L_star) > 1e-5 * max(1.0, np.linalg.norm(d.L_star)):
        d.diagnostic = (
            f"atoms reconstruct L with relative error "
            f"{np.linalg.norm(recon - d.L_star) / max(1.0, np.linalg.norm(d.L_star)):.3e}")
        d.atoms = []
        return d.atoms
    d.atoms = atoms
    return atoms
