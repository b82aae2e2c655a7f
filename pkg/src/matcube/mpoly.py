"""Symmetric-matrix-valued polynomials with exact coefficient bookkeeping.

A :class:`MatrixPoly` maps multi-exponents (tuples of nonnegative ints, one
entry per variable) to symmetric coefficient matrices.  Scalar polynomials
are the ``n = 1`` case.  :class:`GramForm` stores a quadratic-form witness
``(z (x) I)^T Q (z (x) I)`` over an ordered monomial basis ``z``; expanding
it yields a MatrixPoly, which is how certificate identities get re-checked
independently of any solver output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import frob, psd_margin

__all__ = [
    "MatrixPoly",
    "GramForm",
    "constant_poly",
    "scalar_poly",
    "in_Q1",
    "in_Q2",
    "expand_gram",
    "coeff_residual",
]

# Coefficients with Frobenius norm below this are dropped to keep supports
# from blowing up with round-off; far below every verification tolerance.
PRUNE_TOL = 1e-14


def _check_exponent(alpha, m: int) -> tuple:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != m:
        raise ValueError(f"exponent {alpha} has length {len(alpha)}, expected {m}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"exponent {alpha} has a negative entry")
    return alpha


@dataclass(frozen=True)
class MatrixPoly:
    """Symmetric n x n matrix polynomial in m variables, sparse over exponents."""

    n: int
    m: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for alpha, c in self.terms.items():
            alpha = _check_exponent(alpha, self.m)
            c = np.asarray(c, dtype=float)
            if c.shape != (self.n, self.n):
                raise ValueError(
                    f"coefficient at {alpha} has shape {c.shape}, expected {(self.n, self.n)}"
                )
            c = 0.5 * (c + c.T)
            if frob(c) > PRUNE_TOL:
                clean[alpha] = c
        object.__setattr__(self, "terms", clean)

    # -- evaluation -------------------------------------------------------

    def eval(self, delta) -> np.ndarray:
        delta = np.asarray(delta, dtype=float)
        if delta.shape != (self.m,):
            raise ValueError(f"point has shape {delta.shape}, expected {(self.m,)}")
        out = np.zeros((self.n, self.n))
        for alpha, c in self.terms.items():
            out += c * np.prod(delta ** np.array(alpha))
        return out

    # -- arithmetic -------------------------------------------------------

    def _like(self, other: "MatrixPoly"):
        if not isinstance(other, MatrixPoly):
            raise TypeError(f"expected MatrixPoly, got {type(other)!r}")
        if (self.n, self.m) != (other.n, other.m):
            raise ValueError("MatrixPoly dimensions do not match")

    def __add__(self, other: "MatrixPoly") -> "MatrixPoly":
        self._like(other)
        terms = {a: c.copy() for a, c in self.terms.items()}
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0.0) + c
        return MatrixPoly(self.n, self.m, terms)

    def __sub__(self, other: "MatrixPoly") -> "MatrixPoly":
        return self + other.scale(-1.0)

    def scale(self, s: float) -> "MatrixPoly":
        return MatrixPoly(self.n, self.m, {a: s * c for a, c in self.terms.items()})

    def mul_scalar_poly(self, s: "MatrixPoly") -> "MatrixPoly":
        """Multiply by a scalar polynomial (a MatrixPoly with n = 1)."""
        if s.n != 1:
            raise ValueError("multiplier must be a scalar polynomial (n = 1)")
        if s.m != self.m:
            raise ValueError("variable counts do not match")
        terms: dict = {}
        for beta, cs in s.terms.items():
            w = float(cs[0, 0])
            for alpha, c in self.terms.items():
                gamma = tuple(a + b for a, b in zip(alpha, beta))
                terms[gamma] = terms.get(gamma, 0.0) + w * c
        return MatrixPoly(self.n, self.m, terms)

    # -- structure queries ------------------------------------------------

    def max_var_degree(self) -> int:
        return max((max(a) for a in self.terms if a), default=0)

    def total_degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def constant_term(self) -> np.ndarray:
        zero = (0,) * self.m
        return self.terms.get(zero, np.zeros((self.n, self.n))).copy()


def constant_poly(c, m: int) -> MatrixPoly:
    c = np.asarray(c, dtype=float)
    return MatrixPoly(c.shape[0], m, {(0,) * m: c})


def scalar_poly(coeffs: dict, m: int) -> MatrixPoly:
    """Scalar polynomial from {exponent: float}."""
    return MatrixPoly(1, m, {a: np.array([[float(v)]]) for a, v in coeffs.items()})


def in_Q1(p: MatrixPoly) -> bool:
    """Per-variable degree at most 2 in every stored exponent."""
    return all(max(a, default=0) <= 2 for a in p.terms)


def in_Q2(p: MatrixPoly) -> bool:
    """Total degree at most 2 in every stored exponent."""
    return all(sum(a) <= 2 for a in p.terms)


@dataclass(frozen=True)
class GramForm:
    """Quadratic-form witness over an ordered monomial basis.

    ``gram`` has dimension ``n * len(basis)`` and is read in n x n blocks;
    block (a, b) multiplies the monomial ``basis[a] + basis[b]``.
    """

    n: int
    m: int
    basis: tuple
    gram: np.ndarray

    def __post_init__(self):
        basis = tuple(_check_exponent(b, self.m) for b in self.basis)
        object.__setattr__(self, "basis", basis)
        g = np.asarray(self.gram, dtype=float)
        d = self.n * len(basis)
        if g.shape != (d, d):
            raise ValueError(f"gram has shape {g.shape}, expected {(d, d)}")
        object.__setattr__(self, "gram", 0.5 * (g + g.T))

    def psd_margin(self) -> float:
        return psd_margin(self.gram)


def expand_gram(g: GramForm) -> MatrixPoly:
    """Exact polynomial expansion of ``(z (x) I)^T Q (z (x) I)``."""
    n = g.n
    terms: dict = {}
    for a, alpha in enumerate(g.basis):
        for b, beta in enumerate(g.basis):
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            block = g.gram[a * n:(a + 1) * n, b * n:(b + 1) * n]
            terms[gamma] = terms.get(gamma, 0.0) + block
    return MatrixPoly(n, g.m, terms)


def coeff_residual(p: MatrixPoly, q: MatrixPoly) -> float:
    """Max over exponents of the Frobenius norm of the coefficient difference."""
    p._like(q)
    worst = 0.0
    for alpha in set(p.terms) | set(q.terms):
        cp = p.terms.get(alpha, 0.0)
        cq = q.terms.get(alpha, 0.0)
        worst = max(worst, frob(np.asarray(cp - cq, dtype=float).reshape(p.n, p.n)))
    return worst
