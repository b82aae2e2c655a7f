import numpy as np
import pytest

from matcube import mpoly
from matcube.mpoly import GramForm, MatrixPoly, coeff_residual, expand_gram


def rand_poly(rng, n, m, nterms=4, deg=3):
    terms = {}
    for _ in range(nterms):
        a = tuple(int(v) for v in rng.integers(0, deg + 1, size=m))
        c = rng.standard_normal((n, n))
        terms[a] = 0.5 * (c + c.T)
    return MatrixPoly(n, m, terms)


def test_eval_matches_direct_sum():
    p = MatrixPoly(1, 2, {(0, 0): [[2.0]], (1, 0): [[1.0]], (0, 2): [[-3.0]]})
    d = np.array([0.5, 2.0])
    assert p.eval(d)[0, 0] == pytest.approx(2.0 + 0.5 - 3.0 * 4.0)


def test_arithmetic_consistent_with_eval():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rand_poly(rng, 3, 2)
        q = rand_poly(rng, 3, 2)
        s = mpoly.scalar_poly({(1, 0): 2.0, (0, 0): -1.0}, 2)
        d = rng.uniform(-1, 1, size=2)
        assert np.allclose((p + q).eval(d), p.eval(d) + q.eval(d))
        assert np.allclose((p - q).eval(d), p.eval(d) - q.eval(d))
        assert np.allclose(p.scale(3.0).eval(d), 3.0 * p.eval(d))
        assert np.allclose(p.mul_scalar_poly(s).eval(d),
                           (2.0 * d[0] - 1.0) * p.eval(d))


def test_coefficients_are_symmetrized_and_pruned():
    p = MatrixPoly(2, 1, {(0,): np.array([[0.0, 1e-16], [1e-16, 0.0]]),
                          (1,): np.eye(2)})
    assert (0,) not in p.terms            # below the prune threshold
    assert (1,) in p.terms


def test_degree_queries():
    p = MatrixPoly(1, 3, {(2, 0, 1): [[1.0]], (0, 1, 0): [[1.0]]})
    assert p.max_var_degree() == 2
    assert p.total_degree() == 3
    assert mpoly.in_Q1(p)
    assert not mpoly.in_Q2(p)
    assert mpoly.in_Q2(MatrixPoly(1, 2, {(1, 1): [[1.0]]}))
    assert not mpoly.in_Q1(MatrixPoly(1, 1, {(3,): [[1.0]]}))


def test_shape_validation():
    with pytest.raises(ValueError):
        MatrixPoly(2, 1, {(0,): np.eye(3)})
    with pytest.raises(ValueError):
        MatrixPoly(1, 2, {(0,): [[1.0]]})       # exponent length mismatch
    with pytest.raises(ValueError):
        MatrixPoly(1, 1, {(-1,): [[1.0]]})


def test_expand_gram_matches_pointwise_evaluation():
    rng = np.random.default_rng(1)
    n, m = 2, 2
    basis = ((0, 0), (1, 0), (0, 1), (1, 1))
    for _ in range(10):
        q = rng.standard_normal((n * len(basis), n * len(basis)))
        g = GramForm(n, m, basis, q + q.T)
        p = expand_gram(g)
        for _ in range(5):
            d = rng.uniform(-1, 1, size=m)
            z = np.array([np.prod(d ** np.array(b)) for b in basis])
            big = np.kron(z.reshape(-1, 1), np.eye(n))
            assert np.allclose(p.eval(d), big.T @ g.gram @ big, atol=1e-12)


def test_gram_psd_margin_sign():
    g = GramForm(1, 1, ((0,), (1,)), np.eye(2))
    assert g.psd_margin() > 0
    h = GramForm(1, 1, ((0,), (1,)), np.diag([1.0, -1.0]))
    assert h.psd_margin() < 0


def test_coeff_residual_zero_and_positive():
    rng = np.random.default_rng(2)
    p = rand_poly(rng, 2, 2)
    assert coeff_residual(p, p) == 0.0
    q = p + mpoly.constant_poly(0.5 * np.eye(2), 2)
    assert coeff_residual(p, q) == pytest.approx(0.5 * np.sqrt(2), rel=1e-12)
