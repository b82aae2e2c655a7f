import numpy as np
import pytest

from matcube import cube, mpoly
from matcube.mpoly import expand_gram
from matcube.numerics import min_eig, random_symmetric


def scalar_instance(*vals, radius=1.0):
    return cube.MatrixCubeInstance(
        1, len(vals) - 1, tuple(np.array([[float(v)]]) for v in vals), radius)


def random_shifted_instance(rng, n_max, m_max, psd_coeffs=False):
    """Random instance whose oracle margin sits near zero (either sign)."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    Hs = []
    for _ in range(m):
        a = rng.standard_normal((n, n))
        Hs.append(a @ a.T / np.sqrt(n) if psd_coeffs else 0.5 * (a + a.T))
    H0 = random_symmetric(rng, n)
    inst0 = cube.MatrixCubeInstance(n, m, (H0,) + tuple(Hs))
    lam0, _ = cube.vertex_oracle(inst0)
    shift = -lam0 + rng.uniform(-0.5, 0.5)
    return cube.MatrixCubeInstance(n, m, (H0 + shift * np.eye(n),) + tuple(Hs))


# ---------------------------------------------------------------------------
# basic maps and the vertex oracle


def test_g_poly_evaluates_the_affine_family():
    rng = np.random.default_rng(0)
    H = tuple(random_symmetric(rng, 3) for _ in range(3))
    inst = cube.MatrixCubeInstance(3, 2, H, radius=2.0)
    g = cube.g_poly(inst)
    d = np.array([0.3, -0.7])
    # radius is folded in: g is over the unit cube
    assert np.allclose(g.eval(d), H[0] + 2.0 * d[0] * H[1] + 2.0 * d[1] * H[2])


def test_vertex_oracle_scalar_examples():
    lam, delta = cube.vertex_oracle(scalar_instance(2, 1, 1))
    assert lam == pytest.approx(0.0, abs=1e-12)
    assert np.array_equal(delta, [-1.0, -1.0])
    lam, delta = cube.vertex_oracle(scalar_instance(1, 2))
    assert lam == pytest.approx(-1.0)
    assert np.array_equal(delta, [-1.0])


def test_vertex_oracle_radius_scaling():
    # H_0 = 2, H_1 = 1: PSD up to radius 2
    assert cube.vertex_oracle(scalar_instance(2, 1, radius=1.5))[0] > 0
    assert cube.vertex_oracle(scalar_instance(2, 1, radius=3.0))[0] < 0


def test_vertex_oracle_guard():
    H = (np.eye(1),) + tuple(np.zeros((1, 1)) for _ in range(25))
    with pytest.raises(ValueError):
        cube.vertex_oracle(cube.MatrixCubeInstance(1, 25, H))


def test_vertex_oracle_is_exhaustive():
    rng = np.random.default_rng(1)
    for _ in range(20):
        inst = random_shifted_instance(rng, 4, 3)
        lam, delta = cube.vertex_oracle(inst)
        Hn = inst.Hn
        direct = min(
            min_eig(Hn[0] + sum(s[i] * Hn[i + 1] for i in range(inst.m)))
            for s in np.ndindex(*(2,) * inst.m)
            for s in [np.array([1.0 if b == 0 else -1.0 for b in s])]
        )
        assert lam == pytest.approx(direct, abs=1e-12)


def test_instance_validation():
    with pytest.raises(ValueError):
        cube.MatrixCubeInstance(1, 1, (np.eye(1),))
    with pytest.raises(ValueError):
        cube.MatrixCubeInstance(1, 0, (np.eye(1),), radius=-1.0)
    with pytest.raises(ValueError):
        cube.MatrixCubeInstance(2, 0, (np.array([[1.0, 1.0], [0.0, 1.0]]),))


# ---------------------------------------------------------------------------
# searches


def test_bental_marginal_identity_pair():
    # H_0 = I, H_1 = I is exactly on the boundary; the scalar test still
    # finds the certificate X_1 = I
    inst = cube.MatrixCubeInstance(2, 1, (np.eye(2), np.eye(2)))
    cert = cube.bental_test(inst)
    assert cert is not None
    assert cube.verify_certificate(inst, cert).valid


def test_bental_infeasible():
    assert cube.bental_test(scalar_instance(1, 2)) is None


def test_quad_marginal_scalar_example():
    inst = scalar_instance(2, 1, 1)
    cert = cube.quad_test(inst)
    assert cert is not None
    result = cube.verify_certificate(inst, cert)
    assert result.valid
    assert abs(cube.quad_margin(inst)) <= 1e-6


def test_quad_margin_zero_parameters_is_min_eig():
    inst = cube.MatrixCubeInstance(2, 0, (np.diag([3.0, -2.0]),))
    assert cube.quad_margin(inst) == pytest.approx(-2.0, abs=1e-6)


def test_quad_exact_at_m2():
    rng = np.random.default_rng(2)
    for _ in range(20):
        inst = random_shifted_instance(rng, 4, 2)
        lam, _ = cube.vertex_oracle(inst)
        t = cube.quad_margin(inst)
        assert t == pytest.approx(lam, abs=1e-5)


def test_quad_margin_brackets_oracle():
    rng = np.random.default_rng(3)
    for _ in range(15):
        inst = random_shifted_instance(rng, 4, 4)
        lam, _ = cube.vertex_oracle(inst)
        t = cube.quad_margin(inst)
        assert t <= lam + 1e-6
        # quantitative conservatism bound of the quadratic relaxation
        assert t >= lam / (inst.m + 1) - 1e-6 if lam > 0 else True


def test_hierarchy_bental_implies_quad():
    rng = np.random.default_rng(4)
    for _ in range(25):
        inst = random_shifted_instance(rng, 3, 3)
        if cube.bental_test(inst) is not None:
            assert cube.quad_test(inst) is not None


# ---------------------------------------------------------------------------
# constructive certificate


def test_monomial_basis_bit_pattern():
    assert cube.monomial_basis_z(2) == ((0, 0), (1, 0), (0, 1), (1, 1))
    assert len(cube.monomial_basis_z(4)) == 16


def test_build_Nm_scalar_example():
    N = cube.build_Nm(scalar_instance(2, 1, 1))
    expected = np.array([[2.0, 1, 1, 0], [1, 2, 0, 1], [1, 0, 2, 1], [0, 1, 1, 2]])
    assert np.array_equal(N, expected)
    assert np.linalg.eigvalsh(N)[0] == pytest.approx(0.0, abs=1e-12)


def test_build_Nm_rejects_non_psd_instances():
    with pytest.raises(ValueError):
        cube.build_Nm(scalar_instance(1, 2))


def test_full_certificate_single_parameter_closed_form():
    inst = scalar_instance(1, 1)
    cert = cube.construct_full_certificate(inst)
    assert cert.path == "closed-form"
    s0 = {a: c[0, 0] for a, c in expand_gram(cert.S0).terms.items()}
    assert s0 == pytest.approx({(0,): 0.5, (1,): 1.0, (2,): 0.5})
    s1 = {a: c[0, 0] for a, c in cert.S[0].terms.items()}
    assert s1 == pytest.approx({(0,): 0.5})


def test_full_certificate_zero_parameters():
    inst = cube.MatrixCubeInstance(2, 0, (np.diag([1.0, 2.0]),))
    cert = cube.construct_full_certificate(inst)
    assert cube.verify_certificate(inst, cert).valid


def test_full_certificate_random_instances():
    rng = np.random.default_rng(5)
    for _ in range(15):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        Hs = [random_symmetric(rng, n) for _ in range(m)]
        H0 = np.eye(n) * (sum(abs(np.linalg.eigvalsh(h)).max() for h in Hs) + 0.1)
        inst = cube.MatrixCubeInstance(n, m, (H0,) + tuple(Hs))
        cert = cube.construct_full_certificate(inst)
        result = cube.verify_certificate(inst, cert)
        assert result.valid
        assert result.residual <= 1e-8 * inst.scale()
        assert all(mpoly.in_Q1(s) for s in cert.S)
        assert all(s.total_degree() <= 2 * m for s in cert.S)


def test_least_squares_fallback_agrees_with_identity():
    # exercise the fallback path directly: it must satisfy the same identity
    rng = np.random.default_rng(6)
    n, m = 2, 3
    Hs = [random_symmetric(rng, n) for _ in range(m)]
    H0 = np.eye(n) * (sum(abs(np.linalg.eigvalsh(h)).max() for h in Hs) + 0.1)
    inst = cube.MatrixCubeInstance(n, m, (H0,) + tuple(Hs))
    S0 = mpoly.GramForm(n, m, cube.monomial_basis_z(m),
                        (2.0 ** (-m)) * cube.build_Nm(inst))
    S = cube._lstsq_multipliers(inst, expand_gram(S0))
    cert = cube.FullCertificate(S0, tuple(S), "least-squares")
    assert cube.verify_certificate(inst, cert).valid


# ---------------------------------------------------------------------------
# exactness-case constructions


def test_m2_certificate_random():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        Hs = [random_symmetric(rng, n) for _ in range(2)]
        H0 = np.eye(n) * (sum(abs(np.linalg.eigvalsh(h)).max() for h in Hs) + 0.2)
        inst = cube.MatrixCubeInstance(n, 2, (H0,) + tuple(Hs))
        cert = cube.m2_certificate(inst)
        assert cube.verify_certificate(inst, cert).valid


def test_m2_certificate_pads_single_parameter():
    inst = scalar_instance(2, 1)
    cert = cube.m2_certificate(inst)
    assert cert.m == 2
    assert cube.verify_certificate(inst, cert).valid


def test_m2_certificate_regularizes_singular_H0():
    inst = cube.MatrixCubeInstance(
        2, 2, (np.diag([1.0, 1.0]), np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
    cert = cube.m2_certificate(inst)
    assert cube.verify_certificate(inst, cert).valid


def test_m2_certificate_rejects_large_m():
    H = tuple(np.eye(1) for _ in range(4))
    with pytest.raises(ValueError):
        cube.m2_certificate(cube.MatrixCubeInstance(1, 3, H))


def test_definite_case_certificate():
    rng = np.random.default_rng(8)
    for sign in (1.0, -1.0):
        n, m = 3, 4
        Qs = [sign * (lambda a: a @ a.T)(rng.standard_normal((n, n))) * 0.2
              for _ in range(m)]
        H0 = np.eye(n) * (sum(abs(np.linalg.eigvalsh(q)).max() for q in Qs) + 0.1)
        inst = cube.MatrixCubeInstance(n, m, (H0,) + tuple(Qs))
        cert = cube.definite_case_certificate(inst)
        assert cube.verify_certificate(inst, cert).valid


def test_definite_case_rejects_mixed_signs():
    inst = cube.MatrixCubeInstance(
        2, 2, (np.eye(2) * 3, np.diag([1.0, 0.5]), np.diag([-1.0, -0.5])))
    with pytest.raises(ValueError):
        cube.definite_case_certificate(inst)


def test_simplex_test_feasible_and_infeasible():
    H = [np.eye(2), -0.5 * np.eye(2), np.diag([1.0, 0.0])]
    cert = cube.simplex_test(H)
    assert cert is not None
    inst = cube.MatrixCubeInstance(2, 2, tuple(H))
    assert cube.verify_certificate(inst, cert).valid
    assert cube.simplex_test([np.eye(1), np.array([[-2.0]])]) is None
    assert cube.simplex_test([-np.eye(1)]) is None


# ---------------------------------------------------------------------------
# verification is adversarial


def test_verify_rejects_tampered_quadratic_certificate():
    inst = scalar_instance(3, 1, 1)
    cert = cube.quad_test(inst)
    assert cert is not None
    bad = cube.QuadraticCertificate(cert.m, cert.X, cert.L + 0.01 * np.eye(3),
                                    cert.S0)
    assert not cube.verify_certificate(inst, bad).valid


def test_verify_rejects_wrong_instance():
    inst = scalar_instance(3, 1, 1)
    cert = cube.construct_full_certificate(inst)
    other = scalar_instance(4, 1, 1)
    assert not cube.verify_certificate(other, cert).valid


def test_verify_rejects_non_psd_bental_matrices():
    inst = cube.MatrixCubeInstance(1, 1, (np.eye(1) * 2, np.eye(1)))
    bad = cube.BenTalCertificate((np.array([[-1.0]]),))
    assert not cube.verify_certificate(inst, bad).valid


# ---------------------------------------------------------------------------
# dual and extraction


def test_dual_scalar_example():
    d = cube.dual_solve(scalar_instance(0, 1))
    assert d.d_star == pytest.approx(-1.0, abs=1e-6)
    assert len(d.atoms) == 1
    atom = d.atoms[0]
    assert atom.delta[0] == pytest.approx(-1.0)
    assert atom.weight == pytest.approx(1.0, abs=1e-5)


def test_dual_structural_invariants():
    rng = np.random.default_rng(9)
    inst = random_shifted_instance(rng, 3, 2)
    d = cube.dual_solve(inst)
    n = inst.n
    assert np.trace(d.block(0, 0)) == pytest.approx(1.0, abs=1e-6)
    for i in range(1, inst.m + 1):
        assert np.allclose(d.block(i, i), d.block(0, 0), atol=1e-6)
    assert np.linalg.eigvalsh(d.L_star)[0] >= -1e-7


def test_dual_matches_quad_margin_sign():
    rng = np.random.default_rng(10)
    for _ in range(10):
        inst = random_shifted_instance(rng, 3, 2)
        lam, _ = cube.vertex_oracle(inst)
        if abs(lam) <= 1e-5:
            continue
        d = cube.dual_solve(inst)
        assert (d.d_star > 0) == (lam > 0) or abs(d.d_star) <= 1e-5


def test_extraction_atoms_hit_worst_vertex():
    rng = np.random.default_rng(11)
    found = 0
    for _ in range(20):
        inst = random_shifted_instance(rng, 3, 2)
        lam, _ = cube.vertex_oracle(inst)
        if lam >= -1e-4:
            continue
        d = cube.dual_solve(inst)
        if not d.atoms:
            continue
        found += 1
        Hn = inst.Hn
        best = min(
            min_eig(Hn[0] + sum(a.delta[i] * Hn[i + 1] for i in range(inst.m)))
            for a in d.atoms)
        assert best == pytest.approx(lam, abs=1e-4)
    assert found >= 3


def test_extraction_is_deterministic_for_fixed_seed():
    inst = scalar_instance(0, 1, 1)
    d1 = cube.dual_solve(inst)
    a1 = cube.rank_one_extract(d1, seed=7)
    a2 = cube.rank_one_extract(d1, seed=7)
    assert len(a1) == len(a2)
    for x, y in zip(a1, a2):
        assert np.array_equal(x.delta, y.delta)
        assert x.weight == pytest.approx(y.weight, abs=1e-12)
