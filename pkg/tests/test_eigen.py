import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rel_err
from guillotine.eigen import (
    CornerMorphism,
    EigenStructure,
    HalfStripMorphism,
    build_hv_eigenstructure,
    build_oblique_eigenstructure,
    is_irreducible,
    oblique_pf_data,
    pf_eigen,
    strip_operators,
    verify_corner_eigen,
    verify_eigenstructure,
    verify_fullplane_eigen,
    verify_halfstrip_eigen,
)
from guillotine.errors import ReducibleMatrixError, ShapeMismatchError
from guillotine.lattice import FaceWeight, partition_tensor, random_face_weight
from guillotine.rope import eval_tensor, from_factorized, restrict, side_products
from guillotine.tensor import StateSpaces, pair_boundary


# ---------------------------------------------------------------------------
# Perron-Frobenius


def test_pf_all_ones():
    pf = pf_eigen(np.ones((3, 3)))
    assert pf.lam == pytest.approx(3.0, rel=1e-14)
    assert np.allclose(pf.v_right, 1 / np.sqrt(3), rtol=1e-13)
    assert pf.v_left @ pf.v_right == pytest.approx(1.0, rel=1e-14)


def test_pf_matches_numpy(rng):
    a = rng.random((5, 5))
    pf = pf_eigen(a)
    ev = np.linalg.eigvals(a)
    assert pf.lam == pytest.approx(float(np.max(ev.real)), rel=1e-12)
    assert np.allclose(a @ pf.v_right, pf.lam * pf.v_right, rtol=0, atol=1e-12)
    assert np.allclose(pf.v_left @ a, pf.lam * pf.v_left, rtol=0, atol=1e-11)
    assert np.all(pf.v_right > 0) and np.all(pf.v_left > 0)


def test_pf_periodic_matrix_uses_shift():
    a = np.array([[0.0, 2.0], [3.0, 0.0]])
    pf = pf_eigen(a)
    assert pf.shifted
    assert pf.lam == pytest.approx(np.sqrt(6.0), rel=1e-12)
    assert np.allclose(a @ pf.v_right, pf.lam * pf.v_right, atol=1e-12)


def test_pf_identity_needs_flag():
    with pytest.raises(ReducibleMatrixError):
        pf_eigen(np.eye(2))
    pf = pf_eigen(np.eye(2), require_irreducible=False)
    assert pf.lam == pytest.approx(1.0, rel=1e-14)


def test_pf_rejects_bad_input():
    with pytest.raises(ReducibleMatrixError):
        pf_eigen(np.array([[1.0, -1.0], [1.0, 1.0]]))
    with pytest.raises(ReducibleMatrixError):
        pf_eigen(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ShapeMismatchError):
        pf_eigen(np.ones((2, 3)))


def test_is_irreducible():
    assert is_irreducible(np.array([[0, 1], [1, 0]]))
    assert not is_irreducible(np.array([[1, 1], [0, 1]]))
    assert is_irreducible(np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]]))


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_pf_scale_covariance(seed, c):
    a = 0.05 + np.random.default_rng(seed).random((4, 4))
    p1, p2 = pf_eigen(a), pf_eigen(c * a)
    assert p2.lam == pytest.approx(c * p1.lam, rel=1e-11)
    assert np.allclose(p1.v_right, p2.v_right, rtol=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_pf_transpose_swaps_vectors(seed):
    a = 0.05 + np.random.default_rng(seed).random((4, 4))
    p, pt = pf_eigen(a), pf_eigen(a.T)
    assert pt.lam == pytest.approx(p.lam, rel=1e-11)
    v = p.v_left / np.linalg.norm(p.v_left)
    assert np.allclose(pt.v_right, v, rtol=1e-9)


# ---------------------------------------------------------------------------
# Morphisms


def test_projector_morphism():
    l, r = np.array([1.0, 2.0]), np.array([3.0, 5.0])
    phi = HalfStripMorphism.projector("S", l, r, d=2)
    X = np.arange(16.0).reshape(4, 4)
    ref = np.einsum("i,iajb,j->ab", l, X.reshape(2, 2, 2, 2), r)
    assert np.allclose(phi(X), ref)
    with pytest.raises(ValueError):
        HalfStripMorphism("Q", phi.matrix)
    with pytest.raises(ShapeMismatchError):
        HalfStripMorphism("S", np.ones((3, 4)))


def test_corner_morphism_scalar():
    K = CornerMorphism.scalar("SW", [2.0, 3.0], 4)
    M = np.arange(4.0).reshape(2, 2)
    assert np.array_equal(K.apply(1, M), 3.0 * M)
    with pytest.raises(ShapeMismatchError):
        K.apply(0, np.ones(3))
    with pytest.raises(ValueError):
        CornerMorphism("XX", K.K)


def test_strip_operators_shapes(rng):
    w = random_face_weight(StateSpaces(2, 3), rng)
    assert strip_operators(w, "S", rng.random((2, 2, 2))).shape == (2, 6, 6)
    assert strip_operators(w, "W", rng.random((3, 2, 2))).shape == (3, 4, 4)
    with pytest.raises(ShapeMismatchError):
        strip_operators(w, "W", rng.random((2, 2, 2)))


def test_eigenstructure_validation(rng):
    rep = from_factorized(np.ones(2), np.ones(2), np.ones(2), np.ones(2))
    sig = dict.fromkeys("SNWE", 1.0)
    with pytest.raises(ValueError):
        EigenStructure(0.0, sig, 1.0, rep)
    with pytest.raises(ValueError):
        EigenStructure(1.0, {"S": 1.0}, 1.0, rep)
    with pytest.raises(ValueError):
        EigenStructure(1.0, sig, -1.0, rep)
    es = EigenStructure(2.0, {"S": 2.0, "N": 3.0, "W": 5.0, "E": 7.0}, 11.0, rep)
    assert es.closed_form(2, 3) == pytest.approx(11 * 6**2 * 35**3 * 2.0**6)


# ---------------------------------------------------------------------------
# Verifiers


def test_single_state_model():
    # One state per edge: W is a scalar c, every quantity is a power of c.
    c = 2.5
    w = FaceWeight.from_array(np.full((1, 1, 1, 1), c))
    rep = from_factorized(np.ones(1), np.ones(1), np.ones(1), np.ones(1))
    one = np.ones(1)
    for side in "SNWE":
        phi = HalfStripMorphism.projector(side, one, one)
        assert verify_halfstrip_eigen(w, side, rep.side(side), phi, c, 3).max <= 1e-15
    for corner, U in [("SW", rep.U_WS), ("SE", rep.U_SE), ("NE", rep.U_EN), ("NW", rep.U_NW)]:
        h = rep.A_S if corner[0] == "S" else rep.A_N
        v = rep.A_W if corner[1] == "W" else rep.A_E
        K = CornerMorphism.scalar(corner, one, 1)
        assert verify_corner_eigen(w, corner, h, v, U, K, c, 1.0).max <= 1e-15


@pytest.mark.parametrize("builder", ["hv", "oblique"])
def test_builders_pass_all_checks(rng, builder):
    if builder == "hv":
        es, w = build_hv_eigenstructure(0.1 + rng.random((2, 2)), 0.1 + rng.random((2, 2)))
    else:
        es, w = build_oblique_eigenstructure(0.1 + rng.random((2, 3)), 0.1 + rng.random((3, 2)))
    report = verify_eigenstructure(es, w, p_max=3, grid=(3, 2))
    assert set(report) == {
        "halfstrip:S", "halfstrip:N", "halfstrip:W", "halfstrip:E",
        "corner:SW", "corner:SE", "corner:NE", "corner:NW", "fullplane",
    }
    for key, res in report.items():
        assert res.passed(1e-11), (key, res.cases)


def test_random_weight_fails_checks(rng):
    es, _ = build_hv_eigenstructure(0.1 + rng.random((2, 2)), 0.1 + rng.random((2, 2)))
    w = random_face_weight(StateSpaces(2, 2), rng)
    report = verify_eigenstructure(es, w)
    assert report["halfstrip:S"].max > 1e-3
    assert report["fullplane"].max > 1e-3


def test_residual_grows_with_strip_length_under_wrong_lambda(rng):
    es, w = build_hv_eigenstructure(0.1 + rng.random((2, 2)), 0.1 + rng.random((2, 2)))
    eps = 1e-4
    res = verify_halfstrip_eigen(w, "S", es.rep.A_S, es.halfstrip["S"], es.lam * (1 + eps), 2)
    # phi(O...O) = lam^p A...A, so against the perturbed right-hand side the
    # relative residual is 1 - (1 + eps)**-p.
    assert res.cases[1] == pytest.approx(1 - 1 / (1 + eps), rel=1e-6)
    assert res.cases[2] == pytest.approx(1 - 1 / (1 + eps) ** 2, rel=1e-6)
    assert res.cases[2] <= 10 * res.cases[1]


def test_corner_check_detects_wrong_sigma(rng):
    es, w = build_hv_eigenstructure(0.1 + rng.random((2, 2)), 0.1 + rng.random((2, 2)))
    r = es.rep
    good = verify_corner_eigen(w, "SW", r.A_S, r.A_W, r.U_WS, es.corner["SW"], es.lam, 1.0)
    bad = verify_corner_eigen(w, "SW", r.A_S, r.A_W, r.U_WS, es.corner["SW"], es.lam, 1.1)
    assert good.max <= 1e-12 and bad.max > 0.05


def test_fullplane_uses_closed_form(rng):
    es, w = build_hv_eigenstructure(0.1 + rng.random((2, 2)), 0.1 + rng.random((2, 2)))
    res = verify_fullplane_eigen(es, w, 2, 3)
    assert set(res.cases) == {(p, q) for p in (1, 2) for q in (1, 2, 3)}
    assert res.max <= 1e-12


# ---------------------------------------------------------------------------
# Solved models


def test_hv_all_ones():
    es, w = build_hv_eigenstructure(np.ones((2, 2)), np.ones((2, 2)))
    assert es.lam == pytest.approx(4.0, rel=1e-14)
    assert es.kappa == pytest.approx(1.0, rel=1e-12)
    z = pair_boundary(eval_tensor(es.rep, 2, 2), partition_tensor(w, 2, 2))
    assert z == pytest.approx(4.0**4, rel=1e-12)


def test_oblique_all_ones():
    es, w = build_oblique_eigenstructure(np.ones((2, 2)), np.ones((2, 2)))
    assert es.lam == pytest.approx(4.0, rel=1e-14)
    assert es.kappa == pytest.approx(1.0, rel=1e-12)


def test_oblique_pf_relations(rng):
    C = 0.1 + rng.random((2, 3))
    D = 0.1 + rng.random((3, 2))
    od = oblique_pf_data(C, D)
    assert od.s1 * od.s2 == pytest.approx(od.Lambda, rel=1e-11)
    assert np.allclose(D @ od.vR1, od.s1 * od.vR2, rtol=1e-11)
    assert np.allclose(C @ od.vR2, od.s2 * od.vR1, rtol=1e-11)
    assert od.Lambda == pytest.approx(np.max(np.linalg.eigvals(C @ D).real), rel=1e-12)


@pytest.mark.parametrize("p,q", [(1, 1), (2, 3), (3, 2)])
def test_hv_partition_is_power_of_lambda(rng, p, q):
    es, w = build_hv_eigenstructure(0.1 + rng.random((2, 2)), 0.1 + rng.random((2, 2)))
    z = pair_boundary(eval_tensor(es.rep, p, q), partition_tensor(w, p, q))
    assert rel_err(z, es.lam ** (p * q)) <= 1e-11


def test_oblique_restricted_rep_corner(rng):
    # Removing the South-West face folds its weight into the corner matrix:
    # V_WS[y, z] = sum_{x,w} vL1(x) C[x, w] vR2(w) D[z, y] = s2 D[z, y],
    # using C vR2 = s2 vR1 and <vL1, vR1> = 1.
    C = 0.1 + rng.random((2, 2))
    D = 0.1 + rng.random((2, 2))
    es, w = build_oblique_eigenstructure(C, D)
    od = oblique_pf_data(C, D)
    r = restrict(w, es.rep, (1, 0, 1, 0))
    assert r.dims == {"S": 2, "N": 1, "W": 2, "E": 1}
    assert np.allclose(r.U_WS, od.s2 * D.T, rtol=1e-12, atol=0)
    got = eval_tensor(r, 2, 2).data
    assert rel_err(got, es.lam**5 * eval_tensor(es.rep, 2, 2).data) <= 1e-10


def _kron_power(v, n):
    out = np.ones(1)
    for _ in range(n):
        out = np.kron(out, v)
    return out


@pytest.mark.parametrize("shape,n", [((2, 2), 1), ((2, 3), 1), ((2, 2), 2)])
def test_oblique_sw_corner_morphism(rng, shape, n):
    # After removing an n x n South-West block, the corner matrix is no
    # longer a product of Perron-Frobenius vectors.  Pairing the West
    # factors with vR1 and the South factors with vL2 still maps every
    # corner-with-sides product back to the scalar representation, up to
    # Lambda per removed or added face.
    s1, s2 = shape
    C = 0.1 + rng.random((s1, s2))
    D = 0.1 + rng.random((s2, s1))
    es, w = build_oblique_eigenstructure(C, D)
    od = oblique_pf_data(C, D)
    rep = es.rep
    r = restrict(w, rep, (n, 0, n, 0))
    a, b = _kron_power(od.vR1, n), _kron_power(od.vL2, n)
    worst = 0.0
    for k in range(3):
        for l in range(3):
            PS = side_products(r.A_S, k)
            PW = side_products(r.A_W, l, reverse=True)
            lhs = np.einsum("a,wab,bc,xcd,d->wx", a, PW, r.U_WS, PS, b)
            pS = side_products(rep.A_S, k)[:, 0, 0]
            pW = side_products(rep.A_W, l, reverse=True)[:, 0, 0]
            rhs = od.Lambda ** (n * n + n * (k + l)) * np.outer(pW, pS)
            worst = max(worst, rel_err(lhs, rhs))
    assert worst <= 1e-9
