from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilsoliton.core import (
    NotTwoStepTypeError,
    RangeError,
    SkewnessError,
    SkewTuple,
    bracket,
    build_algebra,
    classify_type,
    dim_so,
    expm,
    group_act,
    j_map,
    lie_act,
    sample_tuple,
)

from conftest import J, random_orthogonal

valid_types = st.integers(2, 10).flatmap(lambda q: st.tuples(st.integers(1, dim_so(q)), st.just(q)))
seeds = st.integers(0, 2**32 - 1)


# -- classification --------------------------------------------------------


def test_classify_examples():
    t = classify_type(1, 2)
    assert t.exceptional and t.reason == "(1,q) for q>=2"
    t = classify_type(4, 5)
    assert not t.exceptional and t.reason == "non-exceptional"
    t = classify_type(7, 5)
    assert t.exceptional and "complement pair (3,5)" in t.reason and "(3,k) for 4<=k<=6" in t.reason
    assert classify_type(2, 7).reason == "(2,k) for k>=3"
    assert classify_type(10, 5).reason == "(q(q-1)/2,q) for q>=2"


@pytest.mark.parametrize("p,q", [(0, 5), (11, 5), (1, 1), (3, 2)])
def test_classify_range(p, q):
    with pytest.raises(RangeError):
        classify_type(p, q)


@given(valid_types)
def test_classify_complement_symmetry(pq):
    p, q = pq
    comp = dim_so(q) - p
    if comp >= 1:
        assert classify_type(p, q).exceptional == classify_type(comp, q).exceptional


# -- tuples ----------------------------------------------------------------


def test_sample_deterministic():
    assert sample_tuple(4, 5, 7) == sample_tuple(4, 5, 7)
    assert sample_tuple(4, 5, 7, "rational-lattice") == sample_tuple(4, 5, 7, "rational-lattice")
    assert not sample_tuple(4, 5, 7) == sample_tuple(4, 5, 8)


def test_sample_45_independent():
    assert sample_tuple(4, 5, 1).independent


@pytest.mark.parametrize("seed", range(5))
def test_sample_12_is_multiple_of_J(seed):
    C = sample_tuple(1, 2, seed)
    M = C.mats[0]
    assert M[0, 1] != 0
    np.testing.assert_array_equal(M, M[0, 1] * J)


def test_rational_lattice_entries():
    C = sample_tuple(4, 5, 3, "rational-lattice")
    assert C.mode == "rational"
    for x in C.mats.reshape(-1):
        assert isinstance(x, Fraction) and (4 * x).denominator == 1 and abs(4 * x) <= 9


@given(valid_types, seeds)
@settings(max_examples=40, deadline=None)
def test_sampled_tuples_are_skew(pq, seed):
    p, q = pq
    C = sample_tuple(p, q, seed)
    for M in C.mats:
        assert np.linalg.norm(M + M.T) <= 1e-12 * (1 + np.linalg.norm(M))


def test_non_skew_rejected():
    with pytest.raises(SkewnessError):
        SkewTuple.from_matrices([[[0.0, 1.0], [1.0, 0.0]]])
    with pytest.raises(SkewnessError):
        SkewTuple.from_matrices(np.array([[[Fraction(0), Fraction(1)], [Fraction(1, 2), Fraction(0)]]], dtype=object))


# -- algebras --------------------------------------------------------------


def test_heisenberg_brackets(heisenberg):
    e1, e2, z1 = np.eye(3)
    np.testing.assert_array_equal(bracket(heisenberg, e1, e2), z1)
    np.testing.assert_array_equal(bracket(heisenberg, e2, e1), -z1)
    np.testing.assert_array_equal(bracket(heisenberg, e1, z1), 0)
    np.testing.assert_array_equal(bracket(heisenberg, e1, e1), 0)


def test_dependent_tuple_rejected():
    M = sample_tuple(1, 3, 0).mats[0]
    C = SkewTuple.from_matrices([M, 2 * M])
    assert not C.independent
    with pytest.raises(NotTwoStepTypeError):
        build_algebra(C)


def test_random_45_commutator_dim():
    C = sample_tuple(4, 5, 2)
    a = build_algebra(C)
    q = a.q
    images = np.array([bracket(a, np.eye(9)[i], np.eye(9)[j])[q:] for i in range(q) for j in range(q)])
    assert np.linalg.matrix_rank(images) == 4


def test_bracket_dimension_mismatch(heisenberg):
    with pytest.raises(ValueError):
        bracket(heisenberg, np.zeros(2), np.zeros(3))


@given(st.sampled_from([(1, 2), (2, 4), (4, 5), (3, 6)]), seeds)
@settings(max_examples=30, deadline=None)
def test_bracket_bilinear_antisymmetric(pq, seed):
    a = build_algebra(sample_tuple(*pq, seed))
    rng = np.random.default_rng(seed)
    x, y, w = rng.standard_normal((3, a.n))
    s = rng.standard_normal()
    np.testing.assert_allclose(bracket(a, x, y), -bracket(a, y, x), atol=1e-12)
    np.testing.assert_allclose(bracket(a, s * x + w, y), s * bracket(a, x, y) + bracket(a, w, y), atol=1e-10)
    assert np.all(bracket(a, x, y)[: a.q] == 0)
    # z-components of inputs are ignored
    x2 = x.copy()
    x2[a.q:] += 1.0
    np.testing.assert_allclose(bracket(a, x2, y), bracket(a, x, y))


# -- j-map -----------------------------------------------------------------


def test_j_map_examples(heisenberg):
    np.testing.assert_array_equal(j_map(heisenberg, np.zeros(1)), 0)
    np.testing.assert_array_equal(j_map(heisenberg, np.ones(1)), -J)
    a = build_algebra(sample_tuple(2, 4, 1))
    np.testing.assert_allclose(j_map(a, np.array([1.0, 1.0])), j_map(a, np.eye(2)[0]) + j_map(a, np.eye(2)[1]))


@given(st.sampled_from([(1, 2), (2, 4), (4, 5), (5, 6)]), seeds)
@settings(max_examples=30, deadline=None)
def test_j_map_defining_identity(pq, seed):
    a = build_algebra(sample_tuple(*pq, seed))
    E = np.eye(a.n)
    for al in range(a.p):
        Jz = j_map(a, np.eye(a.p)[al])
        for i in range(a.q):
            for j in range(a.q):
                lhs = (Jz @ E[i, : a.q]) @ E[j, : a.q]
                rhs = bracket(a, E[i], E[j])[a.q + al]
                assert abs(lhs - rhs) <= 1e-12


# -- actions ---------------------------------------------------------------


def test_group_act_examples():
    C = sample_tuple(3, 4, 5)
    assert group_act(np.eye(4), np.eye(3), C) == C
    lam = 1.7
    np.testing.assert_allclose(group_act(lam * np.eye(4), np.eye(3), C).mats, lam**2 * C.mats, rtol=1e-14)
    H = SkewTuple.from_matrices([J])
    th = 0.83
    k = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    np.testing.assert_allclose(group_act(k, np.eye(1), H).mats, H.mats, atol=1e-15)
    with pytest.raises(ValueError):
        group_act(np.zeros((4, 4)), np.eye(3), C)


def test_group_act_rational_exact():
    C = sample_tuple(2, 4, 0, "rational-lattice")
    g = np.array([[Fraction(1), Fraction(1, 3), 0, 0], [0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 1]], dtype=object)
    h = np.array([[1, 1], [0, 1]], dtype=object)
    out = group_act(g, h, C)
    assert out.mode == "rational"
    assert all(isinstance(x, Fraction) for x in out.mats.reshape(-1))


@given(st.sampled_from([(2, 3), (4, 5), (3, 6)]), seeds)
@settings(max_examples=30, deadline=None)
def test_group_law_and_independence(pq, seed):
    p, q = pq
    rng = np.random.default_rng(seed)
    C = sample_tuple(p, q, seed)
    g1, g2 = rng.standard_normal((2, q, q)) + 3 * np.eye(q)
    h1, h2 = rng.standard_normal((2, p, p)) + 3 * np.eye(p)
    lhs = group_act(g1, h1, group_act(g2, h2, C)).mats
    rhs = group_act(g1 @ g2, h1 @ h2, C).mats
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.abs(rhs).max())
    out = group_act(g1, h1, C)
    assert out.independent == C.independent
    for M in out.mats:
        assert np.linalg.norm(M + M.T) <= 1e-12 * (1 + np.linalg.norm(M))


def test_lie_act_examples():
    C = sample_tuple(3, 4, 1)
    np.testing.assert_array_equal(lie_act(np.zeros((4, 4)), np.zeros((3, 3)), C), 0)
    np.testing.assert_allclose(lie_act(-np.eye(4), 2 * np.eye(3), C), 0, atol=1e-14)
    np.testing.assert_allclose(lie_act(np.eye(4), np.zeros((3, 3)), C), 2 * C.mats)
    with pytest.raises(ValueError):
        lie_act(np.eye(3), np.eye(3), C)


@given(st.sampled_from([(1, 2), (2, 4), (4, 5)]), seeds)
@settings(max_examples=25, deadline=None)
def test_lie_act_is_derivative_of_group_act(pq, seed):
    """Richardson-extrapolated difference quotients converge to lie_act at O(t^2)."""
    p, q = pq
    rng = np.random.default_rng(seed)
    C = sample_tuple(p, q, seed)
    X, Y = rng.standard_normal((q, q)), rng.standard_normal((p, p))
    target = lie_act(X, Y, C)
    errs = []
    for t in (1e-5, 1e-6):
        d1 = (group_act(expm(t * X), expm(t * Y), C).mats - C.mats) / t
        d2 = (group_act(expm(2 * t * X), expm(2 * t * Y), C).mats - C.mats) / (2 * t)
        plain = np.abs(d1 - target).max()
        rich = np.abs(2 * d1 - d2 - target).max()
        assert plain <= 50 * t * (1 + np.abs(target).max()) ** 2
        errs.append(rich)
    assert max(errs) <= 1e-6 * (1 + np.abs(target).max())


@given(st.sampled_from([(2, 4), (4, 5)]), seeds)
@settings(max_examples=20, deadline=None)
def test_lie_act_linear_and_skew(pq, seed):
    p, q = pq
    rng = np.random.default_rng(seed)
    C = sample_tuple(p, q, seed)
    X1, X2 = rng.standard_normal((2, q, q))
    Y1, Y2 = rng.standard_normal((2, p, p))
    out = lie_act(X1 + X2, Y1 + Y2, C)
    np.testing.assert_allclose(out, lie_act(X1, Y1, C) + lie_act(X2, Y2, C), atol=1e-12)
    np.testing.assert_allclose(out, -np.transpose(out, (0, 2, 1)), atol=1e-12)


def test_orthogonal_action_preserves_norm():
    rng = np.random.default_rng(3)
    C = sample_tuple(4, 5, 3)
    out = group_act(random_orthogonal(rng, 5), random_orthogonal(rng, 4), C)
    assert out.norm() == pytest.approx(C.norm(), rel=1e-13)
