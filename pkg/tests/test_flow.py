import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilsoliton.core import SkewTuple, build_algebra, group_act, sample_tuple
from nilsoliton.derivations import derivation_algebra, leibniz_residual
from nilsoliton.flow import (
    FlowNotCertifiedError,
    certify_and_extract,
    minimal_vector_flow,
    moment_map,
)
from nilsoliton.stabilizers import lemma_check

from conftest import J, random_orthogonal

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture(scope="module")
def flow45():
    C = sample_tuple(4, 5, 2024)
    return C, minimal_vector_flow(C)


def test_moment_map_heisenberg_zero():
    for s in (1.0, 0.3):
        mq, mp = moment_map(SkewTuple.from_matrices([s * J]))
        np.testing.assert_allclose(mq, 0, atol=1e-15)
        np.testing.assert_allclose(mp, 0, atol=1e-15)


def test_moment_map_zero_tuple_rejected():
    with pytest.raises(ValueError):
        moment_map(SkewTuple.from_matrices(np.zeros((1, 2, 2))))


@given(st.sampled_from([(2, 4), (4, 5), (3, 6)]), seeds, st.floats(0.1, 10))
@settings(max_examples=30, deadline=None)
def test_moment_map_scaling_and_equivariance(pq, seed, lam):
    p, q = pq
    rng = np.random.default_rng(seed)
    C = sample_tuple(p, q, seed)
    mq, mp = moment_map(C)
    assert abs(np.trace(mq)) < 1e-10 and abs(np.trace(mp)) < 1e-10
    np.testing.assert_allclose(mq, mq.T)
    mq2, mp2 = moment_map(SkewTuple.from_matrices(lam * C.mats))
    np.testing.assert_allclose(mq2, lam**2 * mq, atol=1e-10 * lam**2)
    np.testing.assert_allclose(mp2, lam**2 * mp, atol=1e-10 * lam**2)
    k, l = random_orthogonal(rng, q), random_orthogonal(rng, p)
    mqk, mpl = moment_map(group_act(k, l, C))
    np.testing.assert_allclose(mqk, k @ mq @ k.T, atol=1e-10)
    np.testing.assert_allclose(mpl, l @ mp @ l.T, atol=1e-10)


def test_heisenberg_certified_immediately():
    C = SkewTuple.from_matrices([J])
    f = minimal_vector_flow(C)
    assert f.certified and f.iterations == 0
    a = build_algebra(C)
    cert = certify_and_extract(C, f, a, derivation_algebra(a))
    s = f.scale**2
    assert cert.c == pytest.approx(-1.5 * s, abs=1e-12)
    np.testing.assert_allclose(cert.D_matrix, s * np.diag([1.0, 1.0, 2.0]), atol=1e-12)
    assert cert.residual < 1e-12


def test_generic_45_flow_contracts(flow45):
    C, f = flow45
    assert f.certified and f.final_moment_norm < 1e-8
    hist = np.array(f.moment_norm_history)
    assert np.all(np.diff(hist) < 0)
    assert abs(np.linalg.norm(f.C_final.mats) - 1) < 1e-12
    assert abs(np.linalg.det(f.g_acc) - 1) < 1e-9 and abs(np.linalg.det(f.h_acc) - 1) < 1e-9
    assert f.orbit_residual() < 1e-8
    mats = f.C_final.mats
    S = np.einsum("aij,akj->ik", mats, mats)
    G = mats.reshape(4, -1) @ mats.reshape(4, -1).T
    np.testing.assert_allclose(S, np.eye(5) / 5, atol=1e-7)
    np.testing.assert_allclose(G, np.eye(4) / 4, atol=1e-7)


def test_generic_45_soliton_on_original(flow45):
    C, f = flow45
    a = build_algebra(C)
    der = derivation_algebra(a)
    cert = certify_and_extract(C, f, a, der)
    assert cert.residual < 1e-6
    assert leibniz_residual(a, cert.D_matrix) < 1e-9


def test_flow_preserves_isomorphism_class(flow45):
    C, f = flow45
    assert derivation_algebra(build_algebra(f.C_final)).dim == derivation_algebra(build_algebra(C)).dim
    assert lemma_check(C, f.certified).verdict


def test_single_step_strictly_decreases():
    C = sample_tuple(4, 5, 9)
    f = minimal_vector_flow(C, max_iter=20)
    assert len(f.moment_norm_history) >= 2
    assert f.moment_norm_history[1] < f.moment_norm_history[0]


def test_iteration_cap_inconclusive_and_refusal():
    C = sample_tuple(4, 5, 9)
    f = minimal_vector_flow(C, max_iter=1)
    assert f.status == "inconclusive"
    a = build_algebra(C)
    with pytest.raises(FlowNotCertifiedError):
        certify_and_extract(C, f, a, derivation_algebra(a))


def test_exceptional_25_not_certified():
    f = minimal_vector_flow(sample_tuple(2, 5, 0))
    assert f.status == "inconclusive"
    assert np.all(np.diff(f.moment_norm_history) <= 0)


def test_bad_parameters():
    C = sample_tuple(2, 4, 0)
    with pytest.raises(ValueError):
        minimal_vector_flow(C, tol=0)
    with pytest.raises(ValueError):
        minimal_vector_flow(C, step=-1.0)


def test_json_history_truncation(flow45):
    _, f = flow45
    js = f.to_json(keep=100)
    assert len(js["history_head"]) == 100 and len(js["history_tail"]) == 100
    assert js["history_min"] == min(f.moment_norm_history)
