import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conelyap import numkernel as nk
from conelyap.errors import InvalidInput, SingularMatrix

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_sym_eig_descending_and_reconstructs():
    M = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]])
    r = nk.sym_eig(M)
    assert np.all(np.diff(r.eigenvalues) <= 0)
    V = r.eigenvectors
    assert np.allclose(V @ np.diag(r.eigenvalues) @ V.T, M, atol=1e-12)


def test_hurwitz_margin_of_known_spectrum():
    # eigenvalues -0.1, -2.1, -4.1
    A = np.array([[-2.1, 1, 1], [-1, -2.1, 2], [1, 2, -2.1]])
    assert nk.hurwitz_margin(A) == pytest.approx(-0.1, abs=1e-12)
    assert nk.hurwitz_margin(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(0.0, abs=1e-14)


def test_definiteness_predicates_use_tolerance():
    assert nk.is_negative_definite(-np.eye(2))
    assert not nk.is_negative_definite(np.diag([-1.0, -1e-12]))
    assert nk.is_positive_definite(np.diag([1.0, 2.0]))
    assert not nk.is_positive_definite(np.diag([1.0, 0.0]))


def test_solve_rejects_ill_conditioned():
    with pytest.raises(SingularMatrix):
        nk.solve(np.diag([1.0, 1e-14]), np.ones(2))
    with pytest.raises(SingularMatrix):
        nk.inv(np.zeros((2, 2)))


def test_input_validation():
    with pytest.raises(InvalidInput):
        nk.as_matrix(np.ones((2, 3)))
    with pytest.raises(InvalidInput):
        nk.as_matrix([[np.nan, 0], [0, 1]])
    with pytest.raises(InvalidInput):
        nk.as_symmetric([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(InvalidInput):
        nk.as_vector(np.ones((2, 2)))


def test_expm_commuting_blocks():
    # rotation generator: exp(tJ) is a planar rotation
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    t = 0.7
    R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    assert np.allclose(nk.expm(t * J), R, atol=1e-14)


def test_sqrtm_spd():
    P = np.array([[4.0, 1.0], [1.0, 3.0]])
    S = nk.sqrtm_spd(P)
    assert np.allclose(S @ S, P, atol=1e-12)
    assert np.allclose(S, S.T)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (4, 4), elements=finite))
def test_expm_matches_taylor_semigroup(M):
    M = M / 10
    E = nk.expm(M)
    assert np.allclose(E @ nk.expm(-M), np.eye(4), atol=1e-8 * np.linalg.norm(E) ** 2)
    assert np.allclose(nk.expm(2 * M), E @ E, rtol=1e-9, atol=1e-9 * np.linalg.norm(E) ** 2)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (5, 5), elements=finite))
def test_lambda_extremes_bound_rayleigh_quotients(M):
    S = M + M.T
    lam = scipy.linalg.eigvalsh(S)
    assert nk.lambda_max(S) == pytest.approx(lam[-1], abs=1e-9)
    assert nk.lambda_min(S) == pytest.approx(lam[0], abs=1e-9)
    assert nk.spectral_norm(S) == pytest.approx(np.max(np.abs(lam)), abs=1e-9)
