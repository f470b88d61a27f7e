import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conelyap import cones as cn
from conelyap.autgroup import boost_matrix, d_rotation
from conelyap.cones import IceCream, Orthant
from conelyap.errors import InvalidInput
from conelyap.numkernel import hurwitz_margin
from conelyap.stability import (certify_stability, d_stability, dual_witness, neg_inverse_in_end,
                                primal_witness)

from _gen import CONES, random_member, random_metzler

seeds = st.integers(0, 2**32 - 1)
EXAMPLE = np.array([[-2.1, 1, 1], [-1, -2.1, 2], [1, 2, -2.1]])


def eps_matrix(e1, e2):
    return np.array([[-e1, -1.0, 0.0], [1.0, -e1, 0.0], [0.0, 0.0, -e2]])


def test_worked_example_certificate():
    c = certify_stability(IceCream(3), EXAMPLE)
    assert c.hurwitz and c.witnesses_valid and c.inverse_endo
    assert c.hurwitz_margin == pytest.approx(-0.1, abs=1e-10)
    K = IceCream(3)
    assert cn.is_interior(K, c.z_witness) and cn.is_interior(K, -EXAMPLE @ c.z_witness)
    assert cn.is_interior(K, c.xi_witness) and cn.is_interior(K, -EXAMPLE.T @ c.xi_witness)


def test_unstable_member_has_no_witnesses():
    A = eps_matrix(0.5, 0.25) + 0.4 * np.eye(3)
    c = certify_stability(IceCream(3), A)
    assert not c.hurwitz
    assert c.z_witness is None and not c.inverse_endo


def test_nonmember_rejected():
    with pytest.raises(InvalidInput):
        certify_stability(Orthant(2), [[-1.0, -1.0], [0.0, -1.0]])


def test_orthant_witnesses_closed_form():
    A = np.array([[-1.0, 2.0], [0.0, -1.0]])
    z = primal_witness(Orthant(2), A)
    xi = dual_witness(Orthant(2), A)
    assert np.allclose(z, -np.linalg.solve(A, np.ones(2)))
    assert np.allclose(xi, -np.linalg.solve(A.T, np.ones(2)))
    assert np.allclose(z, [3.0, 1.0]) and np.allclose(xi, [1.0, 3.0])


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_four_way_equivalence(seed):
    rng = np.random.default_rng(seed)
    for C in CONES:
        A = random_member(C, rng) + rng.uniform(-3, 1) * np.eye(C.dim)
        m = hurwitz_margin(A)
        if abs(m) < 1e-3:
            continue
        c = certify_stability(C, A)
        preds = {c.hurwitz, neg_inverse_in_end(C, A), primal_witness(C, A) is not None,
                 dual_witness(C, A) is not None}
        assert len(preds) == 1, (C, A)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 6))
def test_metzler_hurwitz_iff_negative_inverse_nonnegative(seed, n):
    rng = np.random.default_rng(seed)
    A = random_metzler(n, rng, hurwitz=bool(rng.integers(2)))
    if abs(hurwitz_margin(A)) < 1e-3:
        return
    Minv = -np.linalg.inv(A)
    assert (hurwitz_margin(A) < 0) == bool(np.all(Minv >= -1e-12))


def test_d_stability_rotation_grid():
    A = eps_matrix(0.5, 0.25)
    K = IceCream(3)
    for b in np.linspace(0, 2 * np.pi, 37):
        r = d_stability(K, A, d_rotation(b).matrix, np.eye(3))
        analytic = np.sin(b) - 0.5 * np.cos(b) <= -0.25 + 1e-9
        assert r.applicable == analytic
        if r.applicable:
            assert r.hurwitz_margin < 0


def test_d_stability_with_boosts():
    rng = np.random.default_rng(2)
    K = IceCream(3)
    for _ in range(50):
        D1 = boost_matrix(rng.normal(size=2))
        D2 = boost_matrix(rng.normal(size=2))
        r = d_stability(K, EXAMPLE, D1, D2)
        assert r.hurwitz_margin < 0 or not r.applicable


def test_d_stability_preconditions():
    K = IceCream(3)
    with pytest.raises(InvalidInput):
        d_stability(K, EXAMPLE, np.diag([1.0, 2.0, 1.0]), np.eye(3))
    with pytest.raises(InvalidInput):
        d_stability(K, EXAMPLE + np.eye(3), np.eye(3), np.eye(3))
    assert d_stability(K, EXAMPLE, np.eye(3), np.eye(3)).status == "hurwitz"
