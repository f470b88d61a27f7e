"""Deciding whether ``x' = Ax`` leaves a cone invariant.

Membership in M(C) is decided exactly for orthants (Metzler test), ice-cream
cones (one-parameter S-lemma inequality ``QA + A'Q <= zQ``) and sums of
these (diagonal blocks cross-positive, coupling blocks in Hom). Ellipsoidal
cones are first mapped onto ``K_n`` by congruence. A randomized falsifier
that draws complementary boundary pairs gives an independent check: any
pair it returns is a proof of non-membership.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import cones as cn
from .autgroup import LieElement, lie_project, q_form
from .cones import DirectSum, Ellipsoidal, IceCream, Orthant
from .errors import InvalidInput
from .numkernel import TOL, as_matrix, spectral_norm
from .verdict import MembershipVerdict, Verdict, member, nonmember

log = logging.getLogger(__name__)

GOLDEN_ITERATIONS = 120
HOM_CROSSCHECK_SAMPLES = 1000
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def maximize_concave(f, a: float, b: float, iterations: int = GOLDEN_ITERATIONS):
    """Golden-section search for the maximum of a concave ``f`` on ``[a, b]``."""
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iterations):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
    best = max([(f1, x1), (f2, x2), (f(a), a), (f(b), b)])
    return best[1], best[0]


def lorentz_lmi(S, Q, lo: float, hi: float):
    """``max_z lambda_min(zQ - S)`` over ``[lo, hi]``; returns ``(z, value)``."""
    return maximize_concave(lambda z: float(np.linalg.eigvalsh(z * Q - S)[0]), lo, hi)


def _icecream_in_M(A, tol):
    n = A.shape[0]
    Q = q_form(n)
    QA = Q @ A
    S = QA + QA.T
    r = 2.0 * spectral_norm(S) or 1.0
    z, val = lorentz_lmi(S, Q, -r, r)
    if val >= -tol:
        return member(val, {"z": z})
    return nonmember(val, {"z": z}, _lorentz_counterexample(S))


def _lorentz_counterexample(S):
    """Boundary pair ``x = (d, 1)``, ``xi = (-d, 1)`` maximizing ``x'Sx``.

    Since ``xi'Ax = -x'QAx = -x'Sx/2``, a positive value violates
    cross-positivity. Returns ``None`` if the search finds none.
    """
    n = S.shape[0]
    if n == 1:
        return None
    rng = np.random.default_rng(0)
    D = rng.standard_normal((4096, n - 1))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    X = np.hstack([D, np.ones((D.shape[0], 1))])
    vals = np.einsum("ij,jk,ik->i", X, S, X)
    d = D[np.argmax(vals)]

    def f(y):
        x = np.append(y / (np.linalg.norm(y) or 1.0), 1.0)
        return -x @ S @ x

    y = minimize(f, d, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15}).x
    d = y / np.linalg.norm(y)
    x = np.append(d, 1.0)
    if x @ S @ x <= 0:
        return None
    return x, np.append(-d, 1.0)


def _orthant_in_M(A, tol):
    n = A.shape[0]
    if n == 1:
        return member(0.0)
    off = A.copy()
    np.fill_diagonal(off, np.inf)
    i, j = np.unravel_index(np.argmin(off), off.shape)
    m = float(off[i, j])
    if m >= -tol:
        return member(m)
    x, xi = np.zeros(n), np.zeros(n)
    x[j], xi[i] = 1.0, 1.0
    return nonmember(m, {"entry": (int(i), int(j))}, (x, xi))


def in_M(C, A, tol=TOL) -> MembershipVerdict:
    """Decide ``A in M(C)``, i.e. ``exp(tA) C`` is contained in ``C`` for all ``t >= 0``."""
    A = as_matrix(A, "A")
    if A.shape[0] != C.dim:
        raise InvalidInput(f"matrix is {A.shape[0]}x{A.shape[0]}, cone has dimension {C.dim}")
    if isinstance(C, Orthant):
        return _orthant_in_M(A, tol)
    if isinstance(C, IceCream):
        return _icecream_in_M(A, tol)
    if isinstance(C, Ellipsoidal) or not cn.is_self_dual(C):
        Cc, T = cn.canonical_form(C)
        v = in_M(Cc, T @ A @ np.linalg.inv(T), tol)
        witness = {"reduction": T, "reduced": v.witness}
        ce = None
        if v.counterexample is not None:
            x, xi = v.counterexample
            ce = (np.linalg.solve(T, x), T.T @ xi)
        return MembershipVerdict(v.verdict, v.margin, witness, ce)
    return _direct_sum_in_M(C, A, tol)


def _direct_sum_in_M(C, A, tol):
    parts = cn.leaves(C)
    results, witness = [], {"blocks": [], "couplings": []}
    ce = None
    for s, c in parts:
        r = in_M(c, A[s, s], tol)
        results.append(r)
        witness["blocks"].append(r.witness)
        if ce is None and r.counterexample is not None:
            x, xi = np.zeros(C.dim), np.zeros(C.dim)
            x[s], xi[s] = r.counterexample
            ce = (x, xi)
    for i, (si, ci) in enumerate(parts):
        for j, (sj, cj) in enumerate(parts):
            if i != j:
                r = hom_test(cj, ci, A[si, sj], tol)
                results.append(r)
                witness["couplings"].append({"rows": i, "cols": j, "verdict": r.verdict.value})
    m = min(r.margin for r in results)
    if any(r.verdict is Verdict.NONMEMBER for r in results):
        return nonmember(m, witness, ce)
    if any(r.verdict is Verdict.UNDETERMINED for r in results):
        return MembershipVerdict(Verdict.UNDETERMINED, m, witness)
    return member(m, witness)


def _lorentz_hom(B, tol, seed=0):
    """``B(K_m) in K_n`` via ``B'Q_n B <= mu Q_m`` (``mu >= 0``) plus orientation."""
    norm = spectral_norm(B)
    if norm == 0.0:
        return member(0.0, {"mu": 0.0})
    Bn = B / norm
    n, m = Bn.shape
    Qn, Qm = q_form(n), q_form(m)
    M = Bn.T @ Qn @ Bn
    e = np.zeros(m)
    e[-1] = 1.0
    image = Bn @ e
    if np.linalg.norm(image) <= tol:
        # B(K_m) would be a subspace through the origin
        return nonmember(-1.0, {"reason": "interior point mapped to zero"})
    mu, val = lorentz_lmi(M, Qm, 0.0, 1.0 + 1e-9)
    orient = cn.margin(IceCream(n), image) if n > 1 else float(image[0])
    if val < -tol:
        return nonmember(val, {"mu": mu * norm**2})
    if orient < -tol:
        return nonmember(orient, {"mu": mu * norm**2, "reason": "orientation"})
    witness = {"mu": mu * norm**2}
    # the quadratic criterion is cross-checked against sampled extreme rays
    rng = np.random.default_rng(seed)
    X = cn.extreme_rays(IceCream(m), HOM_CROSSCHECK_SAMPLES, rng)
    worst = float(np.min(cn.margins(IceCream(n), X @ Bn.T)))
    if worst < -1e3 * tol:
        log.warning("Lorentz Hom criterion contradicted by sampling (margin %.3g)", worst)
        return MembershipVerdict(Verdict.UNDETERMINED, worst, witness)
    return member(min(val, orient), witness)


def hom_test(C_from, C_to, B, tol=TOL) -> MembershipVerdict:
    """Decide ``B(C_from) in C_to``."""
    B = as_matrix(B, "B", square=False)
    if B.shape != (C_to.dim, C_from.dim):
        raise InvalidInput(f"map has shape {B.shape}, expected {(C_to.dim, C_from.dim)}")
    if isinstance(C_from, Ellipsoidal) or isinstance(C_to, Ellipsoidal) or \
            not (cn.is_self_dual(C_from) and cn.is_self_dual(C_to)):
        F, T1 = cn.canonical_form(C_from)
        G, T2 = cn.canonical_form(C_to)
        return hom_test(F, G, T2 @ B @ np.linalg.inv(T1), tol)
    if isinstance(C_from, DirectSum) or isinstance(C_to, DirectSum):
        results = [hom_test(cf, ct, B[st, sf], tol)
                   for sf, cf in cn.leaves(C_from) for st, ct in cn.leaves(C_to)]
        m = min(r.margin for r in results)
        if any(r.verdict is Verdict.NONMEMBER for r in results):
            return nonmember(m)
        if any(r.verdict is Verdict.UNDETERMINED for r in results):
            return MembershipVerdict(Verdict.UNDETERMINED, m)
        return member(m)
    scale = spectral_norm(B) or 1.0
    if isinstance(C_from, Orthant):
        # images of the extreme rays e_k are the columns
        m = float(np.min(cn.margins(C_to, B.T))) / scale
        return member(m) if m >= -tol else nonmember(m)
    if isinstance(C_to, Orthant):
        # each row must lie in the dual cone K* = K
        m = float(np.min(cn.margins(C_from, B))) / scale
        return member(m) if m >= -tol else nonmember(m)
    return _lorentz_hom(B, tol)


def in_end(C, B, tol=TOL) -> MembershipVerdict:
    return hom_test(C, C, B, tol)


def cross_positivity_falsifier(C, A, samples: int, seed: int, tol=TOL, chunk=10_000):
    """Search for ``(x, xi)`` with ``x'xi = 0`` and ``(Ax)'xi < 0``.

    A returned pair proves ``A`` is not in M(C); ``None`` is only evidence.
    """
    A = as_matrix(A, "A")
    if A.shape[0] != C.dim:
        raise InvalidInput("matrix does not match the cone dimension")
    rng = np.random.default_rng(seed)
    threshold = -tol * max(1.0, spectral_norm(A))
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        X, Xi = cn.sample_boundary_pairs(C, k, rng)
        vals = np.einsum("ij,ij->i", X @ A.T, Xi)
        bad = np.flatnonzero(vals < threshold)
        if bad.size:
            return X[bad[0]], Xi[bad[0]]
        done += k
    return None


@dataclass(frozen=True, eq=False)
class ConeDecomposition:
    """``A = A0 + A1`` with ``A0`` in Lie Aut(C).

    ``residual_ok`` reports whether this particular split has ``A1`` in
    End(C); a ``False`` does not imply ``A`` lies outside the Minkowski sum.
    """

    A0: LieElement
    A1: np.ndarray
    residual_ok: bool
    residual_verdict: MembershipVerdict


def decompose(C, A, tol=TOL) -> ConeDecomposition:
    A = as_matrix(A, "A")
    v = in_M(C, A, tol)
    if not v.member:
        raise InvalidInput(f"decompose requires A in M(C); verdict was {v.verdict.value}")
    A0 = lie_project(C, A)
    if isinstance(C, Orthant):
        A1 = A.copy()
        np.fill_diagonal(A1, 0.0)
    else:
        A1 = A - A0.matrix
    r = in_end(C, A1, tol)
    return ConeDecomposition(A0, A1, r.member, r)
