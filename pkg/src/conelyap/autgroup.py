"""Automorphisms of the orthant and the ice-cream cone and their Lie algebras.

Only the identity component is ever synthesized: positive diagonals for the
orthant; rotations of the spatial block, symmetric boosts and positive
scalings for ``K_n``. Permutation factors are recognized by
:func:`is_automorphism` but never constructed.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from . import cones as cn
from .cones import DirectSum, Ellipsoidal, IceCream, Orthant
from .errors import InvalidInput, SingularMatrix, Unsupported
from .numkernel import TOL, as_matrix, as_vector, inv
from .verdict import member, nonmember


class Kind(str, Enum):
    DIAGONAL = "diagonal"
    ROTATION = "rotation"
    BOOST = "boost"
    SCALING = "scaling"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class AutElement:
    matrix: np.ndarray
    cone: object
    kind: Kind = Kind.GENERAL

    def __post_init__(self):
        G = as_matrix(self.matrix, "G")
        if G.shape[0] != self.cone.dim:
            raise InvalidInput("automorphism does not match the cone dimension")
        if not is_automorphism(self.cone, G, tol=1e-8):
            raise InvalidInput("matrix is not an automorphism of the cone")
        object.__setattr__(self, "matrix", G)

    def __matmul__(self, other):
        if isinstance(other, AutElement):
            return AutElement(self.matrix @ other.matrix, self.cone)
        return self.matrix @ other


@dataclass(frozen=True, eq=False)
class LieElement:
    """Element of Lie Aut(C).

    For ``K_n`` the matrix is ``alpha*I + [[skew, b], [b', 0]]``; for the
    orthant it is diagonal; direct sums keep one element per summand.
    """

    matrix: np.ndarray
    cone: object
    alpha: float | None = None
    skew: np.ndarray | None = None
    b: np.ndarray | None = None
    parts: tuple = ()


def q_form(n: int) -> np.ndarray:
    """``diag(1, ..., 1, -1)``."""
    Q = np.eye(n)
    Q[-1, -1] = -1.0
    return Q


def boost_matrix(b) -> np.ndarray:
    """Symmetric boost ``exp([[0, b], [b', 0]])`` in closed form."""
    b = as_vector(b, "b")
    n = b.shape[0] + 1
    P = np.eye(n)
    r = float(np.linalg.norm(b))
    if r == 0.0:
        return P
    bb = b / r
    P[:-1, :-1] += np.outer(bb, bb) * (np.cosh(r) - 1.0)
    P[-1, -1] = np.cosh(r)
    P[:-1, -1] = P[-1, :-1] = bb * np.sinh(r)
    return P


def boost(n: int, b) -> AutElement:
    b = as_vector(b, "b")
    if b.shape[0] != n - 1:
        raise InvalidInput(f"boost parameter must have length {n - 1}")
    return AutElement(boost_matrix(b), IceCream(n), Kind.BOOST)


def planar_rotation(angle: float) -> np.ndarray:
    """Counter-clockwise rotation ``[[cos, -sin], [sin, cos]]``."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def rotation(n: int, R) -> AutElement:
    """``[[R, 0], [0, 1]]`` for a proper orthogonal ``R`` of size ``n-1``."""
    R = as_matrix(R, "R")
    if R.shape[0] != n - 1:
        raise InvalidInput(f"R must be {n - 1}x{n - 1}")
    if np.max(np.abs(R.T @ R - np.eye(n - 1)), initial=0.0) > 1e-9:
        raise InvalidInput("R is not orthogonal")
    if n > 1 and np.linalg.det(R) < 0:
        raise InvalidInput("R must have determinant +1")
    G = np.eye(n)
    G[:-1, :-1] = R
    return AutElement(G, IceCream(n), Kind.ROTATION)


def d_rotation(b: float) -> AutElement:
    """The 3x3 rotation ``exp([[0, b, 0], [-b, 0, 0], [0, 0, 0]])``.

    Its spatial block ``[[cos b, sin b], [-sin b, cos b]]`` is
    ``planar_rotation(-b)``.
    """
    return rotation(3, planar_rotation(-b))


def scaling(C, s: float) -> AutElement:
    if s <= 0:
        raise InvalidInput("scaling factor must be positive")
    return AutElement(s * np.eye(C.dim), C, Kind.SCALING)


def positive_diagonal(d) -> AutElement:
    d = as_vector(d, "d")
    if np.any(d <= 0):
        raise InvalidInput("diagonal entries must be positive")
    return AutElement(np.diag(d), Orthant(d.shape[0]), Kind.DIAGONAL)


def _orthant_aut(G, tol):
    scale = float(np.max(np.abs(G))) or 1.0
    try:
        H = inv(G)
    except SingularMatrix:
        return nonmember(-1.0, {"reason": "singular"})
    hscale = float(np.max(np.abs(H))) or 1.0
    m = min(G.min() / scale, H.min() / hscale)
    if m < -tol:
        return nonmember(m, {"reason": "negative entry in G or its inverse"})
    big = G > tol * scale
    if not (np.all(big.sum(axis=1) == 1) and np.all(big.sum(axis=0) == 1)):
        return nonmember(m, {"reason": "not a monomial matrix"})
    perm = np.argmax(big, axis=1)
    return member(m, {"perm": perm, "diag": G[np.arange(G.shape[0]), perm]})


def _icecream_aut(G, tol):
    n = G.shape[0]
    Q = q_form(n)
    M = G.T @ Q @ G
    mu = float(np.trace(M @ Q)) / n
    norm = float(np.linalg.norm(M)) or 1.0
    resid = float(np.linalg.norm(M - mu * Q)) / norm
    orient = float(G[-1, -1])
    if resid > tol:
        return nonmember(-resid, {"mu": mu, "residual": resid})
    if mu <= 0 or orient <= 0:
        return nonmember(min(mu, orient), {"mu": mu, "residual": resid})
    return member(-resid, {"mu": mu, "residual": resid})


def is_automorphism(C, G, tol=TOL):
    """Decide ``G(C) = C``.

    Orthant: ``G`` and ``G^-1`` entrywise nonnegative, then a
    permutation-times-positive-diagonal factorization is recovered.
    ``K_n``: ``G'QG = mu Q`` with ``mu > 0`` fitted by least squares and
    ``(G e_n)_n > 0``. Direct sums are tested block by block and any nonzero
    coupling block is rejected, so swaps of identical summands are not
    recognized.
    """
    G = as_matrix(G, "G")
    if G.shape[0] != C.dim:
        raise InvalidInput(f"matrix is {G.shape[0]}x{G.shape[0]}, cone has dimension {C.dim}")
    if isinstance(C, Orthant):
        return _orthant_aut(G, tol)
    if isinstance(C, IceCream):
        return _icecream_aut(G, tol)
    if isinstance(C, Ellipsoidal):
        T = C.transform
        return _icecream_aut(T @ G @ np.linalg.inv(T), tol)
    parts = cn.leaves(C)
    scale = float(np.max(np.abs(G))) or 1.0
    mask = np.zeros_like(G, dtype=bool)
    for s, _ in parts:
        mask[s, s] = True
    off = float(np.max(np.abs(G[~mask]), initial=0.0)) / scale
    if off > tol:
        return nonmember(-off, {"reason": "nonzero coupling block"})
    results = [is_automorphism(c, G[s, s], tol) for s, c in parts]
    m = min(r.margin for r in results)
    if all(r.member for r in results):
        return member(m, [r.witness for r in results])
    return nonmember(m, [r.witness for r in results])


def lie_element(alpha: float, skew, b) -> LieElement:
    """Build ``alpha*I + [[skew, b], [b', 0]]`` in Lie Aut(K_n)."""
    b = as_vector(b, "b")
    n = b.shape[0] + 1
    S = as_matrix(skew, "skew") if n > 1 else np.zeros((0, 0))
    if S.shape[0] != n - 1 or np.max(np.abs(S + S.T), initial=0.0) > 1e-12:
        raise InvalidInput("skew must be a skew-symmetric (n-1)x(n-1) matrix")
    M = alpha * np.eye(n)
    M[:-1, :-1] += S
    M[:-1, -1] += b
    M[-1, :-1] += b
    return LieElement(M, IceCream(n), float(alpha), S.copy(), b.copy())


def lie_project(C, A) -> LieElement:
    """Frobenius-orthogonal projection of ``A`` onto Lie Aut(C)."""
    A = as_matrix(A, "A")
    if A.shape[0] != C.dim:
        raise InvalidInput("matrix does not match the cone dimension")
    if isinstance(C, Orthant):
        return LieElement(np.diag(np.diag(A)), C)
    if isinstance(C, IceCream):
        n = C.n
        alpha = float(np.trace(A)) / n
        top = A[:-1, :-1]
        skew = 0.5 * (top - top.T)
        b = 0.5 * (A[:-1, -1] + A[-1, :-1])
        el = lie_element(alpha, skew, b)
        return LieElement(el.matrix, C, el.alpha, el.skew, el.b)
    if isinstance(C, DirectSum):
        parts = tuple(lie_project(c, A[s, s]) for s, c in cn.leaves(C))
        M = scipy.linalg.block_diag(*(p.matrix for p in parts))
        return LieElement(M, C, parts=parts)
    raise Unsupported("Lie algebra projection is provided for orthants, ice-cream cones and their sums")
