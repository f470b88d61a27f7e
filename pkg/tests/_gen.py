"""Random generators shared by the test modules."""
import numpy as np
from scipy.stats import ortho_group

from conelyap import cones as cn
from conelyap.cones import DirectSum, Ellipsoidal, IceCream, Orthant
from conelyap.numkernel import hurwitz_margin


def random_ellipsoidal(n, rng):
    U = ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
    lam = np.r_[-rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0, n - 1)]
    Q = U @ np.diag(lam) @ U.T
    return Ellipsoidal((Q + Q.T) / 2, U[:, 0])


def random_metzler(n, rng, hurwitz=True):
    A = rng.uniform(0.0, 1.0, (n, n)) * (rng.random((n, n)) < 0.7)
    np.fill_diagonal(A, rng.uniform(-2.0, 0.0, n))
    if hurwitz:
        A -= (max(hurwitz_margin(A), 0.0) + rng.uniform(0.05, 1.0)) * np.eye(n)
    return A


def random_lie(C, rng):
    """Random element of Lie Aut(C)."""
    if isinstance(C, Orthant):
        return np.diag(rng.normal(0.0, 1.0, C.n))
    if isinstance(C, IceCream):
        n = C.n
        M = rng.normal(0.0, 1.0) * np.eye(n)
        S = rng.normal(0.0, 1.0, (n - 1, n - 1))
        M[:-1, :-1] += S - S.T
        b = rng.normal(0.0, 1.0, n - 1)
        M[:-1, -1] += b
        M[-1, :-1] += b
        return M
    if isinstance(C, Ellipsoidal):
        T = C.transform
        return np.linalg.solve(T, random_lie(IceCream(C.dim), rng) @ T)
    M = np.zeros((C.dim, C.dim))
    for s, c in cn.leaves(C):
        M[s, s] = random_lie(c, rng)
    return M


def random_end(C, rng, terms=3):
    """Nonnegative combination of rank-one maps ``x y'`` with x in C, y in C*."""
    Cc, T = cn.canonical_form(C)
    X = cn.random_points(Cc, terms, rng)
    Y = cn.random_points(Cc, terms, rng)
    w = rng.exponential(1.0, terms)
    E = (X.T * w) @ Y / terms
    return np.linalg.solve(T, E @ T)


def random_member(C, rng, end_scale=1.0):
    return random_lie(C, rng) + end_scale * random_end(C, rng)


CONES = [
    Orthant(4),
    IceCream(3),
    IceCream(5),
    DirectSum(IceCream(3), Orthant(2)),
    Ellipsoidal(np.diag([1.0, 2.0, -0.5]), np.array([0.0, 0.0, 1.0])),
]
