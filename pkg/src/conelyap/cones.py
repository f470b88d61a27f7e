"""Cone descriptors and the geometry the rest of the package needs.

Four variants are supported: the nonnegative orthant, the ice-cream
(Lorentz) cone ``K_n = {x : ||x[:-1]|| <= x[-1]}``, ellipsoidal cones
``{x : x'Qx <= 0, u'x >= 0}`` and direct sums of any of these.
Ellipsoidal cones are handled by congruence to ``K_n``, see
:func:`canonical_form`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np
import scipy.linalg

from .errors import InvalidInput, Unsupported
from .numkernel import TOL, as_symmetric, as_vector


@dataclass(frozen=True)
class Orthant:
    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise InvalidInput("cone dimension must be >= 1")

    @property
    def dim(self) -> int:
        return self.n


@dataclass(frozen=True)
class IceCream:
    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise InvalidInput("cone dimension must be >= 1")

    @property
    def dim(self) -> int:
        return self.n


@dataclass(frozen=True, eq=False)
class Ellipsoidal:
    """``{x : x'Qx <= 0, u'x >= 0}`` with ``Q`` of inertia ``(n-1, 0, 1)``.

    ``u`` must be the unit eigenvector of the single negative eigenvalue.
    """

    Q: np.ndarray
    u: np.ndarray
    transform: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        Q = as_symmetric(self.Q, "Q")
        u = as_vector(self.u, "u")
        n = Q.shape[0]
        if u.shape[0] != n:
            raise InvalidInput("u does not match the dimension of Q")
        lam, U = np.linalg.eigh(Q)
        scale = max(1.0, float(np.max(np.abs(lam))))
        if not (lam[0] < -TOL * scale and (n == 1 or lam[1] > TOL * scale)):
            raise InvalidInput("Q must have exactly one negative eigenvalue and no zero eigenvalues")
        if abs(np.linalg.norm(u) - 1.0) > 1e-8:
            raise InvalidInput("u must be a unit vector")
        if np.linalg.norm(Q @ u - lam[0] * u) > 1e-8 * scale:
            raise InvalidInput("u must be the eigenvector of the negative eigenvalue of Q")
        # rows: positive eigen-directions first, the negative one last
        order = np.r_[np.arange(1, n), 0]
        T = np.sqrt(np.abs(lam[order]))[:, None] * U[:, order].T
        if T[-1] @ u < 0:
            T[-1] = -T[-1]
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "transform", T)

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    def __eq__(self, other):
        return (isinstance(other, Ellipsoidal) and self.Q.shape == other.Q.shape
                and np.array_equal(self.Q, other.Q) and np.array_equal(self.u, other.u))

    def __hash__(self):
        return hash((self.Q.tobytes(), self.u.tobytes()))


@dataclass(frozen=True)
class DirectSum:
    """``C_1 (+) C_2 (+) ...``; a binary sum is the common case."""

    parts: tuple

    def __init__(self, *parts):
        if len(parts) == 1 and isinstance(parts[0], (list, tuple)):
            parts = tuple(parts[0])
        if len(parts) < 2:
            raise InvalidInput("a direct sum needs at least two parts")
        object.__setattr__(self, "parts", tuple(parts))

    @property
    def left(self):
        return self.parts[0]

    @property
    def right(self):
        return self.parts[1] if len(self.parts) == 2 else DirectSum(self.parts[1:])

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.parts)


Cone = Union[Orthant, IceCream, Ellipsoidal, DirectSum]


class Grade(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class MembershipGrade:
    grade: Grade
    margin: float

    @property
    def inside(self) -> bool:
        return self.grade is not Grade.OUTSIDE


def leaves(C: Cone) -> list:
    """Flatten nested direct sums into ``[(slice, simple_cone), ...]``."""
    out, start = [], 0

    def walk(c):
        nonlocal start
        if isinstance(c, DirectSum):
            for p in c.parts:
                walk(p)
        else:
            out.append((slice(start, start + c.dim), c))
            start += c.dim

    walk(C)
    return out


def _check_dim(C: Cone, x) -> np.ndarray:
    x = as_vector(x)
    if x.shape[0] != C.dim:
        raise InvalidInput(f"vector has dimension {x.shape[0]}, cone has {C.dim}")
    return x


def margin(C: Cone, x) -> float:
    """Signed Euclidean-style slack of ``x`` in ``C``; positive inside."""
    x = _check_dim(C, x)
    return float(margins(C, x[None, :])[0])


def margins(C: Cone, X) -> np.ndarray:
    """Row-wise :func:`margin` for a batch ``X`` of shape ``(m, n)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != C.dim:
        raise InvalidInput(f"batch must have shape (m, {C.dim})")
    if isinstance(C, Orthant):
        return X.min(axis=1)
    if isinstance(C, IceCream):
        last = X[:, -1]
        return np.minimum(last - np.linalg.norm(X[:, :-1], axis=1), last)
    if isinstance(C, Ellipsoidal):
        return margins(IceCream(C.dim), X @ C.transform.T)
    return np.min(np.stack([margins(c, X[:, s]) for s, c in leaves(C)]), axis=0)


def contains(C: Cone, x, tol=TOL) -> MembershipGrade:
    x = _check_dim(C, x)
    m = margin(C, x)
    band = tol * (1.0 + np.linalg.norm(x))
    if abs(m) <= band:
        grade = Grade.BOUNDARY
    elif m > 0:
        grade = Grade.INTERIOR
    else:
        grade = Grade.OUTSIDE
    return MembershipGrade(grade, m)


def is_interior(C: Cone, x, tol=TOL) -> bool:
    return contains(C, x, tol).grade is Grade.INTERIOR


def is_self_dual(C: Cone) -> bool:
    return all(not isinstance(c, Ellipsoidal) for _, c in leaves(C))


def dual(C: Cone) -> Cone:
    if isinstance(C, (Orthant, IceCream)):
        return C
    if isinstance(C, DirectSum):
        return DirectSum(tuple(dual(p) for p in C.parts))
    raise Unsupported("dual of an ellipsoidal cone is not provided")


def interior_point(C: Cone) -> np.ndarray:
    """Canonical interior point: ones for the orthant, ``e_n`` for ``K_n``."""
    if isinstance(C, Orthant):
        return np.ones(C.n)
    if isinstance(C, IceCream):
        e = np.zeros(C.n)
        e[-1] = 1.0
        return e
    if isinstance(C, Ellipsoidal):
        return C.u.copy()
    return np.concatenate([interior_point(p) for p in C.parts])


def canonical_form(C: Cone):
    """Return ``(C', T)`` with ``C'`` built from orthants and ice-cream cones
    only and ``x in C  <=>  T x in C'``."""
    if isinstance(C, (Orthant, IceCream)):
        return C, np.eye(C.dim)
    if isinstance(C, Ellipsoidal):
        return IceCream(C.dim), C.transform.copy()
    parts, blocks = zip(*(canonical_form(p) for p in C.parts))
    return DirectSum(parts), scipy.linalg.block_diag(*blocks)


def _unit_sphere(rng, count, dim) -> np.ndarray:
    g = rng.standard_normal((count, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    bad = norms[:, 0] == 0.0
    if np.any(bad):
        g[bad, 0], norms[bad] = 1.0, 1.0
    return g / norms


def extreme_rays(C: Cone, count: int, rng) -> np.ndarray:
    """Random generators of extreme rays, one per row."""
    if isinstance(C, Orthant):
        X = np.zeros((count, C.n))
        X[np.arange(count), rng.integers(0, C.n, count)] = 1.0
        return X
    if isinstance(C, IceCream):
        X = np.ones((count, C.n))
        if C.n > 1:
            X[:, :-1] = _unit_sphere(rng, count, C.n - 1)
        return X
    if isinstance(C, Ellipsoidal):
        return np.linalg.solve(C.transform, extreme_rays(IceCream(C.dim), count, rng).T).T
    parts = leaves(C)
    which = rng.integers(0, len(parts), count)
    X = np.zeros((count, C.dim))
    for k, (s, c) in enumerate(parts):
        rows = np.flatnonzero(which == k)
        X[rows, s] = extreme_rays(c, rows.size, rng)
    return X


def random_points(C: Cone, count: int, rng) -> np.ndarray:
    """Random interior points with a spread of margins."""
    if isinstance(C, Orthant):
        return np.exp(rng.normal(0.0, 1.0, (count, C.n)))
    if isinstance(C, IceCream):
        X = np.empty((count, C.n))
        X[:, :-1] = rng.standard_normal((count, C.n - 1))
        X[:, -1] = np.linalg.norm(X[:, :-1], axis=1) + np.exp(rng.normal(-0.5, 1.0, count))
        return X
    if isinstance(C, Ellipsoidal):
        return np.linalg.solve(C.transform, random_points(IceCream(C.dim), count, rng).T).T
    return np.hstack([random_points(c, count, rng) for _, c in leaves(C)])


def _simple_pairs(C, count, rng):
    n = C.dim
    X, Xi = np.zeros((count, n)), np.zeros((count, n))
    if n == 1:
        Xi[:, 0] = 1.0
        return X, Xi
    if isinstance(C, Orthant):
        i = rng.integers(0, n, count)
        j = (i + rng.integers(1, n, count)) % n
        X[np.arange(count), i] = 1.0
        Xi[np.arange(count), j] = 1.0
        return X, Xi
    d = _unit_sphere(rng, count, n - 1)
    X[:, :-1], X[:, -1] = d, 1.0
    Xi[:, :-1], Xi[:, -1] = -d, 1.0
    return X, Xi


def sample_boundary_pairs(C: Cone, count: int, rng):
    """Batch of complementary pairs ``x in bd C``, ``xi in C*``, ``x'xi = 0``.

    For a direct sum, ``x`` and ``xi`` are each supported in a single
    summand. When the summands differ, ``x`` is an extreme ray of one and
    ``xi`` an extreme ray of the other, which is what exposes coupling
    blocks that fail to map one summand into another.
    """
    if not is_self_dual(C):
        raise Unsupported("boundary pairs are only sampled for self-dual cones")
    if isinstance(C, (Orthant, IceCream)):
        return _simple_pairs(C, count, rng)
    parts = leaves(C)
    k = len(parts)
    i = rng.integers(0, k, count)
    j = rng.integers(0, k, count)
    X, Xi = np.zeros((count, C.dim)), np.zeros((count, C.dim))
    for a, (sa, ca) in enumerate(parts):
        same = np.flatnonzero((i == a) & (j == a))
        X[np.ix_(same, np.arange(C.dim)[sa])], Xi[np.ix_(same, np.arange(C.dim)[sa])] = \
            _simple_pairs(ca, same.size, rng)
        for b, (sb, cb) in enumerate(parts):
            if a == b:
                continue
            rows = np.flatnonzero((i == a) & (j == b))
            X[np.ix_(rows, np.arange(C.dim)[sa])] = extreme_rays(ca, rows.size, rng)
            Xi[np.ix_(rows, np.arange(C.dim)[sb])] = extreme_rays(cb, rows.size, rng)
    return X, Xi


def sample_boundary_pair(C: Cone, seed: int):
    X, Xi = sample_boundary_pairs(C, 1, np.random.default_rng(seed))
    return X[0], Xi[0]


def to_dict(C: Cone) -> dict:
    if isinstance(C, Orthant):
        return {"type": "orthant", "n": C.n}
    if isinstance(C, IceCream):
        return {"type": "icecream", "n": C.n}
    if isinstance(C, Ellipsoidal):
        return {"type": "ellipsoidal", "Q": C.Q.tolist(), "u": C.u.tolist()}
    return {"type": "direct_sum", "parts": [to_dict(p) for p in C.parts]}


def from_dict(d: dict) -> Cone:
    try:
        kind = d["type"]
        if kind == "orthant":
            return Orthant(int(d["n"]))
        if kind == "icecream":
            return IceCream(int(d["n"]))
        if kind == "ellipsoidal":
            return Ellipsoidal(np.asarray(d["Q"], dtype=float), np.asarray(d["u"], dtype=float))
        if kind == "direct_sum":
            parts = d["parts"] if "parts" in d else [d["left"], d["right"]]
            return DirectSum(tuple(from_dict(p) for p in parts))
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed cone description: {exc}") from exc
    raise InvalidInput(f"unknown cone type {d.get('type')!r}")
