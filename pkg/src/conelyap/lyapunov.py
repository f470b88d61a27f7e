"""Structured quadratic Lyapunov functions for cone-preserving systems.

The construction works with the characteristic function of a symmetric cone,
``f(x) = int_{C*} exp(-x'y) dy``, its log-gradient map
``phi(x) = -grad log f(x)`` and the Hessian ``P(x) = -(d phi / dx)'``, which
is a symmetric positive-definite automorphism of ``C``. For ``A`` in M(C)
Hurwitz, take ``v = -A^-1 u0``, ``w = -A^-T u0``, find ``z`` with
``P(z) v = w``; then ``V(x) = x' P(z) x`` is a Lyapunov function.

Closed forms (multiplicative constants of ``f`` are dropped, only
``grad log f`` matters):

* orthant: ``f = prod 1/x_i``, ``phi = 1/x``, ``P = diag(1/x_i^2)``
* ``K_n``: ``f = q^(-n/2)`` with ``q = x_n^2 - |x_bar|^2``,
  ``phi = -n Q x / q``, ``P = n Q / q + 2n (Qx)(Qx)' / q^2``
* direct sums: products, concatenations and block diagonals.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.special

from . import cones as cn
from .autgroup import boost_matrix, q_form
from .cones import DirectSum, Ellipsoidal, IceCream, Orthant
from .errors import (DomainError, InternalInconsistency, InvalidInput,
                     NotHurwitz, NotInMC, NumericalFailure, Unsupported)
from .invariance import in_M
from .numkernel import (TOL, as_matrix, as_symmetric, as_vector,
                        hurwitz_margin, sqrtm_spd, solve)

log = logging.getLogger(__name__)

NEWTON_MAX_ITER = 200
SOLVE_RTOL = 1e-8
STRUCTURE_TOL = 1e-7


def _lorentz_q(x):
    return float(x[-1] ** 2 - x[:-1] @ x[:-1])


def _require_interior(C, x):
    x = as_vector(x)
    if x.shape[0] != C.dim:
        raise InvalidInput(f"vector has dimension {x.shape[0]}, cone has {C.dim}")
    if isinstance(C, Ellipsoidal) or not cn.is_self_dual(C):
        raise Unsupported("characteristic-function quantities are provided for orthants, "
                          "ice-cream cones and their direct sums")
    if not cn.margin(C, x) > 0:
        raise DomainError("point is not in the interior of the cone")
    return x


def char_function(C, x) -> float:
    x = _require_interior(C, x)
    if isinstance(C, Orthant):
        return float(np.prod(1.0 / x))
    if isinstance(C, IceCream):
        return _lorentz_q(x) ** (-C.n / 2.0)
    return float(np.prod([char_function(c, x[s]) for s, c in cn.leaves(C)]))


def phi_map(C, x) -> np.ndarray:
    x = _require_interior(C, x)
    if isinstance(C, Orthant):
        return 1.0 / x
    if isinstance(C, IceCream):
        return -C.n * (q_form(C.n) @ x) / _lorentz_q(x)
    return np.concatenate([phi_map(c, x[s]) for s, c in cn.leaves(C)])


def hessian_P(C, z) -> np.ndarray:
    z = _require_interior(C, z)
    if isinstance(C, Orthant):
        return np.diag(z ** -2.0)
    if isinstance(C, IceCream):
        n = C.n
        Qz = q_form(n) @ z
        q = _lorentz_q(z)
        P = (n / q) * q_form(n) + (2.0 * n / q**2) * np.outer(Qz, Qz)
        return 0.5 * (P + P.T)
    return scipy.linalg.block_diag(*(hessian_P(c, z[s]) for s, c in cn.leaves(C)))


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float


def _unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def char_function_mc(C, x, N: int, seed: int) -> MCEstimate:
    """Importance-sampling estimate of ``int_{C*} exp(-x'y) dy``.

    The proposal is exponential on ``C*``: for the orthant the rates are
    ``x_i - min(x)/2``; for ``K_n`` the rate along ``e_n`` is the margin of
    ``x``. Both keep the weights bounded. The result
    is divided by the same constant that :func:`char_function` drops
    (``1`` for the orthant, ``Gamma(n) vol(B_{n-1})`` for ``K_n``), so the
    two are directly comparable.
    """
    x = _require_interior(C, x)
    rng = np.random.default_rng(seed)
    if isinstance(C, Orthant):
        # rates pulled halfway to the boundary keep each weight factor's variance below 4/3
        rate = x - 0.5 * float(x.min())
        Y = rng.exponential(1.0 / rate, (N, C.n))
        logw = -np.sum(np.log(rate)) - Y @ (x - rate)
    elif isinstance(C, IceCream):
        n = C.n
        r = cn.margin(C, x)
        t = rng.gamma(n, 1.0 / r, N)
        if n == 1:
            xy = x[0] * t
        else:
            rho = rng.random(N) ** (1.0 / (n - 1))
            g = rng.standard_normal((N, n - 1))
            u = g / np.linalg.norm(g, axis=1, keepdims=True)
            xy = t * (x[-1] + rho * (u @ x[:-1]))
        logw = -n * np.log(r) - (xy - r * t)
    else:
        raise Unsupported("Monte-Carlo estimate is provided for a single orthant or ice-cream cone")
    w = np.exp(logw)
    return MCEstimate(float(w.mean()), float(w.std(ddof=1) / np.sqrt(N)))


def lorentz_char_constant(n: int) -> float:
    """``int_{K_n} exp(-y_n) dy``, the factor dropped by :func:`char_function`."""
    return math.gamma(n) * _unit_ball_volume(n - 1)


# -- solving P(z) v = w -----------------------------------------------------

def _lorentz_residual(z, v, w):
    n = z.shape[0]
    Q = q_form(n)
    Qz, Qv = Q @ z, Q @ v
    q = _lorentz_q(z)
    return n * Qv / q + (2.0 * n / q**2) * Qz * (z @ Qv) - w


def _lorentz_jacobian(z, v):
    n = z.shape[0]
    Q = q_form(n)
    Qz, Qv = Q @ z, Q @ v
    q = _lorentz_q(z)
    s = z @ Qv
    return ((2.0 * n / q**2) * (np.outer(Qv, Qz) + s * Q + np.outer(Qz, Qv))
            + (8.0 * n * s / q**3) * np.outer(Qz, Qz))


def _newton_lorentz(v, w, z0, max_iter=NEWTON_MAX_ITER):
    C = IceCream(v.shape[0])
    z = z0.copy()
    wn = np.linalg.norm(w)
    for _ in range(max_iter):
        F = _lorentz_residual(z, v, w)
        if np.linalg.norm(F) <= 1e-14 * wn:
            break
        try:
            step = np.linalg.solve(_lorentz_jacobian(z, v), -F)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(_lorentz_jacobian(z, v), -F, rcond=None)[0]
        m0 = cn.margin(C, z)
        t = 1.0
        while t > 1e-12:
            trial = z + t * step
            if cn.margin(C, trial) >= 0.1 * m0:
                break
            t *= 0.5
        else:
            break
        z = trial
    return z


def _solve_lorentz(v, w):
    n = v.shape[0]
    C = IceCream(n)
    wn = np.linalg.norm(w)
    # q(z) of the solution is fixed by the Lorentz norms of v and w
    qz = n * math.sqrt(_lorentz_q(v) / _lorentz_q(w))
    z0 = math.sqrt(qz) * cn.interior_point(C)
    z = _newton_lorentz(v, w, z0)
    if cn.margin(C, z) > 0 and np.linalg.norm(_lorentz_residual(z, v, w)) <= SOLVE_RTOL * wn:
        return z
    log.info("Newton did not converge for P(z)v = w; falling back to Nelder-Mead")

    def objective(y):
        if cn.margin(C, y) <= 0:
            return np.inf
        return float(np.sum(_lorentz_residual(y, v, w) ** 2)) / wn**2

    res = scipy.optimize.minimize(objective, z0, method="Nelder-Mead",
                                  options={"xatol": 1e-12, "fatol": 1e-24, "maxiter": 20000 * n})
    z = _newton_lorentz(v, w, res.x)
    if cn.margin(C, z) > 0 and np.linalg.norm(_lorentz_residual(z, v, w)) <= SOLVE_RTOL * wn:
        return z
    raise NumericalFailure("could not solve P(z) v = w")


def solve_P_target(C, v, w) -> np.ndarray:
    """Find ``z`` in int C with ``P(z) v = w`` for interior ``v``, ``w``."""
    v = _require_interior(C, v)
    w = _require_interior(C, w)
    if isinstance(C, Orthant):
        return np.sqrt(v / w)
    if isinstance(C, IceCream):
        if C.n == 1:
            return np.sqrt(v / w)
        return _solve_lorentz(v, w)
    return np.concatenate([solve_P_target(c, v[s], w[s]) for s, c in cn.leaves(C)])


# -- structure of P -----------------------------------------------------------

@dataclass(frozen=True)
class Identity:
    kind = "identity"

    def parameters(self):
        return np.zeros(0)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class Diagonal:
    d: np.ndarray
    kind = "diagonal"

    def parameters(self):
        """The ``n - 1`` ratios ``d_i / d_1``, ``i >= 2``."""
        return self.d[1:] / self.d[0]

    def to_dict(self):
        return {"kind": self.kind, "d": self.d.tolist()}


@dataclass(frozen=True, eq=False)
class Boost:
    b: np.ndarray
    kind = "boost"

    def parameters(self):
        return self.b.copy()

    def to_dict(self):
        return {"kind": self.kind, "b": self.b.tolist()}


@dataclass(frozen=True, eq=False)
class BlockDiag:
    parts: tuple
    scales: tuple
    kind = "block_diag"

    def parameters(self):
        return np.concatenate([p.parameters() for p in self.parts] + [np.log(self.scales[1:])])

    def to_dict(self):
        return {"kind": self.kind, "parts": [p.to_dict() for p in self.parts],
                "scales": list(map(float, self.scales))}


@dataclass(frozen=True, eq=False)
class Congruence:
    """``P = T' P_inner T`` for an ellipsoidal cone mapped onto ``K_n`` by ``T``."""

    transform: np.ndarray
    inner: object
    kind = "congruence"

    def parameters(self):
        return self.inner.parameters()

    def to_dict(self):
        return {"kind": self.kind, "transform": self.transform.tolist(),
                "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class General:
    kind = "general"

    def parameters(self):
        return np.zeros(0)

    def to_dict(self):
        return {"kind": self.kind}


def structure_from_dict(d):
    kind = d["kind"]
    if kind == "identity":
        return Identity()
    if kind == "diagonal":
        return Diagonal(np.asarray(d["d"], dtype=float))
    if kind == "boost":
        return Boost(np.asarray(d["b"], dtype=float))
    if kind == "block_diag":
        return BlockDiag(tuple(structure_from_dict(p) for p in d["parts"]), tuple(d["scales"]))
    if kind == "congruence":
        return Congruence(np.asarray(d["transform"], dtype=float), structure_from_dict(d["inner"]))
    if kind == "general":
        return General()
    raise InvalidInput(f"unknown structure kind {kind!r}")


def unit_det(P):
    """Rescale a positive-definite ``P`` to determinant one; returns ``(P, scale)``."""
    sign, logdet = np.linalg.slogdet(P)
    if sign <= 0:
        raise NumericalFailure("P is not positive definite")
    scale = math.exp(logdet / P.shape[0])
    return P / scale, scale


def extract_boost(P, tol=STRUCTURE_TOL):
    """Return ``b`` with ``P = boost_matrix(b)`` or ``None``; ``P`` must have unit determinant."""
    n = P.shape[0]
    if n == 1:
        return np.zeros(0)
    lam = np.linalg.eigvalsh(P)
    r = 0.5 * math.log(lam[-1] / lam[0])
    if r < 1e-12:
        b = np.zeros(n - 1)
    else:
        b = r * P[:-1, -1] / math.sinh(r)
    err = np.max(np.abs(P - boost_matrix(b))) / max(1.0, np.max(np.abs(P)))
    return b if err <= tol else None


def extract_structure(C, P, tol=STRUCTURE_TOL):
    """Describe a unit-determinant ``P`` in the parametrization native to ``C``."""
    if np.max(np.abs(P - np.eye(P.shape[0]))) <= tol:
        return Identity()
    if isinstance(C, Orthant):
        off = P - np.diag(np.diag(P))
        return Diagonal(np.diag(P).copy()) if np.max(np.abs(off)) <= tol * np.max(np.abs(P)) else General()
    if isinstance(C, IceCream):
        b = extract_boost(P, tol)
        return General() if b is None else Boost(b)
    if isinstance(C, DirectSum):
        parts, scales = [], []
        for s, c in cn.leaves(C):
            block, scale = unit_det(P[s, s])
            parts.append(extract_structure(c, block, tol))
            scales.append(scale)
        return BlockDiag(tuple(parts), tuple(scales))
    return General()


# -- certificates ------------------------------------------------------------

@dataclass(frozen=True)
class LyapunovCheck:
    pd_margin: float
    lyap_margin: float
    valid: bool


def verify_lyapunov(A, P, tol=TOL) -> LyapunovCheck:
    """``valid`` iff ``lambda_min(P) > tol`` and ``lambda_max(PA + A'P) < -tol``."""
    A = as_matrix(A, "A")
    P = as_symmetric(P, "P")
    if P.shape != A.shape:
        raise InvalidInput("P and A must have the same shape")
    pd = float(np.linalg.eigvalsh(P)[0])
    L = P @ A
    lm = float(np.linalg.eigvalsh(L + L.T)[-1])
    return LyapunovCheck(pd, lm, pd > tol and lm < -tol)


def reduced_lyapunov_matrix(P, A):
    """``Q A Q^-1 + Q^-1 A' Q`` with ``Q`` the principal square root of ``P``;
    congruent to ``PA + A'P`` through ``Q^-1``."""
    Q = sqrtm_spd(P)
    Qi = np.linalg.inv(Q)
    W = Q @ A @ Qi + Qi @ A.T @ Q
    return 0.5 * (W + W.T)


@dataclass(frozen=True, eq=False)
class LyapunovCertificate:
    P: np.ndarray
    structure: object
    lyap_margin: float
    pd_margin: float
    provenance: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.lyap_margin < 0 and self.pd_margin > 0

    def to_dict(self) -> dict:
        prov = {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.provenance.items()}
        return {
            "P": self.P.tolist(),
            "structure": self.structure.to_dict(),
            "lyap_margin": float(self.lyap_margin),
            "pd_margin": float(self.pd_margin),
            "valid": self.valid,
            "provenance": prov,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["P"], dtype=float), structure_from_dict(d["structure"]),
                   float(d["lyap_margin"]), float(d["pd_margin"]), dict(d.get("provenance", {})))


def _family(C):
    """Parametrized family of unit-scale structured P for the fallback search."""
    if isinstance(C, Orthant):
        return C.n - 1, lambda p: np.diag(np.exp(np.r_[0.0, p]))
    if isinstance(C, IceCream):
        return C.n - 1, boost_matrix
    parts = cn.leaves(C)
    fams = [_family(c) for _, c in parts]
    sizes = [k for k, _ in fams]

    def build(p):
        blocks, pos = [], 0
        for (k, f) in fams:
            blocks.append(f(p[pos:pos + k]))
            pos += k
        logs = np.r_[0.0, p[pos:]]
        return scipy.linalg.block_diag(*(np.exp(ls) * B for ls, B in zip(logs, blocks)))

    return sum(sizes) + len(parts) - 1, build


def _fallback(C, A, x0=None):
    k, build = _family(C)
    if k == 0:
        return build(np.zeros(0))

    def objective(p):
        P = build(p)
        L = P @ A
        return float(np.linalg.eigvalsh(L + L.T)[-1] / np.linalg.eigvalsh(P)[-1])

    x0 = np.zeros(k) if x0 is None else x0
    res = scipy.optimize.minimize(objective, x0, method="Nelder-Mead",
                                  options={"maxiter": 4000 * k, "xatol": 1e-10, "fatol": 1e-14})
    return build(res.x)


def synth_lyapunov(C, A, tol=TOL) -> LyapunovCertificate:
    """Structured Lyapunov certificate for ``A`` in M(C) Hurwitz.

    Raises :class:`NotInMC`, :class:`NotHurwitz`, or
    :class:`NumericalFailure` when neither the construction nor the
    derivative-free fallback verifies.
    """
    A = as_matrix(A, "A")
    if A.shape[0] != C.dim:
        raise InvalidInput("matrix does not match the cone dimension")
    verdict = in_M(C, A, tol)
    if not verdict.member:
        raise NotInMC(f"A is not in M(C): {verdict.verdict.value}, margin {verdict.margin:.3g}", verdict)
    margin = hurwitz_margin(A)
    if margin >= 0:
        raise NotHurwitz(f"A is not Hurwitz (spectral abscissa {margin:.3g})", margin)

    if isinstance(C, Ellipsoidal) or not cn.is_self_dual(C):
        Cc, T = cn.canonical_form(C)
        inner = synth_lyapunov(Cc, T @ A @ np.linalg.inv(T), tol)
        P = T.T @ inner.P @ T
        P = 0.5 * (P + P.T)
        chk = verify_lyapunov(A, P, tol)
        prov = dict(inner.provenance, transform=T)
        return LyapunovCertificate(P, Congruence(T, inner.structure), chk.lyap_margin, chk.pd_margin, prov)

    u0 = cn.interior_point(C)
    v = solve(A, -u0)
    w = solve(A.T, -u0)
    if not (cn.margin(C, v) > 0 and cn.margin(C, w) > 0):
        raise InternalInconsistency("stability witnesses are not interior for a Hurwitz member of M(C)")
    z = solve_P_target(C, v, w)
    P, scale = unit_det(hessian_P(C, z))
    chk = verify_lyapunov(A, P, tol)
    method = "pipeline"
    if not chk.valid:
        log.warning("constructed P failed verification (margin %.3g); running fallback", chk.lyap_margin)
        P, _ = unit_det(_fallback(C, A))
        chk = verify_lyapunov(A, P, tol)
        method = "fallback"
        if not chk.valid:
            raise NumericalFailure("no verified Lyapunov certificate found")
    structure = extract_structure(C, P)
    prov = {"v": v, "w": w, "z": z, "scale": scale, "method": method, "u0": u0}
    return LyapunovCertificate(P, structure, chk.lyap_margin, chk.pd_margin, prov)
