"""Dense linear-algebra primitives.

Matrices and vectors are plain ``numpy`` float arrays. Every function here
validates shapes and finiteness and raises :class:`InvalidInput` instead of
letting LAPACK produce garbage.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInput, SingularMatrix

TOL = 1e-9
SYM_TOL = 1e-10
COND_LIMIT = 1e12


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues (descending by real part) and, for symmetric input, the
    orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def as_vector(x, name="x") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise InvalidInput(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInput(f"{name} has non-finite entries")
    return v


def as_matrix(M, name="M", square=True) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise InvalidInput(f"{name} must be two-dimensional, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput(f"{name} has non-finite entries")
    return A


def is_symmetric(M, rtol=SYM_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    return bool(np.max(np.abs(M - M.T), initial=0.0) <= rtol * scale)


def as_symmetric(M, name="M", rtol=SYM_TOL) -> np.ndarray:
    A = as_matrix(M, name)
    if not is_symmetric(A, rtol):
        raise InvalidInput(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def sym_eig(M) -> EigenResult:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    S = as_symmetric(M)
    w, V = np.linalg.eigh(S)
    return EigenResult(w[::-1].copy(), V[:, ::-1].copy())


def eigenvalues(A) -> np.ndarray:
    A = as_matrix(A, "A")
    lam = scipy.linalg.eigvals(A)
    return lam[np.argsort(-lam.real, kind="stable")]


def hurwitz_margin(A) -> float:
    """Largest real part over the spectrum; negative iff ``A`` is Hurwitz."""
    A = as_matrix(A, "A")
    if A.shape[0] == 0:
        return -np.inf
    return float(np.max(scipy.linalg.eigvals(A).real))


def lambda_max(M) -> float:
    return float(np.linalg.eigvalsh(as_symmetric(M))[-1])


def lambda_min(M) -> float:
    return float(np.linalg.eigvalsh(as_symmetric(M))[0])


def is_negative_definite(M, tol=TOL) -> bool:
    return lambda_max(M) < -tol


def is_positive_definite(M, tol=TOL) -> bool:
    return lambda_min(M) > tol


def expm(M) -> np.ndarray:
    # scipy implements Al-Mohy & Higham scaling-and-squaring with Pade 13.
    return scipy.linalg.expm(as_matrix(M, "M"))


def solve(A, b) -> np.ndarray:
    """Solve ``A x = b``; raises :class:`SingularMatrix` above the condition limit."""
    A = as_matrix(A, "A")
    b = np.asarray(b, dtype=float)
    if b.shape[0] != A.shape[0]:
        raise InvalidInput(f"right-hand side has length {b.shape[0]}, expected {A.shape[0]}")
    if A.shape[0] == 0:
        return b.copy()
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrix(f"matrix is singular or ill-conditioned (cond={cond:.3g})")
    return scipy.linalg.solve(A, b)


def inv(A) -> np.ndarray:
    A = as_matrix(A, "A")
    return solve(A, np.eye(A.shape[0]))


def sqrtm_spd(P) -> np.ndarray:
    """Principal square root of a symmetric positive-definite matrix."""
    eig = sym_eig(P)
    if eig.eigenvalues.size and eig.eigenvalues[-1] <= 0:
        raise InvalidInput("matrix is not positive definite")
    V = eig.eigenvectors
    return (V * np.sqrt(eig.eigenvalues)) @ V.T


def spectral_norm(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))
