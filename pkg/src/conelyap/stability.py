"""Hurwitz certificates for matrices that leave a proper cone invariant.

For ``A`` in M(C) the following are equivalent: ``A`` is Hurwitz;
``-A^-1`` is in End(C); some ``z`` in int C has ``-Az`` in int C; some
``xi`` in int C* has ``-A'xi`` in int C*. The witnesses are built from the
canonical interior point ``u0`` as ``z = -A^-1 u0`` and ``xi = -A^-T u0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cones as cn
from .autgroup import is_automorphism
from .errors import InternalInconsistency, InvalidInput, SingularMatrix
from .invariance import in_end, in_M
from .numkernel import TOL, as_matrix, hurwitz_margin, inv, solve
from .verdict import MembershipVerdict, Verdict


@dataclass(frozen=True, eq=False)
class StabilityCertificate:
    hurwitz_margin: float
    z_witness: np.ndarray | None
    xi_witness: np.ndarray | None
    inverse_endo: bool

    @property
    def hurwitz(self) -> bool:
        return self.hurwitz_margin < 0

    @property
    def witnesses_valid(self) -> bool:
        return self.z_witness is not None and self.xi_witness is not None

    def to_dict(self) -> dict:
        return {
            "hurwitz_margin": float(self.hurwitz_margin),
            "hurwitz": self.hurwitz,
            "z_witness": None if self.z_witness is None else self.z_witness.tolist(),
            "xi_witness": None if self.xi_witness is None else self.xi_witness.tolist(),
            "inverse_endo": self.inverse_endo,
        }


def _reduce(C, A):
    Cc, T = cn.canonical_form(C)
    return Cc, T, T @ A @ np.linalg.inv(T)


def primal_witness(C, A, tol=TOL):
    """``z = -A^-1 u0`` if it lies in int C (then ``-Az = u0`` does too), else ``None``."""
    A = as_matrix(A, "A")
    Cc, T, Ac = _reduce(C, A)
    try:
        zc = solve(Ac, -cn.interior_point(Cc))
    except SingularMatrix:
        return None
    if not cn.is_interior(Cc, zc, tol):
        return None
    return np.linalg.solve(T, zc)


def dual_witness(C, A, tol=TOL):
    """``xi = -A^-T u0`` if it lies in int C*, else ``None``."""
    A = as_matrix(A, "A")
    Cc, T, Ac = _reduce(C, A)
    try:
        xc = solve(Ac.T, -cn.interior_point(Cc))
    except SingularMatrix:
        return None
    if not cn.is_interior(Cc, xc, tol):
        return None
    return T.T @ xc


def neg_inverse_verdict(C, A, tol=TOL) -> MembershipVerdict:
    A = as_matrix(A, "A")
    if A.shape[0] != C.dim:
        raise InvalidInput("matrix does not match the cone dimension")
    return in_end(C, -inv(A), tol)


def neg_inverse_in_end(C, A, tol=TOL) -> bool:
    """Whether ``-A^-1`` maps ``C`` into itself; raises :class:`SingularMatrix`."""
    return neg_inverse_verdict(C, A, tol).member


def _require_member(C, A, tol):
    v = in_M(C, A, tol)
    if v.verdict is Verdict.NONMEMBER:
        raise InvalidInput(f"A is not in M(C) (margin {v.margin:.3g})")
    return v


def certify_stability(C, A, tol=TOL) -> StabilityCertificate:
    A = as_matrix(A, "A")
    _require_member(C, A, tol)
    margin = hurwitz_margin(A)
    if margin >= 0:
        return StabilityCertificate(margin, None, None, False)
    try:
        inverse_endo = neg_inverse_in_end(C, A, tol)
    except SingularMatrix as exc:
        raise InternalInconsistency("Hurwitz matrix reported singular") from exc
    return StabilityCertificate(margin, primal_witness(C, A, tol),
                                dual_witness(C, A, tol), inverse_endo)


@dataclass(frozen=True, eq=False)
class DStabilityReport:
    applicable: bool
    verdict: MembershipVerdict
    hurwitz_margin: float
    product: np.ndarray

    @property
    def status(self) -> str:
        return "hurwitz" if self.applicable else "not_applicable"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "applicable": self.applicable,
            "membership": self.verdict.to_dict(),
            "hurwitz_margin": float(self.hurwitz_margin),
            "product": self.product.tolist(),
        }


def d_stability(C, A, D1, D2, tol=TOL, check_preconditions=True) -> DStabilityReport:
    """Apply the cone D-stability result to ``D1 A D2``.

    When ``D1 A D2`` stays in M(C) it must be Hurwitz; a violation raises
    :class:`InternalInconsistency`. Otherwise the result is not applicable
    and the margin is reported for information only.
    """
    A = as_matrix(A, "A")
    D1 = as_matrix(D1, "D1")
    D2 = as_matrix(D2, "D2")
    if check_preconditions:
        _require_member(C, A, tol)
        if hurwitz_margin(A) >= 0:
            raise InvalidInput("A must be Hurwitz")
        for name, D in (("D1", D1), ("D2", D2)):
            if not is_automorphism(C, D, tol=1e-8):
                raise InvalidInput(f"{name} is not an automorphism of the cone")
    prod = D1 @ A @ D2
    v = in_M(C, prod, tol)
    margin = hurwitz_margin(prod)
    if v.member and margin >= 0:
        raise InternalInconsistency(f"D1 A D2 is in M(C) but not Hurwitz (margin {margin:.3g})")
    return DStabilityReport(v.member, v, margin, prod)
