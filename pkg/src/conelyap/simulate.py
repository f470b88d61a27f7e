"""Trajectories of ``x' = Ax`` with invariance and Lyapunov-decrease monitors."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import cones as cn
from .errors import InvalidInput, NumericalFailure
from .numkernel import as_matrix, as_symmetric, as_vector, expm


class Stepper(str, Enum):
    EXPM = "expm"
    RK4 = "rk4"


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (steps + 1, n)
    stepper: Stepper

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def lyapunov_values(self, P) -> np.ndarray:
        P = as_symmetric(P, "P")
        return np.einsum("ij,jk,ik->i", self.states, P, self.states)

    def to_csv(self, out=None, P=None, cone=None) -> str:
        """Write ``t,x1,...,xn[,V][,margin]``; returns the text when ``out`` is None."""
        header = ["t"] + [f"x{i + 1}" for i in range(self.dim)]
        cols = [self.times[:, None], self.states]
        if P is not None:
            header.append("V")
            cols.append(self.lyapunov_values(P)[:, None])
        if cone is not None:
            header.append("margin")
            cols.append(cn.margins(cone, self.states)[:, None])
        table = np.hstack(cols)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[repr(float(v)) for v in row] for row in table])
        text = buf.getvalue()
        if out is None:
            return text
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(text)
        return text


def _rk4_matrix(h):
    # one RK4 step of a linear system is multiplication by this polynomial in A dt
    h2 = h @ h
    return np.eye(h.shape[0]) + h + h2 / 2 + h2 @ h / 6 + h2 @ h2 / 24


def integrate(A, x0, T: float, dt: float, stepper=Stepper.EXPM) -> Trajectory:
    """Sample the flow on the uniform grid ``0, dt, 2dt, ...`` up to ``T``.

    ``expm`` advances with the exact propagator ``exp(A dt)``; ``rk4`` is
    the classical fourth-order scheme and exists for cross-validation.
    """
    A = as_matrix(A, "A")
    x0 = as_vector(x0, "x0")
    if x0.shape[0] != A.shape[0]:
        raise InvalidInput("x0 does not match the matrix dimension")
    if not (T > 0 and dt > 0):
        raise InvalidInput("T and dt must be positive")
    stepper = Stepper(stepper)
    steps = max(1, math.ceil(T / dt - 1e-9))
    X = np.empty((steps + 1, A.shape[0]))
    X[0] = x0
    with np.errstate(over="ignore", invalid="ignore"):
        if stepper is Stepper.EXPM:
            M = expm(A * dt)
        else:
            M = _rk4_matrix(A * dt)
        for k in range(steps):
            X[k + 1] = M @ X[k]
    if not np.all(np.isfinite(X)):
        raise NumericalFailure("trajectory overflowed")
    return Trajectory(dt * np.arange(steps + 1), X, stepper)


def propagate_many(A, X0, T: float, dt: float, stepper=Stepper.EXPM) -> np.ndarray:
    """States of many trajectories at once, shape ``(steps + 1, k, n)``."""
    A = as_matrix(A, "A")
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    if X0.shape[1] != A.shape[0]:
        raise InvalidInput("initial states do not match the matrix dimension")
    if not (T > 0 and dt > 0):
        raise InvalidInput("T and dt must be positive")
    steps = max(1, math.ceil(T / dt - 1e-9))
    Phi = expm(A * dt) if Stepper(stepper) is Stepper.EXPM else _rk4_matrix(A * dt)
    out = np.empty((steps + 1,) + X0.shape)
    out[0] = X0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            out[k + 1] = out[k] @ Phi.T
    if not np.all(np.isfinite(out)):
        raise NumericalFailure("trajectory overflowed")
    return out


def monitor_invariance(C, traj: Trajectory) -> float:
    """Minimum cone margin over all states of the trajectory."""
    if traj.dim != C.dim:
        raise InvalidInput("trajectory dimension does not match the cone")
    return float(np.min(cn.margins(C, traj.states)))


@dataclass(frozen=True)
class LyapunovMonitor:
    max_increase: float  # largest V(x_{k+1}) - V(x_k), relative to V(x_0)
    decay_rate: float  # least-squares slope of -log V
    rate_bound: float | None  # -lambda_max(PA + A'P) / lambda_max(P), if A was given

    def non_increasing(self, rtol=1e-9) -> bool:
        return self.max_increase <= rtol


def monitor_lyapunov(P, traj: Trajectory, A=None) -> LyapunovMonitor:
    V = traj.lyapunov_values(P)
    v0 = V[0] if V[0] > 0 else 1.0
    inc = float(np.max(np.diff(V)) / v0) if V.size > 1 else 0.0
    keep = V > 1e-290
    if keep.sum() >= 2:
        slope = np.polyfit(traj.times[keep], np.log(V[keep]), 1)[0]
        rate = float(-slope)
    else:
        rate = float("nan")
    bound = None
    if A is not None:
        P = as_symmetric(P, "P")
        L = P @ as_matrix(A, "A")
        bound = float(-np.linalg.eigvalsh(L + L.T)[-1] / np.linalg.eigvalsh(P)[-1])
    return LyapunovMonitor(inc, rate, bound)
