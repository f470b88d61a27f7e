"""Command-line front end.

Exit codes: 0 success (member and Hurwitz, valid certificate, ...),
1 error, 2 negative verdict (not in M(C), invalid certificate, failed
monitor), 3 member but not Hurwitz / certificate not synthesizable,
4 undetermined membership.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from . import cones as cn
from .autgroup import d_rotation, q_form
from .errors import ConeLyapError, NotHurwitz, NotInMC
from .invariance import cross_positivity_falsifier, decompose, in_M
from .lyapunov import LyapunovCertificate, synth_lyapunov, verify_lyapunov
from .numkernel import TOL, hurwitz_margin
from .simulate import integrate, monitor_invariance, monitor_lyapunov
from .stability import certify_stability, d_stability
from .verdict import Verdict

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE, EXIT_NOT_HURWITZ, EXIT_UNDETERMINED = 0, 1, 2, 3, 4

log = logging.getLogger("conelyap")


def _default_tol() -> float:
    env = os.environ.get("CONE_LYAP_TOL")
    return float(env) if env else TOL


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def matrix_from_dict(d) -> np.ndarray:
    try:
        A = np.asarray(d["data"], dtype=float)
        n = int(d["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix file: {exc}") from exc
    if A.shape != (n, n):
        raise ValueError(f"matrix file declares n={n} but data has shape {A.shape}")
    return A


def matrix_to_dict(A) -> dict:
    return {"n": int(A.shape[0]), "data": np.asarray(A).tolist()}


def digest(cone, A) -> str:
    payload = json.dumps({"cone": cn.to_dict(cone), "matrix": np.asarray(A).tolist()},
                         sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def base_report(kind, cone, A, args, **extra) -> dict:
    rep = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "tool": {"name": "conelyap", "version": __version__},
        "input": {"cone": cn.to_dict(cone), "matrix": matrix_to_dict(A), "digest": digest(cone, A)},
        "tolerance": args.tol,
    }
    rep.update(extra)
    if getattr(args, "timestamp", False):
        rep["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return rep


def emit(report, out):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _inputs(args):
    return cn.from_dict(load_json(args.cone)), matrix_from_dict(load_json(args.matrix))


def cmd_check(args) -> int:
    cone, A = _inputs(args)
    v = in_M(cone, A, args.tol)
    falsifier = None
    if args.samples > 0 and cn.is_self_dual(cone):
        ce = cross_positivity_falsifier(cone, A, args.samples, args.seed, args.tol)
        falsifier = {"samples": args.samples, "counterexample": None if ce is None else [c.tolist() for c in ce]}
        if ce is not None and v.member:
            raise ConeLyapError("exact test reported membership but the falsifier found a counterexample")
    stab = certify_stability(cone, A, args.tol) if v.verdict is not Verdict.NONMEMBER else None
    rep = base_report("check", cone, A, args, seed=args.seed, in_M=v.to_dict(),
                      stability=None if stab is None else stab.to_dict(), falsifier=falsifier)
    emit(rep, args.out)
    print(f"in_M: {v.verdict.value} (margin {v.margin:.6g})", file=sys.stderr)
    if stab is not None:
        print(f"hurwitz margin: {stab.hurwitz_margin:.6g}", file=sys.stderr)
    if v.verdict is Verdict.NONMEMBER:
        return EXIT_NEGATIVE
    if v.verdict is Verdict.UNDETERMINED:
        return EXIT_UNDETERMINED
    return EXIT_OK if stab.hurwitz else EXIT_NOT_HURWITZ


def cmd_synth(args) -> int:
    cone, A = _inputs(args)
    try:
        cert = synth_lyapunov(cone, A, args.tol)
    except NotInMC as exc:
        emit(base_report("lyapunov_certificate", cone, A, args, error=str(exc),
                         in_M=None if exc.verdict is None else exc.verdict.to_dict()), args.out)
        print(f"not synthesized: {exc}", file=sys.stderr)
        return EXIT_NOT_HURWITZ
    except NotHurwitz as exc:
        emit(base_report("lyapunov_certificate", cone, A, args, error=str(exc),
                         hurwitz_margin=exc.margin), args.out)
        print(f"not synthesized: {exc}", file=sys.stderr)
        return EXIT_NOT_HURWITZ
    rep = base_report("lyapunov_certificate", cone, A, args, certificate=cert.to_dict())
    if args.structure:
        params = cert.structure.parameters()
        print(f"{cert.structure.kind} {' '.join(repr(float(p)) for p in params)}")
        if args.out:
            emit(rep, args.out)
    else:
        emit(rep, args.out)
    print(f"structure: {cert.structure.kind}, lyap_margin {cert.lyap_margin:.6g}", file=sys.stderr)
    return EXIT_OK


def _verify_check_report(rep, tol) -> bool:
    cone = cn.from_dict(rep["input"]["cone"])
    A = matrix_from_dict(rep["input"]["matrix"])
    stored = rep["in_M"]
    ok = True
    wit = stored.get("witness") or {}
    if stored["verdict"] == "member" and isinstance(cone, cn.IceCream) and "z" in wit:
        Q = q_form(cone.n)
        S = Q @ A + (Q @ A).T
        ok &= float(np.linalg.eigvalsh(wit["z"] * Q - S)[0]) >= -tol
    ok &= in_M(cone, A, tol).verdict.value == stored["verdict"]
    stab = rep.get("stability")
    if stab:
        ok &= (hurwitz_margin(A) < 0) == stab["hurwitz"]
        if stab["z_witness"] is not None:
            Cc, T = cn.canonical_form(cone)
            z = np.asarray(stab["z_witness"])
            xi = np.asarray(stab["xi_witness"])
            Ti = np.linalg.inv(T)
            ok &= cn.is_interior(Cc, T @ z, tol) and cn.is_interior(Cc, -T @ A @ z, tol)
            ok &= cn.is_interior(Cc, Ti.T @ xi, tol) and cn.is_interior(Cc, -Ti.T @ A.T @ xi, tol)
    return bool(ok)


def cmd_verify(args) -> int:
    rep = load_json(args.report)
    kind = rep.get("kind")
    if kind == "lyapunov_certificate":
        if "certificate" not in rep:
            print("report carries no certificate", file=sys.stderr)
            return EXIT_NEGATIVE
        A = matrix_from_dict(rep["input"]["matrix"])
        cert = LyapunovCertificate.from_dict(rep["certificate"])
        chk = verify_lyapunov(A, cert.P, args.tol)
        print(f"pd_margin {chk.pd_margin:.6g}, lyap_margin {chk.lyap_margin:.6g}, "
              f"{'valid' if chk.valid else 'INVALID'}", file=sys.stderr)
        return EXIT_OK if chk.valid else EXIT_NEGATIVE
    if kind == "check":
        ok = _verify_check_report(rep, args.tol)
        print("check report confirmed" if ok else "check report NOT confirmed", file=sys.stderr)
        return EXIT_OK if ok else EXIT_NEGATIVE
    print(f"unsupported report kind {kind!r}", file=sys.stderr)
    return EXIT_ERROR


def cmd_simulate(args) -> int:
    A = matrix_from_dict(load_json(args.matrix))
    cone = cn.from_dict(load_json(args.cone)) if args.cone else None
    P = None
    if args.certificate:
        P = LyapunovCertificate.from_dict(load_json(args.certificate)["certificate"]).P
    x0 = np.array([float(s) for s in args.x0.split(",")])
    traj = integrate(A, x0, args.T, args.dt, args.stepper)
    traj.to_csv(args.out or sys.stdout, P=P, cone=cone)
    code = EXIT_OK
    if cone is not None:
        m = monitor_invariance(cone, traj)
        print(f"min cone margin: {m:.6g}", file=sys.stderr)
        if m < -1e-6:
            code = EXIT_NEGATIVE
    if P is not None:
        mon = monitor_lyapunov(P, traj, A)
        print(f"max relative V increase: {mon.max_increase:.3g}, decay rate {mon.decay_rate:.6g}", file=sys.stderr)
        if not mon.non_increasing():
            code = EXIT_NEGATIVE
    return code


def cmd_decompose(args) -> int:
    cone, A = _inputs(args)
    v = in_M(cone, A, args.tol)
    if not v.member:
        emit(base_report("decomposition", cone, A, args, in_M=v.to_dict()), args.out)
        return EXIT_NEGATIVE
    dec = decompose(cone, A, args.tol)
    emit(base_report("decomposition", cone, A, args, in_M=v.to_dict(),
                     A0=dec.A0.matrix.tolist(), A1=dec.A1.tolist(), residual_ok=dec.residual_ok), args.out)
    print(f"residual in End(C): {dec.residual_ok}", file=sys.stderr)
    return EXIT_OK


def epsilon_matrix(eps1: float, eps2: float) -> np.ndarray:
    return np.array([[-eps1, -1.0, 0.0], [1.0, -eps1, 0.0], [0.0, 0.0, -eps2]])


def dstab_grid(eps1: float, eps2: float, points: int, tol=TOL):
    """Rows ``(b, analytic, applicable, hurwitz_margin)`` for ``D(b) A`` on ``K_3``."""
    A = epsilon_matrix(eps1, eps2)
    K = cn.IceCream(3)
    rows = []
    for k in range(points):
        b = 2 * np.pi * k / points
        analytic = np.sin(b) - eps1 * np.cos(b) <= -eps2
        r = d_stability(K, A, d_rotation(b).matrix, np.eye(3), tol, check_preconditions=(k == 0))
        rows.append((b, bool(analytic), r.applicable, r.hurwitz_margin))
    return rows


def cmd_dstab(args) -> int:
    if args.cone:
        cone, A = _inputs(args)
        D1 = matrix_from_dict(load_json(args.d1)) if args.d1 else np.eye(cone.dim)
        D2 = matrix_from_dict(load_json(args.d2)) if args.d2 else np.eye(cone.dim)
        r = d_stability(cone, A, D1, D2, args.tol)
        emit(base_report("dstability", cone, A, args, result=r.to_dict()), args.out)
        return EXIT_OK
    rows = dstab_grid(args.eps1, args.eps2, args.points, args.tol)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write("b,analytic,applicable,hurwitz_margin\n")
        for b, an, ap, m in rows:
            out.write(f"{b!r},{int(an)},{int(ap)},{m!r}\n")
    finally:
        if args.out:
            out.close()
    mismatches = sum(an != ap for _, an, ap, _ in rows)
    print(f"{len(rows)} angles, {mismatches} mismatches with the analytic condition", file=sys.stderr)
    return EXIT_OK if mismatches == 0 else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conelyap", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=_default_tol(),
                        help="numerical tolerance (default: $CONE_LYAP_TOL or 1e-9)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--timestamp", action="store_true", help="add a generated_at field to reports")
    sub = p.add_subparsers(dest="command", required=True)

    def inputs(sp, required=True):
        sp.add_argument("--cone", required=required, help="cone JSON file")
        sp.add_argument("--matrix", required=required, help="matrix JSON file")

    sp = sub.add_parser("check", parents=[common], help="decide A in M(C) and certify stability")
    inputs(sp)
    sp.add_argument("--samples", type=int, default=0, help="falsifier samples (0 disables)")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("synth", parents=[common], help="synthesize a structured Lyapunov certificate")
    inputs(sp)
    sp.add_argument("--structure", action="store_true", help="print the structural parameters")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("verify", parents=[common], help="re-verify a check report or certificate")
    sp.add_argument("report")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", parents=[common], help="integrate x' = Ax and write CSV")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--cone")
    sp.add_argument("--certificate")
    sp.add_argument("--x0", required=True, help="comma-separated initial state")
    sp.add_argument("--T", type=float, default=10.0)
    sp.add_argument("--dt", type=float, default=0.01)
    sp.add_argument("--stepper", choices=["expm", "rk4"], default="expm")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("decompose", parents=[common], help="split A into Lie Aut(C) + End(C) parts")
    inputs(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("dstab", parents=[common], help="D-stability: D1 A D2 test or the D(b) grid")
    inputs(sp, required=False)
    sp.add_argument("--d1")
    sp.add_argument("--d2")
    sp.add_argument("--eps1", type=float, default=0.5)
    sp.add_argument("--eps2", type=float, default=0.25)
    sp.add_argument("--points", type=int, default=360)
    sp.set_defaults(func=cmd_dstab)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, ConeLyapError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
