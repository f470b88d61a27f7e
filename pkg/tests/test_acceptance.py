"""End-to-end acceptance gate; one pass/fail line per criterion.

Run ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

from conelyap import cones as cn
from conelyap.autgroup import boost, d_rotation, is_automorphism
from conelyap.cones import DirectSum, IceCream, Orthant
from conelyap.invariance import cross_positivity_falsifier, decompose, in_M
from conelyap.lyapunov import (Diagonal, char_function, char_function_mc, hessian_P, phi_map,
                               synth_lyapunov, verify_lyapunov)
from conelyap.numkernel import hurwitz_margin
from conelyap.simulate import propagate_many
from conelyap.stability import (certify_stability, d_stability, dual_witness, neg_inverse_in_end,
                                primal_witness)

from _gen import CONES, random_member
from conftest import ACCEPTANCE_LINES

EXAMPLE = np.array([[-2.1, 1, 1], [-1, -2.1, 2], [1, 2, -2.1]])
EPS1, EPS2 = 0.5, 0.25

# member matrices collected by criteria 1-4 for the flow check of criterion 8
MEMBERS = {}


def report(k, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def eps_matrix(e1, e2):
    return np.array([[-e1, -1.0, 0.0], [1.0, -e1, 0.0], [0.0, 0.0, -e2]])


def metzler_hurwitz(n, rng):
    A = rng.uniform(0.0, 1.0, (n, n))
    np.fill_diagonal(A, rng.uniform(-2.0, 0.0, n))
    return A - (max(hurwitz_margin(A), 0.0) + rng.uniform(0.05, 1.0)) * np.eye(n)


def metzler_set():
    rng = np.random.default_rng(20240404)
    return [metzler_hurwitz(int(rng.integers(2, 9)), rng) for _ in range(200)]


def test_criterion_1_eps_family():
    t0 = time.perf_counter()
    K = IceCream(3)
    grid = np.arange(1, 21) / 20
    wrong, unstable, members = 0, 0, []
    for e1 in grid:
        for e2 in grid:
            A = eps_matrix(e1, e2)
            v = in_M(K, A)
            wrong += v.member != (e2 <= e1 + 1e-9)
            if v.member:
                members.append(A)
                unstable += not certify_stability(K, A).hurwitz
    dt = time.perf_counter() - t0
    MEMBERS[1] = (K, members)
    report(1, wrong == 0 and unstable == 0 and dt < 5.0,
           f"400 grid points, {wrong} verdict errors, {unstable} non-Hurwitz members, {dt:.2f}s")


def test_criterion_2_d_stability_frontier():
    t0 = time.perf_counter()
    K = IceCream(3)
    A = eps_matrix(EPS1, EPS2)
    mismatch, bad, members = 0, 0, [A]
    for k in range(360):
        b = 2 * np.pi * k / 360
        g = math.sin(b) - EPS1 * math.cos(b) + EPS2
        r = d_stability(K, A, d_rotation(b).matrix, np.eye(3), check_preconditions=(k == 0))
        if abs(g) > 1e-9:
            mismatch += r.applicable != (g <= 0)
        if r.applicable:
            members.append(r.product)
            bad += not r.hurwitz_margin < 0
    dt = time.perf_counter() - t0
    MEMBERS[2] = (K, members)
    report(2, mismatch == 0 and bad == 0 and dt < 5.0,
           f"360 angles, {mismatch} mismatches, {bad} applicable non-Hurwitz, "
           f"{len(members) - 1} applicable, {dt:.2f}s")


def test_criterion_3_boost_certificate():
    K = IceCream(3)
    v = in_M(K, EXAMPLE)
    checks = {
        "member": v.member,
        "z": abs(v.witness["z"] + 4.2) <= 1e-8,
        "hurwitz": abs(hurwitz_margin(EXAMPLE) + 0.1) <= 1e-8,
        "identity invalid": not verify_lyapunov(EXAMPLE, np.eye(3)).valid,
    }
    chk = verify_lyapunov(EXAMPLE, boost(3, [-1.0, 0.0]).matrix)
    checks["boost valid"] = chk.valid and abs(chk.lyap_margin + 0.099) <= 0.01
    cert = synth_lyapunov(K, EXAMPLE)
    checks["synth"] = cert.valid and verify_lyapunov(EXAMPLE, cert.P).valid
    MEMBERS[3] = (K, [EXAMPLE])
    failed = [k for k, ok in checks.items() if not ok]
    report(3, not failed, f"z={v.witness['z']:.10f}, boost margin {chk.lyap_margin:.6f}, "
                          f"synth {cert.structure.kind} margin {cert.lyap_margin:.4f}; failed: {failed or 'none'}")


def test_criterion_4_orthant_reduction():
    mats = metzler_set()
    bad = []
    for i, A in enumerate(mats):
        n = A.shape[0]
        cert = synth_lyapunov(Orthant(n), A)
        v = np.linalg.solve(A, -np.ones(n))
        w = np.linalg.solve(A.T, -np.ones(n))
        d = w / v
        d /= np.exp(np.mean(np.log(d)))
        ok = (isinstance(cert.structure, Diagonal) and cert.lyap_margin < 0
              and np.max(np.abs(np.diag(cert.P) - d) / d) <= 1e-8
              and np.max(np.abs(cert.P - np.diag(np.diag(cert.P)))) == 0.0)
        if not ok:
            bad.append(i)
    MEMBERS[4] = [(Orthant(A.shape[0]), [A]) for A in mats]
    report(4, not bad, f"200 Metzler Hurwitz matrices, n in 2..8, {len(bad)} failures")


def test_criterion_5_characteristic_identities():
    rng = np.random.default_rng(5)
    cones = [Orthant(2), Orthant(6), IceCream(2), IceCream(3), IceCream(6), DirectSum(IceCream(3), Orthant(3))]
    worst = {"euler": 0.0, "phi=Px": 0.0, "hom": 0.0, "fd": 0.0}
    failures = 0
    for C in cones:
        n = C.dim
        for x in cn.random_points(C, 100, rng):
            phi, P = phi_map(C, x), hessian_P(C, x)
            t = rng.uniform(0.2, 5.0)
            e = {
                "euler": abs(x @ phi - n) / n,
                "phi=Px": np.max(np.abs(P @ x - phi)) / np.max(np.abs(phi)),
                "hom": max(abs(char_function(C, t * x) / char_function(C, x) - t ** -n),
                           np.max(np.abs(t * phi_map(C, t * x) - phi)) / np.max(np.abs(phi))),
            }
            h = 1e-6 * min(1.0, cn.margin(C, x)) * max(1.0, np.linalg.norm(x))
            E = h * np.eye(n)
            jac = np.array([(phi_map(C, x + d) - phi_map(C, x - d)) / (2 * h) for d in E]).T
            e["fd"] = np.max(np.abs(-jac.T - P)) / np.max(np.abs(P))
            for k in worst:
                worst[k] = max(worst[k], e[k])
            pd = np.linalg.eigvalsh(P)[0] > 0 and is_automorphism(C, P, tol=1e-7).member
            failures += not pd or any(e[k] > 1e-9 for k in ("euler", "phi=Px", "hom")) or e["fd"] > 1e-6
    report(5, failures == 0, f"{100 * len(cones)} points, {failures} failures, worst relative errors "
                             + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_6_monte_carlo():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    C = Orthant(3)
    pts = cn.random_points(C, 5, rng)
    worst_se, worst_rel = 0.0, 0.0
    for i, x in enumerate(pts):
        est = char_function_mc(C, x, 1_000_000, seed=i)
        exact = char_function(C, x)
        worst_se = max(worst_se, abs(est.value - exact) / est.stderr)
        worst_rel = max(worst_rel, abs(est.value - exact) / exact)
    dt = time.perf_counter() - t0
    report(6, worst_se <= 3 and worst_rel <= 0.05 and dt < 30,
           f"5 points, N=1e6, worst {worst_se:.2f} SE, worst relative error {worst_rel:.2e}, {dt:.2f}s")


def test_criterion_7_four_way_equivalence():
    rng = np.random.default_rng(7)
    discrepancies, total, stable = 0, 0, 0
    for C in CONES:
        count = 0
        while count < 300:
            M = random_member(C, rng)
            # shift the spectrum so stable and unstable members are equally likely
            A = M - (hurwitz_margin(M) + rng.uniform(-1.0, 1.0)) * np.eye(C.dim)
            m = hurwitz_margin(A)
            if abs(m) < 1e-3 or not in_M(C, A).member:
                continue
            count += 1
            preds = (certify_stability(C, A).hurwitz, neg_inverse_in_end(C, A),
                     primal_witness(C, A) is not None, dual_witness(C, A) is not None)
            discrepancies += len(set(preds)) != 1
            stable += preds[0]
        total += count
    report(7, discrepancies == 0,
           f"{total} members over {len(CONES)} cones ({stable} Hurwitz), {discrepancies} discrepancies")


def _boundary_starts(C, rng, count=50):
    if isinstance(C, Orthant) and C.n > 1:
        # extreme rays plus points on the facets
        X = cn.random_points(C, count, rng)
        X[np.arange(count), rng.integers(0, C.n, count)] = 0.0
        X[: C.n] = np.eye(C.n)
        return X
    return cn.extreme_rays(C, count, rng)


def test_criterion_8_flow_invariance():
    if len(MEMBERS) < 4:
        # run on its own: rebuild the member sets without reporting
        saved = list(ACCEPTANCE_LINES)
        for fn in (test_criterion_1_eps_family, test_criterion_2_d_stability_frontier,
                   test_criterion_3_boost_certificate, test_criterion_4_orthant_reduction):
            fn()
        ACCEPTANCE_LINES[:] = saved
    rng = np.random.default_rng(8)
    groups = [MEMBERS[1], MEMBERS[2], MEMBERS[3]] + MEMBERS[4]
    worst, runs = np.inf, 0
    for C, mats in groups:
        for A in mats:
            S = propagate_many(A, _boundary_starts(C, rng), 20.0, 0.05)
            worst = min(worst, float(np.min(cn.margins(C, S.reshape(-1, C.dim)))))
            runs += S.shape[1]
    # constructed non-members: a member shifted by a map that breaks cross-positivity
    hits, made = 0, 0
    cones = [IceCream(3), Orthant(3), IceCream(4), DirectSum(IceCream(3), Orthant(2))]
    while made < 50:
        C = cones[made % len(cones)]
        A = random_member(C, rng) - 2.0 * np.abs(rng.normal(size=(C.dim, C.dim)))
        if in_M(C, A).margin > -1e-3:
            continue
        made += 1
        ce = cross_positivity_falsifier(C, A, 20_000, seed=made)
        if ce is None:
            continue
        S = propagate_many(A, ce[0][None], 1.0, 0.001)
        hits += float(np.min(cn.margins(C, S[:, 0]))) < -1e-9
    report(8, worst >= -1e-6 and hits >= 45,
           f"{runs} member trajectories, worst margin {worst:.2e}; {hits}/50 non-members leave the cone")


def test_criterion_9_decomposition():
    rng = np.random.default_rng(9)
    mats = metzler_set() + [rng.uniform(0, 1, (n, n)) - rng.uniform(0, 3) * np.eye(n)
                            for n in rng.integers(1, 9, 100)]
    bad = 0
    for A in mats:
        d = decompose(Orthant(A.shape[0]), A)
        ok = (np.array_equal(d.A0.matrix, np.diag(np.diag(d.A0.matrix))) and np.all(d.A1 >= 0)
              and d.residual_ok and np.array_equal(d.A0.matrix + d.A1, A))
        bad += not ok
    report(9, bad == 0, f"{len(mats)} Metzler matrices, {bad} failures")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
