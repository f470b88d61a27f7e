"""Random Metzler batches: pipeline certificate vs the diagonal closed form diag(w_i / v_i)."""
import argparse
from dataclasses import dataclass

import numpy as np

from conelyap.cones import Orthant
from conelyap.lyapunov import synth_lyapunov
from conelyap.numkernel import hurwitz_margin


@dataclass
class Config:
    count: int = 200
    max_dim: int = 8
    seed: int = 0


def run(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    errs, margins, kinds = [], [], {}
    for _ in range(cfg.count):
        n = int(rng.integers(2, cfg.max_dim + 1))
        A = rng.uniform(0, 1, (n, n))
        np.fill_diagonal(A, rng.uniform(-2, 0, n))
        A -= (max(hurwitz_margin(A), 0.0) + rng.uniform(0.05, 1.0)) * np.eye(n)
        cert = synth_lyapunov(Orthant(n), A)
        v = np.linalg.solve(A, -np.ones(n))
        w = np.linalg.solve(A.T, -np.ones(n))
        d = w / v
        d /= np.exp(np.mean(np.log(d)))
        errs.append(np.max(np.abs(np.diag(cert.P) - d) / d))
        margins.append(cert.lyap_margin)
        kinds[cert.structure.kind] = kinds.get(cert.structure.kind, 0) + 1
    print(f"{cfg.count} matrices, structures {kinds}")
    print(f"max relative deviation from diag(w/v): {max(errs):.2e}")
    print(f"lyap_margin range: [{min(margins):.4f}, {max(margins):.4f}]")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--count", type=int, default=Config.count)
    p.add_argument("--max-dim", dest="max_dim", type=int, default=Config.max_dim)
    p.add_argument("--seed", type=int, default=Config.seed)
    run(Config(**vars(p.parse_args(argv))))


if __name__ == "__main__":
    main()
