"""Sweep the rotation angle b of D(b) and compare D-stability with the analytic frontier.

    python scripts/dstab_frontier.py --eps1 0.5 --eps2 0.25 --points 720 --out frontier.csv
"""
import argparse
import csv
import math
import sys
from dataclasses import dataclass

from conelyap.cli import dstab_grid


@dataclass
class Config:
    eps1: float = 0.5
    eps2: float = 0.25
    points: int = 360
    out: str | None = None


def run(cfg: Config):
    rows = dstab_grid(cfg.eps1, cfg.eps2, cfg.points)
    out = open(cfg.out, "w", newline="") if cfg.out else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["b", "g", "analytic", "applicable", "hurwitz_margin"])
    for b, an, ap, m in rows:
        w.writerow([b, math.sin(b) - cfg.eps1 * math.cos(b) + cfg.eps2, int(an), int(ap), m])
    if cfg.out:
        out.close()
    arc = sum(ap for _, _, ap, _ in rows) / len(rows)
    # sin(b) - eps1 cos(b) = R sin(b - phi) with R = hypot(1, eps1)
    expect = 0.5 - math.asin(cfg.eps2 / math.hypot(1, cfg.eps1)) / math.pi
    print(f"applicable fraction {arc:.4f} (analytic {expect:.4f}), "
          f"mismatches {sum(an != ap for _, an, ap, _ in rows)}", file=sys.stderr)
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps1", type=float, default=Config.eps1)
    p.add_argument("--eps2", type=float, default=Config.eps2)
    p.add_argument("--points", type=int, default=Config.points)
    p.add_argument("--out")
    run(Config(**vars(p.parse_args(argv))))


if __name__ == "__main__":
    main()
