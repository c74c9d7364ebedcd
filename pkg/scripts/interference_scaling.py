#!/usr/bin/env python3
"""Scaled interference D^(alpha-2) I against its large-radius limit, and the variance slope."""

import argparse
from pathlib import Path

from _common import dump
from pzfsim import experiments


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alpha", type=float, nargs="+", default=[3.0, 4.0])
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    args = p.parse_args()
    out = {}
    for a in args.alpha:
        out[str(a)] = s = experiments.interference_scaling(alpha=a, trials=args.trials, seed=args.seed)
        print(f"alpha={a}: limit {s['limit']:.4g}, variance slope {s['variance_slope']:.2f} "
              f"(4 - 2 alpha = {s['claimed_slope']:.0f})")
        for r in s["rows"]:
            print(f"  D={r['D']:.2f} km, L={r['L']}: ratio {r['mean_scaled'] / s['limit']:.3f} "
                  f"+- {r['stderr'] / s['limit']:.3f}")
    dump(out, args.out_dir / "interference_scaling.json")


if __name__ == "__main__":
    main()
