#!/usr/bin/env python3
"""Mean BS throughput against the asymptotic prediction for cell-edge and uniform mobiles."""

import logging

from _common import dump, parser, scale
from pzfsim import experiments
from pzfsim.config import PlacementMode


def main() -> None:
    p = parser(__doc__)
    p.add_argument("--antennas", type=int, nargs="+", default=[8, 16, 32, 64, 128])
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = {}
    for placement in PlacementMode:
        cfg = experiments.throughput_config(placement=placement, antennas=tuple(args.antennas), **scale(args))
        out[placement.value] = s = experiments.run_throughput_sweep(cfg, args.out_dir / "throughput")
        print(placement.value)
        for L, row in s["per_L"].items():
            print(f"  L={L:>4}: simulated {row['empirical_mean_bs_throughput']:6.2f}, "
                  f"predicted {row['R_as']:6.2f} bit/s/Hz ({100 * row['relative_gap']:+.1f}%)")
    dump(out, args.out_dir / "throughput" / "summary.json")


if __name__ == "__main__":
    main()
