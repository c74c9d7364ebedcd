#!/usr/bin/env python3
"""Normalized-SINR histograms for scaled (constant mu) and fixed noise.

Writes per-mobile CSV records and a JSON summary per noise law, and prints
the fraction of samples within 2 and 6 dB of the reference line per L.
"""

import logging

from _common import parser, scale
from pzfsim import experiments


def main() -> None:
    args = parser(__doc__).parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    for name, make in (("scaled", experiments.scaled_noise_config), ("fixed", experiments.fixed_noise_config)):
        cfg = make(**scale(args))
        _, summary = experiments.run_histogram_experiment(cfg, args.out_dir / f"histogram_{name}")
        print(f"{name} noise ({summary['runtime_s']:.0f} s, excluded trials {summary['excluded_trials']})")
        for L, row in summary["per_L"].items():
            print(f"  L={L:>4}: reference {row['reference_db']:7.2f} dB, median {row['median']:7.2f} dB, "
                  f"within 2 dB {row['frac_within_2db']:.3f}, within 6 dB {row['frac_within_6db']:.3f}")


if __name__ == "__main__":
    main()
