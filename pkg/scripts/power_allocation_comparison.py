#!/usr/bin/env python3
"""Sum spectral efficiency per BS: equal power vs two-level water-filling."""

import logging

from _common import parser, scale
from pzfsim import experiments


def main() -> None:
    args = parser(__doc__).parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    cfg = experiments.power_compare_config(**scale(args))
    s = experiments.run_power_allocation_comparison(cfg, args.out_dir / "power_compare")
    for L in s["waterfill_gain_over_equal"]:
        eq, wf = s["policies"]["equal"][L], s["policies"]["waterfill"][L]
        print(f"L={L:>3}: equal {eq['sum_se_per_bs']:6.2f}, water-filling {wf['sum_se_per_bs']:6.2f} bit/s/Hz "
              f"(+{100 * s['waterfill_gain_over_equal'][L]:.1f}%, mean BS power {wf['planned_mean_power']:.3f})")


if __name__ == "__main__":
    main()
