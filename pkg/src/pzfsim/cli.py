"""Command-line entry point: ``pzfsim <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiments
from .config import ConfigError, NoiseSpec, NullingRule, ScenarioConfig


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--config", type=Path, help="JSON file with ScenarioConfig fields (flags override it)")
    g.add_argument("--bs-density", type=float, help="BS per km^2")
    g.add_argument("--mobiles", type=int, help="mobiles per BS (M)")
    g.add_argument("--antennas", type=int, nargs="+", help="antenna counts L to sweep")
    g.add_argument("--alpha", type=float, help="path-loss exponent (> 2)")
    g.add_argument("--cell-radius", type=float, help="cell radius R in km")
    g.add_argument("--peak-power", type=float)
    g.add_argument("--placement", choices=["cell_edge", "uniform_disk"])
    g.add_argument("--allocation", choices=["equal", "waterfill"])
    g.add_argument("--expected-bs", type=float, help="mean BS count in the window (sets its side)")
    g.add_argument("--trials", type=int)
    g.add_argument("--waterfill-samples", type=int)
    n = p.add_argument_group("noise")
    n.add_argument("--noise-mode", choices=["scaled", "fixed"])
    n.add_argument("--mu", type=float)
    n.add_argument("--zeta", type=float)
    n.add_argument("--sigma2", type=float)
    n.add_argument("--edge-snr-db", type=float, help="calibrate noise from the cell-edge SNR")
    n.add_argument("--ref-antennas", type=int, help="antenna count at which --edge-snr-db holds (scaled mode)")
    z = p.add_argument_group("nulling radius")
    z.add_argument("--nulling", choices=["explicit", "scaled", "optimal"])
    z.add_argument("--radius", type=float, help="explicit D in km")
    z.add_argument("--s", type=float, help="D = s L^beta")
    z.add_argument("--beta", type=float)
    z.add_argument("--s-factor", type=float, help="multiplier on the optimal s")
    r = p.add_argument_group("run")
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--out-dir", type=Path)


_SIMPLE = {
    "bs_density": "bs_density", "mobiles": "mobiles_per_bs", "alpha": "pathloss_exp", "cell_radius": "cell_radius",
    "peak_power": "peak_power", "placement": "placement", "allocation": "allocation", "expected_bs": "expected_bs",
    "trials": "trials", "seed": "seed", "workers": "workers", "waterfill_samples": "waterfill_samples",
}
_NOISE = {"noise_mode": "mode", "mu": "mu", "zeta": "zeta", "sigma2": "sigma2", "edge_snr_db": "edge_snr_db",
          "ref_antennas": "ref_antennas"}
_NULLING = {"nulling": "kind", "radius": "radius", "s": "s", "beta": "beta", "s_factor": "s_factor"}


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    d = json.loads(args.config.read_text()) if args.config else {}
    for flag, key in _SIMPLE.items():
        if getattr(args, flag) is not None:
            d[key] = getattr(args, flag)
    if args.antennas is not None:
        d["antennas"] = args.antennas
    base = ScenarioConfig.from_dict(d)

    noise = {k: v for k, v in vars(base.noise).items()}
    changed = {key: getattr(args, flag) for flag, key in _NOISE.items() if getattr(args, flag) is not None}
    if changed:
        if "mode" in changed and changed["mode"] != noise["mode"]:
            noise = {"mode": changed["mode"]}
        noise.update(changed)
        # an explicit level replaces any edge-SNR calibration and vice versa
        if {"mu", "sigma2"} & changed.keys() and "edge_snr_db" not in changed:
            noise["edge_snr_db"] = None
        if "edge_snr_db" in changed:
            noise["mu"] = noise["sigma2"] = None
    null = {k: v for k, v in vars(base.nulling).items()}
    null.update({key: getattr(args, flag) for flag, key in _NULLING.items() if getattr(args, flag) is not None})
    d = base.to_dict()
    d["noise"], d["nulling"] = NoiseSpec(**noise), NullingRule(**null)
    return ScenarioConfig.from_dict(d)


def _emit(obj: dict) -> None:
    json.dump(obj, sys.stdout, indent=2, default=float)
    sys.stdout.write("\n")


def _cmd_histogram(args) -> int:
    cfg = config_from_args(args)
    _, summary = experiments.run_histogram_experiment(cfg, args.out_dir)
    _emit(summary)
    return 0


def _cmd_throughput(args) -> int:
    cfg = config_from_args(args)
    _emit(experiments.run_throughput_sweep(cfg, args.out_dir, mc_samples=args.mc_samples))
    return 0


def _cmd_power_compare(args) -> int:
    cfg = config_from_args(args)
    _emit(experiments.run_power_allocation_comparison(cfg, args.out_dir))
    return 0


def _cmd_shotnoise(args) -> int:
    seed = 0 if args.seed is None else args.seed
    summary = experiments.run_shotnoise_validation(experiments.default_shotnoise_fixtures(), args.n_trials, seed,
                                                   args.out_dir)
    _emit(summary)
    return 0 if all(r["verdict"] in ("TIGHT", "BOUNDED") for r in summary["rows"]) else 1


def _cmd_predict(args) -> int:
    _emit(experiments.predict(config_from_args(args)))
    return 0


def _cmd_optimal_radius(args) -> int:
    _emit(experiments.optimal_radius_table(config_from_args(args)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pzfsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "histogram": (_cmd_histogram, "normalized-SINR samples vs the large-L reference"),
        "throughput": (_cmd_throughput, "mean BS throughput vs the asymptotic prediction"),
        "power-compare": (_cmd_power_compare, "equal power vs two-level water-filling"),
        "predict": (_cmd_predict, "closed-form predictions only, no simulation"),
        "optimal-radius": (_cmd_optimal_radius, "optimal nulling radius for each L"),
    }
    for name, (fn, help_) in commands.items():
        sp = sub.add_parser(name, help=help_)
        _scenario_flags(sp)
        if name == "throughput":
            sp.add_argument("--mc-samples", type=int, default=100_000, help="placement samples for the prediction")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("shotnoise", help="quadrature bound vs simulated joint moment")
    sp.add_argument("--n-trials", type=int, default=10_000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out-dir", type=Path)
    sp.set_defaults(func=_cmd_shotnoise)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, experiments.CampaignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
