"""Monte Carlo campaigns, result persistence and determinism.

Every trial is seeded from ``(config.seed, trial index)`` and results are
merged in trial order, so outputs do not depend on the worker count.
"""

from __future__ import annotations

import concurrent.futures
import io
import json
import logging
import math
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import asymptotics, shotnoise
from .config import ConfigError, NullingRule, PlacementMode, ScenarioConfig
from .precoder import ProjectionCollapse
from .seeding import POWER_SAMPLES, rng_for
from .simulate import TrialResult, base_params, nulling_radius, nulling_s, power_plan, run_trial, validate_geometry

log = logging.getLogger(__name__)

CSV_HEADER = "config_hash,trial,mobile_id,L,r_serving_km,S,I,sinr_db,norm_sinr_db,rate_bps_hz"
MAX_EXCLUDED_FRACTION = 1e-3


class CampaignError(RuntimeError):
    pass


def _trial_or_failure(args):
    cfg, trial, plans = args
    try:
        return run_trial(cfg, trial, plans=plans)
    except ProjectionCollapse as exc:
        return exc


def run_trials(cfg: ScenarioConfig, workers: int | None = None) -> tuple[list[TrialResult], list[int]]:
    """All trials of ``cfg``; returns (results in (trial, L) order, failed trial ids)."""
    validate_geometry(cfg)
    workers = cfg.workers if workers is None else workers
    plans = {L: power_plan(cfg, L) for L in cfg.antennas}
    jobs = [(cfg, t, plans) for t in range(cfg.trials)]
    if workers <= 1:
        outcomes = [_trial_or_failure(j) for j in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_trial_or_failure, jobs))
    results, failed = [], []
    for t, out in enumerate(outcomes):
        if isinstance(out, Exception):
            log.warning("trial %d failed (seed=%d): %s", t, cfg.seed, out)
            failed.append(t)
        else:
            results.extend(out)
    if cfg.trials and len(failed) / cfg.trials > MAX_EXCLUDED_FRACTION:
        raise CampaignError(f"{len(failed)} of {cfg.trials} trials failed numerically: {failed}")
    return results, failed


def _db(x) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def _fmt(x) -> str:
    # repr of a Python float round-trips exactly
    return repr(float(x))


def records_csv(cfg: ScenarioConfig, results: list[TrialResult]) -> str:
    """Per-mobile records, ordered by L then trial then mobile id."""
    h = cfg.config_hash()
    buf = io.StringIO(newline="")
    buf.write(CSV_HEADER + "\n")
    order = sorted(results, key=lambda r: (cfg.antennas.index(r.L), r.trial))
    for res in order:
        m = res.metrics
        sinr_db, norm_db = _db(m.sinr), _db(m.normalized_sinr)
        for i in range(len(m.sinr)):
            buf.write(",".join((h, str(res.trial), str(i), str(res.L), _fmt(m.serving_distance[i]), _fmt(m.signal[i]),
                                _fmt(m.interference[i]), _fmt(sinr_db[i]), _fmt(norm_db[i]), _fmt(m.rate[i]))) + "\n")
    return buf.getvalue()


def write_csv(path: Path, text: str) -> None:
    Path(path).write_bytes(text.encode("utf-8"))


def read_records(path: Path, expected_hash: str | None = None) -> list[dict]:
    """Parse a records CSV; rows with a different config hash are rejected."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header")
    keys = CSV_HEADER.split(",")
    rows = [dict(zip(keys, ln.split(","))) for ln in lines[1:]]
    hashes = {r["config_hash"] for r in rows}
    if expected_hash is not None:
        hashes.add(expected_hash)
    if len(hashes) > 1:
        raise ValueError(f"mixed configurations in {path}: {sorted(hashes)}")
    return rows


def merge_records(*tables: list[dict]) -> list[dict]:
    """Concatenate record tables from the same configuration."""
    rows = [r for t in tables for r in t]
    hashes = {r["config_hash"] for r in rows}
    if len(hashes) > 1:
        raise ValueError(f"refusing to aggregate records from different configs: {sorted(hashes)}")
    return rows


def prediction_for(cfg: ScenarioConfig, L: int, mean_power: float | None = None) -> float:
    """Reference normalized SINR at L (constant mu for scaled noise, sigma2 L^(a/2-1) for fixed)."""
    p = base_params(cfg, L, mean_power=mean_power)
    return asymptotics.finite_L_normalized_prediction(p, L)


def _describe_nulling(cfg: ScenarioConfig) -> str:
    r = cfg.nulling
    if r.kind == "optimal":
        return f"optimal s* per L (x{r.s_factor})"
    if r.kind == "scaled":
        return f"s={r.s}, beta={r.beta}"
    return f"explicit D={r.radius} km"


def _stats(x: np.ndarray) -> dict:
    finite = x[np.isfinite(x)]
    return {
        "mean": float(finite.mean()) if finite.size else math.nan,
        # sample quantiles without interpolation: samples may be -inf dB
        "median": float(np.percentile(x, 50, method="inverted_cdf")),
        "p05": float(np.percentile(x, 5, method="inverted_cdf")),
        "p95": float(np.percentile(x, 95, method="inverted_cdf")),
    }


def histogram_summary(cfg: ScenarioConfig, results: list[TrialResult]) -> dict:
    per_L = {}
    for L in cfg.antennas:
        rs = [r for r in results if r.L == L]
        if not rs:
            continue
        plan = power_plan(cfg, L)
        ref = prediction_for(cfg, L, plan.mean_power)
        norm_db = np.concatenate([_db(r.metrics.normalized_sinr) for r in rs])
        dev = norm_db - 10 * math.log10(ref)
        entry = _stats(norm_db)
        entry.update({
            "reference_value": ref,
            "reference_db": 10 * math.log10(ref),
            "frac_within_2db": float(np.mean(np.abs(dev) <= 2.0)),
            "frac_within_6db": float(np.mean(np.abs(dev) <= 6.0)),
            "n_samples": int(norm_db.size),
            "nulling_radius_km": rs[0].nulling_radius,
            "s": nulling_s(cfg, L),
            "activation_fraction": float(np.mean([r.activation_fraction for r in rs])),
            "signal_dof_ratio": signal_dof_ratio(cfg, rs),
        })
        per_L[str(L)] = entry
    return per_L


def signal_dof_ratio(cfg: ScenarioConfig, rs: list[TrialResult]) -> float:
    """Mean of S / (phi^2 r^-alpha (L - s^2 L pi lambda_b M)) over served mobiles of active BSs."""
    L = rs[0].L
    s = nulling_s(cfg, L)
    dof = L - s * s * L * math.pi * cfg.bs_density * cfg.mobiles_per_bs
    vals = []
    for r in rs:
        on = np.repeat(r.metrics.active, cfg.mobiles_per_bs) & (r.powers.phi_sq > 0)
        m = r.metrics
        vals.append(m.signal[on] / (r.powers.phi_sq[on] * m.serving_distance[on] ** (-cfg.pathloss_exp) * dof))
    return float(np.concatenate(vals).mean())


def _summary_base(cfg: ScenarioConfig, t0: float, failed: list[int]) -> dict:
    return {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "nulling_rule": _describe_nulling(cfg),
        "runtime_s": time.perf_counter() - t0,
        "excluded_trials": len(failed),
        "excluded_trial_ids": failed,
    }


def _write_outputs(out_dir, name: str, cfg: ScenarioConfig, summary: dict, results=None) -> None:
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if results is not None:
        write_csv(out / f"{name}_{cfg.config_hash()}.csv", records_csv(cfg, results))
    (out / f"{name}_{cfg.config_hash()}.json").write_text(json.dumps(summary, indent=2, default=float) + "\n")


def run_histogram_experiment(cfg: ScenarioConfig, out_dir=None):
    """Normalized-SINR samples against the large-L reference at every L."""
    t0 = time.perf_counter()
    results, failed = run_trials(cfg)
    summary = _summary_base(cfg, t0, failed)
    summary["per_L"] = histogram_summary(cfg, results)
    summary["runtime_s"] = time.perf_counter() - t0
    _write_outputs(out_dir, "histogram", cfg, summary, results)
    return results, summary


def equal_split(cfg: ScenarioConfig):
    return lambda r: np.full(np.shape(r), cfg.peak_power / cfg.mobiles_per_bs)


def predicted_throughput(cfg: ScenarioConfig, L: int, mc_samples: int = 100_000) -> asymptotics.ThroughputEstimate:
    """R_as at L for the configured policy, on the config's placement law."""
    plan = power_plan(cfg, L)
    p = base_params(cfg, L, mean_power=plan.mean_power)
    rng = rng_for(cfg.seed, POWER_SAMPLES, 10_000 + L)
    if plan.policy == "equal":
        alloc = equal_split(cfg)
    else:
        from . import powerctl

        def alloc(r):
            gains = plan.g * np.asarray(r) ** (-cfg.pathloss_exp)
            return powerctl.allocate(plan.level, gains, cfg.peak_power)
    return asymptotics.asymptotic_throughput(p, L, alloc, cfg.placement, mc_samples, rng)


def throughput_summary(cfg: ScenarioConfig, results: list[TrialResult], mc_samples: int = 100_000) -> dict:
    per_L = {}
    for L in cfg.antennas:
        rs = [r for r in results if r.L == L]
        if not rs:
            continue
        per_trial = np.array([r.bs_throughput.mean() for r in rs])
        pred = predicted_throughput(cfg, L, mc_samples)
        emp = float(per_trial.mean())
        per_L[str(L)] = {
            "empirical_mean_bs_throughput": emp,
            "empirical_stderr": float(per_trial.std(ddof=1) / math.sqrt(len(rs))) if len(rs) > 1 else math.nan,
            "R_as": pred.mean,
            "R_as_stderr": pred.stderr,
            "relative_gap": (emp - pred.mean) / pred.mean,
            "activation_fraction": float(np.mean([r.activation_fraction for r in rs])),
            "mean_bs_power": float(np.mean([r.powers.bs_power().mean() for r in rs])),
            "max_bs_power": float(max(r.powers.max_bs_power() for r in rs)),
            "nulling_radius_km": rs[0].nulling_radius,
        }
    return per_L


def run_throughput_sweep(cfg: ScenarioConfig, out_dir=None, mc_samples: int = 100_000) -> dict:
    """Empirical mean BS throughput against R_as for each L."""
    t0 = time.perf_counter()
    results, failed = run_trials(cfg)
    summary = _summary_base(cfg, t0, failed)
    summary["per_L"] = throughput_summary(cfg, results, mc_samples)
    summary["runtime_s"] = time.perf_counter() - t0
    _write_outputs(out_dir, "throughput", cfg, summary)
    return summary


def run_power_allocation_comparison(cfg: ScenarioConfig, out_dir=None) -> dict:
    """Equal power vs two-level water-filling through the full simulator."""
    t0 = time.perf_counter()
    by_policy = {}
    excluded = 0
    for policy in ("equal", "waterfill"):
        c = replace(cfg, allocation=policy)
        results, failed = run_trials(c)
        excluded += len(failed)
        per_L = {}
        for L in c.antennas:
            rs = [r for r in results if r.L == L]
            plan = power_plan(c, L)
            per_L[str(L)] = {
                "sum_se_per_bs": float(np.mean([r.bs_throughput.mean() for r in rs])),
                "mean_bs_power": float(np.mean([r.powers.bs_power().mean() for r in rs])),
                "max_bs_power": float(max(r.powers.max_bs_power() for r in rs)),
                "peak_violations": int(sum(np.sum(r.powers.bs_power() > c.peak_power + 1e-9) for r in rs)),
                "planned_mean_power": plan.mean_power,
                "water_level": plan.level,
            }
        by_policy[policy] = per_L
    gaps = {
        L: (by_policy["waterfill"][L]["sum_se_per_bs"] / by_policy["equal"][L]["sum_se_per_bs"] - 1.0)
        for L in by_policy["equal"]
    }
    summary = _summary_base(replace(cfg, allocation="equal"), t0, [])
    summary["excluded_trials"] = excluded
    summary["policies"] = by_policy
    summary["waterfill_gain_over_equal"] = gaps
    summary["runtime_s"] = time.perf_counter() - t0
    _write_outputs(out_dir, "power_compare", cfg, summary)
    return summary


def run_shotnoise_validation(models: list[shotnoise.ShotNoiseSpec], n_trials: int = 10_000, seed: int = 0,
                             out_dir=None) -> dict:
    """Quadrature bound vs Monte Carlo E[I1 I2] for each fixture."""
    rows = []
    for idx, model in enumerate(models):
        b = shotnoise.bound_value(model)
        est = shotnoise.estimate_joint_moment(model, n_trials, seed, stream=idx)
        z = (est.mean - b.value) / est.standard_error if est.standard_error > 0 else 0.0
        if model.direction == "equal":
            ok = abs(z) <= 3 or (est.standard_error == 0 and est.mean == b.value)
            verdict = "TIGHT" if ok else "MISMATCH"
        elif model.direction == "upper":
            verdict = "BOUNDED" if z <= 3 else "VIOLATED"
        else:
            verdict = "BOUNDED" if z >= -3 else "VIOLATED"
        rows.append({"name": model.name, "direction": model.direction, "bound": b.value, "tail": b.tail,
                     "mc_mean": est.mean, "mc_stderr": est.standard_error, "z": z, "verdict": verdict})
    summary = {"n_trials": n_trials, "seed": seed, "rows": rows}
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "shotnoise.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def default_shotnoise_fixtures() -> list[shotnoise.ShotNoiseSpec]:
    return [
        shotnoise.independent_exponential_fixture(),
        shotnoise.shared_factor_fixture(direction="upper"),
        shotnoise.shared_factor_fixture(direction="lower"),
        shotnoise.zero_mark_fixture(),
    ]


def interference_scaling(alpha: float = 3.0, bs_density: float = 0.1, mobiles_per_bs: int = 3,
                         cell_radius: float = 0.15, radii=None, trials: int = 40, seed: int = 0,
                         side_factor: float = 50.0) -> dict:
    """Scaled interference D^(alpha-2) I against its large-D limit.

    The nulling radius is set explicitly; L is chosen large enough that BSs
    are active w.h.p. (three times the expected in-disk mobile count plus
    M). The window side is ``side_factor`` times the largest D so that the
    wrap-around truncation of the interference integral stays small.
    """
    radii = [2 * cell_radius, 4 * cell_radius, 8 * cell_radius] if radii is None else list(radii)
    side = side_factor * max(radii)
    limit = asymptotics.interference_limit(bs_density, 1.0, alpha)
    rows = []
    for D in radii:
        nbar = mobiles_per_bs + math.pi * bs_density * mobiles_per_bs * D * D
        L = int(math.ceil(3 * nbar)) + mobiles_per_bs
        cfg = ScenarioConfig(bs_density=bs_density, mobiles_per_bs=mobiles_per_bs, antennas=(L,), pathloss_exp=alpha,
                             cell_radius=cell_radius, noise=_unit_noise(), nulling=NullingRule("explicit", radius=D),
                             placement=PlacementMode.UNIFORM_DISK, expected_bs=bs_density * side**2, trials=trials,
                             seed=seed)
        results, _ = run_trials(cfg)
        scaled = np.concatenate([r.metrics.interference for r in results]) * D ** (alpha - 2)
        per_trial = np.array([r.metrics.interference.mean() for r in results]) * D ** (alpha - 2)
        rows.append({"D": D, "L": L, "mean_scaled": float(scaled.mean()),
                     "stderr": float(per_trial.std(ddof=1) / math.sqrt(len(per_trial))),
                     "var_scaled": float(scaled.var(ddof=1)), "relative_error": float(scaled.mean() / limit - 1),
                     "activation_fraction": float(np.mean([r.activation_fraction for r in results]))})
    slope = float(np.polyfit(np.log([r["D"] for r in rows]), np.log([r["var_scaled"] for r in rows]), 1)[0])
    return {"alpha": alpha, "limit": limit, "side": side, "bs_density": bs_density, "rows": rows,
            "variance_slope": slope, "claimed_slope": 4 - 2 * alpha}


def _unit_noise():
    from .config import NoiseSpec

    return NoiseSpec("fixed", sigma2=1.0)


def predict(cfg: ScenarioConfig) -> dict:
    """Pure closed-form evaluation for each L of the sweep."""
    out = {}
    for L in cfg.antennas:
        plan = power_plan(cfg, L)
        p = base_params(cfg, L, mean_power=plan.mean_power)
        lim = asymptotics.sinr_limit(p, cfg.peak_power / cfg.mobiles_per_bs, cfg.cell_radius)
        D = nulling_radius(cfg, L)
        lo, hi = asymptotics.activation_prob_bounds(p, L, D) if D > cfg.cell_radius else (math.nan, math.nan)
        out[str(L)] = {
            "s": p.s,
            "nulling_radius_km": D,
            "nulling_load": p.load(),
            "effective_mu": p.mu,
            "normalized_sinr": asymptotics.finite_L_normalized_prediction(p, L),
            "edge_rate_equal_power": asymptotics.asymptotic_rate(p, L, cfg.peak_power / cfg.mobiles_per_bs,
                                                                 cfg.cell_radius),
            "R_as": predicted_throughput(cfg, L, 20_000).mean,
            "sinr_limit": {"exponent": lim.exponent, "coefficient": lim.coefficient, "regime": lim.regime.value},
            "activation_prob_bounds": [lo, hi],
            "mean_power": plan.mean_power,
        }
    return {"config": cfg.to_dict(), "config_hash": cfg.config_hash(), "per_L": out}


def optimal_radius_table(cfg: ScenarioConfig) -> dict:
    out = {}
    for L in cfg.antennas:
        p = base_params(cfg, L, s=0.0)
        s = asymptotics.solve_optimal_s(p)
        out[str(L)] = {"s_star": s, "D_star_km": s * math.sqrt(L), "residual": asymptotics.optimal_s_residual(p, s),
                       "protected_mobiles": math.pi * cfg.bs_density * cfg.mobiles_per_bs * s * s * L,
                       "effective_mu": p.mu}
    return {"config_hash": cfg.config_hash(), "per_L": out}


# ---------------------------------------------------------------------------
# reference scenarios (desk scale unless noted)


def scaled_noise_config(**kw) -> ScenarioConfig:
    """Normalized SINR, scaled noise: cell-edge SNR 6 dB at L = 25."""
    from .config import NoiseSpec

    base = dict(bs_density=30.0, mobiles_per_bs=3, antennas=(25, 50, 100, 200), pathloss_exp=4.0, cell_radius=0.15,
                noise=NoiseSpec("scaled", edge_snr_db=6.0, ref_antennas=25), placement=PlacementMode.UNIFORM_DISK,
                allocation="equal", expected_bs=200, trials=5)
    base.update(kw)
    return ScenarioConfig(**base)


def fixed_noise_config(**kw) -> ScenarioConfig:
    """Normalized SINR, fixed noise: cell-edge SNR 6 dB."""
    from .config import NoiseSpec

    return scaled_noise_config(**{"noise": NoiseSpec("fixed", edge_snr_db=6.0), **kw})


def throughput_config(**kw) -> ScenarioConfig:
    """Spectral efficiency vs L: R = 0.15 km, alpha = 3, edge SNR 10 dB from one antenna."""
    from .config import NoiseSpec

    base = dict(bs_density=30.0, mobiles_per_bs=3, antennas=(8, 16, 32, 64, 128), pathloss_exp=3.0,
                cell_radius=0.15, noise=NoiseSpec("fixed", edge_snr_db=10.0), placement=PlacementMode.CELL_EDGE,
                allocation="equal", expected_bs=200, trials=3)
    base.update(kw)
    return ScenarioConfig(**base)


def power_compare_config(**kw) -> ScenarioConfig:
    """Power allocation comparison: 60 BS/km^2, alpha = 3, edge SNR 25 dB."""
    from .config import NoiseSpec

    base = dict(bs_density=60.0, mobiles_per_bs=3, antennas=(10, 20, 40), pathloss_exp=3.0, cell_radius=0.15,
                noise=NoiseSpec("fixed", edge_snr_db=25.0), placement=PlacementMode.UNIFORM_DISK,
                allocation="equal", expected_bs=200, trials=3)
    base.update(kw)
    return ScenarioConfig(**base)


__all__ = [
    "CSV_HEADER", "CampaignError", "ConfigError", "run_trials", "records_csv", "read_records", "merge_records",
    "run_histogram_experiment", "run_throughput_sweep", "run_power_allocation_comparison",
    "run_shotnoise_validation", "interference_scaling", "predict", "optimal_radius_table",
]
