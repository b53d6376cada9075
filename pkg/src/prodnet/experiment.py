"""End-to-end comparison of firm-level and industry-level loss estimates.

Pipeline: obtain a network (file or synthetic), build a base capacity
vector, aggregate it to industry capacities, sample an ensemble of
firm-level scenarios with the same industry aggregates, propagate
everything, and write plot-ready CSVs plus a JSON summary.

Outputs are deterministic for a given configuration: file contents carry
a config hash and seed but no timestamps, and all floats are serialized
with repr.  The industry network inherits the same essentiality table
that is used at the firm level.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from ._kernels import BACKEND
from .config import config_hash, default_config
from .network import (
    RESIDUAL_INDUSTRY,
    aggregate_to_industry,
    build_firm_network,
    load_firm_network,
    strength_profile,
)
from .propagation import (
    ALL_ESSENTIAL,
    calibrate_firm,
    calibrate_industry,
    economy_loss,
    industry_losses,
    load_essentiality,
    propagate,
    propagate_firm,
    propagate_industry,
)
from .sampler import sample_ensemble, write_residuals
from .shocks import aggregate_shock, impute_missing, load_employment, load_shock
from .synth import SyntheticNetworkSpec, generate_network

_BASE_SHOCK_STREAM = 977  # fixed sub-stream tag for the random base shock


class ExperimentError(RuntimeError):
    """Pipeline failure tagged with the stage that caused it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def _json_safe(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def _load_network(cfg: dict):
    if cfg["edges"]:
        if not cfg["meta"]:
            raise ValueError("edges file given without a meta file")
        return load_firm_network(cfg["edges"], cfg["meta"])
    spec = SyntheticNetworkSpec(
        n_firms=cfg["n_firms"],
        n_industries=cfg["n_industries"],
        seed=cfg["seed"],
        topology=cfg["topology"],
        out_exponent=cfg["out_exponent"],
        min_out_degree=cfg["min_out_degree"],
        weight_mu=cfg["weight_mu"],
        weight_sigma=cfg["weight_sigma"],
        industry_alpha=cfg["industry_alpha"],
    )
    return generate_network(spec)


def _base_shock(cfg: dict, net, loss_fn) -> np.ndarray:
    kind = cfg["base_shock"]
    if kind == "random":
        rng = np.random.default_rng(np.random.SeedSequence((cfg["seed"], _BASE_SHOCK_STREAM)))
        return 1.0 - rng.beta(cfg["base_beta_a"], cfg["base_beta_b"], net.n_firms)
    if kind == "file":
        if not cfg["shock"]:
            raise ValueError("base_shock=file needs the shock key")
        psi = load_shock(cfg["shock"], net)
    elif kind == "employment":
        if not cfg["employment"]:
            raise ValueError("base_shock=employment needs the employment key")
        psi = load_employment(cfg["employment"], net)
    else:
        raise ValueError(f"unknown base_shock {kind!r}")
    if np.isnan(psi).any():
        psi = impute_missing(net, psi, loss_fn, draws=cfg["impute_draws"], seed=cfg["seed"])
    return psi


def _load_alt_industry(path, net):
    """firm,industry file defining an alternate (sampling) granularity."""
    import csv

    tokens = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not {"firm", "industry"} <= set(reader.fieldnames or ()):
            raise ValueError(f"{path}: expected columns firm,industry")
        for row in reader:
            tokens[row["firm"].strip()] = (row["industry"] or "").strip()
    missing = [f for f in net.firm_ids if f not in tokens]
    if missing:
        raise ValueError(f"{path}: no industry for firms {missing[:5]}")
    raw = [tokens[f] for f in net.firm_ids]
    labels = sorted({t for t in raw if t})
    if any(not t for t in raw):
        labels.append(RESIDUAL_INDUSTRY)
    index = {lab: i for i, lab in enumerate(labels)}
    codes = np.array([index[t or RESIDUAL_INDUSTRY] for t in raw], dtype=np.int64)
    return codes, tuple(labels)


def run_experiment(cfg: dict | None = None, **overrides) -> dict:
    """Run the full pipeline and return the summary dictionary."""
    cfg = dict(cfg) if cfg else default_config()
    cfg.update(overrides)
    digest = config_hash(cfg)
    out_dir = cfg["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    header = f"# config_hash={digest} seed={cfg['seed']}\n"

    def stage(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ExperimentError:
            raise
        except Exception as err:
            raise ExperimentError(name, str(err)) from err

    net = stage("load-network", _load_network, cfg)
    prof = strength_profile(net)
    table = (
        stage("load-essentiality", load_essentiality, cfg["essentiality"])
        if cfg["essentiality"]
        else ALL_ESSENTIAL
    )
    calib = stage("calibrate", calibrate_firm, net, table, cfg["mode"])

    def fpn_loss(psi):
        res = propagate(calib, psi, psi, cfg["tol"], cfg["max_iter"])
        return economy_loss(prof.s_out, res.h_final), res

    base_psi = stage("base-shock", _base_shock, cfg, net, lambda p: fpn_loss(p)[0])
    base_loss, base_res = stage("propagate-base", fpn_loss, base_psi)

    # Industry-level run at reporting granularity.
    ind = stage("aggregate", aggregate_to_industry, net)
    phi = stage("aggregate", aggregate_shock, net, base_psi)
    ipn_res = stage(
        "propagate-ipn",
        propagate_industry,
        ind,
        phi,
        table,
        cfg["mode"],
        None,
        cfg["tol"],
        cfg["max_iter"],
    )
    m = ind.n_industries
    ipn_loss = economy_loss(ind.out_strength, ipn_res.h_final)
    ipn_by_industry = industry_losses(ind.out_strength, np.arange(m), m, ipn_res.h_final)

    # Scenario ensemble, optionally constrained at a different granularity.
    if cfg["sampling_meta"]:
        codes, labels = stage("sample", _load_alt_industry, cfg["sampling_meta"], net)
        sample_kwargs = {"industry": codes, "industry_labels": labels}
    else:
        sample_kwargs = {}
    ensemble = stage(
        "sample",
        sample_ensemble,
        net,
        base_psi,
        cfg["scenario_count"],
        seed=cfg["seed"],
        epsilon=cfg["epsilon"],
        donor=cfg["donor"],
        max_rescale_iters=cfg["max_rescale_iters"],
        max_scenario_retries=cfg["max_scenario_retries"],
        lock_rule=cfg["lock_rule"],
        **sample_kwargs,
    )
    stage("sample", write_residuals, os.path.join(out_dir, "residuals.csv"), ensemble, header)

    count = ensemble.n_scenarios
    scen_losses = np.empty(count)
    scen_by_industry = np.empty((count, m))
    non_converged = 0 if base_res.converged else 1
    losses_path = os.path.join(out_dir, "losses_firm.csv")
    with open(losses_path, "w", newline="") as fh:
        fh.write(header)
        fh.write("scenario,loss\n")
        fh.write(f"base,{_fmt(base_loss)}\n")
        for l in range(count):
            loss_l, res_l = stage("propagate-scenario", fpn_loss, ensemble.psi[l])
            scen_losses[l] = loss_l
            scen_by_industry[l] = industry_losses(
                prof.s_out, net.industry, m, res_l.h_final
            )
            if not res_l.converged:
                non_converged += 1
            fh.write(f"s{l:04d},{_fmt(loss_l)}\n")
            fh.flush()

    base_by_industry = industry_losses(prof.s_out, net.industry, m, base_res.h_final)
    _write_industry_table(
        os.path.join(out_dir, "losses_industry.csv"),
        header,
        net.industry_labels,
        ipn_by_industry,
        base_by_industry,
        scen_by_industry,
        include_residual=cfg["report_residual"],
    )
    _write_histogram(os.path.join(out_dir, "histogram.csv"), header, scen_losses, cfg["bins"])
    _write_psi_matrix(os.path.join(out_dir, "ensemble_psi.csv"), header, net, ensemble.psi)

    deviation = _deviation_stats(ipn_loss, scen_losses)
    summary = {
        "config_hash": digest,
        "seed": cfg["seed"],
        "backend": BACKEND,
        "mode": cfg["mode"],
        "n_firms": net.n_firms,
        "n_industries": m,
        "base": {
            "loss_fpn": _json_safe(base_loss),
            "iterations": base_res.iterations,
            "converged": base_res.converged,
        },
        "ipn": {
            "loss": _json_safe(ipn_loss),
            "iterations": ipn_res.iterations,
            "converged": ipn_res.converged,
        },
        "scenarios": {
            "count": count,
            "mean": _json_safe(scen_losses.mean()) if count else None,
            "std": _json_safe(scen_losses.std()) if count else None,
            "min": _json_safe(scen_losses.min()) if count else None,
            "max": _json_safe(scen_losses.max()) if count else None,
            "non_converged": non_converged,
        },
        "deviation": deviation,
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _deviation_stats(ipn_loss: float, scen_losses: np.ndarray) -> dict | None:
    """Relative gap of the aggregated estimate versus each firm-level run.

    Scenarios with zero firm-level loss leave the ratio undefined; if none
    remain the whole statistic is reported as undefined (None).
    """
    if len(scen_losses) == 0:
        return None
    defined = scen_losses > 0
    if not defined.any():
        return {
            "mean": None,
            "mean_abs": None,
            "min": None,
            "max": None,
            "defined_scenarios": 0,
            "note": "undefined: all scenarios have zero firm-level loss",
        }
    ratio = ipn_loss / scen_losses[defined] - 1.0
    return {
        "mean": _json_safe(ratio.mean()),
        "mean_abs": _json_safe(np.abs(ratio).mean()),
        "min": _json_safe(ratio.min()),
        "max": _json_safe(ratio.max()),
        "defined_scenarios": int(defined.sum()),
    }


def _write_industry_table(
    path, header, labels, ipn_by_industry, base_by_industry, scen_by_industry, include_residual
):
    from .overlap import PERCENTILES

    with open(path, "w", newline="") as fh:
        fh.write(header)
        fh.write(
            "industry,ipn_loss,base_loss,count,mean,std,"
            + ",".join(f"p{p}" for p in PERCENTILES)
            + ",dev_mean,dev_mean_abs\n"
        )
        for k, label in enumerate(labels):
            if label == RESIDUAL_INDUSTRY and not include_residual:
                continue
            column = scen_by_industry[:, k]
            valid = column[~np.isnan(column)]
            if len(valid):
                stats = [
                    str(len(valid)),
                    _fmt(valid.mean()),
                    _fmt(valid.std()),
                ] + [_fmt(np.percentile(valid, p)) for p in PERCENTILES]
                defined = valid > 0
                if defined.any() and not math.isnan(ipn_by_industry[k]):
                    ratio = ipn_by_industry[k] / valid[defined] - 1.0
                    dev = [_fmt(ratio.mean()), _fmt(np.abs(ratio).mean())]
                else:
                    dev = ["", ""]
            else:
                stats = ["0"] + [""] * (2 + len(PERCENTILES))
                dev = ["", ""]
            fh.write(
                ",".join(
                    [label, _fmt(ipn_by_industry[k]), _fmt(base_by_industry[k])] + stats + dev
                )
                + "\n"
            )


def _write_histogram(path, header, losses: np.ndarray, bins: int):
    with open(path, "w", newline="") as fh:
        fh.write(header)
        fh.write("bin_left,bin_right,count\n")
        if len(losses) == 0:
            return
        lo, hi = float(losses.min()), float(losses.max())
        # a (near-)constant sample cannot support `bins` distinct edges;
        # collapse it to one row covering the whole range
        if hi - lo <= 2 * bins * np.spacing(max(abs(lo), abs(hi))):
            fh.write(f"{_fmt(lo)},{_fmt(hi)},{len(losses)}\n")
            return
        counts, edges = np.histogram(losses, bins=bins, range=(lo, hi))
        for i, c in enumerate(counts):
            fh.write(f"{_fmt(edges[i])},{_fmt(edges[i + 1])},{int(c)}\n")


def _write_psi_matrix(path, header, net, psi: np.ndarray):
    count = psi.shape[0]
    with open(path, "w", newline="") as fh:
        fh.write(header)
        fh.write("firm," + ",".join(f"s{l:04d}" for l in range(count)) + "\n")
        for i, fid in enumerate(net.firm_ids):
            fh.write(fid + "," + ",".join(repr(float(x)) for x in psi[:, i]) + "\n")
