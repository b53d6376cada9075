"""Synthetic firm networks for experiments and tests.

The default topology draws heavy-tailed out-degrees (discrete Pareto),
picks buyers uniformly without replacement, and puts log-normal weights
on the edges.  Industry sizes come from a flat Dirichlet; the first firms
are dealt round-robin so no industry ends up empty.  A chain topology is
also available for hand-checkable cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import FirmNetwork, build_firm_network


@dataclass(frozen=True)
class SyntheticNetworkSpec:
    n_firms: int = 1000
    n_industries: int = 20
    seed: int = 0
    topology: str = "powerlaw"  # powerlaw | chain
    out_exponent: float = 2.2
    min_out_degree: int = 1
    weight_mu: float = 0.0
    weight_sigma: float = 1.0
    industry_alpha: float = 3.0


def _firm_ids(n: int) -> list[str]:
    width = len(str(n))
    return [f"f{i + 1:0{width}d}" for i in range(n)]


def _industry_labels(m: int) -> list[str]:
    width = max(2, len(str(m)))
    return [f"ind{k + 1:0{width}d}" for k in range(m)]


def generate_network(spec: SyntheticNetworkSpec) -> FirmNetwork:
    """Build a random FirmNetwork; identical specs give identical networks."""
    n, m = spec.n_firms, spec.n_industries
    if not (n >= m >= 1):
        raise ValueError("need n_firms >= n_industries >= 1")
    if spec.topology not in ("powerlaw", "chain"):
        raise ValueError(f"unknown topology {spec.topology!r}")

    rng = np.random.default_rng(spec.seed)
    ids = _firm_ids(n)
    labels = _industry_labels(m)

    # Industry assignment: deal the first m firms one per industry, then
    # draw the rest from Dirichlet-distributed industry shares.
    tokens = [labels[i] for i in range(m)]
    if n > m:
        shares = rng.dirichlet(np.full(m, spec.industry_alpha))
        rest = rng.choice(m, size=n - m, p=shares)
        tokens.extend(labels[k] for k in rest)

    if spec.topology == "chain":
        src = np.arange(n - 1)
        dst = src + 1
    else:
        if not (1 <= spec.min_out_degree <= n - 1):
            raise ValueError("min_out_degree must lie in [1, n_firms - 1]")
        if spec.out_exponent <= 1.0:
            raise ValueError("out_exponent must exceed 1")
        u = rng.random(n)
        k_out = np.floor(spec.min_out_degree * (1.0 - u) ** (-1.0 / (spec.out_exponent - 1.0)))
        k_out = np.minimum(k_out, n - 1).astype(np.int64)
        src_list, dst_list = [], []
        others = np.arange(n)
        for i in range(n):
            candidates = np.concatenate([others[:i], others[i + 1 :]])
            picked = rng.choice(candidates, size=k_out[i], replace=False)
            src_list.append(np.full(k_out[i], i))
            dst_list.append(picked)
        src = np.concatenate(src_list)
        dst = np.concatenate(dst_list)

    weight = rng.lognormal(spec.weight_mu, spec.weight_sigma, size=len(src))
    edges = [(ids[s], ids[d], float(w)) for s, d, w in zip(src, dst, weight)]
    return build_firm_network(ids, tokens, edges)
