"""First-round firm shocks and their aggregation to industry level.

A shock is expressed as the remaining production capacity psi in [0, 1]
per firm (psi = 1 means unharmed, 0 means fully shut down).  Employment
records give psi = 1 - max(0, 1 - e_after / e_before); firms with missing
employment get NaN and can be filled in by donor imputation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .network import FirmNetwork, NetworkFormatError, strength_profile


@dataclass(frozen=True)
class IndustryShock:
    """Remaining capacity per industry, split by propagation side.

    cap_up weights firms by in-strength (purchasing exposure), cap_down
    by out-strength.  Industries with zero strength on a side carry
    capacity 1 there (no constraint).
    """

    industry_labels: tuple[str, ...]
    cap_up: np.ndarray
    cap_down: np.ndarray


def employment_shock(e_before: np.ndarray, e_after: np.ndarray) -> np.ndarray:
    """Remaining capacity from two employment counts.

    Growing firms are capped at 1.  A zero baseline count means no loss
    signal (psi = 1).  NaN in either month propagates as NaN (missing).
    """
    e_before = np.asarray(e_before, dtype=np.float64)
    e_after = np.asarray(e_after, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = e_after / e_before
    psi = np.minimum(1.0, ratio)
    psi = np.where(e_before == 0, 1.0, psi)
    missing = np.isnan(e_before) | np.isnan(e_after)
    return np.where(missing, np.nan, psi)


def load_employment(path, net: FirmNetwork) -> np.ndarray:
    """Read firm,e_jan,e_may records and return psi aligned to the network.

    Blank cells mean missing; firms absent from the file are missing too.
    Counts must be non-negative.
    """
    e_before = np.full(net.n_firms, np.nan)
    e_after = np.full(net.n_firms, np.nan)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = set(reader.fieldnames or ())
        if not {"firm", "e_jan", "e_may"} <= fields:
            raise NetworkFormatError(f"{path}: expected columns firm,e_jan,e_may")
        for row in reader:
            fid = row["firm"].strip()
            try:
                i = net.index_of(fid)
            except KeyError:
                raise NetworkFormatError(f"{path}: unknown firm {fid!r}") from None
            for col, target in (("e_jan", e_before), ("e_may", e_after)):
                cell = (row[col] or "").strip()
                if not cell:
                    continue
                value = float(cell)
                if value < 0:
                    raise NetworkFormatError(
                        f"{path}: negative employment count for firm {fid!r}"
                    )
                target[i] = value
    return employment_shock(e_before, e_after)


def load_shock(path, net: FirmNetwork) -> np.ndarray:
    """Read a firm,psi file; firms not listed are NaN (missing)."""
    psi = np.full(net.n_firms, np.nan)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = set(reader.fieldnames or ())
        if not {"firm", "psi"} <= fields:
            raise NetworkFormatError(f"{path}: expected columns firm,psi")
        for row in reader:
            fid = row["firm"].strip()
            try:
                i = net.index_of(fid)
            except KeyError:
                raise NetworkFormatError(f"{path}: unknown firm {fid!r}") from None
            cell = (row["psi"] or "").strip()
            if cell:
                psi[i] = float(cell)
    _check_psi(psi, allow_missing=True)
    return psi


def write_shock(net: FirmNetwork, psi: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["firm", "psi"])
        for fid, value in zip(net.firm_ids, psi):
            writer.writerow([fid, "" if np.isnan(value) else repr(float(value))])


def _check_psi(psi: np.ndarray, allow_missing: bool = False) -> None:
    finite = psi[~np.isnan(psi)]
    if not allow_missing and len(finite) != len(psi):
        raise ValueError("shock vector contains missing entries")
    if np.any((finite < 0) | (finite > 1)):
        raise ValueError("psi values must lie in [0, 1]")


def impute_missing(
    net: FirmNetwork,
    psi: np.ndarray,
    loss_fn,
    draws: int = 11,
    seed: int = 0,
) -> np.ndarray:
    """Fill missing psi entries from same-industry donors.

    Builds ``draws`` complete candidate vectors (each missing entry sampled
    uniformly with replacement from the observed shocks of its own
    industry, falling back to the global observed pool when the industry
    has none), scores each candidate with ``loss_fn`` and returns the one
    with the median loss (the lower median for even draw counts).
    """
    psi = np.asarray(psi, dtype=np.float64)
    _check_psi(psi, allow_missing=True)
    missing = np.flatnonzero(np.isnan(psi))
    if missing.size == 0:
        return psi.copy()
    observed = ~np.isnan(psi)
    if not observed.any():
        raise ValueError("cannot impute: no observed shocks at all")
    if draws < 1:
        raise ValueError("draws must be at least 1")

    global_pool = psi[observed]
    pools = []
    for i in missing:
        same = observed & (net.industry == net.industry[i])
        pool = psi[same]
        pools.append(pool if pool.size else global_pool)

    candidates, losses = [], []
    for d in range(draws):
        rng = np.random.default_rng(np.random.SeedSequence((seed, d)))
        filled = psi.copy()
        for i, pool in zip(missing, pools):
            filled[i] = rng.choice(pool)
        candidates.append(filled)
        losses.append(loss_fn(filled))

    order = np.argsort(losses, kind="stable")
    return candidates[order[(draws - 1) // 2]]


def aggregate_shock(net: FirmNetwork, psi: np.ndarray, industry=None) -> IndustryShock:
    """Strength-weighted industry capacities from a complete firm shock.

    ``industry`` may override the network's labels (e.g. to aggregate at a
    different granularity); it must be an integer code array plus implied
    label tuple on the network when omitted.
    """
    psi = np.asarray(psi, dtype=np.float64)
    _check_psi(psi)
    prof = strength_profile(net)
    if industry is None:
        industry, labels = net.industry, net.industry_labels
    else:
        industry = np.asarray(industry)
        labels = tuple(str(c) for c in range(int(industry.max()) + 1))
    m = len(labels)

    def weighted(strength: np.ndarray) -> np.ndarray:
        total = np.bincount(industry, weights=strength, minlength=m)
        hit = np.bincount(industry, weights=strength * psi, minlength=m)
        out = np.ones(m)
        nz = total > 0
        out[nz] = hit[nz] / total[nz]
        return out

    return IndustryShock(labels, weighted(prof.s_in), weighted(prof.s_out))
