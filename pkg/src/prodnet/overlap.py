"""Input/output market overlap measures.

Each firm is summarized by how its purchases (inputs) or sales (outputs)
distribute over industries.  Overlap statistics compare these mixes between
firm pairs of the same industry and degree bin, or for the same firm across
two consecutive network snapshots.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .network import (
    DEGREE_BINS,
    RESIDUAL_INDUSTRY,
    FirmNetwork,
    assign_degree_bins,
    degree_bin_labels,
    strength_profile,
)

PERCENTILES = (5, 25, 50, 75, 95)


@dataclass(frozen=True)
class DistributionSummary:
    """Summary statistics of a sample of overlap values."""

    count: int
    mean: float
    std: float
    percentiles: tuple[float, ...]  # at PERCENTILES

    @classmethod
    def of(cls, values: np.ndarray) -> "DistributionSummary":
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            return cls(0, float("nan"), float("nan"), (float("nan"),) * len(PERCENTILES))
        return cls(
            int(values.size),
            float(values.mean()),
            float(values.std()),
            tuple(float(p) for p in np.percentile(values, PERCENTILES)),
        )


def normalized_io_vectors(net: FirmNetwork, direction: str = "in") -> np.ndarray:
    """Per-firm industry mix: row i holds the share of firm i's input
    (or output) flow coming from (going to) each industry.

    Rows of firms with zero strength in the chosen direction are all zero.
    """
    n, m = net.n_firms, net.n_industries
    if direction == "in":
        node, partner = net.dst, net.src
    elif direction == "out":
        node, partner = net.src, net.dst
    else:
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    flat = node * m + net.industry[partner]
    totals = np.bincount(flat, weights=net.weight, minlength=n * m).reshape(n, m)
    strength = totals.sum(axis=1)
    out = np.zeros_like(totals)
    nz = strength > 0
    out[nz] = totals[nz] / strength[nz, None]
    return out


def binary_io_masks(net: FirmNetwork, direction: str = "in") -> np.ndarray:
    """Boolean industry presence masks (any positive flow counts)."""
    return normalized_io_vectors(net, direction) > 0


def overlap_coefficient(u: np.ndarray, v: np.ndarray) -> float:
    """Overlap of two 1-normalized industry mix vectors: sum of minima.

    Inputs must each sum to 1 (the measure's denominator is dropped on that
    assumption, which is asserted rather than repaired here).
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    for vec in (u, v):
        if abs(vec.sum() - 1.0) > 1e-9:
            raise ValueError("overlap_coefficient expects 1-normalized vectors")
    return float(np.minimum(u, v).sum())


def jaccard_index(mask_u: np.ndarray, mask_v: np.ndarray) -> float:
    """Jaccard similarity of two industry presence masks.

    Returns nan when both masks are empty.
    """
    mask_u = np.asarray(mask_u, dtype=bool)
    mask_v = np.asarray(mask_v, dtype=bool)
    union = np.count_nonzero(mask_u | mask_v)
    if union == 0:
        return float("nan")
    return np.count_nonzero(mask_u & mask_v) / union


def _pair_values(vectors: np.ndarray, measure: str) -> np.ndarray:
    """All unordered pair values within one group of firms (row-wise)."""
    g = vectors.shape[0]
    if g < 2:
        return np.empty(0)
    iu, ju = np.triu_indices(g, k=1)
    if measure == "oc":
        return np.minimum(vectors[iu], vectors[ju]).sum(axis=1)
    if measure == "jaccard":
        a = vectors[iu] > 0
        b = vectors[ju] > 0
        inter = np.count_nonzero(a & b, axis=1)
        union = np.count_nonzero(a | b, axis=1)
        return inter / union  # union > 0: every grouped firm has degree >= 1
    raise ValueError(f"unknown measure {measure!r}")


def pairwise_distribution(
    net: FirmNetwork,
    direction: str = "in",
    measure: str = "oc",
    bins=DEGREE_BINS,
) -> dict[tuple[str, str], DistributionSummary]:
    """Overlap distributions for firm pairs sharing industry and degree bin.

    Keys are (industry label, bin label).  Industries or bins with fewer
    than two eligible firms yield a count-0 summary.  Degree-zero firms are
    never eligible.
    """
    vectors = normalized_io_vectors(net, direction)
    prof = strength_profile(net)
    degrees = prof.k_in if direction == "in" else prof.k_out
    bin_of = assign_degree_bins(degrees, bins)
    labels = degree_bin_labels(bins)

    out: dict[tuple[str, str], DistributionSummary] = {}
    for code, industry in enumerate(net.industry_labels):
        members = np.flatnonzero(net.industry == code)
        for b, bin_label in enumerate(labels):
            group = members[bin_of[members] == b]
            out[(industry, bin_label)] = DistributionSummary.of(
                _pair_values(vectors[group], measure)
            )
    return out


def _align_industries(net_a: FirmNetwork, net_b: FirmNetwork):
    """Project two snapshots' industry mixes onto a shared label space."""
    union = sorted(set(net_a.industry_labels) | set(net_b.industry_labels))
    pos = {lab: i for i, lab in enumerate(union)}

    def expand(net: FirmNetwork, vectors: np.ndarray) -> np.ndarray:
        wide = np.zeros((vectors.shape[0], len(union)))
        cols = [pos[lab] for lab in net.industry_labels]
        wide[:, cols] = vectors
        return wide

    return expand


@dataclass(frozen=True)
class TemporalOverlap:
    """Same-firm overlap between two consecutive snapshots."""

    firm_ids: tuple[str, ...]
    values: np.ndarray  # overlap coefficient per firm
    prev_degree_bin: np.ndarray  # bin index from the earlier snapshot, -1 if unbinned


def temporal_overlap(
    net_now: FirmNetwork,
    net_prev: FirmNetwork,
    direction: str = "in",
    bins=DEGREE_BINS,
) -> TemporalOverlap:
    """Overlap coefficient of each firm's industry mix against its own mix
    one snapshot earlier.  Only firms present in both snapshots with
    positive strength in both enter; the degree bin comes from the earlier
    snapshot.
    """
    expand = _align_industries(net_now, net_prev)
    vec_now = expand(net_now, normalized_io_vectors(net_now, direction))
    vec_prev = expand(net_prev, normalized_io_vectors(net_prev, direction))

    prof_prev = strength_profile(net_prev)
    deg_prev = prof_prev.k_in if direction == "in" else prof_prev.k_out
    bin_prev = assign_degree_bins(deg_prev, bins)

    ids, values, bins_out = [], [], []
    prev_index = {fid: i for i, fid in enumerate(net_prev.firm_ids)}
    for i, fid in enumerate(net_now.firm_ids):
        j = prev_index.get(fid)
        if j is None:
            continue
        if vec_now[i].sum() == 0 or vec_prev[j].sum() == 0:
            continue
        ids.append(fid)
        values.append(np.minimum(vec_now[i], vec_prev[j]).sum())
        bins_out.append(bin_prev[j])
    return TemporalOverlap(
        tuple(ids), np.asarray(values, dtype=np.float64), np.asarray(bins_out, dtype=np.int64)
    )


def retention_probabilities(
    net_now: FirmNetwork,
    net_prev: FirmNetwork,
    direction: str = "in",
    bins=DEGREE_BINS,
) -> TemporalOverlap:
    """Fraction of a firm's previous partner industries still present now.

    Counts industry-level links: |mask_now AND mask_prev| / |mask_prev|.
    """
    expand = _align_industries(net_now, net_prev)
    mask_now = expand(net_now, normalized_io_vectors(net_now, direction)) > 0
    mask_prev = expand(net_prev, normalized_io_vectors(net_prev, direction)) > 0

    prof_prev = strength_profile(net_prev)
    deg_prev = prof_prev.k_in if direction == "in" else prof_prev.k_out
    bin_prev = assign_degree_bins(deg_prev, bins)

    ids, values, bins_out = [], [], []
    prev_index = {fid: i for i, fid in enumerate(net_prev.firm_ids)}
    for i, fid in enumerate(net_now.firm_ids):
        j = prev_index.get(fid)
        if j is None:
            continue
        prev_count = np.count_nonzero(mask_prev[j])
        if prev_count == 0:
            continue
        kept = np.count_nonzero(mask_now[i] & mask_prev[j])
        ids.append(fid)
        values.append(kept / prev_count)
        bins_out.append(bin_prev[j])
    return TemporalOverlap(
        tuple(ids), np.asarray(values, dtype=np.float64), np.asarray(bins_out, dtype=np.int64)
    )


def summarize_by_bin(result: TemporalOverlap, bins=DEGREE_BINS) -> dict[str, DistributionSummary]:
    """Bucket temporal values by their earlier-snapshot degree bin."""
    labels = degree_bin_labels(bins)
    return {
        label: DistributionSummary.of(result.values[result.prev_degree_bin == b])
        for b, label in enumerate(labels)
    }


def _format_stat(x: float) -> str:
    return "" if np.isnan(x) else repr(float(x))


REPORT_COLUMNS = (
    "industry,bin,direction,measure,count,mean,std,p5,p25,p50,p75,p95"
)


def emit_overlap_report(
    net: FirmNetwork,
    path,
    directions=("in", "out"),
    measures=("oc", "jaccard"),
    bins=DEGREE_BINS,
    include_residual: bool = False,
) -> None:
    """Write the per-industry per-bin overlap distribution table as CSV.

    Count-0 groups keep their row with empty statistic cells.  The residual
    industry is dropped unless explicitly requested.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS.split(","))
        for direction in directions:
            for measure in measures:
                table = pairwise_distribution(net, direction, measure, bins)
                for (industry, bin_label), summary in table.items():
                    if industry == RESIDUAL_INDUSTRY and not include_residual:
                        continue
                    writer.writerow(
                        [
                            industry,
                            bin_label,
                            direction,
                            measure,
                            summary.count,
                            _format_stat(summary.mean),
                            _format_stat(summary.std),
                        ]
                        + [_format_stat(p) for p in summary.percentiles]
                    )
