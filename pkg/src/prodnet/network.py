"""Firm-level production networks and their industry aggregation.

A firm network is a sparse directed graph: an edge (i, j, w) means firm i
supplied goods worth w (currency units) to firm j over the observation
period.  Every firm carries an industry label; firms with a missing label
are pooled into a reserved residual industry so they still participate in
aggregation and propagation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

# Firms with a blank industry cell are pooled under this label.  It sorts
# after all real labels so the residual class always gets the last code.
RESIDUAL_INDUSTRY = "unassigned"

# Canonical degree bins used by the overlap reports: [1,5], [6,15], [16,35],
# [36, inf).  Degree-zero firms are excluded from binned statistics.
DEGREE_BINS = ((1, 5), (6, 15), (16, 35), (36, None))


class NetworkFormatError(ValueError):
    """Raised when an input file violates the expected format."""


@dataclass(frozen=True)
class FirmNetwork:
    """Immutable firm-level network.

    Edges are stored deduplicated (parallel entries summed), sorted by
    (buyer, supplier) for reproducible iteration order.
    """

    firm_ids: tuple[str, ...]
    industry: np.ndarray  # int code per firm, 0 .. n_industries-1
    industry_labels: tuple[str, ...]
    src: np.ndarray  # supplier node index per edge
    dst: np.ndarray  # buyer node index per edge
    weight: np.ndarray  # positive flow per edge

    @property
    def n_firms(self) -> int:
        return len(self.firm_ids)

    @property
    def n_industries(self) -> int:
        return len(self.industry_labels)

    @property
    def n_edges(self) -> int:
        return len(self.weight)

    def index_of(self, firm_id: str) -> int:
        try:
            return self._id_index[firm_id]
        except AttributeError:
            lookup = {fid: i for i, fid in enumerate(self.firm_ids)}
            object.__setattr__(self, "_id_index", lookup)
            return self._id_index[firm_id]


@dataclass(frozen=True)
class IndustryNetwork:
    """Dense industry-level network Z aggregated from a firm network."""

    industry_labels: tuple[str, ...]
    z: np.ndarray  # (m, m), z[k, l] = flow from industry k to industry l

    @property
    def n_industries(self) -> int:
        return len(self.industry_labels)

    @property
    def out_strength(self) -> np.ndarray:
        return self.z.sum(axis=1)

    @property
    def in_strength(self) -> np.ndarray:
        return self.z.sum(axis=0)


@dataclass(frozen=True)
class StrengthProfile:
    """Per-firm strengths (flow sums) and degrees (partner counts)."""

    s_out: np.ndarray
    s_in: np.ndarray
    k_out: np.ndarray
    k_in: np.ndarray


def _dedupe_edges(n: int, src: np.ndarray, dst: np.ndarray, weight: np.ndarray):
    """Sum parallel edges and sort by (buyer, supplier)."""
    if len(src) == 0:
        return (
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.float64),
        )
    key = dst.astype(np.int64) * n + src
    order = np.argsort(key, kind="stable")
    key = key[order]
    boundaries = np.empty(len(key), dtype=bool)
    boundaries[0] = True
    np.not_equal(key[1:], key[:-1], out=boundaries[1:])
    starts = np.flatnonzero(boundaries)
    summed = np.add.reduceat(weight[order], starts)
    kept = key[starts]
    return kept % n, kept // n, summed


def build_firm_network(
    firm_ids,
    industry_tokens,
    edges,
) -> FirmNetwork:
    """Assemble a FirmNetwork from python-level data.

    ``edges`` is an iterable of (supplier_id, buyer_id, weight) triples using
    external firm ids; ``industry_tokens`` maps positionally onto
    ``firm_ids`` and may contain empty strings for unlabeled firms.
    """
    firm_ids = tuple(str(f) for f in firm_ids)
    if len(set(firm_ids)) != len(firm_ids):
        raise NetworkFormatError("duplicate firm ids in metadata")
    index = {fid: i for i, fid in enumerate(firm_ids)}

    tokens = [str(t).strip() for t in industry_tokens]
    if len(tokens) != len(firm_ids):
        raise NetworkFormatError("industry list length does not match firm list")
    real = sorted({t for t in tokens if t})
    if RESIDUAL_INDUSTRY in real:
        raise NetworkFormatError(
            f"industry label {RESIDUAL_INDUSTRY!r} is reserved for unlabeled firms"
        )
    labels = tuple(real) + ((RESIDUAL_INDUSTRY,) if any(not t for t in tokens) else ())
    code = {lab: c for c, lab in enumerate(labels)}
    industry = np.array(
        [code[t] if t else code[RESIDUAL_INDUSTRY] for t in tokens], dtype=np.int64
    )

    src_list, dst_list, w_list = [], [], []
    for row, (sup, buy, w) in enumerate(edges, start=1):
        try:
            i, j = index[str(sup)], index[str(buy)]
        except KeyError as exc:
            raise NetworkFormatError(
                f"edge row {row}: unknown firm id {exc.args[0]!r}"
            ) from None
        w = float(w)
        if not w > 0:
            raise NetworkFormatError(f"edge row {row}: weight must be positive, got {w}")
        if i == j:
            raise NetworkFormatError(f"edge row {row}: self-loop on firm {sup!r}")
        src_list.append(i)
        dst_list.append(j)
        w_list.append(w)

    src, dst, weight = _dedupe_edges(
        len(firm_ids),
        np.asarray(src_list, dtype=np.int64),
        np.asarray(dst_list, dtype=np.int64),
        np.asarray(w_list, dtype=np.float64),
    )
    return FirmNetwork(firm_ids, industry, labels, src, dst, weight)


def load_firm_network(edges_path, meta_path) -> FirmNetwork:
    """Load a network from an edge CSV and a firm metadata CSV.

    Edge file columns: supplier,buyer,weight.  Metadata columns:
    firm,industry (industry may be blank).  Any firm referenced by an edge
    must appear in the metadata.
    """
    firm_ids, tokens = [], []
    with open(meta_path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader, ("firm", "industry"), meta_path)
        for row in reader:
            firm_ids.append(row["firm"].strip())
            tokens.append(row["industry"] or "")

    def edge_rows():
        with open(edges_path, newline="") as fh:
            reader = csv.DictReader(fh)
            _require_columns(reader, ("supplier", "buyer", "weight"), edges_path)
            for row in reader:
                try:
                    w = float(row["weight"])
                except ValueError:
                    raise NetworkFormatError(
                        f"{edges_path}: non-numeric weight {row['weight']!r}"
                    ) from None
                yield row["supplier"].strip(), row["buyer"].strip(), w

    return build_firm_network(firm_ids, tokens, edge_rows())


def _require_columns(reader: csv.DictReader, needed, path) -> None:
    have = set(reader.fieldnames or ())
    missing = [c for c in needed if c not in have]
    if missing:
        raise NetworkFormatError(f"{path}: missing columns {missing}")


def write_firm_network(net: FirmNetwork, edges_path, meta_path) -> None:
    """Write the edge and metadata CSVs back out (round-trips with load)."""
    with open(meta_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["firm", "industry"])
        for fid, code in zip(net.firm_ids, net.industry):
            label = net.industry_labels[code]
            writer.writerow([fid, "" if label == RESIDUAL_INDUSTRY else label])
    with open(edges_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["supplier", "buyer", "weight"])
        for i, j, w in zip(net.src, net.dst, net.weight):
            writer.writerow([net.firm_ids[i], net.firm_ids[j], repr(float(w))])


def strength_profile(net: FirmNetwork) -> StrengthProfile:
    """Out/in strengths (flow sums) and degrees (distinct partner counts)."""
    n = net.n_firms
    s_out = np.bincount(net.src, weights=net.weight, minlength=n)
    s_in = np.bincount(net.dst, weights=net.weight, minlength=n)
    # Edges are deduplicated, so each edge is one distinct partner.
    k_out = np.bincount(net.src, minlength=n)
    k_in = np.bincount(net.dst, minlength=n)
    return StrengthProfile(s_out, s_in, k_out, k_in)


def aggregate_to_industry(net: FirmNetwork) -> IndustryNetwork:
    """Collapse firms onto their industries: Z[k, l] = total k -> l flow."""
    m = net.n_industries
    flat = net.industry[net.src] * m + net.industry[net.dst]
    z = np.bincount(flat, weights=net.weight, minlength=m * m).reshape(m, m)
    return IndustryNetwork(net.industry_labels, z)


def write_industry_network(ind: IndustryNetwork, path) -> None:
    """Write Z as a dense CSV matrix, labels on both axes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["industry"] + list(ind.industry_labels))
        for k, label in enumerate(ind.industry_labels):
            writer.writerow([label] + [repr(float(v)) for v in ind.z[k]])


def load_industry_network(path) -> IndustryNetwork:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["industry"]:
        raise NetworkFormatError(f"{path}: expected an industry matrix header")
    labels = tuple(rows[0][1:])
    z = np.zeros((len(labels), len(labels)))
    for k, row in enumerate(rows[1:]):
        if row[0] != labels[k]:
            raise NetworkFormatError(f"{path}: row label {row[0]!r} out of order")
        z[k] = [float(v) for v in row[1:]]
    return IndustryNetwork(labels, z)


def degree_bin_labels(bins=DEGREE_BINS) -> tuple[str, ...]:
    out = []
    for lo, hi in bins:
        out.append(f"{lo}-{hi}" if hi is not None else f"{lo}+")
    return tuple(out)


def assign_degree_bins(degrees: np.ndarray, bins=DEGREE_BINS) -> np.ndarray:
    """Map each degree to its bin index, or -1 when no bin matches (k=0)."""
    degrees = np.asarray(degrees)
    out = np.full(degrees.shape, -1, dtype=np.int64)
    for b, (lo, hi) in enumerate(bins):
        mask = degrees >= lo if hi is None else (degrees >= lo) & (degrees <= hi)
        out[mask] = b
    return out
