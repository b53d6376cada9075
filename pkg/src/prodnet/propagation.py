"""Shock propagation with a generalized Leontief production function.

Every node produces one good.  Its output is capped by three things: the
direct shock cap, the worst relative shortfall among its essential input
industries (strict Leontief), and a linear term for the pooled
non-essential inputs that interpolates between full production and an
output floor beta reached when the pool dries up completely.

Downstream (input-driven) and upstream (demand-driven) constraints are
iterated as two independent fixed points from the shocked state and only
combined at the end, elementwise, by taking the minimum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .network import FirmNetwork, IndustryNetwork, NetworkFormatError

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class EssentialityTable:
    """Input classification keyed by (producer industry, input industry).

    Pairs absent from the table fall back to the default class.
    """

    classes: dict[tuple[str, str], bool]
    default_essential: bool = True

    def is_essential(self, producer: str, input_industry: str) -> bool:
        return self.classes.get((producer, input_industry), self.default_essential)


ALL_ESSENTIAL = EssentialityTable({}, default_essential=True)

_CLASS_TOKENS = {"essential": True, "non_essential": False}


def load_essentiality(path, default: str = "essential") -> EssentialityTable:
    """Read producer_industry,input_industry,class rows."""
    if default not in _CLASS_TOKENS:
        raise ValueError(f"unknown default class {default!r}")
    classes: dict[tuple[str, str], bool] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = set(reader.fieldnames or ())
        if not {"producer_industry", "input_industry", "class"} <= fields:
            raise NetworkFormatError(
                f"{path}: expected columns producer_industry,input_industry,class"
            )
        for row in reader:
            key = (row["producer_industry"].strip(), row["input_industry"].strip())
            token = row["class"].strip()
            if token not in _CLASS_TOKENS:
                raise NetworkFormatError(f"{path}: unknown class {token!r}")
            if key in classes:
                raise NetworkFormatError(f"{path}: duplicate pair {key}")
            classes[key] = _CLASS_TOKENS[token]
    return EssentialityTable(classes, _CLASS_TOKENS[default])


@dataclass(frozen=True)
class GlpfCalibration:
    """Propagation-ready arrays for one network and essentiality choice.

    Input baselines are grouped into slots, one per (node, input industry)
    pair with positive flow.  ``slot_alpha`` is the essential input
    coefficient (baseline input per unit of baseline output); ``beta`` is
    the output floor that remains when all non-essential inputs vanish.
    """

    n_nodes: int
    node_labels: tuple[str, ...]
    mode: str
    # downstream layout
    edge_src: np.ndarray
    edge_w: np.ndarray
    slot_edge_ptr: np.ndarray
    slot_node: np.ndarray
    slot_input_label: tuple[str, ...]
    slot_base: np.ndarray
    slot_alpha: np.ndarray
    slot_essential: np.ndarray  # uint8
    node_slot_ptr: np.ndarray
    # upstream layout
    up_src: np.ndarray
    up_dst: np.ndarray
    up_w: np.ndarray
    # per-node terms
    x0: np.ndarray
    beta: np.ndarray
    ne_base: np.ndarray
    pass_through: np.ndarray  # uint8


@dataclass(frozen=True)
class PropagationResult:
    h_down: np.ndarray
    h_up: np.ndarray
    h_final: np.ndarray
    iterations: int
    converged: bool
    trace: tuple | None = None


def combine_levels(h_down: np.ndarray, h_up: np.ndarray) -> np.ndarray:
    """Final production level from the two one-sided constraints."""
    return np.minimum(h_down, h_up)


def _calibrate(
    n: int,
    node_labels: tuple[str, ...],
    src: np.ndarray,
    dst: np.ndarray,
    weight: np.ndarray,
    src_label_code: np.ndarray,
    label_tuple: tuple[str, ...],
    table: EssentialityTable,
    mode: str,
) -> GlpfCalibration:
    if mode not in ("glpf", "linear"):
        raise ValueError(f"mode must be 'glpf' or 'linear', got {mode!r}")

    x0 = np.bincount(src, weights=weight, minlength=n).astype(np.float64)
    pass_through = (x0 == 0).astype(np.uint8)

    order = np.lexsort((src_label_code, dst))
    d_src = np.ascontiguousarray(src[order])
    d_w = np.ascontiguousarray(weight[order])
    d_key = dst[order] * len(label_tuple) + src_label_code[order]

    if len(d_key):
        new_slot = np.empty(len(d_key), dtype=bool)
        new_slot[0] = True
        np.not_equal(d_key[1:], d_key[:-1], out=new_slot[1:])
        starts = np.flatnonzero(new_slot)
        slot_edge_ptr = np.append(starts, len(d_key)).astype(np.int64)
        slot_node = dst[order][starts].astype(np.int64)
        slot_code = src_label_code[order][starts]
        slot_base = np.add.reduceat(d_w, starts)
    else:
        slot_edge_ptr = np.zeros(1, dtype=np.int64)
        slot_node = np.empty(0, dtype=np.int64)
        slot_code = np.empty(0, dtype=np.int64)
        slot_base = np.empty(0, dtype=np.float64)

    slot_input_label = tuple(label_tuple[c] for c in slot_code)
    if mode == "linear":
        slot_essential = np.zeros(len(slot_node), dtype=np.uint8)
    else:
        slot_essential = np.fromiter(
            (
                table.is_essential(node_labels[i], lab)
                for i, lab in zip(slot_node, slot_input_label)
            ),
            dtype=np.uint8,
            count=len(slot_node),
        )
    node_slot_ptr = np.searchsorted(slot_node, np.arange(n + 1)).astype(np.int64)

    ne_mask = slot_essential == 0
    ne_base = np.bincount(
        slot_node[ne_mask], weights=slot_base[ne_mask], minlength=n
    ).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(x0 > 0, np.maximum(0.0, 1.0 - ne_base / np.where(x0 > 0, x0, 1.0)), 1.0)
        slot_alpha = np.where(
            x0[slot_node] > 0, slot_base / np.where(x0[slot_node] > 0, x0[slot_node], 1.0), 0.0
        )

    up_order = np.lexsort((dst, src))
    return GlpfCalibration(
        n_nodes=n,
        node_labels=node_labels,
        mode=mode,
        edge_src=d_src.astype(np.int64),
        edge_w=d_w,
        slot_edge_ptr=slot_edge_ptr,
        slot_node=slot_node,
        slot_input_label=slot_input_label,
        slot_base=slot_base,
        slot_alpha=slot_alpha,
        slot_essential=slot_essential,
        node_slot_ptr=node_slot_ptr,
        up_src=np.ascontiguousarray(src[up_order]).astype(np.int64),
        up_dst=np.ascontiguousarray(dst[up_order]).astype(np.int64),
        up_w=np.ascontiguousarray(weight[up_order]),
        x0=x0,
        beta=beta,
        ne_base=ne_base,
        pass_through=pass_through,
    )


def calibrate_firm(
    net: FirmNetwork, table: EssentialityTable | None = None, mode: str = "glpf"
) -> GlpfCalibration:
    labels = tuple(net.industry_labels[c] for c in net.industry)
    return _calibrate(
        net.n_firms,
        labels,
        net.src,
        net.dst,
        net.weight,
        net.industry[net.src],
        net.industry_labels,
        table or ALL_ESSENTIAL,
        mode,
    )


def calibrate_industry(
    ind: IndustryNetwork, table: EssentialityTable | None = None, mode: str = "glpf"
) -> GlpfCalibration:
    src, dst = np.nonzero(ind.z)
    weight = ind.z[src, dst]
    return _calibrate(
        ind.n_industries,
        ind.industry_labels,
        src.astype(np.int64),
        dst.astype(np.int64),
        weight.astype(np.float64),
        src.astype(np.int64),
        ind.industry_labels,
        table or ALL_ESSENTIAL,
        mode,
    )


def _check_cap(cap: np.ndarray, n: int, name: str) -> np.ndarray:
    cap = np.asarray(cap, dtype=np.float64)
    if cap.shape != (n,):
        raise ValueError(f"{name} must have length {n}")
    if np.isnan(cap).any() or np.any((cap < 0) | (cap > 1)):
        raise ValueError(f"{name} values must lie in [0, 1] with no missing entries")
    return cap


def propagate(
    calib: GlpfCalibration,
    cap_down: np.ndarray,
    cap_up: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    record_trace: bool = False,
) -> PropagationResult:
    """Run both fixed points to tolerance and combine the results.

    Iteration count starts at the shocked state itself, so an unmoving
    system reports one iteration.
    """
    n = calib.n_nodes
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    cap_down = _check_cap(cap_down, n, "cap_down")
    cap_up = _check_cap(cap_up, n, "cap_up")

    h_d = cap_down.copy()
    h_u = cap_up.copy()
    new_d = np.empty(n)
    new_u = np.empty(n)
    trace = [(h_d.copy(), h_u.copy())] if record_trace else None

    converged = False
    sweeps = 0
    while sweeps < max_iter:
        sweeps += 1
        _kernels.downstream_sweep(
            h_d,
            new_d,
            cap_down,
            calib.edge_src,
            calib.edge_w,
            calib.slot_edge_ptr,
            calib.slot_node,
            calib.slot_essential,
            calib.node_slot_ptr,
            calib.beta,
            calib.pass_through,
        )
        _kernels.upstream_sweep(
            h_u, new_u, cap_up, calib.up_src, calib.up_dst, calib.up_w, calib.pass_through
        )
        delta = 0.0
        if n:
            delta = max(
                float(np.abs(new_d - h_d).max()), float(np.abs(new_u - h_u).max())
            )
        h_d, new_d = new_d, h_d
        h_u, new_u = new_u, h_u
        if record_trace:
            trace.append((h_d.copy(), h_u.copy()))
        if delta < tol:
            converged = True
            break

    return PropagationResult(
        h_down=h_d,
        h_up=h_u,
        h_final=combine_levels(h_d, h_u),
        iterations=sweeps if sweeps else 1,
        converged=converged,
        trace=tuple(trace) if record_trace else None,
    )


def propagate_firm(
    net: FirmNetwork,
    psi: np.ndarray,
    table: EssentialityTable | None = None,
    mode: str = "glpf",
    calibration: GlpfCalibration | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    record_trace: bool = False,
) -> PropagationResult:
    """Propagate a firm-level shock; psi caps both constraint sides."""
    calib = calibration or calibrate_firm(net, table, mode)
    return propagate(calib, psi, psi, tol, max_iter, record_trace)


def propagate_industry(
    ind: IndustryNetwork,
    shock,
    table: EssentialityTable | None = None,
    mode: str = "glpf",
    calibration: GlpfCalibration | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    record_trace: bool = False,
) -> PropagationResult:
    """Propagate on the aggregated network.

    ``shock`` is either an IndustryShock (separate upstream/downstream
    caps) or a single vector applied to both sides.
    """
    calib = calibration or calibrate_industry(ind, table, mode)
    if hasattr(shock, "cap_down"):
        if tuple(shock.industry_labels) != tuple(ind.industry_labels):
            raise ValueError("shock and network industry labels differ")
        cap_down, cap_up = shock.cap_down, shock.cap_up
    else:
        cap_down = cap_up = np.asarray(shock, dtype=np.float64)
    return propagate(calib, cap_down, cap_up, tol, max_iter, record_trace)


def economy_loss(s_out: np.ndarray, h: np.ndarray) -> float:
    """Output-weighted total production loss.

    Raises when the economy has no output at all (undefined weighting).
    """
    s_out = np.asarray(s_out, dtype=np.float64)
    total = s_out.sum()
    if total <= 0:
        raise ValueError("economy loss undefined: total out-strength is zero")
    return float((s_out * (1.0 - np.asarray(h))).sum() / total)


def industry_losses(
    s_out: np.ndarray, industry: np.ndarray, n_industries: int, h: np.ndarray
) -> np.ndarray:
    """Per-industry output-weighted losses; NaN where an industry sells nothing."""
    s_out = np.asarray(s_out, dtype=np.float64)
    totals = np.bincount(industry, weights=s_out, minlength=n_industries)
    lost = np.bincount(industry, weights=s_out * (1.0 - np.asarray(h)), minlength=n_industries)
    out = np.full(n_industries, np.nan)
    nz = totals > 0
    out[nz] = lost[nz] / totals[nz]
    return out
