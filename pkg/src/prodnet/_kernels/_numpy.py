"""Pure-numpy propagation sweeps (fallback backend).

Both functions compute one synchronous update of the production levels and
write it into ``out``.  See prodnet.propagation for the array layout.

Baseline flows are re-accumulated inside the sweep with the same reduction
as the received flows, so an unshocked input gives a ratio of exactly 1
and a fully intact economy is a bitwise fixed point.
"""

import numpy as np


def downstream_sweep(
    h,
    out,
    cap,
    edge_src,
    edge_w,
    slot_edge_ptr,
    slot_node,
    slot_essential,
    node_slot_ptr,
    beta,
    pass_through,
):
    n = len(out)
    best = cap.copy()

    if len(edge_src):
        starts = slot_edge_ptr[:-1]
        slot_acc = np.add.reduceat(edge_w * h[edge_src], starts)
        slot_base = np.add.reduceat(edge_w, starts)

        es = slot_essential != 0
        if es.any():
            ratio = slot_acc[es] / slot_base[es]
            np.minimum.at(best, slot_node[es], ratio)

        ne = ~es
        if ne.any():
            ne_acc = np.bincount(slot_node[ne], weights=slot_acc[ne], minlength=n)
            ne_base = np.bincount(slot_node[ne], weights=slot_base[ne], minlength=n)
            has_pool = ne_base > 0
            ratio = np.ones(n)
            np.divide(ne_acc, ne_base, out=ratio, where=has_pool)
            term = np.ones(n)
            term[has_pool] = 1.0 - (1.0 - beta[has_pool]) * (1.0 - ratio[has_pool])
            np.minimum(best, term, out=best)

    np.copyto(out, np.where(pass_through, cap, best))


def upstream_sweep(h, out, cap, edge_src, edge_dst, edge_w, pass_through):
    n = len(out)
    if len(edge_src):
        acc = np.bincount(edge_src, weights=edge_w * h[edge_dst], minlength=n)
        base = np.bincount(edge_src, weights=edge_w, minlength=n)
    else:
        acc = np.zeros(n)
        base = np.zeros(n)
    ratio = np.ones(n)
    np.divide(acc, base, out=ratio, where=base > 0)
    level = np.minimum(ratio, cap)
    np.copyto(out, np.where(pass_through, cap, level))
