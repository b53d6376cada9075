#!/usr/bin/env python3
"""Time the propagation sweep kernels: compiled extension vs numpy fallback.

Times one synchronous downstream+upstream update on a synthetic network,
averaged over many repeats, for every backend that imported.  Also times a
full fixed-point solve with the active backend for context.

Usage:
    python3 benchmarks/bench_propagation.py --firms 20000 --industries 50
"""

import argparse
import time

import numpy as np

from prodnet import SyntheticNetworkSpec, calibrate_firm, generate_network, propagate
from prodnet._kernels import BACKEND, backends


def sweep_once(impl, calib, h_d, h_u, new_d, new_u, cap_d, cap_u):
    impl.downstream_sweep(
        h_d,
        new_d,
        cap_d,
        calib.edge_src,
        calib.edge_w,
        calib.slot_edge_ptr,
        calib.slot_node,
        calib.slot_essential,
        calib.node_slot_ptr,
        calib.beta,
        calib.pass_through,
    )
    impl.upstream_sweep(h_u, new_u, cap_u, calib.up_src, calib.up_dst, calib.up_w, calib.pass_through)


def time_backend(impl, calib, cap_d, cap_u, repeats):
    n = calib.n_nodes
    h_d, h_u = cap_d.copy(), cap_u.copy()
    new_d, new_u = np.empty(n), np.empty(n)
    sweep_once(impl, calib, h_d, h_u, new_d, new_u, cap_d, cap_u)  # warm-up
    t0 = time.perf_counter()
    for _ in range(repeats):
        sweep_once(impl, calib, h_d, h_u, new_d, new_u, cap_d, cap_u)
    return (time.perf_counter() - t0) / repeats


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--firms", type=int, default=20000)
    ap.add_argument("--industries", type=int, default=50)
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--max-sweeps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    net = generate_network(
        SyntheticNetworkSpec(n_firms=args.firms, n_industries=args.industries, seed=args.seed)
    )
    calib = calibrate_firm(net)
    rng = np.random.default_rng(args.seed)
    psi = 1.0 - rng.beta(2.0, 8.0, net.n_firms)

    print(f"network: {net.n_firms} firms, {net.n_industries} industries, {len(net.weight)} edges")
    print(f"one downstream+upstream sweep, mean of {args.repeats} repeats:")
    timings = {}
    for name, impl in sorted(backends().items()):
        timings[name] = time_backend(impl, calib, psi, psi, args.repeats)
        print(f"  {name:<8} {timings[name] * 1e3:8.3f} ms")
    if "cython" in timings and "numpy" in timings:
        print(f"  speedup  {timings['numpy'] / timings['cython']:8.1f}x")

    # large power-law graphs relax slowly upstream, so cap the sweep count;
    # this line is about wall time per solve, not the tail of convergence
    t0 = time.perf_counter()
    res = propagate(calib, psi, psi, max_iter=args.max_sweeps)
    dt = time.perf_counter() - t0
    tail = "" if res.converged else f" (still moving, delta>tol after {args.max_sweeps})"
    print(f"full solve ({BACKEND} backend): {res.iterations} sweeps in {dt * 1e3:.1f} ms{tail}")


if __name__ == "__main__":
    main()
