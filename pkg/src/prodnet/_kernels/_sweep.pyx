# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation sweeps (hot-loop twin of _numpy.py).

Baseline flows are summed in the same loops as the received flows, so an
unshocked input gives a ratio of exactly 1 and a fully intact economy is
a bitwise fixed point.
"""

import numpy as np

cimport numpy as cnp


def downstream_sweep(
    double[::1] h,
    double[::1] out,
    double[::1] cap,
    long long[::1] edge_src,
    double[::1] edge_w,
    long long[::1] slot_edge_ptr,
    long long[::1] slot_node,
    cnp.uint8_t[::1] slot_essential,
    long long[::1] node_slot_ptr,
    double[::1] beta,
    cnp.uint8_t[::1] pass_through,
):
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i, s, e
    cdef double best, acc, base, ne_acc, ne_base, term

    for i in range(n):
        if pass_through[i]:
            out[i] = cap[i]
            continue
        best = cap[i]
        ne_acc = 0.0
        ne_base = 0.0
        for s in range(node_slot_ptr[i], node_slot_ptr[i + 1]):
            acc = 0.0
            base = 0.0
            for e in range(slot_edge_ptr[s], slot_edge_ptr[s + 1]):
                acc += edge_w[e] * h[edge_src[e]]
                base += edge_w[e]
            if slot_essential[s]:
                term = acc / base
                if term < best:
                    best = term
            else:
                ne_acc += acc
                ne_base += base
        if ne_base > 0.0:
            term = 1.0 - (1.0 - beta[i]) * (1.0 - ne_acc / ne_base)
            if term < best:
                best = term
        out[i] = best


def upstream_sweep(
    double[::1] h,
    double[::1] out,
    double[::1] cap,
    long long[::1] edge_src,
    long long[::1] edge_dst,
    double[::1] edge_w,
    cnp.uint8_t[::1] pass_through,
):
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t n_edges = edge_src.shape[0]
    cdef Py_ssize_t i, e
    cdef double term

    acc_arr = np.zeros(n)
    base_arr = np.zeros(n)
    cdef double[::1] acc = acc_arr
    cdef double[::1] base = base_arr
    for e in range(n_edges):
        acc[edge_src[e]] += edge_w[e] * h[edge_dst[e]]
        base[edge_src[e]] += edge_w[e]
    for i in range(n):
        if pass_through[i]:
            out[i] = cap[i]
            continue
        term = acc[i] / base[i]
        out[i] = term if term < cap[i] else cap[i]
