import os
import subprocess
import sys

import numpy as np
import pytest

from prodnet import calibrate_firm
from prodnet._kernels import backends

from .conftest import random_network, random_psi, random_table

HAVE_CYTHON = "cython" in backends()


def _sweep_pair(impl, calib, h_d, h_u, cap_d, cap_u):
    new_d = np.empty(calib.n_nodes)
    new_u = np.empty(calib.n_nodes)
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
    impl.upstream_sweep(
        h_u, new_u, cap_u, calib.up_src, calib.up_dst, calib.up_w, calib.pass_through
    )
    return new_d, new_u


@pytest.mark.skipif(not HAVE_CYTHON, reason="compiled extension not built")
def test_backends_agree_on_random_instances():
    mods = backends()
    for seed in range(15):
        net = random_network(seed + 900)
        table = random_table(net, seed)
        for mode in ("glpf", "linear"):
            calib = calibrate_firm(net, table, mode)
            rng = np.random.default_rng(seed)
            h_d = rng.random(net.n_firms)
            h_u = rng.random(net.n_firms)
            cap_d = random_psi(net, seed)
            cap_u = random_psi(net, seed + 1)
            d_np, u_np = _sweep_pair(mods["numpy"], calib, h_d, h_u, cap_d, cap_u)
            d_cy, u_cy = _sweep_pair(mods["cython"], calib, h_d, h_u, cap_d, cap_u)
            np.testing.assert_allclose(d_cy, d_np, atol=1e-12)
            np.testing.assert_allclose(u_cy, u_np, atol=1e-12)


def test_force_numpy_env_var():
    code = "import prodnet; print(prodnet.BACKEND)"
    env = dict(os.environ, PRODNET_FORCE_NUMPY="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"


def test_active_backend_is_listed():
    from prodnet import BACKEND

    assert BACKEND in backends()
