import math

import numpy as np
import pytest

from prodnet import (
    NetworkFormatError,
    aggregate_shock,
    build_firm_network,
    employment_shock,
    impute_missing,
    load_employment,
    load_shock,
    write_shock,
)

from .oracles import oracle_aggregate_shock


def test_employment_shock_basics():
    before = np.array([10.0, 10.0, 0.0, 10.0, np.nan])
    after = np.array([5.0, 12.0, 3.0, 10.0, 4.0])
    psi = employment_shock(before, after)
    assert psi[0] == 0.5
    assert psi[1] == 1.0  # growth capped
    assert psi[2] == 1.0  # zero baseline carries no signal
    assert psi[3] == 1.0
    assert math.isnan(psi[4])


def test_load_employment(tmp_path, fig1):
    path = tmp_path / "emp.csv"
    path.write_text("firm,e_jan,e_may\nf01,10,5\nf02,10,\nf03,4,4\n")
    psi = load_employment(path, fig1)
    assert psi[fig1.index_of("f01")] == 0.5
    assert math.isnan(psi[fig1.index_of("f02")])  # blank month
    assert psi[fig1.index_of("f03")] == 1.0
    assert math.isnan(psi[fig1.index_of("f04")])  # absent firm


def test_load_employment_negative(tmp_path, fig1):
    path = tmp_path / "emp.csv"
    path.write_text("firm,e_jan,e_may\nf01,-1,5\n")
    with pytest.raises(NetworkFormatError):
        load_employment(path, fig1)


def test_shock_file_round_trip(tmp_path, fig1):
    psi = np.linspace(0, 1, fig1.n_firms)
    psi[3] = np.nan
    path = tmp_path / "psi.csv"
    write_shock(fig1, psi, path)
    back = load_shock(path, fig1)
    np.testing.assert_allclose(back[~np.isnan(psi)], psi[~np.isnan(psi)], atol=0)
    assert math.isnan(back[3])


def test_load_shock_rejects_out_of_range(tmp_path, fig1):
    path = tmp_path / "psi.csv"
    path.write_text("firm,psi\nf01,1.5\n")
    with pytest.raises(ValueError):
        load_shock(path, fig1)


def test_impute_degenerate_pool(fig1):
    psi = np.full(fig1.n_firms, 0.3)
    psi[fig1.index_of("f04")] = np.nan
    out = impute_missing(fig1, psi, loss_fn=lambda p: float(p.sum()))
    assert out[fig1.index_of("f04")] == 0.3
    assert not np.isnan(out).any()


def test_impute_uses_same_industry_donors(fig1):
    psi = np.ones(fig1.n_firms)
    # industry s2 observed at 0.4 except one missing member
    psi[fig1.index_of("f03")] = 0.4
    psi[fig1.index_of("f05")] = 0.4
    psi[fig1.index_of("f04")] = np.nan
    out = impute_missing(fig1, psi, loss_fn=lambda p: float(p.sum()))
    assert out[fig1.index_of("f04")] == 0.4


def test_impute_global_fallback():
    net = build_firm_network(
        ["a", "b", "c"], ["x", "y", "y"], [("a", "b", 1.0), ("b", "c", 1.0)]
    )
    psi = np.array([np.nan, 0.7, 0.7])
    # industry x has no observed member; the global pool fills the gap
    out = impute_missing(net, psi, loss_fn=lambda p: float(p.sum()))
    assert out[0] == 0.7


def test_impute_observed_entries_untouched(fig1):
    rng = np.random.default_rng(3)
    psi = rng.random(fig1.n_firms)
    psi[[1, 6]] = np.nan
    out = impute_missing(fig1, psi, loss_fn=lambda p: float(p.mean()), seed=9)
    keep = ~np.isnan(psi)
    np.testing.assert_array_equal(out[keep], psi[keep])
    observed = set(np.round(psi[keep], 12))
    assert {round(float(x), 12) for x in out[[1, 6]]} <= observed


def test_impute_deterministic(fig1):
    psi = np.ones(fig1.n_firms)
    psi[[0, 4, 8]] = np.nan
    psi[2] = 0.2
    psi[3] = 0.9
    a = impute_missing(fig1, psi, loss_fn=lambda p: float(p.sum()), seed=42)
    b = impute_missing(fig1, psi, loss_fn=lambda p: float(p.sum()), seed=42)
    np.testing.assert_array_equal(a, b)


def test_impute_complete_vector_is_identity(fig1):
    psi = np.full(fig1.n_firms, 0.8)
    out = impute_missing(fig1, psi, loss_fn=lambda p: 0.0)
    np.testing.assert_array_equal(out, psi)


def test_aggregate_shock_fixture(fig1):
    for dead in ("f03", "f05"):
        psi = np.ones(fig1.n_firms)
        psi[fig1.index_of(dead)] = 0.0
        agg = aggregate_shock(fig1, psi)
        np.testing.assert_allclose(agg.cap_down, [1, 0.75, 1, 1, 1], atol=1e-12)
        np.testing.assert_allclose(agg.cap_up, np.ones(5), atol=1e-12)


def test_aggregate_shock_zero_strength_is_one():
    # industry y sells nothing and buys nothing: capacity stays 1
    net = build_firm_network(["a", "b", "c"], ["x", "x", "y"], [("a", "b", 2.0)])
    psi = np.array([0.5, 1.0, 0.0])
    agg = aggregate_shock(net, psi)
    k = net.industry_labels.index("y")
    assert agg.cap_down[k] == 1.0
    assert agg.cap_up[k] == 1.0


def test_aggregate_shock_matches_oracle():
    from .conftest import random_network, random_psi

    for seed in range(6):
        net = random_network(seed + 30)
        psi = random_psi(net, seed)
        agg = aggregate_shock(net, psi)
        up, down = oracle_aggregate_shock(net, psi)
        np.testing.assert_allclose(agg.cap_up, up, atol=1e-12)
        np.testing.assert_allclose(agg.cap_down, down, atol=1e-12)


def test_aggregate_shock_rejects_missing(fig1):
    psi = np.ones(fig1.n_firms)
    psi[0] = np.nan
    with pytest.raises(ValueError):
        aggregate_shock(fig1, psi)
