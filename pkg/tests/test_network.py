import numpy as np
import pytest

from prodnet import (
    DEGREE_BINS,
    RESIDUAL_INDUSTRY,
    NetworkFormatError,
    aggregate_to_industry,
    assign_degree_bins,
    build_firm_network,
    degree_bin_labels,
    load_firm_network,
    load_industry_network,
    strength_profile,
    write_firm_network,
    write_industry_network,
)

from .oracles import oracle_aggregate, oracle_strengths


def test_build_basic(fig1):
    assert fig1.n_firms == 11
    assert fig1.n_industries == 5
    assert fig1.industry_labels == ("s1", "s2", "s3", "s4", "s5")
    assert fig1.n_edges == 13
    assert fig1.weight.min() > 0


def test_parallel_edges_are_summed():
    net = build_firm_network(
        ["a", "b"], ["x", "x"], [("a", "b", 1.0), ("a", "b", 2.5)]
    )
    assert net.n_edges == 1
    assert net.weight[0] == 3.5


def test_duplicate_firm_ids_rejected():
    with pytest.raises(NetworkFormatError):
        build_firm_network(["a", "a"], ["x", "x"], [])


def test_unknown_edge_firm_rejected():
    with pytest.raises(NetworkFormatError):
        build_firm_network(["a"], ["x"], [("a", "zzz", 1.0)])


def test_nonpositive_weight_rejected():
    with pytest.raises(NetworkFormatError):
        build_firm_network(["a", "b"], ["x", "x"], [("a", "b", 0.0)])
    with pytest.raises(NetworkFormatError):
        build_firm_network(["a", "b"], ["x", "x"], [("a", "b", -1.0)])


def test_self_loop_rejected():
    with pytest.raises(NetworkFormatError):
        build_firm_network(["a", "b"], ["x", "x"], [("a", "a", 1.0)])


def test_reserved_label_rejected():
    with pytest.raises(NetworkFormatError):
        build_firm_network(["a"], [RESIDUAL_INDUSTRY], [])


def test_residual_label_sorts_last():
    net = build_firm_network(
        ["a", "b", "c"], ["z_late", "", "alpha"], [("a", "b", 1.0)]
    )
    assert net.industry_labels == ("alpha", "z_late", RESIDUAL_INDUSTRY)
    assert net.industry_labels[net.industry[1]] == RESIDUAL_INDUSTRY


def test_index_of(fig1):
    assert fig1.index_of("f01") == 0
    assert fig1.index_of("f11") == 10
    with pytest.raises(KeyError):
        fig1.index_of("nope")


def test_strengths_fixture(fig1):
    prof = strength_profile(fig1)
    # firm f06 keeps two suppliers so a single knockout halves its input
    assert prof.k_in[fig1.index_of("f06")] == 2
    assert prof.s_out[fig1.index_of("f04")] == 2.0
    assert prof.s_out[fig1.index_of("f09")] == 0.0
    assert prof.s_in[fig1.index_of("f09")] == 3.0
    assert prof.s_out.sum() == prof.s_in.sum() == 16.0


def test_single_supplier_degree():
    net = build_firm_network(["a", "b"], ["x", "y"], [("a", "b", 2.0)])
    prof = strength_profile(net)
    assert prof.k_in[net.index_of("b")] == 1
    assert prof.k_out[net.index_of("a")] == 1


def test_strengths_match_oracle():
    from .conftest import random_network

    for seed in range(5):
        net = random_network(seed)
        prof = strength_profile(net)
        s_out, s_in, k_out, k_in = oracle_strengths(net)
        np.testing.assert_allclose(prof.s_out, s_out, atol=1e-12)
        np.testing.assert_allclose(prof.s_in, s_in, atol=1e-12)
        np.testing.assert_array_equal(prof.k_out, k_out)
        np.testing.assert_array_equal(prof.k_in, k_in)


def test_aggregate_fixture_matrix(fig1):
    ind = aggregate_to_industry(fig1)
    expected = np.array(
        [
            [4.0, 0, 0, 0, 0],
            [0, 0, 4.0, 0, 0],
            [2.0, 0, 0, 0, 2.0],
            [0, 0, 0, 0, 1.0],
            [0, 0, 0, 0, 3.0],
        ]
    )
    np.testing.assert_allclose(ind.z, expected, atol=0)
    np.testing.assert_allclose(ind.out_strength, [4, 4, 4, 1, 3], atol=0)
    np.testing.assert_allclose(ind.in_strength, [6, 0, 4, 0, 6], atol=0)


def test_aggregate_matches_oracle():
    from .conftest import random_network

    for seed in range(5):
        net = random_network(seed + 100)
        ind = aggregate_to_industry(net)
        np.testing.assert_allclose(ind.z, oracle_aggregate(net), atol=1e-9)


def test_network_file_round_trip(tmp_path, fig1):
    edges = tmp_path / "edges.csv"
    meta = tmp_path / "meta.csv"
    write_firm_network(fig1, edges, meta)
    back = load_firm_network(edges, meta)
    assert back.firm_ids == fig1.firm_ids
    assert back.industry_labels == fig1.industry_labels
    np.testing.assert_array_equal(back.industry, fig1.industry)
    np.testing.assert_array_equal(back.src, fig1.src)
    np.testing.assert_array_equal(back.dst, fig1.dst)
    np.testing.assert_array_equal(back.weight, fig1.weight)


def test_residual_round_trip(tmp_path):
    net = build_firm_network(["a", "b"], ["", "x"], [("a", "b", 1.0)])
    write_firm_network(net, tmp_path / "e.csv", tmp_path / "m.csv")
    back = load_firm_network(tmp_path / "e.csv", tmp_path / "m.csv")
    assert back.industry_labels == net.industry_labels
    np.testing.assert_array_equal(back.industry, net.industry)


def test_load_missing_columns(tmp_path):
    bad = tmp_path / "edges.csv"
    bad.write_text("from,to,w\na,b,1\n")
    meta = tmp_path / "meta.csv"
    meta.write_text("firm,industry\na,x\nb,x\n")
    with pytest.raises(NetworkFormatError):
        load_firm_network(bad, meta)


def test_industry_matrix_round_trip(tmp_path, fig1):
    ind = aggregate_to_industry(fig1)
    path = tmp_path / "z.csv"
    write_industry_network(ind, path)
    back = load_industry_network(path)
    assert back.industry_labels == ind.industry_labels
    np.testing.assert_allclose(back.z, ind.z, atol=0)


def test_degree_bin_labels():
    assert degree_bin_labels() == ("1-5", "6-15", "16-35", "36+")


def test_assign_degree_bins_boundaries():
    degrees = np.array([0, 1, 5, 6, 15, 16, 35, 36, 500])
    bins = assign_degree_bins(degrees)
    np.testing.assert_array_equal(bins, [-1, 0, 0, 1, 1, 2, 2, 3, 3])


def test_degree_bins_constant():
    assert DEGREE_BINS == ((1, 5), (6, 15), (16, 35), (36, None))
