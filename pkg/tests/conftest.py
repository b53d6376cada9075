"""Shared fixtures: the hand-built 11-firm network and random instances."""

import numpy as np
import pytest

from prodnet import EssentialityTable, build_firm_network

# Eleven firms in five industries.  Constructed so that every published
# headline number of the small worked example holds exactly: per-industry
# losses under single-firm knockouts, the aggregated-capacity run, the
# overlap values, and the aggregation of both knockout shocks.
FIG1_IDS = tuple(f"f{i:02d}" for i in range(1, 12))
FIG1_INDUSTRIES = ("s1", "s1", "s2", "s2", "s2", "s3", "s3", "s4", "s5", "s5", "s5")
FIG1_EDGES = (
    ("f03", "f06", 1.0),
    ("f04", "f06", 1.0),
    ("f04", "f07", 1.0),
    ("f05", "f07", 1.0),
    ("f06", "f01", 1.0),
    ("f06", "f02", 1.0),
    ("f01", "f02", 2.0),
    ("f02", "f01", 2.0),
    ("f07", "f10", 1.0),
    ("f07", "f11", 1.0),
    ("f08", "f10", 1.0),
    ("f10", "f09", 1.0),
    ("f11", "f09", 2.0),
)
# Buyers in industries s1 and s5 treat their s3 inputs as substitutable.
FIG1_TABLE = EssentialityTable({("s1", "s3"): False, ("s5", "s3"): False}, True)


def make_fig1():
    return build_firm_network(FIG1_IDS, FIG1_INDUSTRIES, FIG1_EDGES)


@pytest.fixture
def fig1():
    return make_fig1()


@pytest.fixture
def fig1_table():
    return FIG1_TABLE


def random_network(seed, n_max=50, m_max=6, unlabeled_frac=0.1):
    """Small random network for oracle and property tests.

    Guarantees at least one edge so loss weighting is defined.  Some firms
    may be unlabeled (residual industry), some may have zero out-strength.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    ids = [f"n{i:03d}" for i in range(n)]
    labels = [f"g{k}" for k in range(m)]
    tokens = [
        "" if rng.random() < unlabeled_frac else labels[rng.integers(m)] for i in range(n)
    ]
    edges = []
    for i in range(n):
        k_out = int(rng.integers(0, min(4, n - 1) + 1))
        if i == 0:
            k_out = max(1, k_out)
        choices = [j for j in range(n) if j != i]
        picked = rng.choice(choices, size=k_out, replace=False)
        for j in picked:
            edges.append((ids[i], ids[int(j)], float(rng.lognormal(0.0, 0.7))))
    return build_firm_network(ids, tokens, edges)


def random_table(net, seed, p_essential=0.6):
    """Random essentiality over the label pairs that occur in the network."""
    rng = np.random.default_rng(seed)
    classes = {}
    for producer in net.industry_labels:
        for source in net.industry_labels:
            classes[(producer, source)] = bool(rng.random() < p_essential)
    return EssentialityTable(classes, default_essential=True)


def random_psi(net, seed, severity=3.0):
    """Capacity vector in [0, 1] with a spread of partial and full shocks."""
    rng = np.random.default_rng(seed)
    psi = 1.0 - rng.beta(1.0, severity, net.n_firms)
    dead = rng.random(net.n_firms) < 0.05
    psi[dead] = 0.0
    return psi
