import math

import numpy as np
import pytest
from scipy.stats import norm

from rewirelab.errors import ValidationError
from rewirelab.graph import Graph
from rewirelab.metrics import edge_homophily
from rewirelab.sbm import (
    SWEEP_COLUMNS, SbmParams, aggregate_classify, expected_edge_count, generate, misclassification,
    monte_carlo_error, normal_cdf, recoverability_threshold, sweep, theory_error, theory_error_aligned,
)


def test_normal_cdf_matches_scipy():
    for x in (-40.0, -8.5, -1.3, 0.0, 0.7, 3.2, 12.0):
        assert normal_cdf(x) == pytest.approx(norm.cdf(x), rel=1e-12, abs=1e-300)


# ------------------------------------------------------------------ generate

def test_params_validation():
    with pytest.raises(ValidationError):
        SbmParams(11, 0.5, 0.1)
    with pytest.raises(ValidationError):
        SbmParams(10, 1.2, 0.1)
    with pytest.raises(ValidationError):
        SbmParams(10, 0.5, 0.1, psi=-0.1)
    with pytest.raises(ValidationError):
        SbmParams(9, 0.5, 0.1, blocks=2)
    assert SbmParams(9, 0.5, 0.1, blocks=3).blocks == 3


def test_complete_blocks_when_p_one_q_zero():
    s = generate(SbmParams(10, 1.0, 0.0), 0)
    assert s.graph.num_edges == 2 * 10
    assert edge_homophily(s.graph, s.planted.assignment) == 1.0


@pytest.mark.parametrize("seed", range(10))
def test_edge_count_within_four_sigma(seed):
    params = SbmParams(1000, 0.02, 0.01)
    mean, sd = expected_edge_count(params)
    s = generate(params, seed)
    assert abs(s.graph.num_edges - mean) <= 4 * sd


def test_expected_edge_count_hand_value():
    mean, sd = expected_edge_count(SbmParams(4, 0.5, 0.25))
    # 2 intra pairs, 4 inter pairs
    assert mean == pytest.approx(2 * 0.5 + 4 * 0.25)
    assert sd == pytest.approx(math.sqrt(2 * 0.25 + 4 * 0.1875))


def test_planted_homophily_matches_expectation():
    params = SbmParams(1000, 0.02, 0.01)
    intra, inter = 2 * 500 * 499 / 2, 500 * 500
    expected = 0.02 * intra / (0.02 * intra + 0.01 * inter)
    hs = [edge_homophily(generate(params, s).graph, np.repeat([0, 1], 500)) for s in range(5)]
    assert np.mean(hs) == pytest.approx(expected, abs=0.01)


def test_label_flip_rate_and_feature_signs():
    s = generate(SbmParams(4000, 0.001, 0.001, psi=0.8), 3)
    flipped = np.mean(s.labels != s.planted.assignment)
    assert abs(flipped - 0.2) < 4 * math.sqrt(0.2 * 0.8 / 4000)
    x = s.features[:, 0]
    assert x[s.labels == 1].mean() == pytest.approx(1.0, abs=0.1)
    assert x[s.labels == 0].mean() == pytest.approx(-1.0, abs=0.1)
    assert x[s.labels == 1].std() == pytest.approx(1.0, abs=0.1)


def test_generate_deterministic_and_stream_keys():
    params = SbmParams(100, 0.1, 0.05, psi=0.7)
    a, b = generate(params, 4), generate(params, 4)
    assert a.graph == b.graph and np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    c = generate(params, [4, 0, 1])
    assert c.graph != a.graph
    assert generate(params, [4, 0, 1]).graph == c.graph


def test_multi_block_labels():
    s = generate(SbmParams(90, 0.2, 0.02, psi=0.5, blocks=3), 1)
    assert set(np.unique(s.labels)) <= {0, 1, 2}
    assert s.planted.num_communities == 3
    flips = s.labels != s.planted.assignment
    assert flips.any()


# ------------------------------------------------------------------ theory

def _aligned_oracle(n, p, q, mu0=1.0, sigma0=1.0):
    ep, eq = p * (n / 2 - 1), q * n / 2
    return norm.cdf(-mu0 * (1 + ep - eq) / (sigma0 * math.sqrt(1 + ep + eq)))


@pytest.mark.parametrize("n,p,q", [(10, 0.5, 0.2), (200, 0.05, 0.03), (1000, 0.01, 0.009), (1000, 0.2, 0.3)])
def test_theory_error_aligned_matches_oracle(n, p, q):
    assert theory_error_aligned(n, p, q) == pytest.approx(_aligned_oracle(n, p, q), rel=1e-12)
    assert theory_error_aligned(n, p, q, mu0=0.5, sigma0=2.0) == pytest.approx(
        _aligned_oracle(n, p, q, 0.5, 2.0), rel=1e-12)


def test_theory_error_aligned_decreasing_in_p():
    vals = [theory_error_aligned(200, p, 0.02) for p in np.linspace(0.01, 0.2, 20)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_theory_error_special_values():
    for psi in (0.0, 0.3, 0.5, 0.9, 1.0):
        assert theory_error(100, 0.4, 0.4, psi) == pytest.approx(0.5)
    for p, q in ((0.7, 0.2), (0.1, 0.3), (0.5, 0.49)):
        assert theory_error(1000, p, q, 0.5) == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        theory_error(101, 0.5, 0.1, 1.0)
    with pytest.raises(ValidationError):
        theory_error(100, 0.5, 0.1, 1.5)


@pytest.mark.parametrize("n,p,q", [(100, 0.3, 0.1), (1000, 0.05, 0.04), (50, 0.1, 0.4)])
def test_theory_error_full_alignment_reduces(n, p, q):
    h = n / 2
    oracle = norm.cdf(-h * (p - q) / math.sqrt(h * (p + q + p * (1 - p) + q * (1 - q))))
    assert theory_error(n, p, q, 1.0) == pytest.approx(oracle, rel=1e-12)
    assert (theory_error(n, p, q, 1.0) <= 0.5) == (p > q)


def test_theory_error_hand_value():
    # n=4, p=0.5, q=0.25, psi=0.75: h=2, var=2*(0.75+0.25+0.1875+0.0625*0.375)
    var = 2 * (0.5 + 0.25 + 0.25 + 0.1875 + 2 * 0.0625 * 0.1875)
    z = 2 * 0.5 * 0.25 / math.sqrt(var)
    assert theory_error(4, 0.5, 0.25, 0.75) == pytest.approx(0.25 + 0.5 * norm.cdf(-z), rel=1e-12)


def test_recoverability_threshold_examples():
    assert recoverability_threshold(100, 0.2) == pytest.approx(0.5635, abs=1e-4)
    n = 10_000
    assert recoverability_threshold(n, 0.0) == pytest.approx(2 * math.log(n) / n, rel=1e-12)
    assert recoverability_threshold(n, 1e-4) > recoverability_threshold(n, 0.0)
    with pytest.raises(ValidationError):
        recoverability_threshold(2, 0.1)


# ------------------------------------------------------------------ classifier

def test_classify_hand_examples():
    g = Graph(3, [(0, 1)])
    X = np.array([[0.5], [-0.2], [-0.3]])
    assert aggregate_classify(g, X).tolist() == [1, 1, 0]
    star = Graph(6, [(0, i) for i in range(1, 6)])
    Xs = np.array([[1.0]] + [[-1.0]] * 5)
    # centre: 1 - 5 = -4; leaves: -1 + 1 = 0, not strictly positive
    assert aggregate_classify(star, Xs).tolist() == [0] * 6
    assert aggregate_classify(star, Xs, "Mean").tolist() == [0] * 6


def test_classify_matches_dense_oracle_and_modes_agree():
    s = generate(SbmParams(200, 0.05, 0.02, psi=0.9), 5)
    A = np.zeros((200, 200))
    A[s.graph.edges[:, 0], s.graph.edges[:, 1]] = 1
    A += A.T
    x = s.features[:, 0]
    oracle = ((np.eye(200) + A) @ x > 0).astype(int)
    assert np.array_equal(aggregate_classify(s.graph, s.features), oracle)
    assert np.array_equal(aggregate_classify(s.graph, s.features, "Mean"), oracle)


def test_classify_rejects_bad_input():
    g = Graph(3)
    with pytest.raises(ValidationError):
        aggregate_classify(g, np.ones((3, 2)))
    with pytest.raises(ValidationError):
        aggregate_classify(g, np.ones((3, 1)), "Max")


# ------------------------------------------------------------------ Monte Carlo

def test_monte_carlo_single_trial_is_one_run():
    params = SbmParams(200, 0.1, 0.05, psi=0.9)
    est, se = monte_carlo_error(params, trials=1, seed=3, stream=2)
    s = generate(params, [3, 2, 0])
    assert est == misclassification(s.graph, s.features, s.labels)
    assert se == 0.0


def test_monte_carlo_matches_aligned_theory_dense():
    params = SbmParams(1000, 0.8, 0.5)
    est, se = monte_carlo_error(params, trials=5)
    assert abs(est - theory_error_aligned(1000, 0.8, 0.5)) <= 0.01


def test_monte_carlo_stderr_scales():
    params = SbmParams(200, 0.06, 0.04, psi=0.9)
    _, se1 = monte_carlo_error(params, trials=25, seed=1)
    _, se4 = monte_carlo_error(params, trials=100, seed=1)
    assert 1.4 < se1 / se4 < 2.8


def test_monte_carlo_half_alignment():
    est, se = monte_carlo_error(SbmParams(1000, 0.7, 0.2, psi=0.5), trials=10)
    assert abs(est - 0.5) < 0.02


def test_monte_carlo_rejects_zero_trials():
    with pytest.raises(ValidationError):
        monte_carlo_error(SbmParams(10, 0.5, 0.1), trials=0)


# ------------------------------------------------------------------ sweep

def test_sweep_baseline_equals_monte_carlo():
    rows = sweep(100, [0.3, 0.2], [0.05], [1.0, 0.8], trials=3, seed=7, with_nmi=False, with_gap=False)
    assert len(rows) == 4
    for c, row in enumerate(rows):
        params = SbmParams(100, row["p"], row["q"], psi=row["psi"])
        est, se = monte_carlo_error(params, trials=3, seed=7, stream=c)
        assert row["error"] == est and row["stderr"] == se
        assert row["contrast"] == pytest.approx(-(row["p"] - row["q"]) / (row["p"] + row["q"]))
        assert set(row) == set(SWEEP_COLUMNS)


def test_sweep_rewiring_rows():
    rows = sweep(60, [0.3], [0.05], [1.0], methods=["HigherComMa", "LowerComMa"], ops=["Add"],
                 ks=[0, 10], trials=2, planted=True)
    assert [(r["method"], r["k"]) for r in rows] == [("none", 0), ("HigherComMa", 10), ("LowerComMa", 10)]
    base, hi, lo = rows
    assert hi["modifications"] == lo["modifications"] == 10
    assert hi["num_edges"] == base["num_edges"] + 10
    assert hi["edge_homophily"] > base["edge_homophily"] > lo["edge_homophily"]
    assert 0 <= base["gap"] <= 2 and 0 <= base["nmi"] <= 1


def test_sweep_empty_grid_rejected():
    with pytest.raises(ValidationError):
        sweep(10, [], [0.1], [1.0])
    with pytest.raises(ValidationError):
        sweep(10, [0.5], [0.1], [1.0], methods=[None], ks=[5])
