import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from orbalign.evaluation import (PUBLISHED_RESULTS, MetricReport, mrr, precision_at_q,
                                 run_ablation, truth_ranks)
from orbalign.graph import GroundTruth
from orbalign.pipeline import AlignConfig, align
from orbalign.synthetic import NoiseSpec, make_random_attributed_pair


def scores_with_ranks(ranks, n_t=20):
    """Score matrix where source i's true target (i) sits at the given 1-based rank."""
    n = len(ranks)
    scores = np.zeros((n, n_t))
    for i, r in enumerate(ranks):
        others = [j for j in range(n_t) if j != i]
        order = others[:r - 1] + [i] + others[r - 1:]
        scores[i, order] = np.arange(n_t, 0, -1)
    return scores, GroundTruth(np.arange(n), np.arange(n))


def test_rank_fixture_helper():
    s, t = scores_with_ranks([1, 3, 12])
    np.testing.assert_array_equal(truth_ranks(s, t), [1, 3, 12])


def test_precision_examples():
    eye = GroundTruth(np.arange(4), np.arange(4))
    assert precision_at_q(np.eye(4), eye, 1) == 1.0
    s, t = scores_with_ranks([2, 2, 2])
    assert precision_at_q(s, t, 1) == 0.0 and precision_at_q(s, t, 10) == 1.0
    s, t = scores_with_ranks([1, 3, 12])
    assert precision_at_q(s, t, 10) == pytest.approx(2 / 3)


def test_mrr_examples():
    assert mrr(np.eye(5), GroundTruth(np.arange(5), np.arange(5))) == 1.0
    s, t = scores_with_ranks([1, 2, 4])
    assert mrr(s, t) == pytest.approx(0.58333333, abs=1e-8)
    s, t = scores_with_ranks([100], n_t=100)
    assert mrr(s, t) == pytest.approx(0.01)


def test_ties_follow_prediction_order():
    scores = np.zeros((2, 3))
    truth = GroundTruth(np.array([0, 1]), np.array([2, 0]))
    np.testing.assert_array_equal(truth_ranks(scores, truth), [3, 1])


def test_empty_truth_raises():
    empty = GroundTruth(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    for fn in (lambda: precision_at_q(np.eye(2), empty, 1), lambda: mrr(np.eye(2), empty)):
        with pytest.raises(ValueError):
            fn()


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 9), elements=st.integers(-10, 10).map(float)),
       st.integers(0, 2**32 - 1))
def test_metric_invariants(scores, seed):
    rng = np.random.default_rng(seed)
    truth = GroundTruth(np.arange(6), rng.permutation(9)[:6])
    ps = [precision_at_q(scores, truth, q) for q in range(1, 10)]
    assert all(a <= b for a, b in zip(ps, ps[1:])) and ps[-1] == 1.0
    assert 1 / 9 <= mrr(scores, truth) <= 1.0
    # strictly increasing and exact on small integers, so ties survive
    transformed = scores ** 3 + 5 * scores - 2
    assert mrr(transformed, truth) == mrr(scores, truth)
    assert precision_at_q(transformed, truth, 3) == precision_at_q(scores, truth, 3)


def test_report_json_and_table():
    s, t = scores_with_ranks([1, 2, 4])
    rep = MetricReport.from_scores(s, t, (10, 1), {"training": 1.5})
    assert list(rep.precision_at) == [1, 10]
    d = json.loads(rep.to_json())
    assert d["precision_at"]["1"] == pytest.approx(1 / 3) and d["pair_count"] == 3
    table = rep.table(PUBLISHED_RESULTS["douban"])
    assert "published 0.4651" in table and "MRR" in table


SMALL = AlignConfig(epochs=20, dim=16, m=10)


def test_single_orbit_without_refinement_is_htc_l():
    data = make_random_attributed_pair(30, 0.15, spec=NoiseSpec(0.1, seed=2))
    low = align(data, SMALL, "HTC-L")
    cfg_k1 = AlignConfig(**{**SMALL.__dict__, "orbits": 1})
    no_refine = align(data, cfg_k1, "HTC-H")
    np.testing.assert_array_equal(low.result.final, no_refine.result.final)


def test_run_ablation_reports_and_rejects_unknown():
    data = make_random_attributed_pair(30, 0.15, spec=NoiseSpec(0.1, seed=3))
    rep = run_ablation("HTC-LT", data, SMALL)
    assert rep.variant == "HTC-LT" and rep.pair_count == 30
    assert 0 <= rep.precision_at[1] <= rep.precision_at[10] <= 1
    assert rep.timings["training"] > 0
    with pytest.raises(ValueError):
        run_ablation("HTC-DT", data, SMALL)
