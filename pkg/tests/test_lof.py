import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chirpconcord.channelid import parse_channel
from chirpconcord.lof import (
    LofConfig,
    LofResult,
    detect,
    flag_count,
    flag_outliers,
    knn_neighborhoods,
    lof_scores,
)
from oracles import brute_force_lof, brute_force_neighbors

SQUARE = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (1.0, 1.0, 0.0)]


def test_square_neighborhoods():
    hoods = knn_neighborhoods(SQUARE, 2)
    for i, h in enumerate(hoods):
        assert h.k_distance == 1.0
        # edge-adjacent corners differ from i in exactly one coordinate
        adjacent = [j for j in range(4) if sum(a != b for a, b in zip(SQUARE[i], SQUARE[j])) == 1]
        assert list(h.indices) == adjacent


def test_duplicates_are_tie_included():
    pts = [(0, 0, 0), (0, 0, 0), (0, 0, 0), (5, 5, 5)]
    h = knn_neighborhoods(pts, 1)[0]
    assert h.k_distance == 0.0
    assert list(h.indices) == [1, 2]


def test_two_points():
    hoods = knn_neighborhoods([(0, 0, 0), (3, 4, 0)], 1)
    assert [list(h.indices) for h in hoods] == [[1], [0]]
    assert hoods[0].k_distance == 5.0


def test_insufficient_points():
    with pytest.raises(ValueError, match="insufficient"):
        knn_neighborhoods([(0, 0, 0)], 1)
    with pytest.raises(ValueError):
        lof_scores([(0, 0, 0)])


def test_square_scores_are_one():
    res = lof_scores(SQUARE, LofConfig(n_neighbors=2))
    np.testing.assert_allclose(res.scores, 1.0, rtol=0, atol=1e-12)


def test_far_point_frozen_value():
    pts = SQUARE + [(10.0, 10.0, 0.0)]
    res = lof_scores(pts, LofConfig(n_neighbors=2))
    # oracle value; equals (sqrt(162) + 2 sqrt(181)) / 3 by hand
    expected = 13.211723385168426
    assert abs(expected - (math.sqrt(162) + 2 * math.sqrt(181)) / 3) < 1e-12
    assert res.scores[4] == pytest.approx(expected, rel=1e-12)
    assert np.argmax(res.scores) == 4
    np.testing.assert_allclose(res.scores[:4], 1.0, atol=1e-12)


def test_identical_points_score_one():
    res = lof_scores([(2.0, 2.0, 2.0)] * 6, LofConfig(n_neighbors=3))
    np.testing.assert_array_equal(res.scores, np.ones(6))


def test_effective_k_capped():
    res = lof_scores(np.random.default_rng(0).normal(size=(8, 3)))
    assert res.effective_k == 7


point_sets = st.integers(min_value=3, max_value=40).flatmap(
    lambda n: st.lists(
        st.tuples(*[st.floats(-100, 100, allow_nan=False)] * 3), min_size=n, max_size=n
    )
)


@settings(max_examples=80, deadline=None)
@given(point_sets, st.integers(min_value=1, max_value=25))
def test_matches_oracle(points, k):
    k_eff = min(k, len(points) - 1)
    got = lof_scores(points, LofConfig(n_neighbors=k)).scores
    want = brute_force_lof(points, k_eff)
    np.testing.assert_allclose(got, want, rtol=1e-9)


@settings(max_examples=40, deadline=None)
@given(point_sets, st.integers(min_value=1, max_value=10))
def test_neighborhoods_match_oracle(points, k):
    k = min(k, len(points) - 1)
    for h, (kd, idx) in zip(knn_neighborhoods(points, k), brute_force_neighbors(points, k)):
        assert h.k_distance == pytest.approx(kd, rel=1e-12, abs=1e-12)
        assert list(h.indices) == idx


def _random_cloud(seed, n=30):
    return np.random.default_rng(seed).normal(size=(n, 3))


@pytest.mark.parametrize("seed", range(10))
def test_isometry_invariance(seed):
    rng = np.random.default_rng(100 + seed)
    x = _random_cloud(seed)
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if seed % 2:
        q[:, 0] = -q[:, 0]  # include reflections
    y = x @ q.T + rng.normal(size=3) * 50
    a = lof_scores(x, LofConfig(n_neighbors=5)).scores
    b = lof_scores(y, LofConfig(n_neighbors=5)).scores
    np.testing.assert_allclose(a, b, rtol=1e-9)


@pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e4])
def test_scale_invariance(c):
    x = _random_cloud(3)
    np.testing.assert_allclose(lof_scores(x).scores, lof_scores(c * x).scores, rtol=1e-9)


def _result(scores, labels=None):
    labels = labels or [f"C{i}" for i in range(len(scores))]
    return LofResult(tuple(parse_channel(s) for s in labels), np.asarray(scores, float), 1)


def test_flag_top_two_of_ten():
    scores = [1.0, 1.1, 3.0, 0.9, 1.2, 2.5, 1.0, 1.05, 0.95, 1.01]
    res = flag_outliers(_result(scores), 0.2)
    assert list(np.flatnonzero(res.flagged)) == [2, 5]
    assert res.threshold_tau == 2.5


def test_flag_count_twenty_five():
    res = flag_outliers(_result(np.linspace(1, 2, 25)), 0.2)
    assert res.flagged.sum() == 5


def test_ties_break_by_label():
    labels = ["RAH1", "LAT2", "LAT10", "PD1", "AD3"]
    res = flag_outliers(_result([1.0] * 5, labels), 0.4)
    assert sorted(c.raw for c in res.outlier_channels()) == ["AD3", "LAT10"]


def test_flag_count_uses_decimal_product():
    assert flag_count(0.1, 30) == 3
    assert flag_count(0.2, 25) == 5
    assert flag_count(0.2, 1) == 0
    assert flag_count(0.05, 2) == 1


@pytest.mark.parametrize("c", [0.0, -0.1, 0.6])
def test_contamination_range(c):
    with pytest.raises(ValueError):
        LofConfig(contamination=c)


def test_detect_small_inputs():
    one = detect([(1.0, 2.0, 3.0)], channels=[parse_channel("A1")])
    assert one.flagged.tolist() == [False] and one.threshold_tau is None
    empty = detect(np.zeros((0, 3)), channels=[])
    assert empty.n == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 120), st.sampled_from([0.05, 0.1, 0.2, 0.5]), st.integers(0, 2**31))
def test_flag_count_law(n, c, seed):
    x = np.random.default_rng(seed).normal(size=(n, 3))
    res = detect(x, LofConfig(n_neighbors=20, contamination=c), [parse_channel(f"C{i}") for i in range(n)])
    m = math.ceil(round(c * n, 9))
    assert res.flagged.sum() == m
    assert res.scores[res.flagged].min() >= res.scores[~res.flagged].max(initial=-np.inf) * (1 - 1e-12)


def test_bit_identical_runs():
    x = _random_cloud(9, 60)
    a, b = lof_scores(x).scores, lof_scores(x.copy()).scores
    assert a.tobytes() == b.tobytes()
