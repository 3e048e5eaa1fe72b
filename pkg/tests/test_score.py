import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_match
from rttchange.model import ChangepointSet, GroundTruth, RttTrace
from rttchange.score import MatchConfig, f_beta, omega_weights, optimal_match, score


def step_trace(levels, lengths):
    return RttTrace.from_values(np.repeat(np.asarray(levels, float), lengths))


def test_empty_match():
    m = optimal_match([], [], 3)
    assert m.pairs == () and m.unmatched_truth == () and m.unmatched_detections == ()


def test_greedy_defeating_fixture():
    m = optimal_match([10, 14], [11, 13], 4)
    assert set(m.pairs) == {(10, 11), (14, 13)}
    assert m.total_shift == 2
    assert brute_match((10, 14), (11, 13), 4) == (2, 2)


def test_surplus_detection():
    truth = GroundTruth((10, 50))
    det = ChangepointSet((12, 48, 70))
    m = optimal_match(truth, det, 5)
    assert set(m.pairs) == {(10, 12), (50, 48)}
    assert m.unmatched_detections == (70,)
    trace = RttTrace.from_values([5.0] * 80)
    rep = score(truth, det, trace, MatchConfig(window_w=5, rho=2))
    assert (rep.tp, rep.fp, rep.fn) == (2, 1, 0)


def test_cardinality_beats_shift():
    # pairing 5-5 is cheaper but leaves 8 unmatched
    m = optimal_match([5, 8], [5], 3)
    assert len(m) == 1
    m = optimal_match([2, 5], [4, 7], 2)
    assert set(m.pairs) == {(2, 4), (5, 7)}


def test_omega_boundary_and_formula():
    trace = step_trace([10, 20], [10, 2])
    assert omega_weights(trace, GroundTruth((10,)), MatchConfig(rho=2)) == [0.0]
    # following length 8, rho 2, M = 10, delta = 5 -> log2(4) * 15
    lo = [10.0] * 8
    hi = [15.0, 25.0] * 4  # median 20, population std 5
    trace = RttTrace.from_values(lo + hi)
    assert omega_weights(trace, GroundTruth((8,)), MatchConfig(rho=2)) == [pytest.approx(30.0)]
    trace = RttTrace.from_values([3.0, 4.0] * 20)
    assert omega_weights(trace, GroundTruth((20,)), MatchConfig(rho=2)) == [0.0]


def test_perfect_detection():
    trace = step_trace([10, 40, 90], [20, 20, 20])
    rep = score(GroundTruth((20, 40)), ChangepointSet((20, 40)), trace)
    assert rep.precision == rep.recall == rep.recall_w == rep.f2 == 1.0


def test_no_detections():
    trace = step_trace([10, 40], [20, 20])
    rep = score(GroundTruth((20,)), ChangepointSet(()), trace)
    assert rep.recall == 0 and rep.precision == 1 and rep.f2 == 0


def test_weighted_recall_fixture():
    a = 50.0
    trace = step_trace([a, a + 10, a + 15], [10, 40, 20])
    cfg = MatchConfig(window_w=2, rho=5)
    assert omega_weights(trace, GroundTruth((10, 50)), cfg) == [pytest.approx(30), pytest.approx(10)]
    rep = score(GroundTruth((10, 50)), ChangepointSet((10, 30)), trace, cfg)
    assert rep.precision == 0.5 and rep.recall == 0.5
    assert rep.recall_w == pytest.approx(0.75)
    assert rep.f2_w == pytest.approx(5 * 0.5 * 0.75 / (4 * 0.5 + 0.75))


def test_short_following_segment_is_ignored_but_matchable():
    trace = step_trace([10, 50, 90], [20, 19, 1])
    rep = score(GroundTruth((20, 39)), ChangepointSet((20, 39)), trace, MatchConfig(rho=2))
    assert rep.ignored == 1 and rep.ignored_matched == 1
    assert rep.fp == 0 and rep.tp == 1 and rep.recall == 1


def test_misses_on_zero_weight_truths_keep_recall_w():
    # the second change has identical neighbouring segments, so its weight is 0
    trace = step_trace([10, 60, 60], [20, 20, 20])
    rep = score(GroundTruth((20, 40)), ChangepointSet((20,)), trace)
    assert rep.recall == 0.5
    assert rep.recall_w == 1.0 >= rep.recall


def test_f_beta():
    assert f_beta(0, 0) == 0
    assert f_beta(1, 1) == 1
    assert f_beta(0.5, 1) == pytest.approx(5 * 0.5 / (2 + 1))


def test_from_minutes():
    cfg = MatchConfig.from_minutes(8, 8, 240)
    assert (cfg.window_w, cfg.rho) == (2, 2)


point_sets = st.lists(st.integers(0, 60), max_size=10, unique=True).map(sorted)


@given(truth=point_sets, det=point_sets, w=st.integers(0, 6))
@settings(max_examples=300, deadline=None)
def test_match_is_optimal_and_one_to_one(truth, det, w):
    m = optimal_match(truth, det, w)
    card, shift = brute_match(truth, det, w)
    assert len(m) == card and m.total_shift == shift
    ts = [a for a, _ in m.pairs]
    ds = [b for _, b in m.pairs]
    assert len(set(ts)) == len(ts) and len(set(ds)) == len(ds)
    assert all(abs(a - b) <= w for a, b in m.pairs)


@given(truth=point_sets, det=point_sets, w=st.integers(0, 6))
@settings(max_examples=100, deadline=None)
def test_moving_a_detection_out_of_range_costs_at_most_one_pair(truth, det, w):
    m = optimal_match(truth, det, w)
    if not m.pairs:
        return
    _, d = m.pairs[0]
    moved = sorted([x for x in det if x != d] + [1000])
    assert len(m) - 1 <= len(optimal_match(truth, moved, w)) <= len(m)


def test_moving_the_only_candidate_out_of_range_loses_its_pair():
    assert len(optimal_match([10, 30], [11, 29], 2)) == 2
    assert len(optimal_match([10, 30], [11, 1000], 2)) == 1


@st.composite
def scored_case(draw):
    n = draw(st.integers(10, 120))
    raw = draw(st.lists(st.floats(1, 300), min_size=n, max_size=n))
    truth = sorted(draw(st.sets(st.integers(1, n - 1), max_size=8)))
    det = sorted(draw(st.sets(st.integers(1, n - 1), max_size=8)))
    return raw, truth, det


@given(scored_case(), st.integers(0, 4), st.integers(1, 6))
@settings(max_examples=150, deadline=None)
def test_score_bounds_and_accounting(case, w, rho):
    raw, truth, det = case
    rep = score(GroundTruth(tuple(truth)), ChangepointSet(tuple(det)), RttTrace.from_values(raw), MatchConfig(w, rho))
    for v in (rep.precision, rep.recall, rep.recall_w, rep.f2, rep.f2_w):
        assert 0.0 <= v <= 1.0
    assert rep.tp + rep.fp + rep.ignored_matched == len(det)
    assert rep.tp + rep.fn == len(truth) - rep.ignored
    assert (rep.f2_w == 0) == (rep.recall_w == 0 or rep.precision == 0)
    assert all(w_ >= 0 and math.isfinite(w_) for w_ in rep.omega)
