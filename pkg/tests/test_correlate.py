import json

from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_match
from rttchange.correlate import correlate
from rttchange.pathscan import PathChange
from rttchange.score import optimal_match


def test_no_path_changes():
    rep = correlate([100.0, 500.0], [])
    assert rep.pairs == [] and rep.precision is None
    assert all(v is None for v in rep.precision_per_kind.values())
    assert json.loads(rep.to_json())["precision"] is None


def test_single_pair_within_window():
    rep = correlate([1000.0], [PathChange(1600.0, "AS")])
    assert rep.precision_per_kind["AS"] == 1.0
    assert rep.precision_per_kind["IFP"] is None


def test_three_rtt_two_path():
    path = [PathChange(900.0, "IFP"), PathChange(3000.0, "AS")]
    rep = correlate([0.0, 1000.0, 4000.0], path, 1800)
    assert [(r, p.epoch) for r, p in rep.pairs] == [(1000.0, 900.0), (4000.0, 3000.0)]
    assert rep.precision == 1.0 and rep.unmatched_rtt_count == 1
    assert brute_match((900, 3000), (0, 1000, 4000), 1800) == (2, 1100)


def test_kinds_share_one_matching():
    path = [PathChange(0.0, "AS"), PathChange(60.0, "IFP")]
    rep = correlate([30.0], path, 1800)
    assert sum(rep.matched.values()) == 1


def test_csv_rows():
    rows = correlate([0.0], [PathChange(10.0, "IXP")]).csv_rows("p1")
    assert {r["kind"]: r["precision"] for r in rows} == {"AS": "", "IXP": 1.0, "IFP": ""}


epochs = st.lists(st.integers(0, 20000), max_size=10, unique=True)


@given(rtt=epochs, path=epochs, kinds=st.lists(st.sampled_from(["AS", "IXP", "IFP"]), min_size=10, max_size=10))
@settings(max_examples=200, deadline=None)
def test_optimal_and_monotone_in_window(rtt, path, kinds):
    changes = [PathChange(float(e), k) for e, k in zip(path, kinds)]
    small = correlate(rtt, changes, 900)
    big = correlate(rtt, changes, 2700)
    card, shift = brute_match(sorted(path), sorted(rtt), 900)
    assert len(small.pairs) == card
    assert sum(abs(r - p.epoch) for r, p in small.pairs) == shift
    assert len(big.pairs) >= len(small.pairs)
    # the same matcher that scores detections
    assert len(optimal_match(sorted(path), sorted(rtt), 900)) == card
