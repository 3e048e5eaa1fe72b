import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rttchange.pathscan import (
    ParisMeasurement,
    backward_extension,
    check_partition,
    forward_inclusion,
    ifp_changes,
    ifp_series,
)
from rttchange.model import ValidationError

STEP = 1800.0

# dominant pattern of the delayed-change example
DOMINANT = {0: "A", 1: "B", 2: "E", 3: "E", 4: "A", **{i: "C" for i in range(5, 16)}}


def build(pairs):
    return [ParisMeasurement(i * STEP, pid, (path,)) for i, (pid, path) in enumerate(pairs)]


def first_example():
    ids = list(range(16)) + [0, 1, 2, 3]
    paths = {0: "A", 1: "B", 2: "B", 3: "A", 15: "C"}
    pairs = [(pid, paths.get(pid, "A")) for pid in ids[:18]]
    pairs += [(2, "E"), (3, "E")]
    return build(pairs)


def second_example():
    pairs = [(pid, DOMINANT[pid]) for pid in list(range(16)) + [0, 1]]
    # short deviation: Paris IDs 2 and 3 leave the dominant pattern
    pairs += [(2, "B"), (3, "A")]
    pairs += [(pid, DOMINANT[pid]) for pid in list(range(4, 16)) + [0, 1]]
    pairs += [(pid % 16, DOMINANT[pid % 16]) for pid in range(2, 2 + 48)]
    return build(pairs)


def test_forward_boundary_before_second_paris_id_2():
    ms = first_example()
    series = forward_inclusion(ms)
    assert [s.start for s in series] == [0, 18]
    assert ms[18].paris_id == 2 and ms[18].ip_path == ("E",)
    assert sum(1 for m in ms[:19] if m.paris_id == 2) == 2


def test_backward_extension_moves_to_first_paris_id_4():
    ms = second_example()
    fwd = forward_inclusion(ms)
    assert [s.start for s in fwd] == [0, 18, 34]
    assert ms[34].paris_id == 2 and ms[34].ip_path == ("E",)
    bwd = backward_extension(fwd, ms)
    assert [s.start for s in bwd] == [0, 18, 20]
    first_id4_after_deviation = next(i for i in range(18, len(ms)) if ms[i].paris_id == 4)
    assert bwd[-1].start == first_id4_after_deviation
    check_partition(bwd, ms)


def test_change_dated_at_new_boundary():
    ms = second_example()
    changes = ifp_changes(ifp_series(ms, "backward"), ms)
    assert [c.epoch for c in changes] == [18 * STEP, 20 * STEP]
    assert changes[-1].before == "2:B" and changes[-1].after == "2:E"


def test_single_path_single_series():
    ms = build([(i % 16, "A") for i in range(50)])
    assert len(forward_inclusion(ms)) == 1


def test_alternating_paths_split_everywhere():
    ms = build([(0, "XY"[i % 2]) for i in range(6)])
    assert [s.start for s in forward_inclusion(ms)] == list(range(6))


def test_short_latter_series_left_alone():
    ms = second_example()[:40]
    fwd = forward_inclusion(ms)
    assert backward_extension(fwd, ms) == fwd


def test_paris_id_range():
    with pytest.raises(ValidationError):
        ParisMeasurement(0.0, 16, ("A",))


def brute_boundary(ms, prev_start, old):
    """Earliest b such that every measurement in b..old agrees with the later series."""
    later = {}
    for m in ms[old:]:
        later.setdefault(m.paris_id, m.ip_path)
    for b in range(prev_start, old + 1):
        if all(later.get(m.paris_id, m.ip_path) == m.ip_path for m in ms[b:old]):
            return b
    return old


@given(dev_len=st.integers(1, 10), dev_ids=st.integers(1, 2**16 - 1), offset=st.integers(0, 15))
@settings(max_examples=60, deadline=None)
def test_backward_boundary_matches_brute_force(dev_len, dev_ids, offset):
    ids = [(offset + i) % 16 for i in range(200)]
    head = [(pid, DOMINANT[pid]) for pid in ids[:20]]
    dev = [(pid, "Z" if dev_ids >> pid & 1 else DOMINANT[pid]) for pid in ids[20:20 + dev_len]]
    # the deviation then reverts to a different pattern so both series are distinct
    tail = [(pid, "Q" if pid == ids[20] else DOMINANT[pid]) for pid in ids[20 + dev_len:120]]
    ms = build(head + dev + tail)
    fwd = forward_inclusion(ms)
    bwd = backward_extension(fwd, ms)
    check_partition(bwd, ms)
    last_fwd, last_bwd = fwd[-1], bwd[-1]
    if len(fwd) >= 2 and len(last_fwd) > len(fwd[-2]):
        assert last_bwd.start == brute_boundary(ms, fwd[-2].start, last_fwd.start)


@st.composite
def paris_sequences(draw):
    n = draw(st.integers(1, 160))
    offset = draw(st.integers(0, 15))
    alphabet = draw(st.integers(1, 3))
    regimes = draw(st.lists(st.integers(0, n), max_size=5))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    ids = [(offset + i) % 16 for i in range(n)]
    table = rng.integers(0, alphabet, size=16)
    paths = []
    for i, pid in enumerate(ids):
        if i in regimes:
            table = rng.integers(0, alphabet, size=16)
        paths.append(str(table[pid]))
    return build(list(zip(ids, paths)))


@given(paris_sequences())
@settings(max_examples=150, deadline=None)
def test_partitions_valid_and_backward_never_adds_series(ms):
    fwd = forward_inclusion(ms)
    check_partition(fwd, ms)
    bwd = backward_extension(fwd, ms)
    check_partition(bwd, ms)
    assert len(bwd) <= len(fwd)
    # boundaries only move earlier
    fwd_starts = [s.start for s in fwd]
    for s in bwd[1:]:
        assert any(s.start <= f for f in fwd_starts[1:])
