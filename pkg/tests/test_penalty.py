import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ref_penalty
from rttchange.detect import PenaltyCriterion, penalty_value
from rttchange.detect.penalty import decompose
from rttchange.model import ValidationError


def test_aic_with_no_changepoints():
    assert penalty_value("AIC", 50, 3, [50]) == 6


def test_bic_reference_value():
    assert penalty_value("BIC", 100, 1, [40, 60]) == pytest.approx(13.816, abs=5e-4)
    assert penalty_value("BIC", 100, 1, [40, 60]) == pytest.approx(3 * math.log(100))


def test_parse_aliases():
    assert PenaltyCriterion.parse("sic") is PenaltyCriterion.BIC
    assert PenaltyCriterion.parse("Hannan-Quinn") is PenaltyCriterion.HQ
    with pytest.raises(ValidationError):
        PenaltyCriterion.parse("xyz")


def test_guards():
    with pytest.raises(ValidationError):
        penalty_value("BIC", 1, 1, [1])
    with pytest.raises(ValidationError):
        penalty_value("HQ", 2, 1, [2])
    with pytest.raises(ValidationError):
        penalty_value("MBIC", 10, 1, [4, 4])


@given(
    crit=st.sampled_from(["AIC", "BIC", "HQ", "MBIC"]),
    n=st.integers(3, 5000),
    dim=st.integers(1, 12),
    data=st.data(),
)
@settings(max_examples=200, deadline=None)
def test_penalty_matches_reference_and_decomposition(crit, n, dim, data):
    m = data.draw(st.integers(0, min(n - 1, 8)))
    cuts = sorted(data.draw(st.sets(st.integers(1, n - 1), min_size=m, max_size=m)))
    b = [0, *cuts, n]
    lengths = [b[i + 1] - b[i] for i in range(len(b) - 1)]
    got = penalty_value(crit, n, dim, lengths)
    assert got == pytest.approx(ref_penalty(crit, n, dim, lengths), rel=1e-12, abs=1e-12)
    per_cp, const, length_term = decompose(crit, n, dim)
    rebuilt = per_cp * m + const
    if length_term:
        rebuilt += sum(0.5 * math.log(l / n) for l in lengths)
    assert rebuilt == pytest.approx(got, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("dim", [1, 2, 10])
def test_aic_hq_bic_ordering(dim):
    # log log n >= 1 needs n >= e^e (about 15.2); below that HQ < AIC
    for n in [16, 20, 50, 100, 1000, 10**6]:
        for m in range(0, 5):
            lengths = [n // (m + 1)] * m + [n - m * (n // (m + 1))]
            aic, hq, bic = (penalty_value(c, n, dim, lengths) for c in ("AIC", "HQ", "BIC"))
            assert aic <= hq <= bic


def test_hq_below_aic_for_small_n():
    assert penalty_value("HQ", 8, 1, [4, 4]) < penalty_value("AIC", 8, 1, [4, 4])


def test_bic_exceeds_hq_on_log_grid():
    for n in np.unique(np.logspace(np.log10(3), 6, 200).astype(int)):
        for dim in (1, 2, 10):
            assert penalty_value("BIC", int(n), dim, [1, int(n) - 1]) > penalty_value("HQ", int(n), dim, [1, int(n) - 1])
