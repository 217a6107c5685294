import pytest
from hypothesis import given
from hypothesis import strategies as st

from chirpconcord.channelid import parse_channel
from chirpconcord.concordance import (
    OverlapState,
    concordance_report,
    exact_match,
    index_match,
    overlap_states,
    pair_score,
    precision_recall_f1_exact,
    precision_recall_f1_index,
)


def ids(*labels):
    return {parse_channel(s) for s in labels}


def ch(s):
    return parse_channel(s)


def test_exact_match_example():
    assert exact_match(ids("LAT1", "LAT2", "LAT6", "LAT7"), ids("LAT7", "LAH6", "PD1")) == (1, 0.25)


def test_exact_match_empty_soz():
    assert exact_match(set(), ids("A1")) == (0, 0.0)


def test_exact_match_identity():
    s = ids("A1", "B2", "C3")
    assert exact_match(s, s) == (3, 1.0)


@pytest.mark.parametrize(
    "s, o, score",
    [("LAT1", "LAT1", 2), ("RAH2", "LAH2", 1), ("LAT1", "LAH2", 0), ("EKG", "EKG", 2), ("EKG", "ECG", 0), ("LAT2B", "LAT2B", 2), ("LAT1", "LAH1", 2), ("G1", "LAT1", 1)],
)
def test_pair_score(s, o, score):
    assert pair_score(ch(s), ch(o)) == score


def test_index_match_example():
    # pairs: LAT1-LAT1 2, LAT1-LAH2 0, RAH2-LAT1 0, RAH2-LAH2 1
    assert index_match(ids("LAT1", "RAH2"), ids("LAT1", "LAH2")) == (3, 0.75)


def test_index_match_five_perfect():
    soz = ids("LAT1", "RAH2", "PD3", "G4", "MST5")
    m, r = index_match(soz, soz)
    assert (m, r) == (10, 1.0)


def test_index_match_no_shared_numbers():
    assert index_match(ids("A1", "B2"), ids("A3", "C4")) == (0, 0.0)


def test_exact_prf():
    assert precision_recall_f1_exact(ids("A1", "A2"), ids("A1", "B3")) == (0.5, 0.5, 0.5)
    assert precision_recall_f1_exact(ids("A1"), set()) == (0.0, 0.0, 0.0)
    assert precision_recall_f1_exact(ids("A1", "B2"), ids("A1", "B2")) == (1.0, 1.0, 1.0)


def test_index_prf():
    assert precision_recall_f1_index(ids("LAT1"), ids("LAT1")) == (1.0, 1.0, 1.0)
    assert precision_recall_f1_index(ids("RAH2"), ids("LAH2")) == (0.5, 0.5, 0.5)
    assert precision_recall_f1_index(ids("A1"), ids("A2", "B3")) == (0.0, 0.0, 0.0)


def test_overlap_states():
    states, warnings = overlap_states(ids("A1", "A2", "A3"), ids("A1", "Z9"), ids("A1", "A2"))
    assert states[ch("A1")] is OverlapState.BOTH
    assert states[ch("A2")] is OverlapState.OUTLIER_ONLY
    assert states[ch("A3")] is OverlapState.NEITHER
    assert states[ch("Z9")] is OverlapState.SOZ_ONLY
    assert warnings == ["SOZ channel Z9 has no chirp data"]
    assert list(states) == sorted(states)


def test_report_zero_soz():
    rep = concordance_report("jh106", set(), ids("A1", "B2"))
    assert rep.n_soz == 0
    assert all(getattr(rep, m) == 0 for m in ("exact_precision", "exact_recall", "exact_f1", "index_precision", "index_recall", "index_f1"))


# -- properties over random label sets ----------------------------------------

label = st.builds(lambda p, n: f"{p}{n}" if n else p, st.sampled_from(["LAT", "LAH", "RAT", "RAH", "G", "EKG"]), st.integers(0, 6))
label_sets = st.frozensets(label, max_size=8).map(lambda s: {parse_channel(x) for x in s})


@given(label_sets, label_sets)
def test_properties(soz, out):
    rep = concordance_report("p", soz, out)
    assert rep.m_exact <= min(len(soz), len(out))
    assert rep.m_index >= 2 * rep.m_exact
    assert rep.index_precision >= rep.exact_precision
    assert rep.index_recall >= rep.exact_recall
    for name in ("r_exact", "r_index", "exact_precision", "exact_recall", "exact_f1", "index_precision", "index_recall", "index_f1"):
        assert 0.0 <= getattr(rep, name) <= 1.0
    for p, r, f in ((rep.exact_precision, rep.exact_recall, rep.exact_f1), (rep.index_precision, rep.index_recall, rep.index_f1)):
        assert f == (2 * p * r / (p + r) if p + r > 0 else 0.0)


@given(label_sets, label_sets, st.randoms())
def test_order_invariance(soz, out, rnd):
    a, b = list(soz), list(out)
    rnd.shuffle(a)
    rnd.shuffle(b)
    assert concordance_report("p", a, b) == concordance_report("p", soz, out)
