"""Spatial concordance between SOZ channels and flagged outlier channels.

Exact matching compares full labels. Index matching scores every
(SOZ, outlier) pair: 2 points when electrode numbers and first characters
agree (or the labels are identical), 1 point when only the numbers agree,
else 0.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from typing import Iterable

from .channelid import ChannelId


class OverlapState(enum.IntEnum):
    NEITHER = 0
    OUTLIER_ONLY = 1
    SOZ_ONLY = 2
    BOTH = 3


@dataclass(frozen=True)
class ConcordanceReport:
    patient_id: str
    m_exact: int
    r_exact: float
    m_index: int
    r_index: float
    exact_precision: float
    exact_recall: float
    exact_f1: float
    index_precision: float
    index_recall: float
    index_f1: float
    n_soz: int
    n_outliers: int


REPORT_COLUMNS = tuple(f.name for f in fields(ConcordanceReport))
METRICS = (
    "exact_precision",
    "exact_recall",
    "exact_f1",
    "index_precision",
    "index_recall",
    "index_f1",
)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def f1(precision: float, recall: float) -> float:
    total = precision + recall
    return 2 * precision * recall / total if total > 0 else 0.0


def exact_match(soz: Iterable[ChannelId], outliers: Iterable[ChannelId]) -> tuple[int, float]:
    soz, outliers = set(soz), set(outliers)
    m = len(soz & outliers)
    return m, _ratio(m, len(soz))


def pair_score(s: ChannelId, o: ChannelId) -> int:
    """0, 1 or 2 index points for one SOZ/outlier pair.

    Identical labels always score 2, including unnumbered ones such as
    ``EKG``, so an exact match is never worth less than an index match.
    """
    if s.raw == o.raw:
        return 2
    if s.number is None or o.number is None or s.number != o.number:
        return 0
    return 2 if s.first_char == o.first_char else 1


def index_match(soz: Iterable[ChannelId], outliers: Iterable[ChannelId]) -> tuple[int, float]:
    """Raw pairwise point total and its per-SOZ best-match ratio in [0, 1]."""
    soz, outliers = sorted(set(soz)), sorted(set(outliers))
    total = 0
    best = 0
    for s in soz:
        row = [pair_score(s, o) for o in outliers]
        total += sum(row)
        best += max(row, default=0)
    return total, _ratio(best, 2 * len(soz))


def precision_recall_f1_exact(soz, outliers) -> tuple[float, float, float]:
    soz, outliers = set(soz), set(outliers)
    m = len(soz & outliers)
    p = _ratio(m, len(outliers))
    r = _ratio(m, len(soz))
    return p, r, f1(p, r)


def precision_recall_f1_index(soz, outliers) -> tuple[float, float, float]:
    """Best-match credit per channel: a pair score of 2 earns 1, a score of 1 earns 0.5."""
    soz, outliers = sorted(set(soz)), sorted(set(outliers))
    outlier_credit = sum(max((pair_score(s, o) for s in soz), default=0) for o in outliers)
    soz_credit = sum(max((pair_score(s, o) for o in outliers), default=0) for s in soz)
    p = _ratio(outlier_credit, 2 * len(outliers))
    r = _ratio(soz_credit, 2 * len(soz))
    return p, r, f1(p, r)


def concordance_report(patient_id: str, soz, outliers) -> ConcordanceReport:
    soz, outliers = frozenset(soz), frozenset(outliers)
    m_exact, r_exact = exact_match(soz, outliers)
    m_index, r_index = index_match(soz, outliers)
    ep, er, ef = precision_recall_f1_exact(soz, outliers)
    ip, ir, if1 = precision_recall_f1_index(soz, outliers)
    return ConcordanceReport(
        patient_id=patient_id,
        m_exact=m_exact,
        r_exact=r_exact,
        m_index=m_index,
        r_index=r_index,
        exact_precision=ep,
        exact_recall=er,
        exact_f1=ef,
        index_precision=ip,
        index_recall=ir,
        index_f1=if1,
        n_soz=len(soz),
        n_outliers=len(outliers),
    )


def overlap_states(
    all_channels: Iterable[ChannelId], soz, outliers
) -> tuple[dict[ChannelId, OverlapState], list[str]]:
    """Overlap state per channel, plus warnings.

    SOZ labels with no chirp data are added as SOZ_ONLY and reported.
    """
    soz, outliers = set(soz), set(outliers)
    states = {}
    for ch in sorted(set(all_channels)):
        states[ch] = _state(ch in soz, ch in outliers)
    warnings = []
    for ch in sorted(soz - states.keys()):
        states[ch] = OverlapState.SOZ_ONLY
        warnings.append(f"SOZ channel {ch.raw} has no chirp data")
    return dict(sorted(states.items())), warnings


def _state(in_soz: bool, in_outliers: bool) -> OverlapState:
    if in_soz and in_outliers:
        return OverlapState.BOTH
    if in_soz:
        return OverlapState.SOZ_ONLY
    if in_outliers:
        return OverlapState.OUTLIER_ONLY
    return OverlapState.NEITHER
