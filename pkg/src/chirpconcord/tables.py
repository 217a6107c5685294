"""CSV emission and re-reading of the pipeline's intermediate files.

All tables are UTF-8 with LF line endings. Ratios and plot coordinates use
6-decimal fixed point. The per-channel feature dump keeps full float
precision so that later stages reading it reproduce in-memory results.
"""
from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

import numpy as np

from .channelid import ChannelId, parse_channel
from .cohort import GroupSummary
from .concordance import METRICS, REPORT_COLUMNS, ConcordanceReport
from .features import ChannelFeatureVector, StandardizedMatrix
from .lof import LofResult

FEATURE_COLUMNS = (
    "channel",
    "median_start_freq_hz",
    "median_end_freq_hz",
    "median_duration_s",
    "z_start",
    "z_end",
    "z_duration",
    "n_events",
)
LOF_COLUMNS = ("channel", "score", "flagged", "tau", "effective_k")


def fmt6(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    x = float(x)
    if x == 0:
        x = 0.0
    return f"{x:.6f}"


def fmt_exact(x: float) -> str:
    return repr(float(x))


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text, newline="")))


def features_csv(vectors: Sequence[ChannelFeatureVector], matrix: StandardizedMatrix | None) -> str:
    rows = []
    for i, v in enumerate(vectors):
        z = matrix.values[i] if matrix is not None else (0.0, 0.0, 0.0)
        rows.append(
            [
                v.channel.raw,
                fmt_exact(v.median_start_freq_hz),
                fmt_exact(v.median_end_freq_hz),
                fmt_exact(v.median_duration_s),
                *(fmt_exact(c) for c in z),
                v.n_events,
            ]
        )
    return to_csv(FEATURE_COLUMNS, rows)


def read_features_csv(text: str) -> list[ChannelFeatureVector]:
    out = []
    for row in read_csv(text):
        out.append(
            ChannelFeatureVector(
                channel=parse_channel(row["channel"]),
                median_start_freq_hz=float(row["median_start_freq_hz"]),
                median_end_freq_hz=float(row["median_end_freq_hz"]),
                median_duration_s=float(row["median_duration_s"]),
                n_events=int(row["n_events"]),
            )
        )
    return out


def lof_csv(result: LofResult) -> str:
    channels = result.channels or ()
    flagged = result.flagged if result.flagged is not None else np.zeros(result.n, dtype=bool)
    rows = [
        [c.raw, fmt6(s), int(bool(f)), fmt6(result.threshold_tau), result.effective_k]
        for c, s, f in zip(channels, result.scores, flagged)
    ]
    return to_csv(LOF_COLUMNS, rows)


def read_lof_csv(text: str) -> tuple[list[ChannelId], list[bool]]:
    """Channels and outlier flags from a LOF dump."""
    channels, flags = [], []
    for row in read_csv(text):
        channels.append(parse_channel(row["channel"]))
        flags.append(row["flagged"].strip() == "1")
    return channels, flags


def concordance_csv(reports: Iterable[ConcordanceReport]) -> str:
    rows = []
    for r in reports:
        row = []
        for name in REPORT_COLUMNS:
            value = getattr(r, name)
            row.append(fmt6(value) if isinstance(value, float) else value)
        rows.append(row)
    return to_csv(REPORT_COLUMNS, rows)


def read_concordance_csv(text: str) -> list[ConcordanceReport]:
    reports = []
    for row in read_csv(text):
        kwargs = {}
        for name in REPORT_COLUMNS:
            value = row[name]
            if name == "patient_id":
                kwargs[name] = value
            elif name in ("m_exact", "m_index", "n_soz", "n_outliers"):
                kwargs[name] = int(value)
            else:
                kwargs[name] = float(value)
        reports.append(ConcordanceReport(**kwargs))
    return reports


COHORT_COLUMNS = ("feature_value", "patient_count") + tuple(
    f"{m}_{stat}" for m in METRICS for stat in ("mean", "std")
)


def cohort_csv(groups: Iterable[GroupSummary]) -> str:
    rows = []
    for g in groups:
        row = [g.feature_value, g.patient_count]
        for m in METRICS:
            row += [fmt6(g.metrics[m].mean), fmt6(g.metrics[m].std_dev)]
        rows.append(row)
    return to_csv(COHORT_COLUMNS, rows)
