"""Plot-ready tables for channel embeddings, radial plots, grids and heatmaps.

CSV output is the contract; the SVG helpers at the bottom are a thin,
best-effort rendering of the grid and heatmap tables.
"""
from __future__ import annotations

import enum
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .channelid import ChannelId
from .concordance import ConcordanceReport, OverlapState
from .features import ChannelFeatureVector
from .ingest import ChirpEvent, ClinicalRecord
from .tables import fmt6, to_csv

GOLDEN_ANGLE_DEG = 137.508
SATURATION = 70.0
LIGHTNESS_RANGE = (35.0, 65.0)


class FeatureKind(str, enum.Enum):
    DURATION = "duration"
    START_FREQ = "start_freq"
    END_FREQ = "end_freq"
    BANDWIDTH = "bandwidth"
    SLOPE = "slope"


@dataclass(frozen=True)
class HSL:
    hue: float
    saturation: float
    lightness: float


@dataclass(frozen=True)
class EmbeddingPoint3D:
    channel: ChannelId
    x: float  # duration, s
    y: float  # onset frequency, Hz
    z: float  # offset frequency, Hz
    color: HSL
    is_soz: bool
    is_outlier: bool


@dataclass(frozen=True)
class PolarPoint:
    channel: ChannelId
    feature_kind: FeatureKind
    angle_rad: float
    radius: float
    negative: bool = False


@dataclass(frozen=True)
class GridTable:
    channels: tuple[ChannelId, ...]
    soz: tuple[int, ...]
    outlier: tuple[int, ...]
    state: tuple[int, ...]


def hsl_channel_colors(channels: Iterable[ChannelId]) -> dict[ChannelId, HSL]:
    """Golden-angle hue per electrode prefix, lightness by electrode number.

    Prefixes are ranked alphabetically; within a prefix, channels are ranked
    by number (unnumbered last) and spread linearly over 35-65% lightness.
    """
    groups: dict[str, list[ChannelId]] = {}
    for ch in set(channels):
        groups.setdefault(ch.prefix, []).append(ch)

    colors = {}
    lo, hi = LIGHTNESS_RANGE
    for rank, prefix in enumerate(sorted(groups)):
        hue = (rank * GOLDEN_ANGLE_DEG) % 360.0
        members = sorted(groups[prefix], key=lambda c: (c.number is None, c.number or 0, c.raw))
        last = len(members) - 1
        for j, ch in enumerate(members):
            lightness = lo + (hi - lo) * j / last if last else lo
            colors[ch] = HSL(hue, SATURATION, lightness)
    return dict(sorted(colors.items()))


def embedding3d(
    features: Sequence[ChannelFeatureVector],
    soz: Iterable[ChannelId],
    outliers: Iterable[ChannelId],
) -> list[EmbeddingPoint3D]:
    """Channel medians as (duration, onset freq, offset freq) points, in input order."""
    soz, outliers = set(soz), set(outliers)
    colors = hsl_channel_colors(v.channel for v in features)
    return [
        EmbeddingPoint3D(
            channel=v.channel,
            x=v.median_duration_s,
            y=v.median_start_freq_hz,
            z=v.median_end_freq_hz,
            color=colors[v.channel],
            is_soz=v.channel in soz,
            is_outlier=v.channel in outliers,
        )
        for v in features
    ]


def feature_value(v: ChannelFeatureVector, kind: FeatureKind) -> float | None:
    if kind is FeatureKind.DURATION:
        return v.median_duration_s
    if kind is FeatureKind.START_FREQ:
        return v.median_start_freq_hz
    if kind is FeatureKind.END_FREQ:
        return v.median_end_freq_hz
    if kind is FeatureKind.BANDWIDTH:
        return abs(v.median_end_freq_hz - v.median_start_freq_hz)
    if v.median_duration_s == 0:
        return None
    return (v.median_end_freq_hz - v.median_start_freq_hz) / v.median_duration_s


def radial_projection(
    features: Sequence[ChannelFeatureVector],
    kind: FeatureKind | str,
    scale: bool = False,
) -> tuple[list[PolarPoint], list[str]]:
    """Place channel i of n at angle 2*pi*i/n with the feature as radius.

    Negative slopes are emitted as their magnitude with ``negative`` set.
    With ``scale`` the radii are min-max scaled to [0, 1].
    """
    kind = FeatureKind(kind)
    ordered = sorted(features, key=lambda v: v.channel.raw)
    n = len(ordered)
    points, warnings = [], []
    for i, v in enumerate(ordered):
        value = feature_value(v, kind)
        if value is None:
            warnings.append(f"channel {v.channel.raw}: zero duration, slope skipped")
            continue
        points.append(PolarPoint(v.channel, kind, 2 * math.pi * i / n, abs(value), value < 0))

    if scale and points:
        lo = min(p.radius for p in points)
        span = max(p.radius for p in points) - lo
        points = [
            PolarPoint(p.channel, p.feature_kind, p.angle_rad, (p.radius - lo) / span if span else 0.0, p.negative)
            for p in points
        ]
    return points, warnings


def emit_grids(
    channels: Iterable[ChannelId],
    soz: Iterable[ChannelId],
    outliers: Iterable[ChannelId],
    states: Mapping[ChannelId, OverlapState],
) -> GridTable:
    """SOZ, outlier and overlap-state columns over one sorted channel list."""
    soz, outliers = set(soz), set(outliers)
    ordered = tuple(sorted(set(channels) | set(states)))
    return GridTable(
        channels=ordered,
        soz=tuple(int(c in soz) for c in ordered),
        outlier=tuple(int(c in outliers) for c in ordered),
        state=tuple(int(states[c]) if c in states else int(OverlapState.NEITHER) for c in ordered),
    )


METHODS = ("exact", "index")
METRIC_ROWS = ("precision", "recall", "f1")


def emit_metric_tables(
    reports: Sequence[ConcordanceReport],
    clinical: Iterable[ClinicalRecord] = (),
    features: Sequence[str] = (),
) -> tuple[dict[str, str], str]:
    """Heatmap CSV per method (metric rows x patient columns) and a long table.

    The long table carries the value of each named clinical feature so box
    plots can be grouped by phenotype.
    """
    reports = sorted(reports, key=lambda r: r.patient_id)
    by_id = {r.patient_id: r for r in clinical}
    patients = [r.patient_id for r in reports]

    heatmaps = {}
    for method in METHODS:
        rows = [
            [metric] + [fmt6(getattr(r, f"{method}_{metric}")) for r in reports]
            for metric in METRIC_ROWS
        ] if reports else []
        heatmaps[method] = to_csv(["metric", *patients], rows)

    long_rows = []
    for r in reports:
        rec = by_id.get(r.patient_id)
        extra = []
        for f in features:
            value = rec.feature_value(f) if rec is not None else None
            extra.append("na" if value is None else value)
        for method in METHODS:
            for metric in METRIC_ROWS:
                long_rows.append([r.patient_id, method, metric, fmt6(getattr(r, f"{method}_{metric}")), *extra])
    long_csv = to_csv(["patient_id", "method", "metric", "value", *features], long_rows)
    return heatmaps, long_csv


def embedding_csv(points: Sequence[EmbeddingPoint3D]) -> str:
    header = ["channel", "duration_s", "onset_freq_hz", "offset_freq_hz", "hue", "saturation", "lightness", "is_soz", "is_outlier"]
    rows = [
        [
            p.channel.raw,
            fmt6(p.x),
            fmt6(p.y),
            fmt6(p.z),
            fmt6(p.color.hue),
            fmt6(p.color.saturation),
            fmt6(p.color.lightness),
            int(p.is_soz),
            int(p.is_outlier),
        ]
        for p in points
    ]
    return to_csv(header, rows)


def event_embedding_csv(
    events: Sequence[ChirpEvent],
    soz: Iterable[ChannelId],
    outliers: Iterable[ChannelId],
    colors: Mapping[ChannelId, HSL],
) -> str:
    """One point per chirp rather than per channel median."""
    soz_raw = {c.raw for c in soz}
    out_raw = {c.raw for c in outliers}
    by_raw = {c.raw: hsl for c, hsl in colors.items()}
    header = ["channel", "event_index", "duration_s", "onset_freq_hz", "offset_freq_hz", "hue", "saturation", "lightness", "is_soz", "is_outlier"]
    rows = []
    counters: dict[str, int] = {}
    for e in sorted(events, key=lambda e: e.channel):
        idx = counters.get(e.channel, 0)
        counters[e.channel] = idx + 1
        hsl = by_raw.get(e.channel)
        rows.append(
            [
                e.channel,
                idx,
                fmt6(e.duration_s),
                fmt6(e.onset_freq_hz),
                fmt6(e.offset_freq_hz),
                fmt6(hsl.hue if hsl else None),
                fmt6(hsl.saturation if hsl else None),
                fmt6(hsl.lightness if hsl else None),
                int(e.channel in soz_raw),
                int(e.channel in out_raw),
            ]
        )
    return to_csv(header, rows)


def radial_csv(points: Sequence[PolarPoint]) -> str:
    header = ["channel", "angle_rad", "radius", "negative", "x", "y"]
    rows = [
        [
            p.channel.raw,
            fmt6(p.angle_rad),
            fmt6(p.radius),
            int(p.negative),
            fmt6(p.radius * math.cos(p.angle_rad)),
            fmt6(p.radius * math.sin(p.angle_rad)),
        ]
        for p in points
    ]
    return to_csv(header, rows)


def grid_csv(grid: GridTable) -> str:
    rows = zip((c.raw for c in grid.channels), grid.soz, grid.outlier, grid.state)
    return to_csv(["channel", "soz", "outlier", "state"], rows)


# -- SVG ----------------------------------------------------------------------

STATE_COLORS = {
    OverlapState.NEITHER: "#bebebe",
    OverlapState.OUTLIER_ONLY: "#ff00ff",
    OverlapState.SOZ_ONLY: "#008080",
    OverlapState.BOTH: "#9400d3",
}
_VIRIDIS = ((68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37))

CELL = 16
LABEL_W = 90


def _viridis(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(_VIRIDIS) - 1)
    i = min(int(t), len(_VIRIDIS) - 2)
    f = t - i
    rgb = [round(a + (b - a) * f) for a, b in zip(_VIRIDIS[i], _VIRIDIS[i + 1])]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _svg_root(w: int, h: int) -> ET.Element:
    return ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(w), height=str(h), viewBox=f"0 0 {w} {h}")


def _text(parent, x, y, s, **attrs):
    el = ET.SubElement(parent, "text", x=str(x), y=str(y), **{"font-size": "10", "font-family": "sans-serif"}, **attrs)
    el.text = s
    return el


def _serialize(root: ET.Element) -> str:
    return ET.tostring(root, encoding="unicode") + "\n"


def grid_svg(grid: GridTable) -> str:
    """Three stacked rows (SOZ, outlier, overlap state), one column per channel."""
    n = len(grid.channels)
    w, h = LABEL_W + CELL * max(n, 1), CELL * 3 + 70
    root = _svg_root(w, h)
    rows = (
        ("SOZ", [STATE_COLORS[OverlapState.SOZ_ONLY] if v else STATE_COLORS[OverlapState.NEITHER] for v in grid.soz]),
        ("LOF outlier", [STATE_COLORS[OverlapState.OUTLIER_ONLY] if v else STATE_COLORS[OverlapState.NEITHER] for v in grid.outlier]),
        ("overlap", [STATE_COLORS[OverlapState(v)] for v in grid.state]),
    )
    for r, (label, fills) in enumerate(rows):
        y = r * CELL
        _text(root, 2, y + CELL - 4, label)
        for c, fill in enumerate(fills):
            ET.SubElement(root, "rect", x=str(LABEL_W + c * CELL), y=str(y), width=str(CELL), height=str(CELL), fill=fill, stroke="white")
    for c, ch in enumerate(grid.channels):
        x = LABEL_W + c * CELL + CELL // 2
        _text(root, x, 3 * CELL + 6, ch.raw, transform=f"rotate(90 {x} {3 * CELL + 6})")
    return _serialize(root)


def heatmap_svg(reports: Sequence[ConcordanceReport], method: str) -> str:
    """Viridis-coloured metric cells with the value overlaid."""
    reports = sorted(reports, key=lambda r: r.patient_id)
    w, h = LABEL_W + 40 * max(len(reports), 1), 20 * (len(METRIC_ROWS) + 1) + 10
    root = _svg_root(w, h)
    for c, r in enumerate(reports):
        _text(root, LABEL_W + c * 40 + 2, 12, r.patient_id)
    for i, metric in enumerate(METRIC_ROWS):
        y = 20 * (i + 1)
        _text(root, 2, y + 14, metric)
        for c, r in enumerate(reports):
            v = getattr(r, f"{method}_{metric}")
            x = LABEL_W + c * 40
            ET.SubElement(root, "rect", x=str(x), y=str(y), width="40", height="20", fill=_viridis(v), stroke="white")
            _text(root, x + 4, y + 14, f"{v:.3f}", fill="white" if v < 0.6 else "black")
    return _serialize(root)
