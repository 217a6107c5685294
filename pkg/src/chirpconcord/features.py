"""Per-channel chirp feature aggregation and per-patient standardization."""
from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channelid import ChannelId, parse_channel
from .ingest import ChirpEvent

FEATURE_NAMES = ("start_freq", "end_freq", "duration")


@dataclass(frozen=True)
class ChannelFeatureVector:
    channel: ChannelId
    median_start_freq_hz: float
    median_end_freq_hz: float
    median_duration_s: float
    n_events: int

    def as_tuple(self) -> tuple[float, float, float]:
        """Features in column order (start freq, end freq, duration)."""
        return (self.median_start_freq_hz, self.median_end_freq_hz, self.median_duration_s)


@dataclass(frozen=True)
class StandardizedMatrix:
    channels: tuple[ChannelId, ...]
    values: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    degenerate_features: frozenset[int]


def aggregate_channel_features(events: Iterable[ChirpEvent]) -> list[ChannelFeatureVector]:
    """Median (start freq, end freq, duration) per channel, sorted by label.

    Even-sized groups take the mean of the two middle values.
    """
    groups: dict[str, list[ChirpEvent]] = {}
    patients = set()
    for e in events:
        groups.setdefault(e.channel, []).append(e)
        patients.add(e.patient_id)
    if len(patients) > 1:
        raise ValueError(f"events span several patients: {sorted(patients)}")

    out = []
    for label in sorted(groups):
        evs = groups[label]
        out.append(
            ChannelFeatureVector(
                channel=parse_channel(label),
                median_start_freq_hz=statistics.median(e.onset_freq_hz for e in evs),
                median_end_freq_hz=statistics.median(e.offset_freq_hz for e in evs),
                median_duration_s=statistics.median(e.duration_s for e in evs),
                n_events=len(evs),
            )
        )
    return out


def feature_matrix(vectors: Sequence[ChannelFeatureVector]) -> np.ndarray:
    return np.array([v.as_tuple() for v in vectors], dtype=float).reshape(len(vectors), 3)


def standardize(vectors: Sequence[ChannelFeatureVector]) -> StandardizedMatrix:
    """Z-score each feature column using the population standard deviation.

    A column whose values are all equal has no spread to scale by; it is
    set to zero and its index recorded in ``degenerate_features``.
    """
    if not vectors:
        raise ValueError("standardize needs at least one channel")
    x = feature_matrix(vectors)
    means = np.zeros(3)
    stds = np.zeros(3)
    z = np.zeros_like(x)
    degenerate = set()
    for j in range(3):
        col = x[:, j]
        if np.all(col == col[0]):
            means[j] = col[0]
            degenerate.add(j)
            continue
        # second centering pass removes the rounding left in the first mean
        mu = col.mean()
        centered = col - mu
        shift = centered.mean()
        centered = centered - shift
        sigma = np.sqrt(np.mean(centered * centered))
        means[j] = mu + shift
        if sigma == 0.0:
            degenerate.add(j)
            continue
        stds[j] = sigma
        z[:, j] = centered / sigma
    return StandardizedMatrix(
        channels=tuple(v.channel for v in vectors),
        values=z,
        means=means,
        stds=stds,
        degenerate_features=frozenset(degenerate),
    )
