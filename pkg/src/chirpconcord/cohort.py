"""Grouping per-patient concordance metrics by a clinical feature."""
from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .concordance import METRICS, ConcordanceReport
from .ingest import BUILTIN_FEATURES, ClinicalRecord, feature_key

MISSING_VALUE = "na"


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std_dev: float | None


@dataclass(frozen=True)
class GroupSummary:
    clinical_feature: str
    feature_value: str
    patient_count: int
    patient_ids: tuple[str, ...]
    metrics: dict[str, MetricSummary]


def available_features(clinical: Iterable[ClinicalRecord]) -> list[str]:
    names = set(BUILTIN_FEATURES)
    for rec in clinical:
        names.update(feature_key(k) for k in rec.extra_features)
    return sorted(names)


def check_features(clinical: Iterable[ClinicalRecord], features: Iterable[str]) -> None:
    """Raise KeyError naming the available features if any name is unknown."""
    available = available_features(clinical)
    for feature in features:
        if feature_key(feature) not in available:
            raise KeyError(f"unknown clinical feature {feature!r}; available: {', '.join(available)}")


def group_metrics(
    reports: Sequence[ConcordanceReport],
    clinical: Iterable[ClinicalRecord],
    feature: str,
) -> list[GroupSummary]:
    """Mean and sample standard deviation of the six metrics per feature value.

    Patients lacking the feature fall into the ``"na"`` group. Single-patient
    groups carry no deviation.
    """
    clinical = list(clinical)
    check_features(clinical, [feature])
    by_id = {r.patient_id: r for r in clinical}
    missing = [r.patient_id for r in reports if r.patient_id not in by_id]
    if missing:
        raise KeyError(f"no clinical record for patients: {', '.join(sorted(missing))}")

    groups: dict[str, list[ConcordanceReport]] = {}
    for rep in reports:
        value = by_id[rep.patient_id].feature_value(feature)
        groups.setdefault(MISSING_VALUE if value is None else value, []).append(rep)

    out = []
    for value in sorted(groups):
        members = sorted(groups[value], key=lambda r: r.patient_id)
        metrics = {}
        for name in METRICS:
            xs = [getattr(r, name) for r in members]
            # sum/n may round one ulp outside the member range
            mean = min(max(statistics.fmean(xs), min(xs)), max(xs))
            metrics[name] = MetricSummary(
                mean=mean,
                std_dev=statistics.stdev(xs) if len(xs) > 1 else None,
            )
        out.append(
            GroupSummary(
                clinical_feature=feature,
                feature_value=value,
                patient_count=len(members),
                patient_ids=tuple(r.patient_id for r in members),
                metrics=metrics,
            )
        )
    return out
