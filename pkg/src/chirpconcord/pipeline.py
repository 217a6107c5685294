"""Per-patient analysis and the file-producing stages built on it.

Each stage reads and writes the documented file formats, so ``detect`` ->
``match`` -> ``report`` -> ``viz`` reproduces a monolithic ``run``.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from . import __version__
from .channelid import ChannelId, parse_channel
from .cohort import group_metrics
from .concordance import ConcordanceReport, OverlapState, concordance_report, overlap_states
from .features import ChannelFeatureVector, StandardizedMatrix, aggregate_channel_features, standardize
from .ingest import ChirpEvent, ClinicalRecord, Cohort, apply_quality_filter, feature_key
from .lof import LofConfig, LofResult, detect
from .tables import (
    cohort_csv,
    concordance_csv,
    features_csv,
    lof_csv,
    read_concordance_csv,
    read_features_csv,
    read_lof_csv,
)
from .vizdata import (
    FeatureKind,
    embedding3d,
    embedding_csv,
    emit_grids,
    emit_metric_tables,
    event_embedding_csv,
    grid_csv,
    grid_svg,
    heatmap_svg,
    hsl_channel_colors,
    radial_csv,
    radial_projection,
)

THREADS_ENV = "CHIRP_CONCORD_THREADS"
DEFAULT_GROUP_BY = ("outcome", "post_op_progress")

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class DetectResult:
    patient_id: str
    events: tuple[ChirpEvent, ...]
    features: tuple[ChannelFeatureVector, ...]
    matrix: StandardizedMatrix | None
    lof: LofResult
    warnings: tuple[str, ...] = ()

    @property
    def channels(self) -> tuple[ChannelId, ...]:
        return tuple(v.channel for v in self.features)

    @property
    def outliers(self) -> frozenset[ChannelId]:
        return self.lof.outlier_channels()


@dataclass(frozen=True)
class MatchResult:
    report: ConcordanceReport
    channels: tuple[ChannelId, ...]
    soz: frozenset[ChannelId]
    outliers: frozenset[ChannelId]
    states: dict[ChannelId, OverlapState]
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class EmitOptions:
    grids: bool = True
    embeddings: bool = True
    radial_kinds: tuple[FeatureKind, ...] = tuple(FeatureKind)
    radial_scale: bool = False
    svg: bool = False
    per_event_embedding: bool = False
    group_by: tuple[str, ...] = DEFAULT_GROUP_BY


@dataclass
class RunSummary:
    files: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int | None = None) -> list[R]:
    """Map in input order, optionally over a thread pool."""
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def check_patient_id(pid: str) -> None:
    if any(c in pid for c in ("/", "\\", "\0")) or pid in (".", ".."):
        raise ValueError(f"patient_id {pid!r} cannot be used in a file name")


def soz_ids(record: ClinicalRecord) -> frozenset[ChannelId]:
    return frozenset(parse_channel(s) for s in record.soz_channels)


def detect_patient(
    patient_id: str,
    events: Iterable[ChirpEvent],
    config: LofConfig = LofConfig(),
    r2_min: float | None = None,
) -> DetectResult:
    """Filter -> aggregate -> standardize -> LOF -> flag for one patient."""
    kept = tuple(apply_quality_filter(events, r2_min))
    features = tuple(aggregate_channel_features(kept))
    warnings = []
    matrix = standardize(features) if features else None
    if len(features) < 2:
        warnings.append(f"patient {patient_id}: {len(features)} channel(s) with chirp data; no outliers flagged")
    points = matrix.values if matrix is not None else np.zeros((0, 3))
    lof = detect(points, config, [v.channel for v in features])
    return DetectResult(patient_id, kept, features, matrix, lof, tuple(warnings))


def match_patient(
    patient_id: str,
    channels: Sequence[ChannelId],
    outliers: Iterable[ChannelId],
    record: ClinicalRecord,
) -> MatchResult:
    soz = soz_ids(record)
    outliers = frozenset(outliers)
    states, warns = overlap_states(channels, soz, outliers)
    report = concordance_report(patient_id, soz, outliers)
    return MatchResult(
        report=report,
        channels=tuple(channels),
        soz=soz,
        outliers=outliers,
        states=states,
        warnings=tuple(f"patient {patient_id}: {w}" for w in warns),
    )


# -- file stages ----------------------------------------------------------------


def _write(out: Path, name: str, text: str, summary: RunSummary) -> None:
    (out / name).write_text(text, encoding="utf-8", newline="\n")
    summary.files.append(name)


def run_detect(
    cohort: Cohort,
    out: Path,
    config: LofConfig = LofConfig(),
    r2_min: float | None = None,
    summary: RunSummary | None = None,
) -> list[DetectResult]:
    """Write ``features_<p>.csv`` and ``lof_<p>.csv`` for every patient with events."""
    summary = summary if summary is not None else RunSummary()
    patients = [p for p in cohort.patients if p.events]
    for p in patients:
        check_patient_id(p.patient_id)
    results = parallel_map(lambda p: detect_patient(p.patient_id, p.events, config, r2_min), patients)
    out.mkdir(parents=True, exist_ok=True)
    for res in results:
        summary.warnings.extend(res.warnings)
        _write(out, f"features_{res.patient_id}.csv", features_csv(res.features, res.matrix), summary)
        _write(out, f"lof_{res.patient_id}.csv", lof_csv(res.lof), summary)
    return results


def load_lof_dir(lof_dir: Path) -> dict[str, tuple[list[ChannelId], list[bool]]]:
    dumps = {}
    for path in sorted(lof_dir.glob("lof_*.csv")):
        pid = path.name[len("lof_"):-len(".csv")]
        dumps[pid] = read_lof_csv(path.read_text(encoding="utf-8"))
    return dumps


def run_match(
    lof_dumps: dict[str, tuple[list[ChannelId], list[bool]]],
    clinical: Sequence[ClinicalRecord],
    out: Path,
    summary: RunSummary | None = None,
) -> list[MatchResult]:
    """Write ``concordance.csv`` for the union of dumped and clinical patients."""
    summary = summary if summary is not None else RunSummary()
    records = {r.patient_id: r for r in clinical}
    results = []
    for pid in sorted(set(lof_dumps) | set(records)):
        channels, flags = lof_dumps.get(pid, ([], []))
        record = records.get(pid) or ClinicalRecord(patient_id=pid)
        if pid not in records:
            summary.warnings.append(f"patient {pid}: no clinical record; SOZ taken as empty")
        if pid not in lof_dumps:
            summary.warnings.append(f"patient {pid}: no chirp data")
        outliers = [c for c, f in zip(channels, flags) if f]
        res = match_patient(pid, channels, outliers, record)
        summary.warnings.extend(res.warnings)
        results.append(res)
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "concordance.csv", concordance_csv(r.report for r in results), summary)
    return results


def run_report(
    concordance_text: str,
    clinical: Sequence[ClinicalRecord],
    group_by: Sequence[str],
    out: Path,
    summary: RunSummary | None = None,
) -> None:
    """Write ``cohort_<feature>.csv`` per grouping feature.

    Aggregation reads the 6-decimal concordance table, not in-memory values,
    so standalone and monolithic runs agree byte for byte.
    """
    summary = summary if summary is not None else RunSummary()
    reports = read_concordance_csv(concordance_text)
    out.mkdir(parents=True, exist_ok=True)
    for feature in group_by:
        groups = group_metrics(reports, clinical, feature)
        _write(out, f"cohort_{feature_key(feature)}.csv", cohort_csv(groups), summary)


def run_viz(
    work_dir: Path,
    clinical: Sequence[ClinicalRecord],
    out: Path,
    options: EmitOptions = EmitOptions(),
    events: Sequence[ChirpEvent] | None = None,
    summary: RunSummary | None = None,
) -> None:
    """Emit plot tables from the feature dumps, LOF dumps and concordance table in ``work_dir``."""
    summary = summary if summary is not None else RunSummary()
    out.mkdir(parents=True, exist_ok=True)
    records = {r.patient_id: r for r in clinical}
    lof_dumps = load_lof_dir(work_dir)

    events_by_patient: dict[str, list[ChirpEvent]] = {}
    for e in events or ():
        events_by_patient.setdefault(e.patient_id, []).append(e)

    for pid in sorted(set(lof_dumps) | set(records)):
        record = records.get(pid) or ClinicalRecord(patient_id=pid)
        soz = soz_ids(record)
        channels, flags = lof_dumps.get(pid, ([], []))
        outliers = frozenset(c for c, f in zip(channels, flags) if f)
        feature_path = work_dir / f"features_{pid}.csv"
        features = read_features_csv(feature_path.read_text(encoding="utf-8")) if feature_path.exists() else []

        if options.grids:
            states, _ = overlap_states(channels, soz, outliers)
            grid = emit_grids(channels, soz, outliers, states)
            _write(out, f"grids_{pid}.csv", grid_csv(grid), summary)
            if options.svg:
                _write(out, f"grids_{pid}.svg", grid_svg(grid), summary)
        if not features:
            continue
        if options.embeddings:
            _write(out, f"embedding3d_{pid}.csv", embedding_csv(embedding3d(features, soz, outliers)), summary)
        if options.per_event_embedding and events is not None:
            colors = hsl_channel_colors(v.channel for v in features)
            kept = {v.channel.raw for v in features}
            evs = [e for e in events_by_patient.get(pid, ()) if e.channel in kept]
            _write(out, f"embedding3d_events_{pid}.csv", event_embedding_csv(evs, soz, outliers, colors), summary)
        for kind in options.radial_kinds:
            points, warns = radial_projection(features, kind, scale=options.radial_scale)
            summary.warnings.extend(f"patient {pid}: {w}" for w in warns)
            _write(out, f"radial_{kind.value}_{pid}.csv", radial_csv(points), summary)

    conc_path = work_dir / "concordance.csv"
    if conc_path.exists():
        reports = read_concordance_csv(conc_path.read_text(encoding="utf-8"))
        heatmaps, long_csv = emit_metric_tables(reports, clinical, options.group_by)
        for method, text in heatmaps.items():
            _write(out, f"heatmap_{method}.csv", text, summary)
            if options.svg:
                _write(out, f"heatmap_{method}.svg", heatmap_svg(reports, method), summary)
        _write(out, "boxplot_long.csv", long_csv, summary)


def run_all(
    cohort: Cohort,
    out: Path,
    config: LofConfig = LofConfig(),
    r2_min: float | None = None,
    options: EmitOptions = EmitOptions(),
    inputs: dict | None = None,
) -> RunSummary:
    """Full pipeline: detect, match, report and viz, plus ``run_manifest.json``."""
    summary = RunSummary()
    detected = run_detect(cohort, out, config, r2_min, summary)
    dumps = {d.patient_id: (list(d.channels), [bool(f) for f in d.lof.flagged]) for d in detected}
    matched = run_match(dumps, cohort.clinical, out, summary)
    conc_text = (out / "concordance.csv").read_text(encoding="utf-8")
    run_report(conc_text, cohort.clinical, options.group_by, out, summary)
    all_events = None
    if options.per_event_embedding:
        all_events = [e for d in detected for e in d.events]
    run_viz(out, cohort.clinical, out, options, all_events, summary)

    by_id = {d.patient_id: d for d in detected}
    patients = []
    for m in matched:
        d = by_id.get(m.report.patient_id)
        patients.append(
            {
                "patient_id": m.report.patient_id,
                "n_events": len(d.events) if d else 0,
                "n_channels": len(m.channels),
                "n_soz": m.report.n_soz,
                "n_outliers": m.report.n_outliers,
                "effective_k": d.lof.effective_k if d else 0,
                "threshold_tau": d.lof.threshold_tau if d else None,
            }
        )
    manifest = {
        "software": {"name": "chirpconcord", "version": __version__},
        "config": {
            "inputs": inputs or {},
            "n_neighbors": config.n_neighbors,
            "contamination": config.contamination,
            "lrd_cap": config.lrd_cap,
            "r2_min": r2_min,
            "group_by": list(options.group_by),
            "emit": {
                "grids": options.grids,
                "embeddings": options.embeddings,
                "radial_kinds": [k.value for k in options.radial_kinds],
                "radial_scale": options.radial_scale,
                "svg": options.svg,
                "per_event_embedding": options.per_event_embedding,
            },
        },
        "patients": patients,
        "warnings": summary.warnings,
        "files": sorted(summary.files),
    }
    (out / "run_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8", newline="\n")
    return summary
