"""Reading chirp annotations and clinical metadata.

Two on-disk formats are understood:

``chirps.csv``
    One row per annotated chirp with columns ``patient_id, channel,
    onset_time_s, offset_time_s, onset_freq_hz, offset_freq_hz, r2, rmse,
    direction, poor_contact``. ``r2``, ``rmse`` and ``direction`` cells may be
    empty; ``poor_contact`` is ``0`` or ``1``.

``clinical.json``
    An array of objects ``{patient_id, soz_channels, outcome,
    post_op_progress, engel_or_ilae, extra_features}``.

Channel labels are normalized (stripped, uppercased) on the way in.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .channelid import normalize_label

CHIRP_COLUMNS = (
    "patient_id",
    "channel",
    "onset_time_s",
    "offset_time_s",
    "onset_freq_hz",
    "offset_freq_hz",
    "r2",
    "rmse",
    "direction",
    "poor_contact",
)
REQUIRED_CHIRP_COLUMNS = CHIRP_COLUMNS[:6]


class IngestError(ValueError):
    """Base class for input errors."""


class SchemaError(IngestError):
    def __init__(self, column: str, message: str | None = None):
        self.column = column
        super().__init__(message or f"missing required column: {column}")


class RowError(IngestError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ClinicalError(IngestError):
    pass


class Direction(str, enum.Enum):
    UP = "up"
    DOWN = "down"
    FLAT = "flat"


class Outcome(str, enum.Enum):
    S = "S"
    F = "F"
    NR = "NR"
    NA = "na"

    @classmethod
    def parse(cls, value: str | None) -> Outcome:
        if value is None:
            return cls.NA
        text = str(value).strip()
        for member in cls:
            if member.value.upper() == text.upper():
                return member
        return cls.NA


@dataclass(frozen=True)
class ChirpEvent:
    patient_id: str
    channel: str
    onset_time_s: float
    offset_time_s: float
    onset_freq_hz: float
    offset_freq_hz: float
    r2: float | None = None
    rmse: float | None = None
    direction: Direction | None = None
    poor_contact: bool = False

    def __post_init__(self):
        for name in ("onset_time_s", "offset_time_s", "onset_freq_hz", "offset_freq_hz", "r2", "rmse"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ValueError(f"non-finite {name}")
        if self.offset_time_s <= self.onset_time_s:
            raise ValueError("non-positive duration")
        if self.onset_time_s < 0:
            raise ValueError("negative onset time")
        if not (self.onset_freq_hz > 0 and self.offset_freq_hz > 0):
            raise ValueError("frequencies must be positive")
        if self.r2 is not None and not 0.0 <= self.r2 <= 1.0:
            raise ValueError("r2 outside [0, 1]")
        if self.rmse is not None and not self.rmse >= 0.0:
            raise ValueError("negative rmse")

    @property
    def duration_s(self) -> float:
        return self.offset_time_s - self.onset_time_s


@dataclass(frozen=True)
class ClinicalRecord:
    patient_id: str
    soz_channels: frozenset[str] = frozenset()
    outcome: Outcome = Outcome.NA
    post_op_progress: str = ""
    engel_or_ilae: str | None = None
    extra_features: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.patient_id:
            raise ValueError("empty patient_id")

    def feature_value(self, name: str) -> str | None:
        """Value of a clinical feature by name, or None when absent."""
        key = feature_key(name)
        if key == "outcome":
            return self.outcome.value
        if key == "post_op_progress":
            return self.post_op_progress or None
        if key == "engel_or_ilae":
            return self.engel_or_ilae or None
        for k, v in self.extra_features.items():
            if feature_key(k) == key:
                return v if v != "" else None
        return None


BUILTIN_FEATURES = ("outcome", "post_op_progress", "engel_or_ilae")


def feature_key(name: str) -> str:
    """Canonical feature name: ``"Post-op Progress"`` -> ``"post_op_progress"``."""
    return "_".join(name.strip().lower().replace("-", " ").split())


@dataclass(frozen=True)
class PatientData:
    patient_id: str
    events: tuple[ChirpEvent, ...]
    clinical: ClinicalRecord


@dataclass(frozen=True)
class Cohort:
    patients: tuple[PatientData, ...]

    def __post_init__(self):
        ids = [p.patient_id for p in self.patients]
        if ids != sorted(ids) or len(set(ids)) != len(ids):
            raise ValueError("patients must be unique and sorted by patient_id")
        for p in self.patients:
            if any(e.patient_id != p.patient_id for e in p.events):
                raise ValueError(f"event patient_id mismatch in {p.patient_id}")

    def __len__(self) -> int:
        return len(self.patients)

    @property
    def clinical(self) -> list[ClinicalRecord]:
        return [p.clinical for p in self.patients]


def _decode(data: bytes | str) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data


def _float(value: str | None, column: str, line: int) -> float:
    if value is None or value.strip() == "":
        raise RowError(line, f"missing value in column {column}")
    try:
        return float(value)
    except ValueError:
        raise RowError(line, f"non-numeric value {value!r} in column {column}") from None


def _optional_float(value: str | None, column: str, line: int) -> float | None:
    if value is None or value.strip() == "":
        return None
    return _float(value, column, line)


def parse_chirp_table(data: bytes | str) -> list[ChirpEvent]:
    """Parse ``chirps.csv`` content into events, preserving row order."""
    reader = csv.DictReader(io.StringIO(_decode(data), newline=""))
    header = [h.strip() for h in (reader.fieldnames or [])]
    reader.fieldnames = header
    for col in REQUIRED_CHIRP_COLUMNS:
        if col not in header:
            raise SchemaError(col)

    events = []
    for row in reader:
        line = reader.line_num
        if all((v or "").strip() == "" for k, v in row.items() if k is not None):
            continue
        pid = (row["patient_id"] or "").strip()
        channel = normalize_label(row["channel"] or "")
        if not pid:
            raise RowError(line, "empty patient_id")
        if not channel:
            raise RowError(line, "empty channel")

        direction = (row.get("direction") or "").strip().lower()
        if direction:
            try:
                direction = Direction(direction)
            except ValueError:
                raise RowError(line, f"unknown direction {direction!r}") from None
        else:
            direction = None

        poor = (row.get("poor_contact") or "").strip()
        if poor not in ("", "0", "1"):
            raise RowError(line, f"poor_contact must be 0 or 1, got {poor!r}")

        try:
            events.append(
                ChirpEvent(
                    patient_id=pid,
                    channel=channel,
                    onset_time_s=_float(row["onset_time_s"], "onset_time_s", line),
                    offset_time_s=_float(row["offset_time_s"], "offset_time_s", line),
                    onset_freq_hz=_float(row["onset_freq_hz"], "onset_freq_hz", line),
                    offset_freq_hz=_float(row["offset_freq_hz"], "offset_freq_hz", line),
                    r2=_optional_float(row.get("r2"), "r2", line),
                    rmse=_optional_float(row.get("rmse"), "rmse", line),
                    direction=direction,
                    poor_contact=poor == "1",
                )
            )
        except ValueError as exc:
            if isinstance(exc, IngestError):
                raise
            raise RowError(line, str(exc)) from None
    return events


def parse_clinical(data: bytes | str) -> list[ClinicalRecord]:
    try:
        doc = json.loads(_decode(data))
    except json.JSONDecodeError as exc:
        raise ClinicalError(
            f"malformed JSON at line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}"
        ) from None
    if not isinstance(doc, list):
        raise ClinicalError("clinical document must be a JSON array")

    records = []
    seen = set()
    for i, obj in enumerate(doc):
        if not isinstance(obj, dict):
            raise ClinicalError(f"entry {i} is not an object")
        pid = str(obj.get("patient_id") or "").strip()
        if not pid:
            raise ClinicalError(f"entry {i} has no patient_id")
        if pid in seen:
            raise ClinicalError(f"duplicate patient_id: {pid}")
        seen.add(pid)

        soz = obj.get("soz_channels") or []
        if not isinstance(soz, list):
            raise ClinicalError(f"{pid}: soz_channels must be an array")
        extra = obj.get("extra_features") or {}
        if not isinstance(extra, dict):
            raise ClinicalError(f"{pid}: extra_features must be an object")
        engel = obj.get("engel_or_ilae")

        records.append(
            ClinicalRecord(
                patient_id=pid,
                soz_channels=frozenset(normalize_label(str(s)) for s in soz if str(s).strip()),
                outcome=Outcome.parse(obj.get("outcome")),
                post_op_progress=str(obj.get("post_op_progress") or ""),
                engel_or_ilae=None if engel is None else str(engel),
                extra_features={str(k): "" if v is None else str(v) for k, v in extra.items()},
            )
        )
    return records


def apply_quality_filter(events: Iterable[ChirpEvent], r2_min: float | None = None) -> list[ChirpEvent]:
    """Drop poor-contact events and, when ``r2_min`` is set, poorly fit ones.

    Events without an R² value are kept.
    """
    kept = []
    for e in events:
        if e.poor_contact:
            continue
        if r2_min is not None and e.r2 is not None and e.r2 < r2_min:
            continue
        kept.append(e)
    return kept


def build_cohort(events: Iterable[ChirpEvent], clinical: Iterable[ClinicalRecord]) -> Cohort:
    """Group events by patient and join clinical records.

    Patients with events but no clinical record get an empty record;
    patients with a record but no events are kept with no events.
    """
    by_patient: dict[str, list[ChirpEvent]] = {}
    for e in events:
        by_patient.setdefault(e.patient_id, []).append(e)
    records = {r.patient_id: r for r in clinical}

    patients = []
    for pid in sorted(set(by_patient) | set(records)):
        record = records.get(pid)
        if record is None:
            record = ClinicalRecord(patient_id=pid)
        patients.append(PatientData(pid, tuple(by_patient.get(pid, ())), record))
    return Cohort(tuple(patients))


def _fmt_optional(x: float | None) -> str:
    return "" if x is None else repr(x)


def write_chirp_table(events: Iterable[ChirpEvent]) -> str:
    """Serialize events in the ``chirps.csv`` format (lossless floats)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CHIRP_COLUMNS)
    for e in events:
        writer.writerow(
            [
                e.patient_id,
                e.channel,
                repr(e.onset_time_s),
                repr(e.offset_time_s),
                repr(e.onset_freq_hz),
                repr(e.offset_freq_hz),
                _fmt_optional(e.r2),
                _fmt_optional(e.rmse),
                "" if e.direction is None else e.direction.value,
                "1" if e.poor_contact else "0",
            ]
        )
    return buf.getvalue()


def clinical_to_json(record: ClinicalRecord) -> dict:
    obj = {
        "patient_id": record.patient_id,
        "soz_channels": sorted(record.soz_channels),
        "outcome": record.outcome.value,
        "post_op_progress": record.post_op_progress,
    }
    if record.engel_or_ilae is not None:
        obj["engel_or_ilae"] = record.engel_or_ilae
    obj["extra_features"] = dict(sorted(record.extra_features.items()))
    return obj


def write_clinical(records: Iterable[ClinicalRecord]) -> str:
    return json.dumps([clinical_to_json(r) for r in records], indent=2, ensure_ascii=False) + "\n"


def write_cohort(cohort: Cohort) -> tuple[str, str]:
    """Serialize a cohort as ``(chirps_csv, clinical_json)``."""
    events = [e for p in cohort.patients for e in p.events]
    return write_chirp_table(events), write_clinical(cohort.clinical)
