"""Seeded synthetic cohorts with planted SOZ-linked outlier channels.

Random numbers come from numpy's PCG64 bit generator, using only its
uniform doubles (``Generator.random``); normals are derived from those by
the Box-Muller transform. Both pieces have fixed, documented output, so a
given seed yields the same cohort on every platform and numpy release.

Draw order per patient: outlier channel selection (Fisher-Yates), then for
each channel in label order its center, its displacement direction (planted
channels only) and its events.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channelid import parse_channel
from .ingest import ChirpEvent, ClinicalRecord, Direction, Outcome

MIN_VALUE = 1e-3


class _Rng:
    def __init__(self, seed: int):
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def uniform(self) -> float:
        return float(self._gen.random())

    def normal(self) -> float:
        u1 = 1.0 - self.uniform()  # (0, 1]
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def choose(self, n: int, m: int) -> list[int]:
        """m distinct indices out of range(n), sorted."""
        idx = list(range(n))
        for i in range(n - 1, 0, -1):
            j = min(int(self.uniform() * (i + 1)), i)
            idx[i], idx[j] = idx[j], idx[i]
        return sorted(idx[:m])


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic patient.

    Feature vectors are ordered (start frequency Hz, end frequency Hz,
    duration s).
    """

    seed: int = 7
    n_inlier_channels: int = 20
    n_outlier_channels: int = 5
    inlier_center: tuple[float, float, float] = (30.0, 15.0, 3.0)
    inlier_spread: tuple[float, float, float] = (1.5, 0.75, 0.15)
    outlier_displacement_sigmas: float = 10.0
    events_per_channel: int = 5
    label_scheme: tuple[str, ...] = ("LAT", "LAH", "RAT", "RAH", "PD")
    event_jitter: float = 0.25
    patient_id: str = "syn01"
    outcome: Outcome = Outcome.S
    post_op_progress: str = ""
    extra_features: dict[str, str] = field(default_factory=dict)
    guarantee_recovery: bool = False

    def __post_init__(self):
        if not all(s > 0 for s in self.inlier_spread):
            raise ValueError("inlier_spread components must be positive")
        if self.outlier_displacement_sigmas < 0:
            raise ValueError("outlier_displacement_sigmas must be >= 0")
        if self.events_per_channel < 1:
            raise ValueError("events_per_channel must be >= 1")
        if self.n_inlier_channels < 0 or self.n_outlier_channels < 0:
            raise ValueError("channel counts must be >= 0")
        if not self.label_scheme or not all(p.isalpha() for p in self.label_scheme):
            raise ValueError("label_scheme must be non-empty alphabetic prefixes")


def channel_labels(n: int, scheme: tuple[str, ...]) -> list[str]:
    """Labels cycling through the prefixes: LAT1, LAH1, ..., LAT2, ..."""
    return [f"{scheme[i % len(scheme)]}{i // len(scheme) + 1}" for i in range(n)]


def _direction(value: float) -> Direction:
    if value > 0:
        return Direction.UP
    if value < 0:
        return Direction.DOWN
    return Direction.FLAT


def generate_cohort(spec: SynthSpec) -> tuple[list[ChirpEvent], ClinicalRecord]:
    """Chirp events and the clinical record for one synthetic patient.

    Planted channels sit ``outlier_displacement_sigmas`` spreads away from
    the inlier center along a random unit direction; their labels form the
    SOZ.
    """
    if spec.guarantee_recovery and spec.outlier_displacement_sigmas < 3:
        warnings.warn(
            f"displacement {spec.outlier_displacement_sigmas} < 3 sigma: planted outliers may not separate",
            stacklevel=2,
        )
    rng = _Rng(spec.seed)
    n = spec.n_inlier_channels + spec.n_outlier_channels
    labels = channel_labels(n, spec.label_scheme)
    planted = set(rng.choose(n, spec.n_outlier_channels))

    center = np.array(spec.inlier_center, dtype=float)
    spread = np.array(spec.inlier_spread, dtype=float)

    events = []
    for i, label in enumerate(labels):
        noise = np.array([rng.normal() for _ in range(3)])
        if i in planted:
            u = np.array([rng.normal() for _ in range(3)])
            u /= np.linalg.norm(u) or 1.0
            noise = noise + spec.outlier_displacement_sigmas * u
        ch_center = center + spread * noise

        for _ in range(spec.events_per_channel):
            jitter = np.array([rng.normal() for _ in range(3)])
            start, end, duration = np.maximum(ch_center + spec.event_jitter * spread * jitter, MIN_VALUE)
            onset = round(60.0 * rng.uniform(), 6)
            offset = round(onset + max(round(float(duration), 6), MIN_VALUE), 6)
            start, end = round(float(start), 6), round(float(end), 6)
            events.append(
                ChirpEvent(
                    patient_id=spec.patient_id,
                    channel=label,
                    onset_time_s=onset,
                    offset_time_s=offset,
                    onset_freq_hz=max(start, MIN_VALUE),
                    offset_freq_hz=max(end, MIN_VALUE),
                    r2=round(0.8 + 0.2 * rng.uniform(), 6),
                    rmse=round(0.5 * rng.uniform(), 6),
                    direction=_direction(end - start),
                    poor_contact=False,
                )
            )

    record = ClinicalRecord(
        patient_id=spec.patient_id,
        soz_channels=frozenset(parse_channel(labels[i]).raw for i in planted),
        outcome=spec.outcome,
        post_op_progress=spec.post_op_progress,
        extra_features=dict(spec.extra_features),
    )
    return events, record


_FIXTURE_OUTCOMES = (
    (Outcome.S, "seizure free"),
    (Outcome.F, "na"),
    (Outcome.NR, "na"),
    (Outcome.S, "seizure free"),
    (Outcome.F, "na"),
    (Outcome.S, "seizure free x 2 years, then recurred"),
)
_FIXTURE_SURGERY = ("resection", "ablation", "none")


def fixture_specs(seed: int = 7, n_patients: int = 12) -> list[SynthSpec]:
    """Varied patients for end-to-end runs; patient i uses seed ``seed * 1000 + i``.

    The second-to-last patient has no SOZ channels and the last has a
    single channel, so the degenerate paths of the pipeline are exercised.
    """
    specs = []
    for i in range(n_patients):
        outcome, progress = _FIXTURE_OUTCOMES[i % len(_FIXTURE_OUTCOMES)]
        n_in, n_out = 15 + (i * 7) % 20, 1 + i % 5
        if i == n_patients - 2:
            n_out = 0
            outcome = Outcome.NR
        if i == n_patients - 1:
            n_in, n_out = 1, 0
        specs.append(
            SynthSpec(
                seed=seed * 1000 + i,
                n_inlier_channels=n_in,
                n_outlier_channels=n_out,
                outlier_displacement_sigmas=4.0 + (i % 4) * 2.0,
                patient_id=f"syn{i + 1:02d}",
                outcome=outcome,
                post_op_progress=progress,
                extra_features={"surgery_type": _FIXTURE_SURGERY[i % len(_FIXTURE_SURGERY)]},
            )
        )
    return specs


def generate_fixture(seed: int = 7, n_patients: int = 12) -> tuple[list[ChirpEvent], list[ClinicalRecord]]:
    events, records = [], []
    for spec in fixture_specs(seed, n_patients):
        evs, rec = generate_cohort(spec)
        events.extend(evs)
        records.append(rec)
    return events, records
