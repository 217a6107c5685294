"""Command line interface.

Exit codes: 0 ok, 1 input error, 2 empty cohort, 64 usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .cohort import check_features
from .ingest import (
    IngestError,
    apply_quality_filter,
    build_cohort,
    parse_chirp_table,
    parse_clinical,
    write_chirp_table,
    write_clinical,
)
from .lof import DEFAULT_CONTAMINATION, DEFAULT_N_NEIGHBORS, LofConfig
from .pipeline import (
    DEFAULT_GROUP_BY,
    EmitOptions,
    RunSummary,
    load_lof_dir,
    run_all,
    run_detect,
    run_match,
    run_report,
    run_viz,
)
from .synth import SynthSpec, generate_cohort, generate_fixture
from .vizdata import FeatureKind

logger = logging.getLogger("chirpconcord")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_EMPTY = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class EmptyCohort(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_lof_args(p):
    p.add_argument("--k", type=int, default=DEFAULT_N_NEIGHBORS, help="LOF neighborhood size (default 20)")
    p.add_argument("--contamination", type=float, default=DEFAULT_CONTAMINATION, help="fraction flagged (default 0.2)")
    p.add_argument("--r2-min", type=float, default=None, help="drop events whose fit R^2 is below this")


def _add_emit_args(p):
    p.add_argument("--svg", action="store_true", help="also write SVG grids and heatmaps")
    p.add_argument("--per-event-embedding", action="store_true", help="also write one 3D point per chirp")
    p.add_argument("--no-grids", action="store_true")
    p.add_argument("--no-embeddings", action="store_true")
    p.add_argument(
        "--radial-kinds",
        default=",".join(k.value for k in FeatureKind),
        help="comma list of duration,start_freq,end_freq,bandwidth,slope (empty for none)",
    )
    p.add_argument("--radial-scale", action="store_true", help="min-max scale radii to [0, 1]")
    p.add_argument("--group-by", default=",".join(DEFAULT_GROUP_BY), help="clinical features, comma separated")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chirpconcord", description="Chirp outlier detection and SOZ concordance.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("run", help="full pipeline")
    p.add_argument("--chirps", type=Path, required=True)
    p.add_argument("--clinical", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_lof_args(p)
    _add_emit_args(p)

    p = sub.add_parser("detect", help="features and LOF dumps only")
    p.add_argument("--chirps", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_lof_args(p)

    p = sub.add_parser("match", help="concordance.csv from LOF dumps")
    p.add_argument("--lof-dir", type=Path, required=True)
    p.add_argument("--clinical", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("report", help="cohort tables from concordance.csv")
    p.add_argument("--concordance", type=Path, required=True)
    p.add_argument("--clinical", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--group-by", default=",".join(DEFAULT_GROUP_BY))

    p = sub.add_parser("viz", help="plot tables from a detect/match work directory")
    p.add_argument("--work", type=Path, required=True, help="directory holding features_, lof_ and concordance.csv")
    p.add_argument("--clinical", type=Path, required=True)
    p.add_argument("--chirps", type=Path, help="needed for --per-event-embedding")
    p.add_argument("--r2-min", type=float, default=None)
    p.add_argument("--out", type=Path, required=True)
    _add_emit_args(p)

    p = sub.add_parser("synth", help="write a synthetic chirps.csv / clinical.json")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--patients", type=int, default=12, help="fixture size (ignored with --single)")
    p.add_argument("--single", action="store_true", help="one patient built from the options below")
    p.add_argument("--n-inliers", type=int, default=20)
    p.add_argument("--n-outliers", type=int, default=5)
    p.add_argument("--displacement", type=float, default=10.0)
    p.add_argument("--events-per-channel", type=int, default=5)
    return parser


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_clinical(path: Path):
    try:
        return parse_clinical(_read(path))
    except IngestError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_events(path: Path):
    try:
        events = parse_chirp_table(_read(path))
    except IngestError as exc:
        raise InputError(f"{path}: {exc}") from None
    if not events:
        raise EmptyCohort(f"{path}: no chirp events")
    return events


def _lof_config(args) -> LofConfig:
    try:
        return LofConfig(n_neighbors=args.k, contamination=args.contamination)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit_options(args) -> EmitOptions:
    try:
        kinds = tuple(FeatureKind(k) for k in _csv_list(args.radial_kinds))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return EmitOptions(
        grids=not args.no_grids,
        embeddings=not args.no_embeddings,
        radial_kinds=kinds,
        radial_scale=args.radial_scale,
        svg=args.svg,
        per_event_embedding=args.per_event_embedding,
        group_by=tuple(_csv_list(args.group_by)),
    )


def _check_group_by(clinical, names):
    try:
        check_features(clinical, names)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None


def _check_nonempty(cohort, r2_min):
    if not any(apply_quality_filter(p.events, r2_min) for p in cohort.patients):
        raise EmptyCohort("no chirp events survive the quality filter")


def cmd_run(args) -> RunSummary:
    config = _lof_config(args)
    options = _emit_options(args)
    clinical = _load_clinical(args.clinical)
    _check_group_by(clinical, options.group_by)
    events = _load_events(args.chirps)
    _check_group_by(clinical, options.group_by)
    cohort = build_cohort(events, clinical)
    _check_nonempty(cohort, args.r2_min)
    inputs = {"chirps": str(args.chirps), "clinical": str(args.clinical)}
    return run_all(cohort, args.out, config, args.r2_min, options, inputs=inputs)


def cmd_detect(args) -> RunSummary:
    config = _lof_config(args)
    cohort = build_cohort(_load_events(args.chirps), [])
    _check_nonempty(cohort, args.r2_min)
    summary = RunSummary()
    run_detect(cohort, args.out, config, args.r2_min, summary)
    return summary


def cmd_match(args) -> RunSummary:
    clinical = _load_clinical(args.clinical)
    if not args.lof_dir.is_dir():
        raise InputError(f"cannot read {args.lof_dir}: not a directory")
    dumps = load_lof_dir(args.lof_dir)
    if not dumps and not clinical:
        raise EmptyCohort("no LOF dumps and no clinical records")
    summary = RunSummary()
    run_match(dumps, clinical, args.out, summary)
    return summary


def cmd_report(args) -> RunSummary:
    clinical = _load_clinical(args.clinical)
    group_by = _csv_list(args.group_by)
    _check_group_by(clinical, group_by)
    text = _read(args.concordance).decode("utf-8")
    summary = RunSummary()
    try:
        run_report(text, clinical, group_by, args.out, summary)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    return summary


def cmd_viz(args) -> RunSummary:
    options = _emit_options(args)
    clinical = _load_clinical(args.clinical)
    _check_group_by(clinical, options.group_by)
    events = _load_events(args.chirps) if args.chirps else None
    if events is not None:
        events = apply_quality_filter(events, args.r2_min)
    summary = RunSummary()
    run_viz(args.work, clinical, args.out, options, events, summary)
    return summary


def cmd_synth(args) -> RunSummary:
    if args.single:
        events, record = generate_cohort(
            SynthSpec(
                seed=args.seed,
                n_inlier_channels=args.n_inliers,
                n_outlier_channels=args.n_outliers,
                outlier_displacement_sigmas=args.displacement,
                events_per_channel=args.events_per_channel,
            )
        )
        records = [record]
    else:
        events, records = generate_fixture(args.seed, args.patients)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "chirps.csv").write_text(write_chirp_table(events), encoding="utf-8", newline="\n")
    (args.out / "clinical.json").write_text(write_clinical(records), encoding="utf-8", newline="\n")
    return RunSummary(files=["chirps.csv", "clinical.json"])


COMMANDS = {
    "run": cmd_run,
    "detect": cmd_detect,
    "match": cmd_match,
    "report": cmd_report,
    "viz": cmd_viz,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        summary = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"chirpconcord: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"chirpconcord: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmptyCohort as exc:
        print(f"chirpconcord: empty cohort: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except ValueError as exc:
        print(f"chirpconcord: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    for w in summary.warnings:
        logger.warning(w)
    logger.info("wrote %d file(s)", len(summary.files))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
