"""Command-line entry point wiring the full pipeline.

Subcommands: synth, train, classify, advise, report, correlate.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import advisor, analytics, comfort, features, pipeline, synthgen, telemetry
from .advisor import AdvisorError
from .analytics import AnalyticsError
from .comfort import ComfortError
from .features import FeatureError
from .pipeline import PipelineError, RunConfig
from .som import SomError, SomModel
from .synthgen import SynthError
from .telemetry import TelemetryError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

DATA_ERRORS = (TelemetryError, ComfortError, FeatureError, SomError,
               AdvisorError, AnalyticsError, SynthError, PipelineError,
               OSError, json.JSONDecodeError)

MAIN_MODEL_FILE = "main_som.json"
AUX_MODEL_FILE = "aux_som.json"


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise PipelineError(f"config file {path} must hold a JSON object")
    return cfg


def _run_config(args, cfg: dict) -> RunConfig:
    """Build a RunConfig from config-file values; explicit flags win."""
    kwargs = {}
    for name in ("grid_main", "grid_aux", "clusters", "seed", "k_stable",
                 "peak_threshold", "speed_threshold", "train_split",
                 "kmeans_restarts"):
        if name in cfg:
            value = cfg[name]
            if name in ("grid_main", "grid_aux"):
                value = tuple(value)
            kwargs[name] = value
    if getattr(args, "seed", None) is not None:
        kwargs["seed"] = args.seed
    return RunConfig(**kwargs)


def _load_records(data_dir) -> list[telemetry.DriveRecord]:
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise TelemetryError(f"data directory not found: {data_dir}")
    paths = sorted(data_dir.glob("*.csv"))
    if not paths:
        raise TelemetryError(f"no telemetry CSV files in {data_dir}")
    records = []
    for p in paths:
        channels = telemetry.load_csv(p)
        records.append(telemetry.resample(channels, driver_id=p.stem))
    return records


def _load_models(model_dir) -> tuple[SomModel, SomModel]:
    model_dir = Path(model_dir)
    main_path = model_dir / MAIN_MODEL_FILE
    aux_path = model_dir / AUX_MODEL_FILE
    for p in (main_path, aux_path):
        if not p.is_file():
            raise SomError(f"model file not found: {p}")
    return SomModel.load(main_path), SomModel.load(aux_path)


def _print_profiles(tag: str, profiles) -> None:
    metrics = advisor.PROFILE_METRICS
    print(f"{tag} cluster profiles:")
    print("  label   windows  " + "  ".join(f"{m:>8}" for m in metrics))
    for p in sorted(profiles, key=lambda p: advisor.LABELS.index(p.label)):
        row = "  ".join(f"{p.averages[m]:8.4g}" for m in metrics)
        print(f"  {p.label:<7} {p.member_count:7d}  {row}")


# ---------------------------------------------------------------------------
# Commands

def cmd_synth(args) -> int:
    out = Path(args.out)
    if not out.is_dir():
        raise SynthError(f"output directory not found: {out}")
    seed = args.seed if args.seed is not None else 0
    grid = synthgen.style_grid(base_seed=seed, duration=args.duration)
    written = []
    for i in range(args.drivers):
        label, spec = grid[i % len(grid)]
        if args.drivers > len(grid):
            label = f"{label}_r{i // len(grid)}"
            spec = synthgen.StyleSpec(**{**spec.__dict__,
                                         "seed": spec.seed + 1000 * (i // len(grid))})
        record = synthgen.generate(spec, driver_id=label)
        path = out / f"{label}.csv"
        synthgen.write_csv(record, path)
        written.append(path)
    for p in written:
        print(p)
    return EXIT_OK


def cmd_train(args, cfg: dict) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = _load_records(args.data)
    config = _run_config(args, cfg)
    result = pipeline.train_models(records, config)
    result.main_model.save(out / MAIN_MODEL_FILE)
    result.aux_model.save(out / AUX_MODEL_FILE)
    for tag, model in (("main", result.main_model), ("aux", result.aux_model)):
        qe = model.qe_history
        print(f"{tag} SOM quantization error: {qe[0]:.4f} -> {qe[-1]:.4f}")
    _print_profiles("main", result.main_profiles)
    _print_profiles("aux", result.aux_profiles)
    print(f"models written to {out}")
    return EXIT_OK


def _classify_records(records, main_model, aux_model, config):
    """Per record: (analyzed, [(comfort, fuel)] aligned with windows)."""
    out = []
    for record in records:
        analyzed = pipeline.analyze_record(record, config)
        pairs = [advisor.classify_window(f, main_model, aux_model)
                 for f in analyzed.features]
        out.append((analyzed, pairs))
    return out


def cmd_classify(args, cfg: dict) -> int:
    main_model, aux_model = _load_models(args.models)
    records = _load_records(args.data)
    config = _run_config(args, cfg)
    classified = _classify_records(records, main_model, aux_model, config)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["driver_id", "window_start", "comfort", "fuel"])
        for analyzed, pairs in classified:
            for w, (c, f) in zip(analyzed.windows, pairs):
                writer.writerow([analyzed.record.driver_id, w.start, c, f])
    n = sum(len(pairs) for _, pairs in classified)
    print(f"classified {n} windows -> {args.out}")
    return EXIT_OK


def cmd_advise(args, cfg: dict) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    main_model, aux_model = _load_models(args.models)
    records = _load_records(args.data)
    config = _run_config(args, cfg)
    classified = _classify_records(records, main_model, aux_model, config)
    matrix = advisor.build_advice_matrix()

    with open(out / "advice_events.txt", "w", encoding="utf-8") as fh:
        for analyzed, pairs in classified:
            state = advisor.AdviceState(k_stable=config.k_stable)
            for metrics, pair in zip(analyzed.metrics, pairs):
                event = advisor.stream_advise(state, pair, metrics, matrix)
                if event is not None:
                    fh.write(f"{analyzed.record.driver_id} {event.format()}\n")

    all_pairs = [p for _, pairs in classified for p in pairs]
    advisor.write_intersection_csv(advisor.intersect(all_pairs),
                                   out / "intersection.csv")

    all_metrics = [m for analyzed, _ in classified for m in analyzed.metrics]
    for tag, model, report_metrics in (
            ("main", main_model, ("vr", "msdv_y")),
            ("aux", aux_model, ("fuel",))):
        bmus = []
        for analyzed, _ in classified:
            for f in analyzed.features:
                bmus.append(model.bmu_index(f.vector(model.feature_names)))
        profiles = advisor.profile_clusters(model.partition, bmus, all_metrics)
        for p in profiles:
            p.label = model.labels[p.cluster_id]
        rows = advisor.improvement_report(profiles, metrics=report_metrics)
        advisor.write_improvement_csv(rows, report_metrics,
                                      out / f"improvement_{tag}.csv")
    print(f"advice reports written to {out}")
    return EXIT_OK


def cmd_report(args, cfg: dict) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    main_model, aux_model = _load_models(args.models)
    records = _load_records(args.data)
    config = _run_config(args, cfg)
    classified = _classify_records(records, main_model, aux_model, config)

    all_metrics = [m for analyzed, _ in classified for m in analyzed.metrics]
    analytics.write_summary_csv(analytics.driver_summary(all_metrics),
                                out / "driver_summary.csv")

    by_driver = {analyzed.record.driver_id: pairs for analyzed, pairs in classified}
    for driver_id, table in analytics.driver_heatmap(by_driver).items():
        advisor.write_intersection_csv(table, out / f"heatmap_{driver_id}.csv")

    for analyzed, _ in classified:
        driver_id = analyzed.record.driver_id
        points = np.array([[m.fuel, m.vr] for m in analyzed.metrics])
        surface = analytics.kde2d(points)
        analytics.write_kde_csv(surface, out / f"kde_{driver_id}.csv",
                                out / f"kde_{driver_id}.json")
        print(f"{driver_id}: KDE integral = {surface.integral():.4f}")
    print(f"reports written to {out}")
    return EXIT_OK


def cmd_correlate(args, cfg: dict) -> int:
    records = _load_records(args.data)
    config = _run_config(args, cfg)
    all_features = []
    all_metrics = []
    for record in records:
        analyzed = pipeline.analyze_record(record, config)
        all_features.extend(analyzed.features)
        all_metrics.extend(analyzed.metrics)
    rows, cols, table = features.correlation_table(all_features, all_metrics)
    features.write_correlation_csv(rows, cols, table, args.out)
    print(f"correlation table ({len(rows)} x {len(cols)}) -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing

def build_parser() -> CliParser:
    parser = CliParser(prog="ecoride",
                       description="Eco-driving ride-comfort analysis pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, models=False, data=True):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--seed", type=int, help="random seed")
        if data:
            p.add_argument("--data", required=True, help="telemetry CSV directory")
        if models:
            p.add_argument("--models", required=True, help="trained model directory")

    p = sub.add_parser("synth", help="generate synthetic telemetry CSVs")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int, help="base seed for the style grid")
    p.add_argument("--out", required=True, help="output directory (must exist)")
    p.add_argument("--drivers", type=int, default=9, help="number of records")
    p.add_argument("--duration", type=float, default=600.0,
                   help="record duration in seconds")

    p = sub.add_parser("train", help="train and persist both SOMs")
    common(p)
    p.add_argument("--out", required=True, help="model output directory")

    p = sub.add_parser("classify", help="label windows with trained models")
    common(p, models=True)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("advise", help="stream advice + write reports")
    common(p, models=True)
    p.add_argument("--out", required=True, help="report output directory")

    p = sub.add_parser("report", help="driver summaries, KDE surfaces, heatmaps")
    common(p, models=True)
    p.add_argument("--out", required=True, help="report output directory")

    p = sub.add_parser("correlate", help="emit the feature/target PCC table")
    common(p)
    p.add_argument("--out", required=True, help="output CSV path")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on usage errors and --help
        return int(exc.code or 0)
    try:
        cfg = _load_config(args.config) if args.config else {}
        if args.command == "synth":
            if args.drivers < 1:
                raise SynthError("--drivers must be at least 1")
            return cmd_synth(args)
        if args.command == "train":
            return cmd_train(args, cfg)
        if args.command == "classify":
            return cmd_classify(args, cfg)
        if args.command == "advise":
            return cmd_advise(args, cfg)
        if args.command == "report":
            return cmd_report(args, cfg)
        if args.command == "correlate":
            return cmd_correlate(args, cfg)
        parser.error(f"unknown command {args.command}")
    except DATA_ERRORS as exc:
        print(f"ecoride: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
