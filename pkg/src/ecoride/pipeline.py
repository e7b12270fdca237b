"""End-to-end orchestration shared by the CLI and the test suite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import advisor, comfort, features, som, telemetry
from .comfort import WindowMetrics
from .features import AUX_FEATURES, MAIN_FEATURES, WindowFeatures
from .som import SomModel
from .telemetry import DriveRecord, Window


class PipelineError(Exception):
    pass


@dataclass
class RunConfig:
    grid_main: tuple[int, int] = (15, 15)
    grid_aux: tuple[int, int] = (15, 15)
    clusters: int = 3
    seed: int = 0
    k_stable: int = 3
    peak_threshold: float = comfort.PEAK_THRESHOLD
    speed_threshold: float = telemetry.SPEED_THRESHOLD_KMH
    train_split: float = 0.75
    kmeans_restarts: int = 32

    def __post_init__(self):
        if not 0.0 < self.train_split < 1.0:
            raise PipelineError("train_split must be in (0, 1)")
        if self.peak_threshold <= 0 or self.speed_threshold <= 0:
            raise PipelineError("thresholds must be positive")


@dataclass
class AnalyzedRecord:
    record: DriveRecord
    windows: list[Window]
    metrics: list[WindowMetrics]
    features: list[WindowFeatures]


def analyze_record(record: DriveRecord, config: RunConfig | None = None) -> AnalyzedRecord:
    """Window a record, drop slow-traffic windows, compute metrics + features."""
    config = config or RunConfig()
    windows = telemetry.filter_by_mean_speed(
        telemetry.split_windows(record), config.speed_threshold)
    return AnalyzedRecord(
        record=record,
        windows=windows,
        metrics=comfort.window_metrics(record, windows, config.peak_threshold),
        features=features.compute_features(record, windows),
    )


def _train_one(train_vectors: np.ndarray, all_vectors: np.ndarray,
               metrics: list[WindowMetrics], feature_names, grid_dims,
               ordering_metric: str, config: RunConfig,
               seed_offset: int) -> tuple[SomModel, list[advisor.ClusterProfile]]:
    normalizer = features.fit_normalizer(train_vectors, feature_names)
    normalized = normalizer.transform(train_vectors)
    rows, cols = grid_dims
    grid = som.init_random(rows, cols, normalized, seed=config.seed + seed_offset)
    schedule = som.default_schedule(len(normalized), rows, cols)
    trained, qe = som.train(grid, normalized, schedule,
                            seed=config.seed + seed_offset + 1)
    hits = som.hit_histogram(trained, normalized)
    partition = som.cluster_prototypes(trained, config.clusters,
                                       restarts=config.kmeans_restarts,
                                       seed=config.seed + seed_offset + 2,
                                       hit_counts=hits)
    bmus = [som.bmu(trained, v)[0] for v in normalizer.transform(all_vectors)]
    profiles = advisor.profile_clusters(partition, bmus, metrics)
    advisor.label_clusters(profiles, ordering_metric=ordering_metric)
    labels = [None] * config.clusters
    for p in profiles:
        labels[p.cluster_id] = p.label
    model = SomModel(grid=trained, normalizer=normalizer, partition=partition,
                     labels=labels, schedule=schedule,
                     train_seed=config.seed + seed_offset + 1,
                     cluster_seed=config.seed + seed_offset + 2,
                     qe_history=qe)
    return model, profiles


@dataclass
class TrainResult:
    main_model: SomModel
    aux_model: SomModel
    main_profiles: list[advisor.ClusterProfile]
    aux_profiles: list[advisor.ClusterProfile]
    analyzed: list[AnalyzedRecord] = field(repr=False, default_factory=list)

    @property
    def all_metrics(self) -> list[WindowMetrics]:
        return [m for a in self.analyzed for m in a.metrics]

    @property
    def all_features(self) -> list[WindowFeatures]:
        return [f for a in self.analyzed for f in a.features]


def train_models(records: list[DriveRecord], config: RunConfig | None = None) -> TrainResult:
    """Full training pass over a set of drive records.

    The train/test split is chronological per driver (first ``train_split``
    fraction of each record's windows train the maps) to avoid leakage between
    overlapping windows.  Cluster profiles and labels use all windows.
    """
    config = config or RunConfig()
    analyzed = [analyze_record(r, config) for r in records]
    all_metrics = [m for a in analyzed for m in a.metrics]
    if len(all_metrics) < 10:
        raise PipelineError(
            f"only {len(all_metrics)} windows after speed filtering; need >= 10")

    train_feats: list[WindowFeatures] = []
    for a in analyzed:
        n_train = int(round(config.train_split * len(a.features)))
        train_feats.extend(a.features[:n_train])
    all_feats = [f for a in analyzed for f in a.features]

    main_model, main_profiles = _train_one(
        features.feature_matrix(train_feats, MAIN_FEATURES),
        features.feature_matrix(all_feats, MAIN_FEATURES),
        all_metrics, MAIN_FEATURES, config.grid_main, "vr", config, seed_offset=0)
    aux_model, aux_profiles = _train_one(
        features.feature_matrix(train_feats, AUX_FEATURES),
        features.feature_matrix(all_feats, AUX_FEATURES),
        all_metrics, AUX_FEATURES, config.grid_aux, "fuel", config, seed_offset=100)
    return TrainResult(main_model=main_model, aux_model=aux_model,
                       main_profiles=main_profiles, aux_profiles=aux_profiles,
                       analyzed=analyzed)


def classify_all(analyzed: list[AnalyzedRecord], main_model: SomModel,
                 aux_model: SomModel) -> list[tuple[str, str]]:
    return [advisor.classify_window(f, main_model, aux_model)
            for a in analyzed for f in a.features]
