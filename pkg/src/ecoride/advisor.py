"""Cluster labeling, improvement reports, the joint advice matrix and the
streaming advice state machine."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .comfort import WindowMetrics
from .features import AUX_FEATURES, MAIN_FEATURES, WindowFeatures
from .som import ClusterPartition, SomModel

LABELS = ("Low", "Medium", "High")

PROFILE_METRICS = ("msdv_y", "vr", "n_x_pos", "n_x_neg", "n_y", "fuel")

COMFORT_ADVICE = {
    "High": "Operate steering wheel more smoothly",
    "Medium": "Release gas pedal",
    "Low": "Avoid braking peaks",  # conditional on a braking peak in the window
}
FUEL_ADVICE = {
    "High": "Keep gas pedal steady / switch to a higher gear",
    "Medium": "Release gas pedal / switch to a lower gear",
    "Low": "Keep driving style",
}


class AdvisorError(Exception):
    pass


@dataclass
class ClusterProfile:
    """Per-cluster averages and variances of the comfort/fuel metrics."""

    cluster_id: int
    member_count: int
    averages: dict[str, float]
    variances: dict[str, float]
    label: str | None = None


def profile_clusters(partition: ClusterPartition, bmu_indices,
                     metrics: list[WindowMetrics]) -> list[ClusterProfile]:
    """Average and population variance of each metric over member windows."""
    bmu_indices = np.asarray(bmu_indices, dtype=int)
    if len(bmu_indices) != len(metrics):
        raise AdvisorError("bmu assignment and metrics counts differ")
    cluster_ids = partition.assignment[bmu_indices]
    profiles = []
    for cid in range(partition.cluster_count):
        member_idx = np.flatnonzero(cluster_ids == cid)
        if member_idx.size == 0:
            raise AdvisorError(f"cluster {cid} has no member windows")
        averages = {}
        variances = {}
        for name in PROFILE_METRICS:
            vals = np.array([getattr(metrics[i], name) for i in member_idx], dtype=float)
            averages[name] = float(vals.mean())
            variances[name] = float(vals.var())
        profiles.append(ClusterProfile(cluster_id=cid, member_count=int(member_idx.size),
                                       averages=averages, variances=variances))
    return profiles


def label_clusters(profiles: list[ClusterProfile],
                   ordering_metric: str = "vr") -> list[ClusterProfile]:
    """Tag three clusters Low/Medium/High by ascending metric average.

    Ties break toward the lower cluster id getting the lower label.
    """
    if len(profiles) != len(LABELS):
        raise AdvisorError(f"labeling requires exactly {len(LABELS)} clusters")
    order = sorted(profiles, key=lambda p: (p.averages[ordering_metric], p.cluster_id))
    for label, profile in zip(LABELS, order):
        profile.label = label
    return profiles


@dataclass
class ImprovementRow:
    current: str
    target: str
    reductions: dict[str, float]  # metric -> percent


def improvement_report(profiles: list[ClusterProfile],
                       metrics: tuple[str, ...] = ("vr",)) -> list[ImprovementRow]:
    """Percent reduction of each metric when moving to a better cluster.

    For every (current, target) pair with a lower target average on the first
    metric: 100 * (avg_current - avg_target) / avg_current.
    """
    if any(p.label is None for p in profiles):
        raise AdvisorError("profiles must be labeled first")
    key = metrics[0]
    rows = []
    ordered = sorted(profiles, key=lambda p: p.averages[key])
    for current in ordered:
        for target in ordered:
            if target.averages[key] < current.averages[key]:
                rows.append(ImprovementRow(
                    current=current.label, target=target.label,
                    reductions={m: 100.0 * (current.averages[m] - target.averages[m])
                                / current.averages[m]
                                for m in metrics}))
    return rows


def write_improvement_csv(rows: list[ImprovementRow], metrics, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["current", "target", *[f"{m}_reduction_pct" for m in metrics]])
        for r in rows:
            writer.writerow([r.current, r.target,
                             *[f"{r.reductions[m]:.1f}" for m in metrics]])


# ---------------------------------------------------------------------------
# Advice matrix

@dataclass
class AdviceCell:
    lines: list[str]
    conditional_lines: list[str] = field(default_factory=list)

    def render(self, braking_peak: bool) -> list[str]:
        out = list(self.lines)
        if braking_peak:
            out.extend(self.conditional_lines)
        return out


@dataclass
class AdviceMatrix:
    """3x3 grid of advice lines indexed by (comfort label, fuel label)."""

    cells: dict[tuple[str, str], AdviceCell]

    def advice(self, comfort_label: str, fuel_label: str,
               braking_peak: bool = False) -> list[str]:
        return self.cells[(comfort_label, fuel_label)].render(braking_peak)


def build_advice_matrix() -> AdviceMatrix:
    """Joint advice: the fuel line first, then the comfort line.

    The Low-discomfort comfort line is conditional: it is only emitted when a
    braking peak occurs in the triggering window.
    """
    cells = {}
    for comfort in LABELS:
        for fuel in LABELS:
            lines = [FUEL_ADVICE[fuel]]
            conditional = []
            if comfort == "Low":
                conditional.append(COMFORT_ADVICE["Low"])
            else:
                lines.append(COMFORT_ADVICE[comfort])
            cells[(comfort, fuel)] = AdviceCell(lines=lines,
                                                conditional_lines=conditional)
    return AdviceMatrix(cells=cells)


# ---------------------------------------------------------------------------
# Online classification

def classify_window(window_features: WindowFeatures, main_model: SomModel,
                    aux_model: SomModel) -> tuple[str, str]:
    """(comfort label, fuel label) via BMU -> cluster -> label in each map."""
    comfort = main_model.label_of(window_features.vector(main_model.feature_names))
    fuel = aux_model.label_of(window_features.vector(aux_model.feature_names))
    return comfort, fuel


def intersect(classified: list[tuple[str, str]]) -> np.ndarray:
    """3x3 percentage table, rows = comfort labels, cols = fuel labels."""
    if not classified:
        raise AdvisorError("no classified windows")
    table = np.zeros((3, 3))
    for comfort, fuel in classified:
        table[LABELS.index(comfort), LABELS.index(fuel)] += 1
    return 100.0 * table / len(classified)


def write_intersection_csv(table: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["comfort\\fuel", *LABELS])
        for label, row in zip(LABELS, table):
            writer.writerow([label, *[f"{v:.2f}" for v in row]])


# ---------------------------------------------------------------------------
# Streaming advice

@dataclass
class AdviceState:
    """Single-owner state machine enforcing the advice-stability rule."""

    k_stable: int = 3
    last_emitted: tuple[str, str] | None = None
    candidate: tuple[str, str] | None = None
    consecutive: int = 0


@dataclass
class AdviceEvent:
    window_start: int
    comfort: str
    fuel: str
    lines: list[str]

    def format(self) -> str:
        quoted = " ".join(f'"{line}"' for line in self.lines)
        return (f"window_start={self.window_start} comfort={self.comfort[0]} "
                f"fuel={self.fuel[0]} advice={quoted}")


def stream_advise(state: AdviceState, classification: tuple[str, str],
                  metrics: WindowMetrics, matrix: AdviceMatrix) -> AdviceEvent | None:
    """Advance the stability state machine with one classified window.

    Emits only once the same (comfort, fuel) pair has been seen for
    ``k_stable`` consecutive windows and differs from the last emitted pair.
    The braking-peak conditional is evaluated on the triggering window.
    """
    if classification == state.candidate:
        state.consecutive = min(state.consecutive + 1, state.k_stable)
    else:
        state.candidate = classification
        state.consecutive = 1
    if state.consecutive >= state.k_stable and classification != state.last_emitted:
        state.last_emitted = classification
        comfort, fuel = classification
        lines = matrix.advice(comfort, fuel, braking_peak=metrics.n_x_neg >= 1)
        return AdviceEvent(window_start=metrics.window_start, comfort=comfort,
                           fuel=fuel, lines=lines)
    return None
