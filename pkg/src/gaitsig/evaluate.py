"""Map labeling, classification, leave-one-out validation and Cohen's kappa.

A trained map is labeled from training vectors: each node takes the
majority label of the vectors whose best match it is (ties to the lowest
class in canonical order), and nodes nobody hit inherit the label of the
nearest labeled node in grid distance. Classification of a new vector is
the label of its best-matching node.

Leave-one-out validation repeats train/label/classify N times, holding out
one vector per fold with a fold-derived RNG seed (base + fold index), and
aggregates held-out predictions into a confusion matrix, the recognition
rate, its dispersion across folds, and kappa = (p_o - p_e)/(1 - p_e).
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .data import ClassLabel
from .features import FeatureVector
from .som import SomMap, TrainSchedule, best_match, clusters, init, train, umatrix


@dataclass(frozen=True, eq=False)
class LabeledMap:
    som: SomMap
    node_labels: tuple[ClassLabel, ...]
    cluster_ids: np.ndarray  # node -> cluster id (BORDER for ridge nodes)
    cluster_labels: Mapping[int, ClassLabel]

    def __post_init__(self) -> None:
        if len(self.node_labels) != self.som.n_nodes:
            raise ValueError("need one label per node")
        object.__setattr__(self, "cluster_labels", dict(self.cluster_labels))


def _majority(labels: Sequence[ClassLabel]) -> ClassLabel:
    counts = Counter(labels)
    top = max(counts.values())
    return min(lab for lab, c in counts.items() if c == top)


def label_map(som: SomMap, training: Sequence[FeatureVector]) -> LabeledMap:
    """Label every node from the training set (majority vote per node,
    nearest-labeled-node inheritance for empty nodes) and give each
    U-Matrix cluster its majority label."""
    if not som.trained:
        raise RuntimeError("cannot label an untrained map")
    if not training:
        raise ValueError("training set must be non-empty")
    if any(fv.label is None for fv in training):
        raise ValueError("training vectors must be labeled")

    hits: dict[int, list[ClassLabel]] = {}
    bmus = []
    for fv in training:
        node = best_match(som, fv.values)
        bmus.append(node)
        hits.setdefault(node, []).append(fv.label)

    node_labels: list[ClassLabel | None] = [None] * som.n_nodes
    for node, labs in hits.items():
        node_labels[node] = _majority(labs)

    labeled = np.array(sorted(hits), dtype=int)
    coords = som.grid_coords()
    for i in range(som.n_nodes):
        if node_labels[i] is None:
            d2 = np.einsum("nk,nk->n", coords[labeled] - coords[i], coords[labeled] - coords[i])
            # argmin takes the first minimum; `labeled` is sorted row-major,
            # so grid-distance ties resolve to the lowest node index
            node_labels[i] = node_labels[labeled[int(np.argmin(d2))]]

    ids = clusters(umatrix(som))
    flat_ids = ids.reshape(-1)
    cluster_hits: dict[int, list[ClassLabel]] = {}
    for fv, node in zip(training, bmus):
        cid = int(flat_ids[node])
        if cid >= 0:
            cluster_hits.setdefault(cid, []).append(fv.label)
    cluster_labels = {cid: _majority(labs) for cid, labs in sorted(cluster_hits.items())}

    return LabeledMap(
        som=som,
        node_labels=tuple(node_labels),
        cluster_ids=ids,
        cluster_labels=cluster_labels,
    )


def classify(lm: LabeledMap, x: FeatureVector | np.ndarray) -> ClassLabel:
    values = np.asarray(getattr(x, "values", x), dtype=float)
    return lm.node_labels[best_match(lm.som, values)]


def kappa(confusion: np.ndarray) -> float:
    """Cohen's kappa of a class x class count matrix."""
    m = np.asarray(confusion, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("confusion matrix must be square")
    if np.any(m < 0):
        raise ValueError("confusion counts must be >= 0")
    total = m.sum()
    if total <= 0:
        raise ValueError("confusion matrix must have positive total count")
    p_o = np.trace(m) / total
    p_e = float((m.sum(axis=1) / total) @ (m.sum(axis=0) / total))
    if p_e >= 1.0:
        raise ValueError("kappa undefined: expected agreement p_e = 1")
    return float((p_o - p_e) / (1.0 - p_e))


@dataclass(frozen=True)
class FoldRecord:
    held_out: str
    true: ClassLabel
    predicted: ClassLabel


@dataclass(frozen=True, eq=False)
class EvalReport:
    classes: tuple[ClassLabel, ...]
    confusion: np.ndarray  # rows = true class, cols = predicted
    recognition_rate: float
    rate_dispersion: float
    kappa: float
    folds: tuple[FoldRecord, ...]

    def __post_init__(self) -> None:
        m = np.array(self.confusion, dtype=int)
        if m.shape != (len(self.classes), len(self.classes)) or np.any(m < 0):
            raise ValueError("confusion matrix inconsistent with classes")
        m.setflags(write=False)
        object.__setattr__(self, "confusion", m)
        if not 0.0 <= self.recognition_rate <= 1.0:
            raise ValueError("recognition_rate must be in [0, 1]")
        if not -1.0 <= self.kappa <= 1.0:
            raise ValueError("kappa must be in [-1, 1]")


def loocv(
    data: Sequence[FeatureVector],
    schedule: TrainSchedule,
    rows: int = 10,
    cols: int = 10,
) -> EvalReport:
    """Leave-one-out validation: N train/label/classify rounds, fold i
    seeded with schedule.rng_seed + i."""
    n = len(data)
    if n < 2:
        raise ValueError("leave-one-out needs at least 2 samples")
    if any(fv.label is None for fv in data):
        raise ValueError("all vectors must be labeled")
    classes = tuple(sorted({fv.label for fv in data}))
    if len(classes) < 2:
        raise ValueError("kappa undefined for single-class data")
    index = {lab: i for i, lab in enumerate(classes)}

    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    outcomes = np.zeros(n)
    folds = []
    for i in range(n):
        held_out = data[i]
        training = [fv for j, fv in enumerate(data) if j != i]
        x_train = np.stack([fv.values for fv in training])
        fold_schedule = replace(schedule, rng_seed=schedule.rng_seed + i)
        som = init(rows, cols, x_train.shape[1], fold_schedule, samples=x_train)
        som = train(som, x_train)
        predicted = classify(label_map(som, training), held_out)
        confusion[index[held_out.label], index[predicted]] += 1
        outcomes[i] = 1.0 if predicted == held_out.label else 0.0
        folds.append(FoldRecord(held_out=held_out.subject_id, true=held_out.label, predicted=predicted))

    return EvalReport(
        classes=classes,
        confusion=confusion,
        recognition_rate=float(outcomes.mean()),
        rate_dispersion=float(outcomes.std()),
        kappa=kappa(confusion),
        folds=tuple(folds),
    )


# --- report output ----------------------------------------------------------


def report_to_dict(report: EvalReport) -> dict:
    return {
        "classes": [c.value for c in report.classes],
        "confusion": [[int(v) for v in row] for row in report.confusion],
        "recognition_rate": report.recognition_rate,
        "rate_dispersion": report.rate_dispersion,
        "kappa": report.kappa,
        "folds": [
            {"held_out": f.held_out, "true": f.true.value, "predicted": f.predicted.value}
            for f in report.folds
        ],
    }


def write_report_json(report: EvalReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_report_table(report: EvalReport) -> str:
    names = [c.value for c in report.classes]
    width = max(8, *(len(n) for n in names)) + 2
    lines = [
        f"recognition rate: {report.recognition_rate:.4f} "
        f"(dispersion {report.rate_dispersion:.4f})",
        f"kappa: {report.kappa:.4f}",
        "confusion (rows = true, cols = predicted):",
        " " * width + "".join(n.rjust(width) for n in names),
    ]
    for name, row in zip(names, report.confusion):
        lines.append(name.rjust(width) + "".join(str(int(v)).rjust(width) for v in row))
    return "\n".join(lines) + "\n"


def write_report_table(report: EvalReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_report_table(report))


def write_confusion_csv(report: EvalReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        names = [c.value for c in report.classes]
        fh.write("true\\predicted," + ",".join(names) + "\n")
        for name, row in zip(names, report.confusion):
            fh.write(name + "," + ",".join(str(int(v)) for v in row) + "\n")
