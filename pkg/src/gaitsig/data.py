"""Joint-angle trajectory containers and dataset ingestion.

Trajectories are sagittal joint angles (degrees) sampled on a uniform grid
of gait-cycle percentage, 0..100% inclusive. The canonical grid has 101
points (one sample per 1%); files on any other uniform grid are linearly
resampled onto it at ingest time.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from functools import total_ordering
from typing import Mapping, Sequence

import numpy as np

CANONICAL_GRID_SIZE = 101
MIN_GRID_SIZE = 21
MAX_ABS_ANGLE_DEG = 180.0

CSV_COLUMNS = ("subject_id", "label", "joint", "side", "pct", "angle_deg")


class ParseError(ValueError):
    """A row or value could not be parsed; message names the offending row."""


class SchemaError(ValueError):
    """The file parsed but violates the dataset schema."""


class Joint(Enum):
    HIP = "Hip"
    KNEE = "Knee"
    ANKLE = "Ankle"


class Side(Enum):
    # Declared order (Right before Left) is the canonical concatenation
    # order for combined right+left feature vectors.
    RIGHT = "Right"
    LEFT = "Left"


_JOINT_ORDER = {j: i for i, j in enumerate(Joint)}
_SIDE_ORDER = {s: i for i, s in enumerate(Side)}


def part_sort_key(joint: Joint, side: Side) -> tuple[int, int]:
    """Canonical (joint, side) ordering: Hip<Knee<Ankle, Right<Left."""
    return (_JOINT_ORDER[joint], _SIDE_ORDER[side])


_KNOWN_LABELS = (
    "Normal",
    "CP-dp",
    "CP-la",
    "CP-ra",
    "CP-lh",
    "CP-rh",
    "Polio",
    "SpinaBifida",
)


@total_ordering
@dataclass(frozen=True)
class ClassLabel:
    """Diagnostic class. Known values sort in declaration order; any other
    non-empty string is an "other" label sorting after the known ones."""

    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("class label must be a non-empty string")

    @property
    def sort_key(self) -> tuple[int, str]:
        try:
            return (_KNOWN_LABELS.index(self.value), self.value)
        except ValueError:
            return (len(_KNOWN_LABELS), self.value)

    def __lt__(self, other: "ClassLabel") -> bool:
        return self.sort_key < other.sort_key

    def __str__(self) -> str:
        return self.value


NORMAL = ClassLabel("Normal")
CP_DP = ClassLabel("CP-dp")
CP_LA = ClassLabel("CP-la")
CP_RA = ClassLabel("CP-ra")
CP_LH = ClassLabel("CP-lh")
CP_RH = ClassLabel("CP-rh")
POLIO = ClassLabel("Polio")
SPINA_BIFIDA = ClassLabel("SpinaBifida")


@dataclass(frozen=True, eq=False)
class GaitTrajectory:
    """One joint's sagittal angle on a uniform cycle-percentage grid.

    Sample k sits at cycle percentage k*100/(grid_size-1). Immutable; the
    samples array is made read-only at construction.
    """

    joint: Joint
    side: Side
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if len(arr) < MIN_GRID_SIZE:
            raise ValueError(
                f"grid_size must be >= {MIN_GRID_SIZE}, got {len(arr)}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("all angle values must be finite")
        if np.max(np.abs(arr)) > MAX_ABS_ANGLE_DEG:
            raise ValueError(f"|angle| must be <= {MAX_ABS_ANGLE_DEG} degrees")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def grid_size(self) -> int:
        return len(self.samples)

    @property
    def pct_axis(self) -> np.ndarray:
        return np.linspace(0.0, 100.0, self.grid_size)


@dataclass(frozen=True, eq=False)
class Subject:
    """Per-subject record: label plus one trajectory per (joint, side)."""

    id: str
    label: ClassLabel
    trajectories: Mapping[tuple[Joint, Side], GaitTrajectory]
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("subject id must be non-empty")
        if not self.trajectories:
            raise ValueError("subject must have at least one trajectory")
        sizes = {t.grid_size for t in self.trajectories.values()}
        if len(sizes) != 1:
            raise ValueError(f"trajectories disagree on grid_size: {sorted(sizes)}")
        object.__setattr__(self, "trajectories", dict(self.trajectories))
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def grid_size(self) -> int:
        return next(iter(self.trajectories.values())).grid_size

    def sorted_parts(self) -> list[tuple[Joint, Side]]:
        return sorted(self.trajectories, key=lambda p: part_sort_key(*p))


def resample(traj: GaitTrajectory, new_grid_size: int) -> GaitTrajectory:
    """Linearly interpolate onto a new uniform grid over [0, 100]%.

    Endpoints are preserved exactly; a no-op when the size is unchanged.
    """
    if new_grid_size < 2:
        raise ValueError(f"new_grid_size must be >= 2, got {new_grid_size}")
    if new_grid_size == traj.grid_size:
        return traj
    new_pct = np.linspace(0.0, 100.0, new_grid_size)
    new_samples = np.interp(new_pct, traj.pct_axis, traj.samples)
    return GaitTrajectory(joint=traj.joint, side=traj.side, samples=new_samples)


# --- CSV / JSON ingestion -------------------------------------------------
#
# CSV schema (UTF-8, header required):
#   subject_id,label,joint,side,pct,angle_deg
# one row per (subject, joint, side, grid point); the pct values of each
# trajectory must form a complete uniform grid over [0, 100].


def _parse_joint(text: str, where: str) -> Joint:
    for j in Joint:
        if j.value == text:
            return j
    raise ParseError(f"{where}: unknown joint {text!r}")


def _parse_side(text: str, where: str) -> Side:
    for s in Side:
        if s.value == text:
            return s
    raise ParseError(f"{where}: unknown side {text!r}")


def _parse_angle(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{where}: angle_deg {text!r} is not a number") from None
    if not np.isfinite(value):
        raise ParseError(f"{where}: angle_deg {text!r} is not finite")
    if abs(value) > MAX_ABS_ANGLE_DEG:
        raise ParseError(f"{where}: |angle_deg| exceeds {MAX_ABS_ANGLE_DEG}")
    return value


def _uniform_grid_samples(
    points: list[tuple[float, float]], where: str
) -> np.ndarray:
    """Validate that (pct, angle) points form a complete uniform grid over
    [0, 100] and return the angles in grid order."""
    points = sorted(points)
    pct = np.array([p for p, _ in points])
    ang = np.array([a for _, a in points])
    n = len(pct)
    if n < 2:
        raise SchemaError(f"{where}: trajectory has only {n} grid point(s)")
    if len(np.unique(pct)) != n:
        raise SchemaError(f"{where}: duplicate pct values")
    expected = np.linspace(0.0, 100.0, n)
    if not np.allclose(pct, expected, rtol=0.0, atol=1e-6):
        raise SchemaError(
            f"{where}: pct values do not form a uniform grid over [0, 100]"
        )
    return ang


def _finish_subject(
    sid: str,
    label: ClassLabel,
    parts: dict[tuple[Joint, Side], np.ndarray],
    meta: Mapping[str, str],
) -> Subject:
    trajectories = {}
    for (joint, side), samples in parts.items():
        traj = GaitTrajectory(joint=joint, side=side, samples=samples)
        if traj.grid_size != CANONICAL_GRID_SIZE:
            traj = resample(traj, CANONICAL_GRID_SIZE)
        trajectories[(joint, side)] = traj
    return Subject(id=sid, label=label, trajectories=trajectories, meta=meta)


def ingest_csv(path) -> list[Subject]:
    """Read a dataset CSV, resampling trajectories to the canonical grid."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if sorted(header) != sorted(CSV_COLUMNS):
            raise SchemaError(
                f"{path}: header must contain exactly {','.join(CSV_COLUMNS)}"
            )
        col = {name: header.index(name) for name in CSV_COLUMNS}

        order: list[str] = []
        labels: dict[str, ClassLabel] = {}
        points: dict[str, dict[tuple[Joint, Side], list[tuple[float, float]]]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            where = f"{path}:{lineno}"
            if len(row) != len(CSV_COLUMNS):
                raise ParseError(f"{where}: expected {len(CSV_COLUMNS)} fields")
            sid = row[col["subject_id"]]
            if not sid:
                raise ParseError(f"{where}: empty subject_id")
            label_text = row[col["label"]]
            if not label_text:
                raise SchemaError(f"{where}: missing label")
            label = ClassLabel(label_text)
            joint = _parse_joint(row[col["joint"]], where)
            side = _parse_side(row[col["side"]], where)
            try:
                pct = float(row[col["pct"]])
            except ValueError:
                raise ParseError(
                    f"{where}: pct {row[col['pct']]!r} is not a number"
                ) from None
            if not 0.0 <= pct <= 100.0:
                raise ParseError(f"{where}: pct {pct} outside [0, 100]")
            angle = _parse_angle(row[col["angle_deg"]], where)

            if sid not in labels:
                order.append(sid)
                labels[sid] = label
                points[sid] = {}
            elif labels[sid] != label:
                raise SchemaError(
                    f"{where}: subject {sid!r} has conflicting labels "
                    f"{labels[sid]} and {label}"
                )
            points[sid].setdefault((joint, side), []).append((pct, angle))

    subjects = []
    for sid in order:
        parts = {}
        for key, pts in points[sid].items():
            where = f"{path}: subject {sid!r} {key[0].value}/{key[1].value}"
            parts[key] = _uniform_grid_samples(pts, where)
        subjects.append(_finish_subject(sid, labels[sid], parts, meta={}))
    if not subjects:
        raise SchemaError(f"{path}: no data rows")
    return subjects


def write_csv(subjects: Sequence[Subject], path) -> None:
    """Write subjects in the dataset CSV schema (canonical column order;
    trajectories in canonical part order). Floats use repr so that
    ingest -> write -> ingest round-trips bit-identically."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for subj in subjects:
            for joint, side in subj.sorted_parts():
                traj = subj.trajectories[(joint, side)]
                for pct, angle in zip(traj.pct_axis, traj.samples):
                    writer.writerow(
                        [
                            subj.id,
                            subj.label.value,
                            joint.value,
                            side.value,
                            repr(float(pct)),
                            repr(float(angle)),
                        ]
                    )


def ingest_json(path) -> list[Subject]:
    """Read the JSON manifest alternative: an array of subjects with inline
    sample arrays. Field names mirror the CSV columns:

    [{"subject_id": ..., "label": ..., "meta": {...},
      "trajectories": [{"joint": ..., "side": ..., "angle_deg": [...]}]}]
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, list) or not doc:
        raise SchemaError(f"{path}: manifest must be a non-empty array")
    subjects = []
    for i, entry in enumerate(doc):
        where = f"{path}: subject #{i}"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: not an object")
        try:
            sid = entry["subject_id"]
            label_text = entry["label"]
            trajs = entry["trajectories"]
        except KeyError as exc:
            raise SchemaError(f"{where}: missing field {exc}") from None
        if not label_text:
            raise SchemaError(f"{where}: missing label")
        meta = entry.get("meta", {})
        parts: dict[tuple[Joint, Side], np.ndarray] = {}
        for t in trajs:
            joint = _parse_joint(t.get("joint", ""), where)
            side = _parse_side(t.get("side", ""), where)
            samples = np.asarray(t.get("angle_deg", []), dtype=float)
            if (joint, side) in parts:
                raise SchemaError(
                    f"{where}: duplicate trajectory {joint.value}/{side.value}"
                )
            parts[(joint, side)] = samples
        subjects.append(_finish_subject(sid, ClassLabel(label_text), parts, meta))
    return subjects


def write_json(subjects: Sequence[Subject], path) -> None:
    doc = [
        {
            "subject_id": subj.id,
            "label": subj.label.value,
            "meta": dict(subj.meta),
            "trajectories": [
                {
                    "joint": joint.value,
                    "side": side.value,
                    "angle_deg": [float(v) for v in subj.trajectories[(joint, side)].samples],
                }
                for joint, side in subj.sorted_parts()
            ],
        }
        for subj in subjects
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
