"""Scalogram regions and fixed-length feature vectors.

A scalogram splits into four regions: columns at the stance/swing boundary
(60% of the cycle by clinical convention) and rows at the scale midpoint:

    (1) stance, low scale    (2) swing, low scale
    (3) swing, high scale    (4) stance, high scale

Feature vectors sample one scale *level* instead of one region: 20 time
samples (every 5% of the cycle, 0..95%) by 8 scale samples out of the
12-scale grid. The two levels overlap in the middle four scales - the only
reading on which each level can contribute 8 of 12 scales - with LowScale
taking the 8 smallest and HighScale the 8 largest. Values are raw
magnitudes, flattened time-major; per-joint vectors concatenate in the
canonical (joint, side) order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .data import ClassLabel, Joint, Side, part_sort_key
from .wavelet import Scalogram

N_TIME_SAMPLES = 20
N_SCALE_SAMPLES = 8
SINGLE_JOINT_LENGTH = N_TIME_SAMPLES * N_SCALE_SAMPLES  # 160
DEFAULT_STANCE_FRACTION = 0.60


class Level(Enum):
    HIGH_SCALE = "HighScale"
    LOW_SCALE = "LowScale"


@dataclass(frozen=True)
class RegionSplit:
    stance_fraction: float = DEFAULT_STANCE_FRACTION
    level: Level = Level.HIGH_SCALE

    def __post_init__(self) -> None:
        if not 0.0 < self.stance_fraction < 1.0:
            raise ValueError(
                f"stance_fraction must be in (0, 1), got {self.stance_fraction}"
            )


@dataclass(frozen=True, eq=False)
class Regions:
    """The four sub-matrices, named and numbered as in the split diagram."""

    stance_low: np.ndarray   # region 1
    swing_low: np.ndarray    # region 2
    swing_high: np.ndarray   # region 3
    stance_high: np.ndarray  # region 4
    col_split: int           # last stance column index (inclusive)
    row_split: int           # first high-scale row index

    def numbered(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.stance_low, self.swing_low, self.swing_high, self.stance_high)


def split_regions(sc: Scalogram, split: RegionSplit | None = None) -> Regions:
    """Partition the scalogram into the four regions (exact tiling)."""
    if split is None:
        split = RegionSplit()
    target = split.stance_fraction * 100.0
    # column nearest the stance boundary; ties resolve to the lower index
    col = int(np.argmin(np.abs(sc.time_axis - target)))
    row = len(sc.scale_axis) // 2
    v = sc.values
    return Regions(
        stance_low=v[:row, : col + 1],
        swing_low=v[:row, col + 1 :],
        swing_high=v[row:, col + 1 :],
        stance_high=v[row:, : col + 1],
        col_split=col,
        row_split=row,
    )


def level_scale_indices(n_scales: int, level: Level, width: int = N_SCALE_SAMPLES) -> np.ndarray:
    """Scale-row indices of one level: the `width` smallest scales for
    LowScale, the `width` largest for HighScale."""
    if n_scales < width:
        raise ValueError(f"need at least {width} scales, got {n_scales}")
    if level is Level.LOW_SCALE:
        return np.arange(0, width)
    return np.arange(n_scales - width, n_scales)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Flattened scalogram samples: per joint-side part, 20 time x 8 scale
    values in time-major order (t1s1..t1s8, t2s1, ...); parts concatenated
    in canonical order."""

    values: np.ndarray
    subject_id: str
    parts: tuple[tuple[Joint, Side], ...]
    level: Level
    label: ClassLabel | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float)
        expected = SINGLE_JOINT_LENGTH * len(self.parts)
        if arr.ndim != 1 or len(arr) != expected:
            raise ValueError(
                f"feature vector must have length {expected} "
                f"(160 x {len(self.parts)} parts), got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("feature values must be finite and >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "parts", tuple(tuple(p) for p in self.parts))


def _time_sample_columns(time_axis: np.ndarray) -> np.ndarray:
    targets = np.arange(N_TIME_SAMPLES) * 5.0  # 0, 5, .., 95
    cols = []
    for t in targets:
        hits = np.nonzero(np.abs(time_axis - t) < 1e-9)[0]
        if len(hits) != 1:
            raise ValueError(
                f"time axis lacks the {t}% column needed for 5% feature sampling"
            )
        cols.append(hits[0])
    return np.array(cols)


def extract_features(sc: Scalogram, split: RegionSplit | None = None) -> FeatureVector:
    """Sample one scale level of a canonical-grid scalogram into a 160-long
    single-joint feature vector."""
    if split is None:
        split = RegionSplit()
    cols = _time_sample_columns(sc.time_axis)
    rows = level_scale_indices(len(sc.scale_axis), split.level)
    block = sc.values[np.ix_(rows, cols)]  # (8 scales, 20 times)
    return FeatureVector(
        values=block.T.reshape(-1),  # time-major
        subject_id=sc.subject_id,
        parts=((sc.joint, sc.side),),
        level=split.level,
        label=sc.label,
    )


def combine_joints(parts: Sequence[FeatureVector]) -> FeatureVector:
    """Concatenate single-joint vectors of one subject in canonical order
    (joint-major, right before left), regardless of input order."""
    if not parts:
        raise ValueError("no parts to combine")
    first = parts[0]
    for p in parts:
        if len(p.parts) != 1:
            raise ValueError("combine_joints takes single-joint parts")
        if p.subject_id != first.subject_id:
            raise ValueError(
                f"mixed subjects: {p.subject_id!r} vs {first.subject_id!r}"
            )
        if p.level is not first.level:
            raise ValueError(f"mixed levels: {p.level} vs {first.level}")
        if p.label != first.label:
            raise ValueError("mixed labels across parts")
    ordered = sorted(parts, key=lambda p: part_sort_key(*p.parts[0]))
    seen = [p.parts[0] for p in ordered]
    if len(set(seen)) != len(seen):
        raise ValueError(f"duplicate parts: {seen}")
    return FeatureVector(
        values=np.concatenate([p.values for p in ordered]),
        subject_id=first.subject_id,
        parts=tuple(seen),
        level=first.level,
        label=first.label,
    )


@dataclass(frozen=True, eq=False)
class StandardizedVector:
    """Per-vector z-scored copy of a FeatureVector. Standardized values go
    negative, so they live outside the FeatureVector invariant; this
    carrier keeps the provenance the classifier needs."""

    values: np.ndarray
    subject_id: str
    label: ClassLabel | None


def zscore(values: np.ndarray) -> np.ndarray:
    """Standardize one vector to zero mean, unit spread (constant vectors
    just get centered)."""
    values = np.asarray(values, dtype=float)
    centered = values - values.mean()
    sd = values.std()
    return centered / sd if sd > 0 else centered


def standardize(vectors: Sequence[FeatureVector]) -> list[StandardizedVector]:
    """Optional per-vector z-scoring ahead of SOM training (off by default
    in run configs; the canonical pipeline feeds raw magnitudes)."""
    return [
        StandardizedVector(values=zscore(v.values), subject_id=v.subject_id, label=v.label)
        for v in vectors
    ]


# --- feature matrix CSV -----------------------------------------------------


def _parts_token(parts: Sequence[tuple[Joint, Side]]) -> str:
    return "|".join(f"{j.value}:{s.value}" for j, s in parts)


def _parse_parts_token(token: str) -> tuple[tuple[Joint, Side], ...]:
    out = []
    for item in token.split("|"):
        jname, _, sname = item.partition(":")
        out.append((Joint(jname), Side(sname)))
    return tuple(out)


def write_features_csv(vectors: Sequence[FeatureVector], path) -> None:
    if not vectors:
        raise ValueError("no feature vectors to write")
    width = len(vectors[0].values)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(
            f"# layout: n_time={N_TIME_SAMPLES} n_scale={N_SCALE_SAMPLES} "
            "per part, time-major, parts concatenated in canonical order\n"
        )
        names = ",".join(f"f{i:03d}" for i in range(width))
        fh.write(f"subject_id,label,level,parts,{names}\n")
        for v in vectors:
            if len(v.values) != width:
                raise ValueError("feature vectors have mixed lengths")
            label = v.label.value if v.label is not None else ""
            vals = ",".join(repr(float(x)) for x in v.values)
            fh.write(f"{v.subject_id},{label},{v.level.value},{_parts_token(v.parts)},{vals}\n")


def read_features_csv(path) -> list[FeatureVector]:
    vectors = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#") or line.startswith("subject_id,"):
                continue
            sid, label_text, level_text, parts_token, *vals = line.split(",")
            vectors.append(
                FeatureVector(
                    values=np.array([float(v) for v in vals]),
                    subject_id=sid,
                    parts=_parse_parts_token(parts_token),
                    level=Level(level_text),
                    label=ClassLabel(label_text) if label_text else None,
                )
            )
    if not vectors:
        raise ValueError(f"{path}: no feature rows")
    return vectors
