"""Kohonen self-organizing map: training, U-Matrix, attraction field.

A rectangular grid of nodes (4-neighborhood, row-major indexing) holds one
reference vector per node. Training presents every vector once per epoch
in a seeded shuffled order and pulls each node toward the input:

    w_i <- w_i + alpha(t) * h(i, i*, sigma(t)) * (x - w_i)

where i* is the best-matching unit (minimum Euclidean distance, ties to
the lowest row-major index) and h is a Gaussian or bubble kernel over grid
distance. The product alpha*h is the shrinking neighborhood function whose
decay to zero gives convergence. Updates are applied in the algebraically
equivalent convex form w <- (1-a)*w + a*x, which is bit-exact at a = 1
(the update-rule fixed point) and never overshoots the segment.

The U-Matrix maps each node to the mean distance to its grid neighbors;
valleys are clusters and ridges the borders between them. The attraction
field is the negative discrete gradient of those heights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

BORDER = -1  # cluster id for nodes at or above the threshold

_INIT_STREAM = 0
_TRAIN_STREAM = 1


class Kernel(Enum):
    GAUSSIAN = "Gaussian"
    BUBBLE = "Bubble"


class InitMode(Enum):
    RANDOM_SMALL = "RandomSmall"
    SAMPLE_INIT = "SampleInit"


@dataclass(frozen=True)
class TrainSchedule:
    """Epoch-indexed learning-rate and neighborhood-radius schedules.

    alpha(t) = alpha0 * (1 - t/epochs) at 0-based epoch t, so the rate
    decays toward (not onto) zero; sigma interpolates linearly from sigma0
    (default: max(rows, cols)/2, resolved against the map) to sigma_end.
    """

    epochs: int = 200
    alpha0: float = 0.5
    sigma0: float | None = None
    sigma_end: float = 0.3
    kernel: Kernel = Kernel.GAUSSIAN
    rng_seed: int = 0
    init: InitMode = InitMode.RANDOM_SMALL

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 <= self.alpha0 <= 1.0:
            raise ValueError(f"alpha0 must be in [0, 1], got {self.alpha0}")
        if self.sigma_end < 0:
            raise ValueError("sigma_end must be >= 0")
        if self.sigma0 is not None and self.sigma0 < self.sigma_end:
            raise ValueError("sigma0 must be >= sigma_end (non-increasing sigma)")
        if self.kernel is Kernel.GAUSSIAN and self.sigma_end <= 0:
            raise ValueError("Gaussian kernel needs sigma_end > 0")

    def resolve(self, rows: int, cols: int) -> "TrainSchedule":
        if self.sigma0 is not None:
            return self
        return replace(self, sigma0=max(rows, cols) / 2.0)

    def alpha(self, t: int) -> float:
        return self.alpha0 * (1.0 - t / self.epochs)

    def sigma(self, t: int) -> float:
        if self.sigma0 is None:
            raise ValueError("sigma0 unresolved; call resolve(rows, cols) first")
        if self.epochs == 1:
            return self.sigma0
        frac = t / (self.epochs - 1)
        return self.sigma0 + (self.sigma_end - self.sigma0) * frac


@dataclass(frozen=True, eq=False)
class SomMap:
    """Rectangular map; node i sits at grid position (i // cols, i % cols)."""

    rows: int
    cols: int
    weights: np.ndarray  # (rows*cols, dim)
    schedule: TrainSchedule
    trained: bool = False

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1 or self.rows * self.cols < 2:
            raise ValueError("map needs at least 2 nodes")
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != self.rows * self.cols:
            raise ValueError(
                f"weights shape {w.shape} does not match {self.rows}x{self.cols} nodes"
            )
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_nodes(self) -> int:
        return self.rows * self.cols

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def grid_coords(self) -> np.ndarray:
        r, c = np.divmod(np.arange(self.n_nodes), self.cols)
        return np.column_stack([r, c]).astype(float)

    def grid_dist2(self) -> np.ndarray:
        g = self.grid_coords()
        diff = g[:, None, :] - g[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)


def _kernel_values(dist2: np.ndarray, sigma: float, kernel: Kernel) -> np.ndarray:
    if kernel is Kernel.GAUSSIAN:
        return np.exp(-dist2 / (2.0 * sigma * sigma))
    return (dist2 <= sigma * sigma).astype(float)


def init(
    rows: int,
    cols: int,
    dim: int,
    schedule: TrainSchedule,
    samples: np.ndarray | None = None,
) -> SomMap:
    """Create an untrained map.

    RandomSmall draws weights i.i.d. uniform in [-eps_d, eps_d] per
    dimension d with eps_d = 0.01 * (data range of d if samples are given,
    else 1). SampleInit draws rows*cols samples without replacement (with
    replacement only when there are fewer samples than nodes).
    """
    schedule = schedule.resolve(rows, cols)
    rng = np.random.default_rng([schedule.rng_seed, _INIT_STREAM])
    n_nodes = rows * cols
    if schedule.init is InitMode.SAMPLE_INIT:
        if samples is None or len(samples) == 0:
            raise ValueError("SampleInit requires a non-empty sample set")
        samples = np.asarray(samples, dtype=float)
        idx = rng.choice(len(samples), size=n_nodes, replace=len(samples) < n_nodes)
        weights = samples[idx].copy()
    else:
        if samples is not None and len(samples) > 0:
            samples = np.asarray(samples, dtype=float)
            eps = 0.01 * np.ptp(samples, axis=0)
        else:
            eps = np.full(dim, 0.01)
        weights = rng.uniform(-1.0, 1.0, (n_nodes, dim)) * eps
    return SomMap(rows=rows, cols=cols, weights=weights, schedule=schedule)


def best_match(som: SomMap, x: np.ndarray) -> int:
    """Index of the node nearest x (Euclidean); ties break to the lowest
    row-major index."""
    x = np.asarray(x, dtype=float)
    if x.shape != (som.dim,):
        raise ValueError(f"input dimension {x.shape} does not match map dim {som.dim}")
    diff = som.weights - x
    return int(np.argmin(np.einsum("nd,nd->n", diff, diff)))


def train(som: SomMap, data: np.ndarray) -> SomMap:
    """Train a copy of the map on the data; the input map is untouched.

    Presentation order is reshuffled every epoch from the schedule's seed;
    fixed (data, seed, schedule) reproduce the trained map bit-exactly.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("training data must be a non-empty (n, dim) array")
    if X.shape[1] != som.dim:
        raise ValueError(f"data dimension {X.shape[1]} does not match map dim {som.dim}")
    schedule = som.schedule.resolve(som.rows, som.cols)
    W = som.weights.copy()
    rng = np.random.default_rng([schedule.rng_seed, _TRAIN_STREAM])
    dist2 = som.grid_dist2()
    for t in range(schedule.epochs):
        coef_rows = schedule.alpha(t) * _kernel_values(
            dist2, schedule.sigma(t), schedule.kernel
        )
        for idx in rng.permutation(len(X)):
            x = X[idx]
            diff = W - x
            bmu = int(np.argmin(np.einsum("nd,nd->n", diff, diff)))
            coef = coef_rows[bmu]
            W *= (1.0 - coef)[:, None]
            W += coef[:, None] * x
    return SomMap(rows=som.rows, cols=som.cols, weights=W, schedule=schedule, trained=True)


def quantization_error(som: SomMap, data: np.ndarray) -> float:
    """Mean distance from each vector to its best-matching weight."""
    X = np.asarray(data, dtype=float)
    dists = [float(np.linalg.norm(X[i] - som.weights[best_match(som, X[i])])) for i in range(len(X))]
    return float(np.mean(dists))


@dataclass(frozen=True, eq=False)
class UMatrix:
    """Per-node mean distance to adjacent nodes, plus the default cluster
    threshold (60th percentile of the heights)."""

    heights: np.ndarray
    threshold: float

    def __post_init__(self) -> None:
        h = np.array(self.heights, dtype=float)
        if h.ndim != 2:
            raise ValueError("heights must be 2-d")
        if not np.all(np.isfinite(h)) or np.any(h < 0):
            raise ValueError("heights must be finite and >= 0")
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)


def umatrix(som: SomMap, threshold_quantile: float = 0.60) -> UMatrix:
    W = som.weights.reshape(som.rows, som.cols, som.dim)
    sums = np.zeros((som.rows, som.cols))
    counts = np.zeros((som.rows, som.cols))
    if som.rows > 1:
        dv = np.linalg.norm(W[1:, :, :] - W[:-1, :, :], axis=2)
        sums[1:, :] += dv
        sums[:-1, :] += dv
        counts[1:, :] += 1
        counts[:-1, :] += 1
    if som.cols > 1:
        dh = np.linalg.norm(W[:, 1:, :] - W[:, :-1, :], axis=2)
        sums[:, 1:] += dh
        sums[:, :-1] += dh
        counts[:, 1:] += 1
        counts[:, :-1] += 1
    heights = sums / counts
    return UMatrix(heights=heights, threshold=float(np.quantile(heights, threshold_quantile)))


@dataclass(frozen=True, eq=False)
class AttractionField:
    """Negative discrete gradient of the U-Matrix heights (central
    differences inside, one-sided at borders), pointing into valleys.
    d_row/d_col are the vector components along the grid axes."""

    d_row: np.ndarray
    d_col: np.ndarray
    contour_levels: np.ndarray


def attraction_field(um: UMatrix, n_levels: int = 10) -> AttractionField:
    if um.heights.shape[0] > 1:
        g_row = np.gradient(um.heights, axis=0)
    else:
        g_row = np.zeros_like(um.heights)
    if um.heights.shape[1] > 1:
        g_col = np.gradient(um.heights, axis=1)
    else:
        g_col = np.zeros_like(um.heights)
    levels = np.quantile(um.heights, np.linspace(0.0, 1.0, n_levels))
    return AttractionField(d_row=-g_row, d_col=-g_col, contour_levels=levels)


def clusters(um: UMatrix, threshold: float | None = None) -> np.ndarray:
    """Connected components (4-connectivity) of nodes below the threshold.

    Returns a (rows, cols) int array; ids count up from 0 in row-major
    discovery order, border nodes (height >= threshold) get BORDER. A
    threshold above every height yields one all-node cluster; below every
    height, all nodes are border.
    """
    thr = um.threshold if threshold is None else float(threshold)
    if not np.isfinite(thr):
        raise ValueError(f"threshold must be finite, got {thr}")
    inside = um.heights < thr
    rows, cols = inside.shape
    ids = np.full((rows, cols), BORDER, dtype=int)
    next_id = 0
    for r in range(rows):
        for c in range(cols):
            if not inside[r, c] or ids[r, c] != BORDER:
                continue
            queue = [(r, c)]
            ids[r, c] = next_id
            while queue:
                qr, qc = queue.pop()
                for nr, nc in ((qr - 1, qc), (qr + 1, qc), (qr, qc - 1), (qr, qc + 1)):
                    if 0 <= nr < rows and 0 <= nc < cols and inside[nr, nc] and ids[nr, nc] == BORDER:
                        ids[nr, nc] = next_id
                        queue.append((nr, nc))
            next_id += 1
    return ids


# --- serialization ----------------------------------------------------------


def _schedule_to_dict(s: TrainSchedule) -> dict:
    return {
        "epochs": s.epochs,
        "alpha0": s.alpha0,
        "sigma0": s.sigma0,
        "sigma_end": s.sigma_end,
        "kernel": s.kernel.value,
        "rng_seed": s.rng_seed,
        "init": s.init.value,
    }


def _schedule_from_dict(d: dict) -> TrainSchedule:
    return TrainSchedule(
        epochs=int(d["epochs"]),
        alpha0=float(d["alpha0"]),
        sigma0=None if d["sigma0"] is None else float(d["sigma0"]),
        sigma_end=float(d["sigma_end"]),
        kernel=Kernel(d["kernel"]),
        rng_seed=int(d["rng_seed"]),
        init=InitMode(d["init"]),
    )


def save_map_json(som: SomMap, path) -> None:
    doc = {
        "rows": som.rows,
        "cols": som.cols,
        "dim": som.dim,
        "trained": som.trained,
        "schedule": _schedule_to_dict(som.schedule),
        "weights": [float(v) for v in som.weights.reshape(-1)],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_map_json(path) -> SomMap:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    weights = np.array(doc["weights"], dtype=float).reshape(
        doc["rows"] * doc["cols"], doc["dim"]
    )
    return SomMap(
        rows=int(doc["rows"]),
        cols=int(doc["cols"]),
        weights=weights,
        schedule=_schedule_from_dict(doc["schedule"]),
        trained=bool(doc["trained"]),
    )


def write_umatrix_csv(um: UMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        rows, cols = um.heights.shape
        fh.write(f"# umatrix rows={rows} cols={cols} threshold={um.threshold!r}\n")
        for row in um.heights:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_attraction_csv(field: AttractionField, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("row,col,dx,dy\n")
        rows, cols = field.d_row.shape
        for r in range(rows):
            for c in range(cols):
                # dx points along columns, dy along rows
                fh.write(f"{r},{c},{field.d_col[r, c]!r},{field.d_row[r, c]!r}\n")


def write_clusters_csv(ids: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("row,col,cluster\n")
        rows, cols = ids.shape
        for r in range(rows):
            for c in range(cols):
                fh.write(f"{r},{c},{int(ids[r, c])}\n")
