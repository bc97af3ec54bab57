"""Continuous wavelet transform of gait trajectories with the Morlet wavelet.

The mother wavelet is a complex sine localized by a Gaussian envelope,

    psi(t) = (1/sqrt(2*pi)) * exp(-t^2/2) * (cos(2*pi*nu0*t) + i*sin(2*pi*nu0*t)),

admissible for nu0 > 0.8 (default nu0 = 1.0). The transform of a signal x
on the cycle-percentage axis is discretized by the rectangle rule on the
trajectory's own grid:

    W(s, tau) = (1/sqrt(s)) * sum_k x(t_k) * conj(psi((t_k - tau)/s)) * dt,

with the wavelet truncated at |t - tau| > truncation_radius * s (the
scaled Gaussian's standard deviation is s, so the default radius of 5
leaves tail mass below 1e-6). tau ranges over every grid point; the signal
is treated as zero outside [0, 100] by default, with periodic extension
available as an option. Scalograms store the magnitude |W|.

A low scale responds to high-frequency content and vice versa: a pure
sinusoid of frequency f (cycles per percent) peaks near scale nu0/f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import ClassLabel, GaitTrajectory, Joint, Side

_GAUSS_NORM = 1.0 / math.sqrt(2.0 * math.pi)

DEFAULT_SCALE_COUNT = 12
DEFAULT_SCALE_MIN = 1.0
DEFAULT_SCALE_MAX = 25.0


@dataclass(frozen=True)
class MorletParams:
    nu0: float = 1.0
    truncation_radius: float = 5.0

    def __post_init__(self) -> None:
        if not self.nu0 > 0.8:
            raise ValueError(f"nu0 must be > 0.8 for admissibility, got {self.nu0}")
        if not self.truncation_radius >= 3.0:
            raise ValueError(
                f"truncation_radius must be >= 3, got {self.truncation_radius}"
            )


@dataclass(frozen=True, eq=False)
class ScaleGrid:
    """Ordered scale values in units of the cycle-percentage axis."""

    scales: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.scales, dtype=float)
        if arr.ndim != 1 or len(arr) == 0:
            raise ValueError("scales must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
            raise ValueError("scales must be finite and > 0")
        if not np.all(np.diff(arr) > 0):
            raise ValueError("scales must be strictly increasing")
        arr.setflags(write=False)
        object.__setattr__(self, "scales", arr)

    @classmethod
    def default(
        cls,
        count: int = DEFAULT_SCALE_COUNT,
        lo: float = DEFAULT_SCALE_MIN,
        hi: float = DEFAULT_SCALE_MAX,
    ) -> "ScaleGrid":
        """Logarithmically spaced scales, by default 12 over [1, 25]."""
        if count < 2:
            raise ValueError("scale count must be >= 2")
        return cls(np.geomspace(lo, hi, count))

    def __len__(self) -> int:
        return len(self.scales)

    def nearest_index(self, s: float) -> int:
        return int(np.argmin(np.abs(self.scales - s)))


class Boundary(Enum):
    ZERO = "zero"
    PERIODIC = "periodic"


@dataclass(frozen=True, eq=False)
class Scalogram:
    """|CWT| magnitudes, one row per scale, one column per grid point."""

    values: np.ndarray
    time_axis: np.ndarray
    scale_axis: ScaleGrid
    joint: Joint
    side: Side
    subject_id: str = ""
    label: ClassLabel | None = None

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float)
        taxis = np.array(self.time_axis, dtype=float)
        if vals.shape != (len(self.scale_axis), len(taxis)):
            raise ValueError(
                f"values shape {vals.shape} inconsistent with axes "
                f"({len(self.scale_axis)}, {len(taxis)})"
            )
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("scalogram values must be finite and >= 0")
        vals.setflags(write=False)
        taxis.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "time_axis", taxis)

    def interior_mask(self, n_sigma: float = 2.0) -> np.ndarray:
        """Boolean (scale x time) mask of the region unaffected by the
        record boundaries: True where the wavelet envelope out to n_sigma
        scaled standard deviations lies inside [0, 100]. The complement is
        the boundary cone."""
        half = n_sigma * self.scale_axis.scales[:, None]
        t = self.time_axis[None, :]
        return (t - half >= self.time_axis[0]) & (t + half <= self.time_axis[-1])


def morlet(t, params: MorletParams | None = None):
    """Evaluate the Morlet mother wavelet; complex, vectorized over t."""
    if params is None:
        params = MorletParams()
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("t must be finite")
    envelope = _GAUSS_NORM * np.exp(-0.5 * arr * arr)
    angle = 2.0 * np.pi * params.nu0 * arr
    out = envelope * (np.cos(angle) + 1j * np.sin(angle))
    return complex(out) if np.isscalar(t) else out


def _half_width(radius: float, dt: float) -> int:
    """Largest m with m*dt <= radius, robust at float boundaries."""
    k = max(int(math.floor(radius / dt)), 0)
    while (k + 1) * dt <= radius:
        k += 1
    while k > 0 and k * dt > radius:
        k -= 1
    return k


def _periodic_extend(x: np.ndarray, k: int) -> np.ndarray:
    # period = grid_size - 1 samples (the 100% sample starts the next cycle)
    p = len(x) - 1
    left = x[np.mod(np.arange(-k, 0), p)]
    right = x[np.mod(np.arange(len(x), len(x) + k), p)]
    return np.concatenate([left, x, right])


def cwt(
    traj: GaitTrajectory,
    grid: ScaleGrid | None = None,
    params: MorletParams | None = None,
    boundary: Boundary = Boundary.ZERO,
) -> Scalogram:
    """Morlet scalogram of one trajectory on (scale grid x trajectory grid).

    Direct (non-FFT) convolution per scale; scales write disjoint rows, so
    the result does not depend on evaluation order.
    """
    if grid is None:
        grid = ScaleGrid.default()
    if params is None:
        params = MorletParams()
    if not isinstance(grid, ScaleGrid):
        raise ValueError("grid must be a ScaleGrid")
    x = traj.samples
    n = traj.grid_size
    dt = 100.0 / (n - 1)
    rows = np.empty((len(grid), n))
    for i, s in enumerate(grid.scales):
        k = _half_width(params.truncation_radius * s, dt)
        offsets = np.arange(-k, k + 1)
        kernel = np.conj(morlet(offsets * dt / s, params)) * (dt / math.sqrt(s))
        # column j = sum_k x[k] * kernel[k - j]  ==  (x * flip(kernel))[j + k]
        flipped = kernel[::-1]
        if boundary is Boundary.PERIODIC:
            conv = np.convolve(_periodic_extend(x, k), flipped)
            coeff = conv[2 * k : 2 * k + n]
        else:
            conv = np.convolve(x, flipped)
            coeff = conv[k : k + n]
        rows[i] = np.abs(coeff)
    return Scalogram(
        values=rows,
        time_axis=traj.pct_axis,
        scale_axis=grid,
        joint=traj.joint,
        side=traj.side,
    )


# --- scalogram CSV interchange ---------------------------------------------
#
# Matrix CSV (row = scale, column = cycle %), preceded by '#' comment lines
# carrying provenance and both axes so files are self-describing.


def write_scalogram_csv(sc: Scalogram, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        label = sc.label.value if sc.label is not None else ""
        fh.write(
            f"# scalogram subject={sc.subject_id} label={label} "
            f"joint={sc.joint.value} side={sc.side.value}\n"
        )
        fh.write("# scales=" + ",".join(repr(float(s)) for s in sc.scale_axis.scales) + "\n")
        fh.write("# pct=" + ",".join(repr(float(t)) for t in sc.time_axis) + "\n")
        for row in sc.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_scalogram_csv(path) -> Scalogram:
    meta: dict[str, str] = {}
    scales: np.ndarray | None = None
    pct: np.ndarray | None = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# scalogram "):
                for tok in line[len("# scalogram "):].split():
                    key, _, val = tok.partition("=")
                    meta[key] = val
            elif line.startswith("# scales="):
                scales = np.array([float(v) for v in line[len("# scales="):].split(",")])
            elif line.startswith("# pct="):
                pct = np.array([float(v) for v in line[len("# pct="):].split(",")])
            elif line.startswith("#"):
                continue
            else:
                rows.append([float(v) for v in line.split(",")])
    if scales is None or pct is None or not meta:
        raise ValueError(f"{path}: missing scalogram header lines")
    label = ClassLabel(meta["label"]) if meta.get("label") else None
    return Scalogram(
        values=np.array(rows),
        time_axis=pct,
        scale_axis=ScaleGrid(scales),
        joint=Joint(meta["joint"]),
        side=Side(meta["side"]),
        subject_id=meta.get("subject", ""),
        label=label,
    )
