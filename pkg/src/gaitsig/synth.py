"""Synthetic labeled gait datasets.

Normal subjects are low-harmonic templates (gait spectra concentrate below
the 15th harmonic) with per-subject Gaussian jitter on the harmonic
amplitudes. Pathological subjects additionally carry a high-frequency
component (harmonics 10..20, mimicking spastic content), a left/right
amplitude asymmetry, and/or a timing shift of the whole cycle.

Everything is a pure function of (spec, seed): per-subject RNG streams are
derived from (seed, class label, subject index), so a dataset is
bit-reproducible and a class's subjects do not depend on how many other
subjects or classes are generated alongside them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .data import CANONICAL_GRID_SIZE, CP_DP, ClassLabel, GaitTrajectory, Joint, NORMAL, Side, Subject

MAX_TEMPLATE_HARMONIC = 15
HF_HARMONICS = tuple(range(10, 21))
STANCE_END_PCT = 60.0

# (harmonic index, amplitude in degrees, phase in radians) per joint.
# Hip: dominant fundamental plus a small 2nd harmonic. Knee: two-peak
# pattern from harmonics 0-3 with the swing-phase flexion peak near 60 deg.
# Ankle: harmonics 1-4. Coefficients are configuration, not ground truth.
DEFAULT_TEMPLATE: Mapping[Joint, tuple[tuple[int, float, float], ...]] = {
    Joint.HIP: ((1, 30.0, 0.0), (2, 4.0, 0.5)),
    Joint.KNEE: ((0, 24.0, 0.0), (1, 19.7, 1.804), (2, 12.6, -2.642), (3, 2.8, -1.915)),
    Joint.ANKLE: ((0, 0.6, 0.0), (1, 3.4, -1.876), (2, 6.3, 1.444), (3, 3.0, -2.536), (4, 2.5, -0.078)),
}


class GaitRegion(Enum):
    STANCE = "Stance"
    SWING = "Swing"
    BOTH = "Both"


@dataclass(frozen=True)
class PerturbationSpec:
    """Pathology menu applied on top of the normal template.

    hf_amplitude is the l2 norm of the added component amplitudes across
    harmonics 10..20 (degrees), windowed to hf_phase_region of the cycle.
    asymmetry_gain g scales the left side by sqrt(g) and the right by
    1/sqrt(g), so g is the left/right amplitude ratio and g and 1/g are
    mirror images. timing_shift displaces all events by a percentage of the
    cycle (circular). jitter_sd is the per-subject Gaussian amplitude
    jitter applied to every harmonic, shared between sides.
    """

    hf_amplitude: float = 0.0
    hf_phase_region: GaitRegion = GaitRegion.STANCE
    asymmetry_gain: float = 1.0
    timing_shift: float = 0.0
    jitter_sd: float = 0.0

    def __post_init__(self) -> None:
        if self.hf_amplitude < 0 or self.timing_shift < 0 or self.jitter_sd < 0:
            raise ValueError("perturbation magnitudes must be >= 0")
        if not self.asymmetry_gain > 0:
            raise ValueError("asymmetry_gain must be > 0")


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one two-class dataset: n_subjects per class, Normal plus
    (when pathology is given) one pathological class."""

    n_subjects: int
    harmonic_amplitudes: Mapping[Joint, tuple[tuple[int, float, float], ...]] = field(
        default_factory=lambda: dict(DEFAULT_TEMPLATE)
    )
    pathology: PerturbationSpec | None = None
    pathology_label: ClassLabel = CP_DP
    rng_seed: int = 0
    grid_size: int = CANONICAL_GRID_SIZE

    def __post_init__(self) -> None:
        if self.n_subjects < 1:
            raise ValueError("n_subjects must be >= 1")
        for joint, harmonics in self.harmonic_amplitudes.items():
            for h, _amp, _phase in harmonics:
                if not 0 <= h <= MAX_TEMPLATE_HARMONIC:
                    raise ValueError(
                        f"{joint.value}: template harmonic index {h} outside "
                        f"[0, {MAX_TEMPLATE_HARMONIC}]"
                    )
        object.__setattr__(
            self,
            "harmonic_amplitudes",
            {j: tuple(tuple(t) for t in hs) for j, hs in self.harmonic_amplitudes.items()},
        )


def _hf_components(amplitude: float) -> tuple[tuple[int, float, float], ...]:
    """Fixed high-frequency pattern scaled to the requested amplitude.

    Equal weights across harmonics 10..20 with a fixed phase stagger; the
    pattern is deterministic per class so that intra-class variation comes
    only from jitter.
    """
    if amplitude == 0.0:
        return ()
    a = amplitude / math.sqrt(len(HF_HARMONICS))
    return tuple((h, a, 0.7 * h) for h in HF_HARMONICS)


def _region_window(phase_pct: np.ndarray, region: GaitRegion) -> np.ndarray:
    if region is GaitRegion.BOTH:
        return np.ones_like(phase_pct)
    stance = phase_pct < STANCE_END_PCT
    return np.where(stance if region is GaitRegion.STANCE else ~stance, 1.0, 0.0)


def _synth_samples(
    pct: np.ndarray,
    harmonics: Sequence[tuple[int, float, float]],
    hf: Sequence[tuple[int, float, float]],
    region: GaitRegion,
    shift: float,
    gain: float,
) -> np.ndarray:
    phase = np.mod(pct - shift, 100.0)
    y = np.zeros_like(pct)
    for h, amp, ph in harmonics:
        y += amp * np.cos(2.0 * np.pi * h * phase / 100.0 + ph)
    if hf:
        burst = np.zeros_like(pct)
        for h, amp, ph in hf:
            burst += amp * np.cos(2.0 * np.pi * h * phase / 100.0 + ph)
        y += _region_window(phase, region) * burst
    return gain * y


def _make_subject(
    sid: str,
    label: ClassLabel,
    template: Mapping[Joint, tuple[tuple[int, float, float], ...]],
    perturbation: PerturbationSpec | None,
    jitter_sd: float,
    rng: np.random.Generator,
    grid_size: int,
) -> Subject:
    pct = np.linspace(0.0, 100.0, grid_size)
    if perturbation is None:
        hf_base: tuple[tuple[int, float, float], ...] = ()
        region = GaitRegion.BOTH
        shift = 0.0
        gain_left = gain_right = 1.0
    else:
        hf_base = _hf_components(perturbation.hf_amplitude)
        region = perturbation.hf_phase_region
        shift = perturbation.timing_shift
        root = math.sqrt(perturbation.asymmetry_gain)
        gain_left, gain_right = root, 1.0 / root

    trajectories = {}
    # canonical joint order fixes the RNG draw sequence regardless of the
    # template mapping's insertion order
    for joint in (j for j in Joint if j in template):
        # one jitter draw per harmonic amplitude, shared by both sides
        base = template[joint]
        jit = rng.normal(0.0, 1.0, len(base)) * jitter_sd
        harmonics = [(h, amp + d, ph) for (h, amp, ph), d in zip(base, jit)]
        if hf_base:
            jit_hf = rng.normal(0.0, 1.0, len(hf_base)) * jitter_sd
            hf = [(h, amp + d, ph) for (h, amp, ph), d in zip(hf_base, jit_hf)]
        else:
            hf = []
        for side, gain in ((Side.RIGHT, gain_right), (Side.LEFT, gain_left)):
            samples = _synth_samples(pct, harmonics, hf, region, shift, gain)
            trajectories[(joint, side)] = GaitTrajectory(
                joint=joint, side=side, samples=samples
            )
    return Subject(id=sid, label=label, trajectories=trajectories)


def _slug(label: ClassLabel) -> str:
    return label.value.lower().replace(" ", "-")


def _class_stream(label: ClassLabel) -> int:
    # injective label -> int so per-class RNG streams are stable across
    # dataset compositions
    return int.from_bytes(label.value.encode("utf-8"), "big")


def generate_groups(
    template: Mapping[Joint, tuple[tuple[int, float, float], ...]],
    n_subjects: int,
    groups: Mapping[ClassLabel, PerturbationSpec],
    rng_seed: int,
    include_normal: bool = True,
    normal_jitter_sd: float | None = None,
    grid_size: int = CANONICAL_GRID_SIZE,
) -> list[Subject]:
    """Generate n_subjects per class for an arbitrary set of pathological
    groups (emitted in sorted label order), optionally preceded by a
    Normal class.

    Per-class RNG streams key on the class label itself, so a class's
    subjects are identical regardless of which other classes are generated
    alongside it.
    """
    if n_subjects < 1:
        raise ValueError("n_subjects must be >= 1")
    subjects: list[Subject] = []
    ordered = sorted(groups)
    if include_normal:
        if normal_jitter_sd is None:
            normal_jitter_sd = groups[ordered[0]].jitter_sd if ordered else 0.0
        for k in range(n_subjects):
            rng = np.random.default_rng([rng_seed, _class_stream(NORMAL), k])
            subjects.append(
                _make_subject(
                    f"{_slug(NORMAL)}-{k:03d}", NORMAL, template, None,
                    normal_jitter_sd, rng, grid_size,
                )
            )
    for label in ordered:
        pert = groups[label]
        for k in range(n_subjects):
            rng = np.random.default_rng([rng_seed, _class_stream(label), k])
            subjects.append(
                _make_subject(
                    f"{_slug(label)}-{k:03d}", label, template, pert,
                    pert.jitter_sd, rng, grid_size,
                )
            )
    return subjects


def generate(spec: SynthSpec) -> list[Subject]:
    """Generate the dataset described by spec: n_subjects Normal subjects,
    plus n_subjects pathological ones when spec.pathology is given."""
    groups = {} if spec.pathology is None else {spec.pathology_label: spec.pathology}
    return generate_groups(
        spec.harmonic_amplitudes,
        spec.n_subjects,
        groups,
        spec.rng_seed,
        include_normal=True,
        normal_jitter_sd=spec.pathology.jitter_sd if spec.pathology else 0.0,
        grid_size=spec.grid_size,
    )
