"""Diagnostic gait signatures from joint-angle trajectories: Morlet
scalograms, region/level feature vectors, and SOM classification."""

from .data import (
    CANONICAL_GRID_SIZE,
    ClassLabel,
    GaitTrajectory,
    Joint,
    NORMAL,
    ParseError,
    SchemaError,
    Side,
    Subject,
    ingest_csv,
    ingest_json,
    resample,
    write_csv,
)
from .evaluate import EvalReport, LabeledMap, classify, kappa, label_map, loocv
from .features import (
    FeatureVector,
    Level,
    RegionSplit,
    combine_joints,
    extract_features,
    split_regions,
)
from .som import (
    BORDER,
    InitMode,
    Kernel,
    SomMap,
    TrainSchedule,
    UMatrix,
    attraction_field,
    best_match,
    clusters,
    init,
    train,
    umatrix,
)
from .synth import GaitRegion, PerturbationSpec, SynthSpec, generate, generate_groups
from .wavelet import Boundary, MorletParams, ScaleGrid, Scalogram, cwt, morlet

__version__ = "0.1.0"
