import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make tests/oracles.py importable

from gaitsig.data import GaitTrajectory, Joint, Side


def make_traj(samples, joint=Joint.HIP, side=Side.RIGHT):
    return GaitTrajectory(joint=joint, side=side, samples=np.asarray(samples, dtype=float))


@pytest.fixture
def ramp_traj():
    return make_traj(np.linspace(0.0, 100.0, 101))


def harmonic_signal(pct, harmonics):
    """Plain cosine synthesis used by tests that must not depend on the
    package's own generator."""
    y = np.zeros_like(pct, dtype=float)
    for h, amp, phase in harmonics:
        y = y + amp * np.cos(2.0 * np.pi * h * pct / 100.0 + phase)
    return y
