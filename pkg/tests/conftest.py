"""Shared fixtures: deterministic synthetic signals reused across test modules."""

import numpy as np
import pytest

from stereoqa import fixtures
from stereoqa.audio import AudioBuffer


@pytest.fixture(scope="session")
def music():
    return fixtures.music_like(2.0)


@pytest.fixture(scope="session")
def music_b():
    return fixtures.music_like(2.0, seed=303)


@pytest.fixture(scope="session")
def panned():
    return fixtures.hard_panned(2.0)


@pytest.fixture(scope="session")
def noise_stereo():
    """Two independent white-noise channels, 1 s at 48 kHz."""
    rng = np.random.default_rng(7)
    return AudioBuffer(48000, 0.2 * rng.standard_normal((2, 48000)))
