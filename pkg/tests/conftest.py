"""Shared fixtures: small deterministic scenarios and instances."""

import numpy as np
import pytest

from satedge.instance import sample_instance
from satedge.scenario import from_overrides, mix64


def make_instance(seed=0, **overrides):
    """Sampled instance under the default-seeded substream scheme."""
    ov = dict(overrides)
    ov.setdefault("seed", seed)
    sc = from_overrides(ov)
    return sample_instance(np.random.default_rng(mix64(sc.seed, 0)), sc)


@pytest.fixture
def small_instance():
    """3 ground users, 2 space users, 1 BS, 2 satellites, 4 antennas."""
    return make_instance(k=3, l=2, m=1, n=2, n_ant_bs=4, n_ant_sat=4)


@pytest.fixture
def default_instance():
    """Full default scenario (10+10 users, 2 BSs, 3 satellites)."""
    return make_instance()
