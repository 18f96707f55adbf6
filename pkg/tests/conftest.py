"""Shared fixtures for the countconf test suite."""

import numpy as np
import pytest

from countconf.data import ConditionMetadata, DensityClass, Phase, StirSpeed, TIndex
from countconf.niqe import load_default_model


@pytest.fixture(scope="session")
def niqe_model():
    """Bundled pristine-statistics model, loaded once for the whole run."""
    return load_default_model()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def make_condition(**overrides):
    """Valid ConditionMetadata with sensible defaults for quick tests."""
    base = dict(
        group_id="unit",
        phase=Phase.STATIC,
        stir_speed=StirSpeed.NONE,
        soil=False,
        density_class=DensityClass.LOW,
        pest_count=10,
        t_index=TIndex.T0,
        frame_offset_s=0.0,
    )
    base.update(overrides)
    return ConditionMetadata(**base)
