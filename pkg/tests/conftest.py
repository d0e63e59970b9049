import numpy as np
import pytest

from loaddms.dataio import (SplitSpec, SynthConfig, build_features,
                            generate_synthetic)


@pytest.fixture(scope="session")
def small_dataset():
    return generate_synthetic(SynthConfig(n_hours=2400, seed=101))


@pytest.fixture(scope="session")
def small_split():
    return SplitSpec.from_strings(
        "2014-01-01T00:00:00", "2014-02-20T00:00:00",
        "2014-02-20T00:00:00", "2014-03-05T00:00:00",
        "2014-03-05T00:00:00", "2014-04-10T00:00:00")


@pytest.fixture(scope="session")
def small_features(small_dataset, small_split):
    return build_features(small_dataset, 12, small_split)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
