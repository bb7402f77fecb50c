import numpy as np
import pytest

from fairlab import GroupSpec, ScoredPredictions, StructuredDataset, sampledata
from fairlab.dataset import load_preset


def make_ds(
    labels,
    groups,
    features=None,
    weights=None,
    scores=None,
    protected_name="g",
):
    """Small dataset builder for hand-constructed cases.

    ``groups`` holds one protected value per row (1.0 privileged by
    convention); scores, when given, are stashed in metadata the way
    ScoredPredictions carries them.
    """
    labels = np.asarray(labels, dtype=float)
    n = labels.size
    groups = np.asarray(groups, dtype=float).reshape(n, 1)
    if features is None:
        features = np.arange(n, dtype=float).reshape(n, 1)
    features = np.asarray(features, dtype=float)
    if features.ndim == 1:
        features = features.reshape(n, 1)
    names = [f"x{i}" for i in range(features.shape[1])]
    metadata = {"scores": np.asarray(scores, dtype=float)} if scores is not None else None
    return StructuredDataset(
        features,
        names,
        labels,
        groups,
        [protected_name],
        instance_weights=None if weights is None else np.asarray(weights, dtype=float),
        metadata=metadata,
    )


def group_pair(protected_name="g"):
    return GroupSpec([{protected_name: 1.0}]), GroupSpec([{protected_name: 0.0}])


def scored_of(ds, scores, threshold=0.5):
    return ScoredPredictions(ds, np.asarray(scores, dtype=float), threshold=threshold)


def random_dataset(rng, n_max=60, n_features=3, weighted=True, scores=False):
    """Random dataset guaranteed to have both groups and both classes."""
    n = int(rng.integers(8, n_max))
    features = rng.normal(size=(n, n_features))
    groups = rng.integers(0, 2, size=n).astype(float)
    labels = rng.integers(0, 2, size=n).astype(float)
    # force both groups and both labels to be present
    groups[0], groups[1] = 1.0, 0.0
    labels[0], labels[1] = 1.0, 0.0
    weights = rng.uniform(0.2, 3.0, size=n) if weighted else None
    return make_ds(
        labels,
        groups,
        features=features,
        weights=weights,
        scores=rng.uniform(0.02, 0.98, size=n) if scores else None,
    )


@pytest.fixture(scope="session")
def demo_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("demo-data")
    sampledata.write_demo_files(directory)
    return directory


@pytest.fixture(scope="session")
def german(demo_dir):
    return load_preset("german", demo_dir)


@pytest.fixture(scope="session")
def adult(demo_dir):
    return load_preset("adult", demo_dir)


@pytest.fixture(scope="session")
def compas(demo_dir):
    return load_preset("compas", demo_dir)
