import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcann import synthgen
from dcann.synthgen import GeneratorConfig


def _clean_labels(d):
    # only valid for well separated "opposite" data
    X, y = d.features, d.labels
    direction = X[y == 1].mean(axis=0) - X[y == 0].mean(axis=0)
    return (X @ direction > 0).astype(int)


def test_default_shape():
    d = synthgen.generate(GeneratorConfig(seed=3))
    assert d.features.shape == (5000, 100)
    assert d.feature_kind == "continuous"
    assert d.class_counts()[1] == pytest.approx(2500, abs=50)


def test_columns_are_standardized():
    d = synthgen.generate(GeneratorConfig(n_observations=600, n_features=7, seed=1))
    np.testing.assert_allclose(d.features.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(d.features.std(axis=0), 1, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(40, 600),
    p=st.floats(0.2, 0.9),
    flip=st.floats(0.0, 0.05),
    seed=st.integers(0, 2**32),
)
def test_exact_class_and_flip_counts(n, p, flip, seed):
    cfg = GeneratorConfig(n_observations=n, n_features=4, p_true=p, flip_fraction=flip,
                          seed=seed, recipe="opposite", class_sep=30.0)
    d = synthgen.generate(cfg)
    clean = _clean_labels(d)
    n_true = int(np.floor(n * p + 0.5))
    assert int(clean.sum()) == n_true
    assert int((clean != d.labels).sum()) == int(np.floor(flip * n + 0.5))


def test_per_thousand_counts():
    cfg = GeneratorConfig(n_observations=1000, p_true=0.9)
    assert cfg.class_counts == (100, 900)
    assert cfg.n_flips == 10


def test_same_seed_same_data_different_seed_different_data():
    cfg = GeneratorConfig(n_observations=200, n_features=5, seed=9)
    assert synthgen.generate(cfg) == synthgen.generate(cfg)
    other = synthgen.generate(GeneratorConfig(n_observations=200, n_features=5, seed=10))
    assert not np.array_equal(synthgen.generate(cfg).features, other.features)


def test_opposite_recipe_is_nearly_centroid_separable():
    d = synthgen.generate(GeneratorConfig(n_observations=2000, n_features=10, recipe="opposite",
                                          class_sep=1.0, seed=4))
    mu0 = d.features[d.labels == 0].mean(axis=0)
    mu1 = d.features[d.labels == 1].mean(axis=0)
    nearest = (np.linalg.norm(d.features - mu1, axis=1) < np.linalg.norm(d.features - mu0, axis=1))
    assert (nearest == d.labels).mean() > 0.97


def test_nearest_centroid_health_at_full_size():
    cfg = GeneratorConfig(n_observations=5000, n_features=100, class_sep=1.0, recipe="opposite", seed=21)
    s = synthgen.split(synthgen.generate(cfg), 0.75, seed=1)
    mu0 = s.train.features[s.train.labels == 0].mean(axis=0)
    mu1 = s.train.features[s.train.labels == 1].mean(axis=0)
    X = s.validation.features
    pred = np.linalg.norm(X - mu1, axis=1) < np.linalg.norm(X - mu0, axis=1)
    assert (pred == s.validation.labels).mean() > 0.85


def test_no_redundant_or_duplicated_columns():
    d = synthgen.generate(GeneratorConfig(n_observations=3000, n_features=20, seed=2))
    assert np.linalg.matrix_rank(d.features) == 20
    corr = np.corrcoef(d.features, rowvar=False)
    assert np.abs(corr - np.eye(20)).max() < 0.9


@pytest.mark.parametrize("kwargs", [
    {"p_true": 1.2}, {"p_true": 0.0}, {"flip_fraction": 1.0}, {"n_observations": 2},
    {"n_features": 0}, {"class_sep": 0.0}, {"recipe": "other"}, {"seed": -1},
])
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        GeneratorConfig(**kwargs)


def test_degenerate_class_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        synthgen.generate(GeneratorConfig(n_observations=10, n_features=2, p_true=0.99))


def test_discretize_floor_cases():
    d = synthgen.Dataset(np.array([[0.0], [0.1], [-0.11], [-0.1], [0.3], [-2.0]]), np.zeros(6, int))
    out = synthgen.discretize(d)
    assert out.features[:, 0].tolist() == [0, 1, -1, 0, 2, -10]
    assert out.feature_kind == "discrete"
    assert out.features.dtype == np.int64
    with pytest.raises(ValueError):
        synthgen.discretize(out)


def test_split_partitions_rows():
    d = synthgen.generate(GeneratorConfig(n_observations=400, n_features=3, seed=5))
    s = synthgen.split(d, 0.75, seed=1)
    assert len(s.train_index) == 300 and len(s.validation_index) == 100
    assert sorted(np.concatenate([s.train_index, s.validation_index]).tolist()) == list(range(400))
    np.testing.assert_array_equal(s.train.features, d.features[s.train_index])
    again = synthgen.split(d, 0.75, seed=1)
    np.testing.assert_array_equal(again.train_index, s.train_index)


def test_stratified_split_keeps_proportions():
    d = synthgen.generate(GeneratorConfig(n_observations=1000, n_features=3, p_true=0.8, seed=5))
    s = synthgen.split(d, 0.75, seed=2, stratify=True)
    assert s.train.labels.mean() == pytest.approx(d.labels.mean(), abs=0.002)


def test_split_rejects_single_class_training_set():
    d = synthgen.Dataset(np.zeros((4, 1)), np.array([0, 0, 0, 1]))
    with pytest.raises(ValueError):
        for seed in range(50):
            synthgen.split(d, 0.5, seed=seed)


def test_select_features():
    d = synthgen.generate(GeneratorConfig(n_observations=50, n_features=6, seed=5))
    sub = synthgen.select_features(d, [4, 1])
    np.testing.assert_array_equal(sub.features, d.features[:, [4, 1]])
    for bad in ([], [1, 1], [6], [-1]):
        with pytest.raises(ValueError):
            synthgen.select_features(d, bad)


def test_dataset_validation():
    with pytest.raises(ValueError):
        synthgen.Dataset(np.array([[np.nan]]), np.array([0]))
    with pytest.raises(ValueError):
        synthgen.Dataset(np.zeros((2, 1)), np.array([0, 2]))
    with pytest.raises(ValueError):
        synthgen.Dataset(np.zeros((2, 1)), np.array([0]))


@pytest.mark.parametrize("discrete", [False, True])
def test_csv_round_trip(tmp_path, discrete):
    d = synthgen.generate(GeneratorConfig(n_observations=30, n_features=4, seed=8))
    if discrete:
        d = synthgen.discretize(d)
    csv_path, meta_path = synthgen.write_csv(d, tmp_path / "d.csv")
    assert csv_path.read_text().splitlines()[0] == "f1,f2,f3,f4,label"
    meta = json.loads(meta_path.read_text())
    assert meta["feature_kind"] == d.feature_kind and meta["generator_seed"] == 8
    back = synthgen.read_csv(csv_path)
    assert back == d
