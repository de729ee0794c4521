"""Synthetic binary classification data: generation, discretization, splits.

Two recipes are available:

``"madelon"`` (default)
    ``n_clusters_per_class`` Gaussian clusters per class, centred on distinct
    random vertices of the hypercube ``{-class_sep, +class_sep}^d``. Each
    cluster's points are drawn as ``z @ A + centroid`` with ``z`` standard
    normal and ``A`` a random ``d x d`` matrix with entries uniform in
    ``[-1, 1]`` (one matrix per cluster). A single feature carries little
    signal, and the class boundary is not linear.

``"opposite"``
    One spherical unit-variance cluster per class, centred on a random vertex
    ``c`` and its opposite ``-c``. The Bayes boundary is a hyperplane.

Both recipes standardize every column to mean 0 and variance 1 (population
variance, ``ddof=0``) and then invert an exact number of labels.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

FeatureKind = Literal["continuous", "discrete"]
RECIPES = ("madelon", "opposite")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class GeneratorConfig:
    n_observations: int = 5000
    n_features: int = 100
    p_true: float = 0.5
    flip_fraction: float = 0.01
    class_sep: float = 2.0
    n_clusters_per_class: int = 2
    recipe: str = "madelon"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.p_true < 1.0:
            raise ValueError(f"p_true must lie in (0, 1), got {self.p_true}")
        if not 0.0 <= self.flip_fraction < 1.0:
            raise ValueError(f"flip_fraction must lie in [0, 1), got {self.flip_fraction}")
        if self.n_observations < 4:
            raise ValueError("n_observations must be at least 4")
        if self.n_features < 1:
            raise ValueError("n_features must be at least 1")
        if not self.class_sep > 0:
            raise ValueError("class_sep must be positive")
        if self.recipe not in RECIPES:
            raise ValueError(f"recipe must be one of {RECIPES}, got {self.recipe!r}")
        if self.n_clusters_per_class < 1:
            raise ValueError("n_clusters_per_class must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def class_counts(self) -> tuple[int, int]:
        """(False, True) counts before label noise."""
        n_true = round_half_up(self.n_observations * self.p_true)
        return self.n_observations - n_true, n_true

    @property
    def n_flips(self) -> int:
        return round_half_up(self.flip_fraction * self.n_observations)


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_kind: FeatureKind = "continuous"
    generator_seed: int = 0
    p_true_nominal: float = float("nan")
    config: GeneratorConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        X = np.asarray(self.features)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("labels must be a vector with one entry per row of features")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must contain only 0 and 1")
        if self.feature_kind not in ("continuous", "discrete"):
            raise ValueError(f"unknown feature_kind {self.feature_kind!r}")
        if X.dtype.kind == "f" and not np.isfinite(X).all():
            raise ValueError("features contain missing or non-finite entries")
        X = X.copy()
        y = y.astype(np.int64)
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n_observations(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        n_true = int(self.labels.sum())
        return self.n_observations - n_true, n_true

    def take(self, rows: np.ndarray) -> "Dataset":
        return replace(self, features=self.features[rows], labels=self.labels[rows])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.feature_kind == other.feature_kind
            and self.features.dtype == other.features.dtype
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    validation: Dataset
    train_fraction: float
    train_index: np.ndarray
    validation_index: np.ndarray


def _hypercube_vertices(n_vertices: int, n_dims: int, rng: np.random.Generator) -> np.ndarray:
    """Distinct random vertices of {0, 1}^d as a 0/1 matrix."""
    if n_dims < 63 and n_vertices > 2**n_dims:
        raise ValueError(
            f"cannot place {n_vertices} distinct cluster centroids in {n_dims} dimensions"
        )
    while True:
        bits = rng.integers(0, 2, size=(n_vertices, n_dims))
        if len(np.unique(bits, axis=0)) == n_vertices:
            return bits


def _spread(total: int, parts: int) -> list[int]:
    return [total // parts + (i < total % parts) for i in range(parts)]


def generate(config: GeneratorConfig) -> Dataset:
    """Draw a continuous dataset according to ``config``.

    Class ``1`` receives exactly ``round(n * p_true)`` observations before
    label noise, then exactly ``round(flip_fraction * n)`` labels chosen
    without replacement are inverted. Rows come out shuffled.
    """
    n, d = config.n_observations, config.n_features
    counts = config.class_counts
    if min(counts) < 2:
        raise ValueError(
            f"degenerate class: n={n}, p_true={config.p_true} leaves fewer than 2 observations in a class"
        )
    rng = np.random.default_rng(config.seed)
    sep = config.class_sep

    blocks = []
    labels = []
    if config.recipe == "opposite":
        corner = rng.integers(0, 2, size=d) * 2 * sep - sep
        for cls, sign in ((0, -1.0), (1, 1.0)):
            blocks.append(rng.standard_normal((counts[cls], d)) + sign * corner)
            labels.append(np.full(counts[cls], cls))
    else:
        k = config.n_clusters_per_class
        if min(counts) < k:
            raise ValueError(f"each class needs at least {k} observations")
        centroids = _hypercube_vertices(2 * k, d, rng) * 2 * sep - sep
        for cls in (0, 1):
            for j, size in enumerate(_spread(counts[cls], k)):
                mixing = 2.0 * rng.random((d, d)) - 1.0
                z = rng.standard_normal((size, d))
                blocks.append(z @ mixing + centroids[cls * k + j])
                labels.append(np.full(size, cls))

    X = np.vstack(blocks)
    y = np.concatenate(labels)
    X = (X - X.mean(axis=0)) / X.std(axis=0)

    flip = rng.choice(n, size=config.n_flips, replace=False)
    y[flip] = 1 - y[flip]

    order = rng.permutation(n)
    return Dataset(
        features=X[order],
        labels=y[order],
        feature_kind="continuous",
        generator_seed=config.seed,
        p_true_nominal=config.p_true,
        config=config,
    )


def discretize(d: Dataset) -> Dataset:
    """Map each entry x to floor(5x + 0.5) (floor toward minus infinity)."""
    if d.feature_kind != "continuous":
        raise ValueError("discretize expects a continuous dataset")
    Xd = np.floor(d.features * 5.0 + 0.5).astype(np.int64)
    return replace(d, features=Xd, feature_kind="discrete")


def split(
    d: Dataset, train_fraction: float = 0.75, seed: int = 0, stratify: bool = False
) -> SplitDataset:
    """Random train/validation split; uniform unless ``stratify`` is set."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = d.n_observations
    rng = np.random.default_rng(seed)
    if stratify:
        parts = []
        for cls in (0, 1):
            members = rng.permutation(np.flatnonzero(d.labels == cls))
            parts.append(members[: round_half_up(train_fraction * len(members))])
        train_idx = np.sort(np.concatenate(parts))
    else:
        train_idx = np.sort(rng.permutation(n)[: round_half_up(train_fraction * n)])
    mask = np.zeros(n, dtype=bool)
    mask[train_idx] = True
    val_idx = np.flatnonzero(~mask)
    if len(train_idx) == 0 or len(val_idx) == 0:
        raise ValueError("split leaves an empty part")
    if len(np.unique(d.labels[train_idx])) < 2:
        raise ValueError("split leaves a single-class training set")
    return SplitDataset(
        train=d.take(train_idx),
        validation=d.take(val_idx),
        train_fraction=train_fraction,
        train_index=train_idx,
        validation_index=val_idx,
    )


def select_features(d: Dataset, indices: Sequence[int]) -> Dataset:
    idx = [int(i) for i in indices]
    if not idx:
        raise ValueError("at least one feature index is required")
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate feature index in {idx}")
    bad = [i for i in idx if not 0 <= i < d.n_features]
    if bad:
        raise ValueError(f"feature indices out of range for {d.n_features} features: {bad}")
    return replace(d, features=d.features[:, idx])


def metadata_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_csv(d: Dataset, path: str | Path) -> tuple[Path, Path]:
    """Write ``f1,...,fd,label`` rows plus a JSON metadata sidecar."""
    path = Path(path)
    header = ",".join([f"f{j + 1}" for j in range(d.n_features)] + ["label"])
    if d.feature_kind == "discrete":
        body = np.column_stack([d.features, d.labels])
        fmt = "%d"
    else:
        body = np.column_stack([d.features, d.labels.astype(float)])
        fmt = ["%.17g"] * d.n_features + ["%d"]
    np.savetxt(path, body, fmt=fmt, delimiter=",", header=header, comments="")
    meta = {
        "feature_kind": d.feature_kind,
        "generator_seed": d.generator_seed,
        "p_true_nominal": d.p_true_nominal,
        "n_observations": d.n_observations,
        "n_features": d.n_features,
        "generator": asdict(d.config) if d.config is not None else None,
    }
    meta_path = metadata_path(path)
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path, meta_path


def read_csv(path: str | Path) -> Dataset:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    if not header or header[-1] != "label":
        raise ValueError(f"{path}: last column must be 'label'")
    meta_path = metadata_path(path)
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    kind = meta.get("feature_kind", "continuous")
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] != len(header):
        raise ValueError(f"{path}: row width {raw.shape[1]} does not match header")
    X = raw[:, :-1]
    if kind == "discrete":
        X = X.astype(np.int64)
    gen = meta.get("generator")
    return Dataset(
        features=X,
        labels=raw[:, -1].astype(np.int64),
        feature_kind=kind,
        generator_seed=meta.get("generator_seed", 0),
        p_true_nominal=meta.get("p_true_nominal", float("nan")),
        config=GeneratorConfig(**gen) if gen else None,
    )
