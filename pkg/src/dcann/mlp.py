"""Feed-forward network with ReLU hidden layers and a softmax output.

Training is mini-batch Adam on the mean cross-entropy, with early stopping
on a held-out slice of the training data. The inner loops run in the kernel
backend chosen by :mod:`dcann.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._pykernels import unpack
from .synthgen import round_half_up

P_CLAMP = 1e-12


class TrainingDivergedError(FloatingPointError):
    pass


@dataclass(frozen=True)
class Architecture:
    layer_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise ValueError("an architecture needs an input and an output layer")
        if min(sizes) < 1:
            raise ValueError("layer sizes must be positive")
        if sizes[-1] < 2:
            raise ValueError("the output layer needs one unit per class (at least 2)")
        object.__setattr__(self, "layer_sizes", sizes)

    @classmethod
    def standard(cls, n_inputs: int) -> "Architecture":
        """The [j, 15, 5, 2] network used throughout the experiments."""
        return cls((n_inputs, 15, 5, 2))

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]

    @property
    def n_params(self) -> int:
        return sum(a * b + b for a, b in zip(self.layer_sizes, self.layer_sizes[1:]))


@dataclass(frozen=True, eq=False)
class MlpParams:
    """Weights ``W[k]`` of shape (v_k, v_{k+1}) and biases ``b[k]`` of length v_{k+1}."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        Ws = tuple(np.array(w, dtype=float) for w in self.weights)
        bs = tuple(np.array(b, dtype=float) for b in self.biases)
        if len(Ws) != len(bs) or not Ws:
            raise ValueError("need one bias vector per weight matrix")
        for k, (W, b) in enumerate(zip(Ws, bs)):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise ValueError(f"layer {k}: weight {W.shape} and bias {b.shape} disagree")
            if k and Ws[k - 1].shape[1] != W.shape[0]:
                raise ValueError(f"layer {k}: fan-in {W.shape[0]} != previous fan-out")
            if not (np.isfinite(W).all() and np.isfinite(b).all()):
                raise ValueError("parameters must be finite")
            W.flags.writeable = False
            b.flags.writeable = False
        object.__setattr__(self, "weights", Ws)
        object.__setattr__(self, "biases", bs)

    @property
    def architecture(self) -> Architecture:
        return Architecture(tuple([self.weights[0].shape[0]] + [W.shape[1] for W in self.weights]))

    def flat(self) -> np.ndarray:
        parts = []
        for W, b in zip(self.weights, self.biases):
            parts.append(W.ravel())
            parts.append(b)
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, flat: np.ndarray, arch: Architecture) -> "MlpParams":
        Ws, bs = unpack(np.array(flat, dtype=float), arch.layer_sizes)
        return cls(tuple(Ws), tuple(bs))

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.architecture.layer_sizes),
            "weights": [W.tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "MlpParams":
        return cls(tuple(payload["weights"]), tuple(payload["biases"]))

    def __eq__(self, other):
        if not isinstance(other, MlpParams):
            return NotImplemented
        return len(self.weights) == len(other.weights) and all(
            np.array_equal(a, b)
            for a, b in zip(self.weights + self.biases, other.weights + other.biases)
        )


@dataclass(frozen=True)
class TrainSettings:
    learning_rate: float = 1e-3
    batch_size: int = 200
    max_epochs: int = 200
    seed: int = 0
    early_stop_patience: int = 10
    validation_fraction_for_early_stop: float = 0.1
    tol: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.max_epochs < 1 or self.early_stop_patience < 1:
            raise ValueError("batch_size, max_epochs and early_stop_patience must be positive")
        if not 0.0 <= self.validation_fraction_for_early_stop < 1.0:
            raise ValueError("validation_fraction_for_early_stop must lie in [0, 1)")


@dataclass
class TrainingLog:
    train_loss: list[float] = field(default_factory=list)
    validation_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False
    backend: str = ""

    @property
    def n_epochs(self) -> int:
        return len(self.train_loss)


@dataclass(frozen=True)
class TrainingPlan:
    """Seed-derived row indices: the early-stopping holdout and one visiting order per epoch."""

    holdout: np.ndarray
    epoch_orders: np.ndarray

    def remap(self, new_position: np.ndarray) -> "TrainingPlan":
        """Re-express the plan for data whose row ``i`` moved to ``new_position[i]``."""
        pos = np.asarray(new_position, dtype=np.intp)
        return TrainingPlan(pos[self.holdout], pos[self.epoch_orders])


def init_params(arch: Architecture, rng: np.random.Generator) -> np.ndarray:
    """Flat parameter vector: weights uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases."""
    parts = []
    for fan_in, fan_out in zip(arch.layer_sizes, arch.layer_sizes[1:]):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        parts.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
        parts.append(np.zeros(fan_out))
    return np.concatenate(parts)


def make_plan(n: int, settings: TrainSettings, rng: np.random.Generator) -> TrainingPlan:
    perm = rng.permutation(n)
    n_hold = 0
    if settings.validation_fraction_for_early_stop > 0:
        n_hold = max(1, round_half_up(settings.validation_fraction_for_early_stop * n))
    holdout, fit_rows = perm[:n_hold], perm[n_hold:]
    if len(fit_rows) == 0:
        raise ValueError("no rows left for fitting after the early-stopping holdout")
    orders = np.empty((settings.max_epochs, len(fit_rows)), dtype=np.intp)
    for e in range(settings.max_epochs):
        orders[e] = rng.permutation(fit_rows)
    return TrainingPlan(np.sort(holdout).astype(np.intp), orders)


def _as_inputs(X, arch: Architecture | None = None) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError("inputs must be a vector or a 2-D matrix")
    if arch is not None and X.shape[1] != arch.n_inputs:
        raise ValueError(f"network expects {arch.n_inputs} inputs, got {X.shape[1]}")
    if not np.isfinite(X).all():
        raise ValueError("inputs must be finite")
    return X


def forward(params: MlpParams, x, backend: str | None = None) -> np.ndarray:
    """Class probabilities for one input vector (1-D result) or a batch (2-D)."""
    arch = params.architecture
    X = _as_inputs(x, arch)
    P = kernels.get_backend(backend).predict_proba(params.flat(), arch.layer_sizes, X)
    return P[0] if np.ndim(x) == 1 else P


def predict(params: MlpParams, x, backend: str | None = None):
    """Most probable class (ties to the lower index) and the probabilities."""
    P = forward(params, x, backend)
    return (int(np.argmax(P)) if P.ndim == 1 else np.argmax(P, axis=1)), P


def cross_entropy(p_hat, c) -> float:
    """-sum(c * ln p_hat) with p_hat clamped to [1e-12, 1 - 1e-12].

    For two classes this is -c ln p - (1 - c) ln(1 - p) on the positive-class
    probability.
    """
    p = np.asarray(p_hat, dtype=float)
    c = np.asarray(c)
    if p.ndim != 1 or c.shape != p.shape:
        raise ValueError("p_hat and c must be vectors of equal length")
    if not np.isin(c, (0, 1)).all() or c.sum() != 1:
        raise ValueError(f"c must be a one-hot indicator, got {c.tolist()}")
    p = np.clip(p, P_CLAMP, 1.0 - P_CLAMP)
    return float(-np.sum(c * np.log(p)))


def _labels(y, n: int, n_classes: int) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (n,):
        raise ValueError("labels must be a vector with one entry per observation")
    yi = y.astype(np.intp)
    if not np.array_equal(yi, y) or yi.min() < 0 or yi.max() >= n_classes:
        raise ValueError(f"labels must be integers in [0, {n_classes})")
    return yi


def loss_and_gradients(params: MlpParams, X, y, backend: str | None = None):
    """Mean cross-entropy over ``(X, y)`` and its gradient as an ``MlpParams``-shaped pair of tuples."""
    arch = params.architecture
    X = _as_inputs(X, arch)
    yi = _labels(y, X.shape[0], arch.n_classes)
    flat = params.flat()
    grad = np.zeros_like(flat)
    loss = kernels.get_backend(backend).loss_and_grad(flat, arch.layer_sizes, X, yi, grad)
    gW, gb = unpack(grad, arch.layer_sizes)
    return loss, tuple(gW), tuple(gb)


def train(
    arch: Architecture,
    X,
    y,
    settings: TrainSettings = TrainSettings(),
    *,
    backend: str | None = None,
    plan: TrainingPlan | None = None,
) -> tuple[MlpParams, TrainingLog]:
    """Fit ``arch`` to ``(X, y)``.

    Draws, in order, the initial weights, the early-stopping holdout and the
    per-epoch visiting orders from ``settings.seed``. Training stops after
    ``early_stop_patience`` epochs without the monitored loss improving by
    ``tol``; the parameters from the best epoch are returned.
    """
    X = _as_inputs(X, arch)
    yi = _labels(y, X.shape[0], arch.n_classes)
    if len(np.unique(yi)) < 2:
        raise ValueError("training data contains a single class")
    kern = kernels.get_backend(backend)
    sizes = arch.layer_sizes

    rng = np.random.default_rng(settings.seed)
    params = init_params(arch, rng)
    generated = make_plan(X.shape[0], settings, rng)
    if plan is None:
        plan = generated
    holdout = plan.holdout
    n_fit = plan.epoch_orders.shape[1]
    batch = min(settings.batch_size, n_fit)
    X_hold = np.ascontiguousarray(X[holdout]) if len(holdout) else None
    y_hold = np.ascontiguousarray(yi[holdout]) if len(holdout) else None

    m = np.zeros_like(params)
    v = np.zeros_like(params)
    grad = np.zeros_like(params)
    step = 0
    log = TrainingLog(backend="cython" if kern.__name__.endswith("_ckernels") else "python")

    best = np.inf
    best_params = params.copy()
    stale = 0
    for epoch in range(settings.max_epochs):
        order = np.ascontiguousarray(plan.epoch_orders[epoch])
        step, loss_sum = kern.train_epoch(
            params, m, v, grad, sizes, X, yi, order, batch,
            settings.learning_rate, settings.beta1, settings.beta2, settings.epsilon, step,
        )
        train_loss = loss_sum / n_fit
        if X_hold is not None:
            monitored = kern.mean_loss(params, sizes, X_hold, y_hold)
            log.validation_loss.append(monitored)
        else:
            monitored = train_loss
        log.train_loss.append(train_loss)
        if not (np.isfinite(train_loss) and np.isfinite(monitored) and np.isfinite(params).all()):
            raise TrainingDivergedError(f"non-finite loss at epoch {epoch + 1}")

        if monitored > best - settings.tol:
            stale += 1
        else:
            stale = 0
        if monitored < best:
            best = monitored
            best_params = params.copy()
            log.best_epoch = epoch + 1
        if stale >= settings.early_stop_patience:
            log.stopped_early = True
            break

    return MlpParams.from_flat(best_params, arch), log
