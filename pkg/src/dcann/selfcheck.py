"""Fast property battery over the numerical core.

Every probe compares against a hand-computable value or a finite-difference
estimate, so a pass does not rely on anything frozen from an earlier run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import harness, kernels, logit, metrics, mlp, synthgen


@dataclass(frozen=True)
class Probe:
    name: str
    passed: bool
    detail: str


def _softmax_props() -> str:
    rng = np.random.default_rng(1)
    V = rng.normal(scale=30.0, size=(50, 4))
    P = logit.softmax(V)
    err_norm = float(np.abs(P.sum(axis=1) - 1.0).max())
    err_shift = float(np.abs(logit.softmax(V + rng.normal(scale=100.0, size=(50, 1))) - P).max())
    big = logit.softmax(np.array([1000.0, 0.0]))
    if not (err_norm < 1e-12 and err_shift < 1e-12 and np.isfinite(big).all()):
        raise AssertionError(f"normalization err {err_norm:.2e}, shift err {err_shift:.2e}")
    return f"max |sum-1| {err_norm:.1e}, max shift change {err_shift:.1e}"


def _argmax_scaling() -> str:
    rng = np.random.default_rng(2)
    V = rng.normal(size=(200, 3))
    base = np.argmax(logit.softmax(V), axis=1)
    for s in (1e-3, 0.5, 7.0, 250.0):
        if not np.array_equal(np.argmax(logit.softmax(s * V), axis=1), base):
            raise AssertionError(f"argmax changed under scaling by {s}")
    return "argmax unchanged for scales 1e-3..250"


def _central_diff(f: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> np.ndarray:
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _rel_err(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).max() / max(np.abs(a).max(), np.abs(b).max(), 1e-12))


def _logit_gradient() -> str:
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 3, size=60)
    B = rng.normal(scale=0.5, size=(2, 4))
    analytic = logit.gradient(logit.LogitParams(B), X, y)
    numeric = _central_diff(lambda b: logit.log_likelihood(logit.LogitParams(b), X, y), B, 1e-5)
    err = _rel_err(analytic, numeric)
    if not err < 1e-6:
        raise AssertionError(f"relative error {err:.2e}")
    return f"relative error {err:.1e}"


def _contingency_oracle() -> str:
    # x=0: 30 positives of 100; x=1: 60 of 100
    X = np.repeat([0.0, 1.0], 100)[:, None]
    y = np.concatenate([np.repeat([1, 0], [30, 70]), np.repeat([1, 0], [60, 40])])
    params, _ = logit.fit(X, y, 2)
    want = np.array([math.log(30 / 70), math.log(60 / 40) - math.log(30 / 70)])
    err = float(np.abs(params.coefficients[0] - want).max())
    if not err < 1e-4:
        raise AssertionError(f"coefficient error {err:.2e}")
    return f"max coefficient error {err:.1e}"


def _mlp_gradient() -> str:
    rng = np.random.default_rng(4)
    arch = mlp.Architecture((4, 6, 3, 2))
    X = rng.normal(size=(25, 4))
    y = rng.integers(0, 2, size=25)
    flat = mlp.init_params(arch, rng) + rng.normal(scale=0.1, size=arch.n_params)
    errs = []
    for name in kernels.BACKENDS:
        params = mlp.MlpParams.from_flat(flat, arch)
        _, gW, gb = mlp.loss_and_gradients(params, X, y, backend=name)
        analytic = mlp.MlpParams(gW, gb).flat()
        numeric = _central_diff(
            lambda f: mlp.loss_and_gradients(mlp.MlpParams.from_flat(f, arch), X, y, backend=name)[0],
            flat, 1e-6,
        )
        errs.append((name, _rel_err(analytic, numeric)))
    worst = max(e for _, e in errs)
    detail = ", ".join(f"{n} {e:.1e}" for n, e in errs)
    if not worst < 1e-4:
        raise AssertionError(detail)
    return detail


def _cross_entropy_values() -> str:
    cases = [
        (mlp.cross_entropy([0.5, 0.5], [0, 1]), math.log(2.0)),
        (mlp.cross_entropy([0.0, 1.0], [0, 1]), 0.0),
        (mlp.cross_entropy([0.75, 0.25], [1, 0]), -math.log(0.75)),
    ]
    err = max(abs(a - b) for a, b in cases)
    if not err < 1e-9:
        raise AssertionError(f"max error {err:.2e}")
    return "ln 2, 0, -ln 0.75"


def _metrics_oracle() -> str:
    truth = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]
    pred = [1, 1, 1, 0, 0, 1, 0, 0, 0, 0]
    s = metrics.scores(metrics.confusion(truth, pred))
    got = (s.accuracy, s.precision, s.recall, s.f1)
    want = (0.7, 0.75, 0.6, 2 * 0.75 * 0.6 / 1.35)
    if max(abs(a - b) for a, b in zip(got, want)) > 1e-12:
        raise AssertionError(f"got {got}")
    return "accuracy 0.7, precision 0.75, recall 0.6, f1 0.6667"


def _discretize_cases() -> str:
    d = synthgen.Dataset(np.array([[0.0], [0.1], [-0.11], [0.3], [-0.1]]), np.array([0, 1, 0, 1, 0]))
    got = synthgen.discretize(d).features[:, 0].tolist()
    if got != [0, 1, -1, 2, 0]:
        raise AssertionError(f"got {got}")
    return "0->0, 0.1->1, -0.11->-1"


def _counts() -> str:
    # clusters far apart: the side of the separating plane recovers the clean label
    for p in (0.5, 0.9):
        cfg = synthgen.GeneratorConfig(
            n_observations=1000, n_features=5, p_true=p, seed=11, recipe="opposite", class_sep=25.0
        )
        d = synthgen.generate(cfg)
        X, y = d.features, d.labels
        direction = X[y == 1].mean(axis=0) - X[y == 0].mean(axis=0)
        clean = (X @ direction > 0).astype(int)
        counts = (int((clean == 0).sum()), int(clean.sum()))
        if counts != cfg.class_counts:
            raise AssertionError(f"p={p}: counts {counts} != {cfg.class_counts}")
        flipped = int((clean != y).sum())
        if flipped != cfg.n_flips:
            raise AssertionError(f"p={p}: {flipped} flips, expected {cfg.n_flips}")
    return "class counts exact; 10 flips of 1000"


def _worker_invariance() -> str:
    cfg = harness.ExperimentConfig(
        generator=synthgen.GeneratorConfig(n_observations=300, n_features=6),
        p_true_grid=(0.5, 0.8),
        v_grid=(1, 6),
        repetitions=2,
        master_seed=5,
        mlp=mlp.TrainSettings(max_epochs=15),
    )
    a = [r.without_timing() for r in harness.run(cfg, jobs=1).records]
    b = [r.without_timing() for r in harness.run(cfg, jobs=2).records]
    if a != b:
        raise AssertionError("records differ between 1 and 2 workers")
    return f"{len(a)} records identical with 1 and 2 workers"


PROBES: tuple[tuple[str, Callable[[], str]], ...] = (
    ("softmax normalization and translation invariance", _softmax_props),
    ("argmax invariant under positive utility scaling", _argmax_scaling),
    ("logit gradient vs finite differences", _logit_gradient),
    ("logit MLE vs 2x2 contingency log-odds", _contingency_oracle),
    ("MLP backprop vs finite differences", _mlp_gradient),
    ("cross-entropy reference values", _cross_entropy_values),
    ("metrics hand-computed case", _metrics_oracle),
    ("discretize floor cases", _discretize_cases),
    ("exact class and flip counts", _counts),
    ("identical records regardless of worker count", _worker_invariance),
)


def run_all() -> list[Probe]:
    out = []
    for name, fn in PROBES:
        try:
            out.append(Probe(name, True, fn()))
        except Exception as exc:  # a crashing probe is a failed probe
            out.append(Probe(name, False, f"{type(exc).__name__}: {exc}"))
    return out
