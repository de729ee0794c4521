"""Multinomial logit classifier fitted by Newton-Raphson maximum likelihood.

Alternative 0 is the base: its utility is fixed at zero. Every other
alternative ``y`` has a coefficient row ``beta_y = [intercept, slopes...]``
and observed utility ``V_y = beta_y . [1, x]``. Choice probabilities are the
softmax of the utilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LogitFitError(RuntimeError):
    pass


def softmax(v: np.ndarray) -> np.ndarray:
    """Row-wise softmax in max-subtracted form."""
    v = np.asarray(v, dtype=float)
    z = v - v.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    z = v - v.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


@dataclass(frozen=True, eq=False)
class LogitParams:
    """Coefficients for the ``m - 1`` non-base alternatives.

    ``coefficients`` has shape ``(m - 1, d + 1)``; column 0 is the intercept.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        B = np.array(self.coefficients, dtype=float, ndmin=2)
        if B.ndim != 2 or B.shape[1] < 1:
            raise ValueError("coefficients must be an (m-1) x (d+1) matrix")
        B.flags.writeable = False
        object.__setattr__(self, "coefficients", B)

    @classmethod
    def zeros(cls, n_alternatives: int, n_features: int) -> "LogitParams":
        if n_alternatives < 2:
            raise ValueError("a choice model needs at least two alternatives")
        return cls(np.zeros((n_alternatives - 1, n_features + 1)))

    @property
    def n_alternatives(self) -> int:
        return self.coefficients.shape[0] + 1

    @property
    def n_features(self) -> int:
        return self.coefficients.shape[1] - 1

    def to_dict(self) -> dict:
        return {
            "n_alternatives": self.n_alternatives,
            "n_features": self.n_features,
            "coefficients": self.coefficients.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LogitParams":
        return cls(np.asarray(payload["coefficients"], dtype=float))


@dataclass(frozen=True)
class FitReport:
    final_log_likelihood: float
    n_iterations: int
    gradient_norm: float
    converged: bool
    separable_flag: bool
    ridge: float = 0.0


def _design(params: LogitParams, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != params.n_features:
        raise ValueError(
            f"expected {params.n_features} features per observation, got shape {X.shape}"
        )
    return np.hstack([np.ones((X.shape[0], 1)), X])


def utilities(params: LogitParams, X) -> np.ndarray:
    """Observed utilities, shape (n, m); column 0 is the base alternative."""
    Z = _design(params, X)
    V = np.zeros((Z.shape[0], params.n_alternatives))
    V[:, 1:] = Z @ params.coefficients.T
    return V


def choice_probabilities(params: LogitParams, x) -> np.ndarray:
    """Probability of each alternative; 1-D in, 1-D out; 2-D in, one row per observation."""
    P = softmax(utilities(params, x))
    return P[0] if np.ndim(x) == 1 else P


def _check_labels(y, n_rows: int, m: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n_rows:
        raise ValueError("labels must be a vector with one entry per observation")
    if n_rows == 0:
        raise ValueError("no observations")
    yi = y.astype(np.int64)
    if not np.array_equal(yi, y) or yi.min() < 0 or yi.max() >= m:
        raise ValueError(f"labels must be integers in [0, {m})")
    return yi


def log_likelihood(params: LogitParams, X, y) -> float:
    """Sum over observations of the log-probability of the chosen alternative."""
    V = utilities(params, X)
    yi = _check_labels(y, V.shape[0], params.n_alternatives)
    return float(log_softmax(V)[np.arange(len(yi)), yi].sum())


def gradient(params: LogitParams, X, y) -> np.ndarray:
    """d log_likelihood / d coefficients, same shape as the coefficients."""
    Z = _design(params, X)
    P = softmax(utilities(params, X))
    yi = _check_labels(y, Z.shape[0], params.n_alternatives)
    resid = -P[:, 1:]
    resid[np.arange(len(yi)), yi - 1] += (yi > 0)
    return resid.T @ Z


def hessian(params: LogitParams, X) -> np.ndarray:
    """Hessian of the log-likelihood w.r.t. the flattened coefficients (row-major)."""
    Z = _design(params, X)
    P = softmax(utilities(params, X))[:, 1:]
    k = P.shape[1]
    p = Z.shape[1]
    H = np.empty((k * p, k * p))
    for a in range(k):
        for b in range(a, k):
            w = P[:, a] * ((a == b) - P[:, b])
            block = -(Z * w[:, None]).T @ Z
            H[a * p:(a + 1) * p, b * p:(b + 1) * p] = block
            H[b * p:(b + 1) * p, a * p:(a + 1) * p] = block.T
    return H


def _perfect_fit(params: LogitParams, X, yi, tol: float = 1e-8) -> bool:
    P = softmax(utilities(params, X))
    return bool((1.0 - P[np.arange(len(yi)), yi]).max() < tol)


def fit(
    X,
    y,
    n_alternatives: int | None = None,
    *,
    gtol: float = 1e-8,
    ftol: float = 1e-10,
    max_iter: int = 100,
    separation_threshold: float = 1e3,
    ridge: float = 1e-6,
    max_halvings: int = 50,
    max_polish: int = 5,
) -> tuple[LogitParams, FitReport]:
    """Maximum-likelihood coefficients by damped Newton-Raphson.

    Converged means the gradient max-norm dropped below ``gtol``. Once the
    relative change of the objective falls below ``ftol`` only
    ``max_polish`` further steps are attempted. If any coefficient exceeds
    ``separation_threshold`` in magnitude, or the unpenalized fit reproduces
    every label with probability above ``1 - 1e-8``, the data is treated as
    separable: an L2 penalty ``ridge/2 * ||beta||^2`` is switched on and
    ``separable_flag`` is set.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    y_arr = np.asarray(y)
    m = int(n_alternatives) if n_alternatives is not None else int(y_arr.max()) + 1
    m = max(m, 2)
    yi = _check_labels(y_arr, X.shape[0], m)
    if len(np.unique(yi)) < 2:
        raise ValueError("training data contains a single class")

    params = LogitParams.zeros(m, X.shape[1])
    lam = 0.0
    separable = False

    def objective(p: LogitParams) -> float:
        return log_likelihood(p, X, yi) - 0.5 * lam * float(np.sum(p.coefficients**2))

    f = objective(params)
    converged = False
    polish = 0
    it = 0
    while True:
        g = gradient(params, X, yi) - lam * params.coefficients
        gnorm = float(np.abs(g).max())
        if gnorm < gtol:
            if not separable and _perfect_fit(params, X, yi):
                # complete separation: the likelihood saturates long before any
                # coefficient reaches the threshold, so penalize and go on
                separable = True
                lam = ridge
                f = objective(params)
                continue
            converged = True
            break
        if it >= max_iter or polish > max_polish:
            break
        it += 1
        H = hessian(params, X)
        if lam:
            H -= lam * np.eye(H.shape[0])
        try:
            step = np.linalg.solve(-H, g.ravel())
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(-H, g.ravel(), rcond=None)[0]
        step = step.reshape(g.shape)

        t = 1.0
        for _ in range(max_halvings):
            trial = LogitParams(params.coefficients + t * step)
            f_trial = objective(trial)
            if np.isfinite(f_trial) and f_trial >= f:
                break
            t *= 0.5
        else:
            # no ascent left along the Newton direction at machine precision
            break

        f_prev, f, params = f, f_trial, trial
        if not np.isfinite(f):
            raise LogitFitError("log-likelihood became non-finite")
        if not separable and np.abs(params.coefficients).max() > separation_threshold:
            separable = True
            lam = ridge
            f = objective(params)
            continue
        if abs(f - f_prev) <= ftol * max(abs(f_prev), 1e-300):
            # objective has settled; a few more Newton steps drive the gradient under gtol
            polish += 1

    if not np.isfinite(f):
        raise LogitFitError("log-likelihood is non-finite")
    report = FitReport(
        final_log_likelihood=log_likelihood(params, X, yi),
        n_iterations=it,
        gradient_norm=gnorm,
        converged=converged,
        separable_flag=separable,
        ridge=lam,
    )
    return params, report


def predict(params: LogitParams, x) -> tuple[int | np.ndarray, np.ndarray]:
    """Most probable alternative; ties go to the lower index."""
    P = choice_probabilities(params, x)
    return (int(np.argmax(P)) if P.ndim == 1 else np.argmax(P, axis=1)), P
