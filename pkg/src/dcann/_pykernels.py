"""Pure numpy MLP kernels; same signatures as the compiled ``_ckernels``.

Parameters live in one flat float64 vector. For each layer pair ``k`` the
``fan_in x fan_out`` weight matrix (row-major) is followed by its bias.
"""

import numpy as np

P_MIN = 1e-12
P_MAX = 1.0 - 1e-12


def layout(sizes):
    w_off, b_off = [], []
    pos = 0
    for k in range(len(sizes) - 1):
        w_off.append(pos)
        pos += sizes[k] * sizes[k + 1]
        b_off.append(pos)
        pos += sizes[k + 1]
    return w_off, b_off, pos


def unpack(flat, sizes):
    """Views (not copies) of the weight matrices and biases inside ``flat``."""
    w_off, b_off, _ = layout(sizes)
    Ws, bs = [], []
    for k in range(len(sizes) - 1):
        Ws.append(flat[w_off[k]:w_off[k] + sizes[k] * sizes[k + 1]].reshape(sizes[k], sizes[k + 1]))
        bs.append(flat[b_off[k]:b_off[k] + sizes[k + 1]])
    return Ws, bs


def _check(params, sizes, X):
    total = layout(sizes)[2]
    if params.shape[0] != total:
        raise ValueError(f"parameter vector has length {params.shape[0]}, layout needs {total}")
    if X.shape[1] != sizes[0]:
        raise ValueError(f"input has {X.shape[1]} columns, network expects {sizes[0]}")


def _forward(Ws, bs, X):
    acts = [X]
    o = X
    last = len(Ws) - 1
    for k, (W, b) in enumerate(zip(Ws, bs)):
        t = o @ W + b
        o = t if k == last else np.maximum(t, 0.0)
        acts.append(o)
    z = o - o.max(axis=1, keepdims=True)
    e = np.exp(z)
    return acts, e / e.sum(axis=1, keepdims=True)


def _sample_losses(P, y):
    return -np.log(np.clip(P[np.arange(len(y)), y], P_MIN, P_MAX))


def _backward(Ws, acts, P, y, gWs, gbs):
    n = len(y)
    delta = P.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    for k in range(len(Ws) - 1, -1, -1):
        gWs[k][...] = acts[k].T @ delta
        gbs[k][...] = delta.sum(axis=0)
        if k:
            delta = (delta @ Ws[k].T) * (acts[k] > 0.0)


def predict_proba(params, sizes, X):
    _check(params, sizes, X)
    Ws, bs = unpack(params, sizes)
    return _forward(Ws, bs, np.asarray(X, dtype=float))[1]


def mean_loss(params, sizes, X, y):
    return float(_sample_losses(predict_proba(params, sizes, X), y).mean())


def loss_and_grad(params, sizes, X, y, grad):
    """Mean cross-entropy over the rows of ``X``; writes the mean gradient into ``grad``."""
    _check(params, sizes, X)
    Ws, bs = unpack(params, sizes)
    gWs, gbs = unpack(grad, sizes)
    acts, P = _forward(Ws, bs, X)
    _backward(Ws, acts, P, y, gWs, gbs)
    return float(_sample_losses(P, y).mean())


def train_epoch(params, m, v, grad, sizes, X, y, order, batch_size,
                lr, beta1, beta2, eps, step):
    """One pass of mini-batch Adam over ``order``; updates in place.

    Returns ``(step, loss_sum)`` where ``loss_sum`` adds up the per-sample
    losses seen during the pass, each evaluated before its batch's update.
    """
    _check(params, sizes, X)
    Ws, bs = unpack(params, sizes)
    gWs, gbs = unpack(grad, sizes)
    loss_sum = 0.0
    n = len(order)
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        yb = y[idx]
        acts, P = _forward(Ws, bs, X[idx])
        loss_sum += float(_sample_losses(P, yb).sum())
        _backward(Ws, acts, P, yb, gWs, gbs)
        step += 1
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        lr_t = lr * np.sqrt(1.0 - beta2**step) / (1.0 - beta1**step)
        params -= lr_t * m / (np.sqrt(v) + eps)
    return step, loss_sum
