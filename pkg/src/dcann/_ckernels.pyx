# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled MLP kernels. Mirrors ``_pykernels`` function by function.

Each mini-batch is gathered into a contiguous buffer and pushed through the
layers with BLAS ``dgemm`` calls made directly from C, so an epoch never
returns to the interpreter. Arrays are row-major; a row-major ``r x c``
buffer is handed to BLAS as the column-major ``c x r`` transpose.
"""

import numpy as np

from libc.math cimport exp, log, pow, sqrt
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy, memset
from scipy.linalg.cython_blas cimport dgemm

cdef double P_MIN = 1e-12
cdef double P_MAX = 1.0 - 1e-12
cdef Py_ssize_t EVAL_CHUNK = 512


def layout(sizes):
    w_off, b_off = [], []
    pos = 0
    for k in range(len(sizes) - 1):
        w_off.append(pos)
        pos += sizes[k] * sizes[k + 1]
        b_off.append(pos)
        pos += sizes[k + 1]
    return w_off, b_off, pos


cdef struct Net:
    int n_layers
    int *sizes
    Py_ssize_t *w_off
    Py_ssize_t *b_off
    int cap                  # rows the buffers can hold
    int widest
    double **act             # act[k]: cap x sizes[k]; act[L-1] holds logits
    double *delta
    double *delta_prev


cdef int net_init(Net *net, sizes, Py_ssize_t cap) except -1:
    cdef int L = len(sizes), k
    cdef Py_ssize_t pos = 0
    if L < 2:
        raise ValueError("need at least an input and an output layer")
    if cap < 1:
        cap = 1
    net.n_layers = L
    net.cap = <int> cap
    net.sizes = <int *> malloc(L * sizeof(int))
    net.w_off = <Py_ssize_t *> malloc(L * sizeof(Py_ssize_t))
    net.b_off = <Py_ssize_t *> malloc(L * sizeof(Py_ssize_t))
    net.act = <double **> malloc(L * sizeof(double *))
    net.widest = 0
    for k in range(L):
        net.sizes[k] = sizes[k]
        net.act[k] = <double *> malloc(cap * net.sizes[k] * sizeof(double))
        if net.sizes[k] > net.widest:
            net.widest = net.sizes[k]
    for k in range(L - 1):
        net.w_off[k] = pos
        pos += net.sizes[k] * net.sizes[k + 1]
        net.b_off[k] = pos
        pos += net.sizes[k + 1]
    net.delta = <double *> malloc(cap * net.widest * sizeof(double))
    net.delta_prev = <double *> malloc(cap * net.widest * sizeof(double))
    return 0


cdef void net_free(Net *net) noexcept:
    cdef int k
    for k in range(net.n_layers):
        free(net.act[k])
    free(net.act)
    free(net.sizes)
    free(net.w_off)
    free(net.b_off)
    free(net.delta)
    free(net.delta_prev)


cdef void gather(Net *net, const double[:, ::1] X, const Py_ssize_t *rows, int nb) noexcept nogil:
    cdef int r, fi = net.sizes[0]
    for r in range(nb):
        memcpy(net.act[0] + r * fi, &X[rows[r], 0], fi * sizeof(double))


cdef void forward_batch(Net *net, const double *p, int nb) noexcept nogil:
    """act[0] must hold the inputs; fills every later layer, last one with logits."""
    cdef int L = net.n_layers, k, r, j, fi, fo
    cdef double one = 1.0
    cdef double *out
    cdef char nn = b'N'
    for k in range(L - 1):
        fi = net.sizes[k]
        fo = net.sizes[k + 1]
        out = net.act[k + 1]
        for r in range(nb):
            memcpy(out + r * fo, p + net.b_off[k], fo * sizeof(double))
        dgemm(&nn, &nn, &fo, &nb, &fi, &one, <double *> (p + net.w_off[k]), &fo,
              net.act[k], &fi, &one, out, &fo)
        if k < L - 2:
            for r in range(nb * fo):
                if out[r] < 0.0:
                    out[r] = 0.0


cdef double softmax_rows(Net *net, int nb, double *prob, const Py_ssize_t *labels,
                         const Py_ssize_t *rows) noexcept nogil:
    """Row-wise softmax of the logits into ``prob``; returns the summed loss if labels given."""
    cdef int m = net.sizes[net.n_layers - 1], r, j
    cdef double *z
    cdef double mx, s, pl, total = 0.0
    cdef Py_ssize_t lab
    for r in range(nb):
        z = net.act[net.n_layers - 1] + r * m
        mx = z[0]
        for j in range(1, m):
            if z[j] > mx:
                mx = z[j]
        s = 0.0
        for j in range(m):
            prob[r * m + j] = exp(z[j] - mx)
            s += prob[r * m + j]
        for j in range(m):
            prob[r * m + j] /= s
        if labels != NULL:
            lab = labels[rows[r]] if rows != NULL else labels[r]
            pl = prob[r * m + lab]
            if pl < P_MIN:
                pl = P_MIN
            elif pl > P_MAX:
                pl = P_MAX
            total -= log(pl)
    return total


cdef void backward_batch(Net *net, const double *p, double *g, const double *prob,
                         const Py_ssize_t *labels, const Py_ssize_t *rows, int nb) noexcept nogil:
    """Mean gradient over the batch into ``g`` (overwritten)."""
    cdef int L = net.n_layers, k, r, j, fi, fo
    cdef int m = net.sizes[L - 1]
    cdef double scale = 1.0 / nb, zero = 0.0, one = 1.0
    cdef double *delta = net.delta
    cdef double *prev = net.delta_prev
    cdef double *tmp
    cdef double *inp
    cdef double *gb
    cdef double acc
    cdef Py_ssize_t lab
    cdef char nn = b'N'
    cdef char tt = b'T'
    for r in range(nb):
        lab = labels[rows[r]] if rows != NULL else labels[r]
        for j in range(m):
            delta[r * m + j] = prob[r * m + j] * scale
        delta[r * m + lab] -= scale
    for k in range(L - 2, -1, -1):
        fi = net.sizes[k]
        fo = net.sizes[k + 1]
        inp = net.act[k]
        gb = g + net.b_off[k]
        for j in range(fo):
            acc = 0.0
            for r in range(nb):
                acc += delta[r * fo + j]
            gb[j] = acc
        # grad W (fi x fo, row-major) = inp^T @ delta
        dgemm(&nn, &tt, &fo, &fi, &nb, &one, delta, &fo, inp, &fi, &zero,
              g + net.w_off[k], &fo)
        if k > 0:
            # prev (nb x fi) = delta @ W^T, masked by the ReLU derivative
            dgemm(&tt, &nn, &fi, &nb, &fo, &one, <double *> (p + net.w_off[k]), &fo,
                  delta, &fo, &zero, prev, &fi)
            for r in range(nb * fi):
                if inp[r] <= 0.0:
                    prev[r] = 0.0
            tmp = delta
            delta = prev
            prev = tmp


cdef void adam_update(double *p, double *m, double *v, const double *g, Py_ssize_t n,
                      double lr_t, double beta1, double beta2, double eps) noexcept nogil:
    cdef Py_ssize_t i
    cdef double gi
    for i in range(n):
        gi = g[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi
        p[i] -= lr_t * m[i] / (sqrt(v[i]) + eps)


def _check(params, sizes, X):
    _, _, total = layout(sizes)
    if params.shape[0] != total:
        raise ValueError(f"parameter vector has length {params.shape[0]}, layout needs {total}")
    if X.shape[1] != sizes[0]:
        raise ValueError(f"input has {X.shape[1]} columns, network expects {sizes[0]}")


def predict_proba(double[::1] params, sizes, const double[:, ::1] X):
    _check(params, sizes, X)
    cdef Net net
    cdef Py_ssize_t n = X.shape[0], start
    cdef int nb, m = sizes[len(sizes) - 1], fi = sizes[0]
    out = np.empty((n, m))
    cdef double[:, ::1] P = out
    if n == 0:
        return out
    net_init(&net, sizes, min(n, EVAL_CHUNK))
    try:
        with nogil:
            start = 0
            while start < n:
                nb = <int> min(n - start, EVAL_CHUNK)
                memcpy(net.act[0], &X[start, 0], nb * fi * sizeof(double))
                forward_batch(&net, &params[0], nb)
                softmax_rows(&net, nb, &P[start, 0], NULL, NULL)
                start += nb
    finally:
        net_free(&net)
    return out


def mean_loss(double[::1] params, sizes, const double[:, ::1] X, const Py_ssize_t[::1] y):
    _check(params, sizes, X)
    cdef Net net
    cdef Py_ssize_t n = X.shape[0], start
    cdef int nb, m = sizes[len(sizes) - 1], fi = sizes[0]
    cdef double total = 0.0
    cdef double *prob = <double *> malloc(min(n, EVAL_CHUNK) * m * sizeof(double))
    net_init(&net, sizes, min(n, EVAL_CHUNK))
    try:
        with nogil:
            start = 0
            while start < n:
                nb = <int> min(n - start, EVAL_CHUNK)
                memcpy(net.act[0], &X[start, 0], nb * fi * sizeof(double))
                forward_batch(&net, &params[0], nb)
                total += softmax_rows(&net, nb, prob, &y[start], NULL)
                start += nb
    finally:
        net_free(&net)
        free(prob)
    return total / n


def loss_and_grad(double[::1] params, sizes, const double[:, ::1] X,
                  const Py_ssize_t[::1] y, double[::1] grad):
    """Mean loss over all rows of ``X`` and the mean gradient (one batch)."""
    _check(params, sizes, X)
    cdef Net net
    cdef Py_ssize_t n = X.shape[0]
    cdef int nb = <int> n, m = sizes[len(sizes) - 1], fi = sizes[0]
    cdef double total
    cdef double *prob = <double *> malloc(n * m * sizeof(double))
    net_init(&net, sizes, n)
    try:
        with nogil:
            memcpy(net.act[0], &X[0, 0], n * fi * sizeof(double))
            forward_batch(&net, &params[0], nb)
            total = softmax_rows(&net, nb, prob, &y[0], NULL)
            backward_batch(&net, &params[0], &grad[0], prob, &y[0], NULL, nb)
    finally:
        net_free(&net)
        free(prob)
    return total / n


def train_epoch(double[::1] params, double[::1] m, double[::1] v, double[::1] grad, sizes,
                const double[:, ::1] X, const Py_ssize_t[::1] y, const Py_ssize_t[::1] order,
                Py_ssize_t batch_size, double lr, double beta1, double beta2, double eps,
                long long step):
    _check(params, sizes, X)
    cdef Net net
    cdef Py_ssize_t n = order.shape[0], total_len = params.shape[0], start
    cdef int nb, n_out = sizes[len(sizes) - 1]
    cdef double loss_sum = 0.0, lr_t
    cdef double *prob = <double *> malloc(batch_size * n_out * sizeof(double))
    net_init(&net, sizes, batch_size)
    try:
        with nogil:
            start = 0
            while start < n:
                nb = <int> min(n - start, batch_size)
                gather(&net, X, &order[start], nb)
                forward_batch(&net, &params[0], nb)
                loss_sum += softmax_rows(&net, nb, prob, &y[0], &order[start])
                backward_batch(&net, &params[0], &grad[0], prob, &y[0], &order[start], nb)
                step += 1
                lr_t = lr * sqrt(1.0 - pow(beta2, <double> step)) / (1.0 - pow(beta1, <double> step))
                adam_update(&params[0], &m[0], &v[0], &grad[0], total_len, lr_t, beta1, beta2, eps)
                start += nb
    finally:
        net_free(&net)
        free(prob)
    return step, loss_sum
