"""Compiled inner loops for variance-reduced epochs on dense instances.

Both kernels consume a pre-drawn index array so they are bit-compatible with
the generic Python path; anchor component gradients arrive precomputed."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def svrg_epoch_quadratic(H, c, grad_anchor_full, anchor_grads, lam, s,
                         x_init, eta, indices, avg_start):
    """Variance-reduced epoch on an average of quadratics plus a proximal
    term lam/2 ||x - s||^2; returns (running average from avg_start, last)."""
    T = indices.shape[0]
    d = x_init.shape[0]
    x = x_init.copy()
    acc = np.zeros(d)
    count = 0
    for t in range(T):
        i = indices[t]
        g = H[i] @ x + c[i] - anchor_grads[i] + grad_anchor_full \
            + lam * (x - s)
        x = x - eta * g
        if t + 1 > avg_start:
            acc += x
            count += 1
    if count == 0:
        return x.copy(), x
    return acc / count, x


@njit(cache=True)
def svrg_epoch_logistic(A, b, grad_anchor_full, anchor_grads, lam, s,
                        x_init, eta, indices, avg_start):
    T = indices.shape[0]
    d = x_init.shape[0]
    x = x_init.copy()
    acc = np.zeros(d)
    count = 0
    for t in range(T):
        i = indices[t]
        z = b[i] * np.dot(A[i], x)
        if z >= 0:
            e = np.exp(-z)
            sig = e / (1.0 + e)
        else:
            sig = 1.0 / (1.0 + np.exp(z))
        g = (-b[i] * sig) * A[i] - anchor_grads[i] + grad_anchor_full \
            + lam * (x - s)
        x = x - eta * g
        if t + 1 > avg_start:
            acc += x
            count += 1
    if count == 0:
        return x.copy(), x
    return acc / count, x
