"""Variance-reduced stochastic gradient epochs for finite sums, and the
composite solvers built from them: the approximate prox solver, the
multi-epoch warm start, and the plain variance-reduced baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import FiniteSumObjective, Unconstrained
from .problems import LogisticFiniteSum, QuadraticFiniteSum


@dataclass(frozen=True)
class SvrgEpochConfig:
    eta: float
    iters: int
    average_window: str = "all"  # "all" or "last_half"

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("step size must be positive")
        if self.iters < 1:
            raise ValueError("iteration count must be positive")
        if self.average_window not in ("all", "last_half"):
            raise ValueError("average_window must be 'all' or 'last_half'")


def svrg_gradient_estimator(obj: FiniteSumObjective, i: int, x: np.ndarray,
                            x_full: np.ndarray, grad_full: np.ndarray,
                            lam: float, s: np.ndarray,
                            anchor_grad_i: Optional[np.ndarray] = None) -> np.ndarray:
    """Single variance-reduced gradient of the prox-regularized objective:
    component gradient at x, re-centered at the anchor's full gradient, plus
    the proximal term.  Charges two component gradients unless the anchor
    component gradient is supplied from a cache (still charged once)."""
    g = obj.grad_i(i, x)
    if anchor_grad_i is None:
        anchor_grad_i = obj.grad_i(i, x_full)
    else:
        obj.ledger.add_component_grads(1)
    return g - anchor_grad_i + grad_full + lam * (x - s)


def _try_kernel(obj, grad_full, anchor_grads, lam, s, x_init, eta,
                indices, avg_start):
    if not isinstance(obj.domain, Unconstrained):
        return None
    from . import _kernels
    if isinstance(obj, QuadraticFiniteSum):
        return _kernels.svrg_epoch_quadratic(
            obj.H, obj.c, grad_full, anchor_grads, lam, s, x_init, eta,
            indices, avg_start)
    if isinstance(obj, LogisticFiniteSum):
        return _kernels.svrg_epoch_logistic(
            obj.A, obj.b, grad_full, anchor_grads, lam, s, x_init, eta,
            indices, avg_start)
    return None


def one_epoch_svrg(obj: FiniteSumObjective, lam: float, s: np.ndarray,
                   x_full: np.ndarray, x_init: np.ndarray,
                   cfg: SvrgEpochConfig, rng: np.random.Generator,
                   return_last: bool = False):
    """One variance-reduced epoch on F + lam/2 ||. - s||^2 (lam = 0 gives the
    unregularized objective).

    Anchors the gradient estimator at ``x_full`` (one full gradient, n
    component queries) then runs ``cfg.iters`` stochastic steps; each step is
    charged two component gradients even though the anchor side is cached.
    Returns the iterate average over the configured window, or
    (average, last iterate) when ``return_last`` is set.
    """
    s = np.asarray(s, dtype=float)
    x_full = np.asarray(x_full, dtype=float)
    x_init = np.asarray(x_init, dtype=float)
    T = cfg.iters
    grad_full = obj.grad(x_full)
    anchor_grads = obj.component_grads_at(x_full)
    indices = rng.integers(obj.n, size=T)
    obj.ledger.add_component_grads(2 * T)
    avg_start = T // 2 if cfg.average_window == "last_half" else 0

    out = _try_kernel(obj, grad_full, anchor_grads, lam, s, x_init,
                      cfg.eta, indices, avg_start)
    if out is None:
        x = x_init.copy()
        acc = np.zeros_like(x)
        count = 0
        for t in range(T):
            i = int(indices[t])
            g = (np.asarray(obj.component_gradient(i, x), dtype=float)
                 - anchor_grads[i] + grad_full + lam * (x - s))
            x = obj.domain.project(x - cfg.eta * g)
            if t + 1 > avg_start:
                acc += x
                count += 1
        avg = x.copy() if count == 0 else acc / count
        out = (avg, x)
    avg, last = out
    return (avg, last) if return_last else avg


def approx_prox_svrg_config(obj: FiniteSumObjective, lam: float) -> SvrgEpochConfig:
    if not 0 < lam <= obj.smoothness:
        raise ValueError("prox parameter must lie in (0, smoothness]")
    eta = 1.0 / (32.0 * obj.smoothness)
    return SvrgEpochConfig(eta=eta, iters=int(math.ceil(32.0 / (eta * lam))))


def approx_prox_svrg(obj: FiniteSumObjective, lam: float, s: np.ndarray,
                     x_init: np.ndarray, x_prev: np.ndarray,
                     rng: np.random.Generator,
                     return_last: bool = False):
    """One-epoch approximate proximal-point solve at fixed step and length.

    Anchored at ``x_prev``; accuracy improves with both a warmer ``x_init``
    and a warmer anchor, which is exactly the contract the outer accelerated
    loop and the multilevel estimator rely on.
    """
    cfg = approx_prox_svrg_config(obj, lam)
    return one_epoch_svrg(obj, lam, s, x_prev, x_init, cfg, rng,
                          return_last=return_last)


def warm_start_svrg(obj: FiniteSumObjective, x_init: np.ndarray,
                    rng: np.random.Generator, epoch_hook=None) -> np.ndarray:
    """Multi-epoch run whose output is accurate enough to start the
    accelerated outer loop: K = ceil(log2 log2 n) epochs (at least one) of
    32 n steps with a step size that shrinks as n^{2^{-k-1}}."""
    n, L = obj.n, obj.smoothness
    K = max(1, int(math.ceil(math.log2(max(1.0, math.log2(max(2, n)))))))
    x = np.asarray(x_init, dtype=float)
    zero = np.zeros_like(x)
    for k in range(K):
        eta = 1.0 / (8.0 * L * n ** (2.0 ** (-k - 1)))
        cfg = SvrgEpochConfig(eta=eta, iters=32 * n)
        x = one_epoch_svrg(obj, 0.0, zero, x, x, cfg, rng)
        if epoch_hook is not None:
            epoch_hook(k, x)
    return x


def plain_svrg(obj: FiniteSumObjective, x_init: np.ndarray, epochs: int,
               rng: np.random.Generator, trace_hook=None,
               budget: Optional[int] = None) -> np.ndarray:
    """Baseline variance-reduced method: epochs of 2n steps at step 1/L,
    advancing to the average of the last half of each epoch."""
    x = np.asarray(x_init, dtype=float)
    zero = np.zeros_like(x)
    cfg = SvrgEpochConfig(eta=1.0 / obj.smoothness, iters=2 * obj.n,
                          average_window="last_half")
    for k in range(epochs):
        if budget is not None and obj.ledger.component_grads >= budget:
            break
        x = one_epoch_svrg(obj, 0.0, zero, x, x, cfg, rng)
        if trace_hook is not None:
            trace_hook(k + 1, x)
    return x
