"""Solvers for smooth convex-concave saddle problems where the primal
objective is a max over the dual block: extragradient rounds, best-response
computation by accelerated ascent, a prox subproblem solver, and the warm
start that brings an arbitrary point within the accuracy the accelerated
outer loop needs."""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import MaxStructuredObjective, QueryLedger, bregman_euclidean
from .firstorder import SmoothStronglyConvexProblem, agd


@dataclass
class MirrorProxResult:
    """The certified output is the ergodic average of the half-step
    iterates; the last full-step iterate is exposed for diagnostics only
    (on bilinear problems it can cycle without converging)."""

    x: np.ndarray
    y: np.ndarray
    x_last: np.ndarray
    y_last: np.ndarray
    rounds: int


def mirror_prox(obj: MaxStructuredObjective, x0: np.ndarray, y0: np.ndarray,
                rounds: int, step_size: Optional[float] = None,
                grad_shift_x: Optional[Callable] = None) -> MirrorProxResult:
    """Extragradient method at step 1/L: each round takes a half step, then a
    full step using the half-step gradients (two saddle gradients per round).

    The averaged half-step pair (x, y) satisfies, for every comparator pair
    (u, v) in the domain, value(x, v) - value(u, y) <=
    (L / rounds) * (V(x0, u) + V(y0, v)) with V the half squared distance.

    ``grad_shift_x`` adds a term to the x-block gradient (used to fold a
    proximal quadratic into the saddle operator without re-counting queries).
    """
    if rounds < 1:
        raise ValueError("round count must be positive")
    eta = 1.0 / obj.smoothness if step_size is None else float(step_size)
    x = np.asarray(x0, dtype=float).copy()
    y = np.asarray(y0, dtype=float).copy()
    x_acc = np.zeros_like(x)
    y_acc = np.zeros_like(y)
    for _ in range(rounds):
        gx, gy = obj.saddle_grad(x, y)
        if grad_shift_x is not None:
            gx = gx + grad_shift_x(x)
        u = obj.domain_x.project(x - eta * gx)
        w = obj.domain_y.project(y + eta * gy)
        gx, gy = obj.saddle_grad(u, w)
        if grad_shift_x is not None:
            gx = gx + grad_shift_x(u)
        x = obj.domain_x.project(x - eta * gx)
        y = obj.domain_y.project(y + eta * gy)
        x_acc += u
        y_acc += w
    return MirrorProxResult(x=x_acc / rounds, y=y_acc / rounds,
                            x_last=x, y_last=y, rounds=rounds)


def best_response(obj: MaxStructuredObjective, x: np.ndarray, y0: np.ndarray,
                  target: float, gap_bound: float) -> np.ndarray:
    """Approximate argmax over y at fixed x by accelerated ascent on the
    strongly concave dual block; one best-response event, one saddle
    gradient per ascent step."""
    if not obj.strong_concavity > 0:
        raise ValueError("best response needs strong concavity in y")
    obj.ledger.add_best_response_call()
    p = SmoothStronglyConvexProblem(
        grad=lambda y: obj.grad_y_counted(x, y),
        smoothness=obj.smoothness,
        strong_convexity=obj.strong_concavity,
        domain=obj.domain_y)
    return agd(p, y0, target, gap_bound, maximize=True)


def minimax_prox_rounds(L: float, mu: float) -> int:
    return int(math.ceil(64.0 * (L + mu) / mu))


def approx_prox_minimax(obj: MaxStructuredObjective, s: np.ndarray,
                        x_init: np.ndarray, x_prev: np.ndarray,
                        y_prev: np.ndarray, radius_bound: float,
                        exact_best_response: bool = False):
    """Approximate proximal point of F(x) = max_y f(x, y) at prox weight
    equal to the dual strong concavity mu.

    Warms the dual block to (near) the best response at ``x_prev``, then
    runs extragradient rounds from ``x_init`` on f plus the proximal
    quadratic, whose smoothness is L + mu.  Returns (x, y).
    """
    mu = obj.strong_concavity
    if not mu > 0:
        raise ValueError("prox solver needs strong concavity in y")
    L = obj.smoothness
    if exact_best_response and obj.argmax_y_oracle is not None:
        obj.ledger.add_best_response_call()
        y_init = np.asarray(obj.argmax_y_oracle(x_prev), dtype=float)
    else:
        gap = L * radius_bound
        target = 1e-14 * max(gap, 1.0) if exact_best_response else 0.5 * gap
        y_init = best_response(obj, x_prev, y_prev, target, gap)
    T = minimax_prox_rounds(L, mu)
    shifted = MaxStructuredObjective(
        value=lambda x, y: obj.value(x, y)
        + 0.5 * mu * float((x - s) @ (x - s)),
        grad_x=obj._grad_x, grad_y=obj._grad_y,
        smoothness=L + mu, strong_concavity=mu,
        domain_x=obj.domain_x, domain_y=obj.domain_y, ledger=obj.ledger)
    res = mirror_prox(shifted, x_init, y_init, T,
                      grad_shift_x=lambda x: mu * (x - s))
    return res.x, res.y


def warm_start_mirror_prox(obj: MaxStructuredObjective, x0: np.ndarray,
                           y0: np.ndarray, radius_bound: float):
    """Bring (x0, y0) to a point whose primal suboptimality is at most
    mu * radius_bound: one accelerated best response, then
    ceil(4 log2(L / mu)) + 6 epochs of extragradient rounds on f penalized
    by mu times the half squared distance to the epoch's starting x."""
    mu = obj.strong_concavity
    L = obj.smoothness
    if not mu > 0:
        raise ValueError("warm start needs strong concavity in y")
    gap = L * radius_bound
    y = best_response(obj, x0, y0, 0.5 * gap, gap)
    x = np.asarray(x0, dtype=float).copy()
    K = int(math.ceil(4.0 * math.log2(L / mu))) + 6 if L > mu else 6
    T = minimax_prox_rounds(L, mu)
    for _ in range(K):
        anchor = x.copy()
        shifted = MaxStructuredObjective(
            value=lambda xx, yy: obj.value(xx, yy)
            + 0.5 * mu * float((xx - anchor) @ (xx - anchor)),
            grad_x=obj._grad_x, grad_y=obj._grad_y,
            smoothness=L + mu, strong_concavity=mu,
            domain_x=obj.domain_x, domain_y=obj.domain_y, ledger=obj.ledger)
        res = mirror_prox(shifted, x, y, T,
                          grad_shift_x=lambda xx: mu * (xx - anchor))
        x, y = res.x, res.y
    return x, y


@contextlib.contextmanager
def scratch_ledger(obj: MaxStructuredObjective):
    """Temporarily swap in a throwaway ledger so diagnostics stay
    query-neutral."""
    saved = obj.ledger
    obj.ledger = QueryLedger()
    try:
        yield obj.ledger
    finally:
        obj.ledger = saved


def duality_gap(obj: MaxStructuredObjective, x: np.ndarray, y: np.ndarray,
                radius_bound: float = 1.0) -> float:
    """max_v f(x, v) - min_u f(u, y), using closed-form oracles when the
    instance provides them and accelerated ascent for the dual side
    otherwise.  Never perturbs the instance's query counts."""
    with scratch_ledger(obj):
        if obj.argmax_y_oracle is not None:
            y_best = np.asarray(obj.argmax_y_oracle(x), dtype=float)
        else:
            gap0 = obj.smoothness * radius_bound
            y_best = best_response(obj, x, y, 1e-12 * max(gap0, 1.0), gap0)
        upper = obj.value(x, y_best)
        if obj.argmin_x_oracle is None:
            raise ValueError(
                "duality gap needs a primal minimizer oracle for min_u f(u, y)")
        x_best = np.asarray(obj.argmin_x_oracle(y), dtype=float)
        lower = obj.value(x_best, y)
    return float(upper - lower)
